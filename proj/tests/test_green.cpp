#include <gtest/gtest.h>

#include <random>

#include "lel/grid2d.hpp"
#include "lel/kirchhoff_routh.hpp"

using namespace lel;

namespace {

Point random_in_disk(std::mt19937_64& rng, double rmax) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double r = rmax * std::sqrt(u(rng)), t = 2 * pi * u(rng);
    return {r * std::cos(t), r * std::sin(t)};
}

// Direct image-charge evaluation, written independently of the library.
double disk_green_oracle(Point x, Point y) {
    if (norm(y) == 0.0) return -std::log(norm(x)) / (2 * pi);
    const Point ystar = y / norm2(y);
    return std::log(norm(y) * distance(x, ystar) / distance(x, y)) / (2 * pi);
}

const GreenModel& numeric_disk() {
    static const GreenModel m = GreenModel::numeric(DomainSpec::unit_disk(), 1.0 / 256);
    return m;
}

}  // namespace

TEST(Grid, DiskNodeCount) {
    const auto g = build_grid(DomainSpec::unit_disk(), 1.0 / 64);
    const double expect = pi * 64 * 64;
    EXPECT_NEAR(g.size() / expect, 1.0, 0.02);
}

TEST(Grid, SquareNodeCountAndRowSums) {
    const auto g = build_grid(DomainSpec::rectangle(1.0, 1.0), 1.0 / 64);
    EXPECT_EQ(g.size(), 63 * 63);
    const int c = g.index_at(0, 0);
    ASSERT_GE(c, 0);
    double s = 0.0;
    for (const auto& [k, w] : g.row(c).cols) s += w;
    EXPECT_NEAR(s, 0.0, 1e-9);
    EXPECT_EQ(g.row(c).cols.size(), 5u);
}

TEST(Grid, RejectsCoarseSpacing) {
    EXPECT_THROW(build_grid(DomainSpec::unit_disk(), 0.2), Error);
}

TEST(Grid, RefinedLaplacianIsSecondOrderOnQuadratics) {
    // the composite stencil reproduces Delta(x^2 + 3y^2) = 8 away from curved arms
    const auto g = build_grid(DomainSpec::unit_disk(), 1.0 / 32, {{-0.25, -0.25, 0.25, 0.25}});
    auto f = [](const Point& p) { return p.x * p.x + 3 * p.y * p.y; };
    const auto L = g.laplacian();
    const Eigen::VectorXd lap = L * g.sample(f) + g.boundary_term(f);
    for (int i = 0; i < g.size(); ++i) EXPECT_NEAR(lap[i], 8.0, 1e-8) << i;
}

TEST(Green, DiskValues) {
    const auto m = GreenModel::analytic(DomainSpec::unit_disk());
    EXPECT_NEAR(m.green({0.5, 0}, {0, 0}).value, -std::log(0.5) / (2 * pi), 1e-14);
    EXPECT_NEAR(m.green({0.5, 0}, {0, 0}).value, 0.110318, 1e-6);
    EXPECT_NEAR(m.robin({0, 0}).value, 0.0, 1e-15);
    EXPECT_NEAR(m.robin({0.5, 0}).value, -std::log(0.75) / (2 * pi), 1e-15);
    EXPECT_NEAR(m.robin({0.5, 0}).value, 0.0457869, 1e-6);  // printed figure carries a rounding slip
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        const Point x = random_in_disk(rng, 0.99), y = random_in_disk(rng, 0.99);
        EXPECT_NEAR(m.green(x, y).value, disk_green_oracle(x, y), 1e-12);
        EXPECT_GT(m.green(x, y).value, 0.0);
    }
    EXPECT_THROW(m.green({0.2, 0}, {0.2, 0}), Error);
    EXPECT_THROW(m.green({1.2, 0}, {0.2, 0}), Error);
    EXPECT_THROW(m.robin({1.0, 0}), Error);
}

TEST(Green, AnalyticSymmetryAndGradient) {
    const auto m = GreenModel::analytic(DomainSpec::unit_disk());
    std::mt19937_64 rng(5);
    for (int i = 0; i < 50; ++i) {
        const Point x = random_in_disk(rng, 0.95), y = random_in_disk(rng, 0.95);
        EXPECT_NEAR(m.green(x, y).value, m.green(y, x).value, 1e-10);
        const double h = 1e-6;
        const double gx = (m.green(x + Point{h, 0}, y).value - m.green(x - Point{h, 0}, y).value) / (2 * h);
        EXPECT_NEAR(gx, m.green(x, y).grad.x, 1e-6 * (1 + std::abs(gx)));
    }
}

TEST(Green, BoundaryDecayAlongRay) {
    const auto m = GreenModel::analytic(DomainSpec::unit_disk());
    std::vector<double> vals;
    for (double t : {0.9, 0.95, 0.99, 0.999, 0.9999}) vals.push_back(m.green({t * 0.6, t * 0.8}, {0.1, -0.2}).value);
    for (std::size_t i = 1; i < vals.size(); ++i) EXPECT_LT(vals[i], vals[i - 1]);
    EXPECT_LT(vals.back(), 1e-4);
}

TEST(Green, ScaledDisk) {
    const auto m = GreenModel::analytic(DomainSpec::scaled_disk({1.0, -2.0}, 2.0));
    const auto u = GreenModel::analytic(DomainSpec::unit_disk());
    const Point x{1.4, -1.0}, y{0.5, -2.5};
    EXPECT_NEAR(m.green(x, y).value, u.green({0.2, 0.5}, {-0.25, -0.25}).value, 1e-13);
    EXPECT_NEAR(m.robin(x).value, u.robin({0.2, 0.5}).value - std::log(2.0) / (2 * pi), 1e-13);
}

TEST(Green, NumericMatchesDiskFormula) {
    const auto& n = numeric_disk();
    EXPECT_NEAR(n.green({0.5, 0}, {0, 0}).value, 0.110318, 1e-4);
    std::mt19937_64 rng(11);
    for (int i = 0; i < 50; ++i) {
        const Point x = random_in_disk(rng, 0.8), y = random_in_disk(rng, 0.8);
        if (distance(x, y) < 0.05) continue;
        EXPECT_NEAR(n.green(x, y).value, n.green(y, x).value, 1e-4);
        EXPECT_NEAR(n.green(x, y).value, disk_green_oracle(x, y), 1e-4);
    }
}

TEST(Robin, NumericMatchesAnalyticOnDisk) {
    const auto& n = numeric_disk();
    const auto a = GreenModel::analytic(DomainSpec::unit_disk());
    std::mt19937_64 rng(13);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const Point x = random_in_disk(rng, 0.8);
        const auto rn = n.numeric_state()->regular(n.numeric_state()->stencil(x), x, x).value;
        worst = std::max(worst, std::abs(rn - a.robin(x).value));
    }
    EXPECT_LE(worst, 1e-4);
    const auto r0 = n.robin({0, 0});
    EXPECT_NEAR(r0.value, 0.0, 1e-4);
    EXPECT_NEAR(r0.grad.x, 0.0, 1e-8);
    EXPECT_NEAR(r0.grad.y, 0.0, 1e-8);
    const auto r1 = n.robin({0.3, 0.2});
    const auto e1 = a.robin({0.3, 0.2});
    EXPECT_NEAR(r1.grad.x, e1.grad.x, 1e-3);
    EXPECT_NEAR(r1.hessian.xx, e1.hessian.xx, 1e-2);
    EXPECT_NEAR(r1.hessian.xy, e1.hessian.xy, 1e-2);
}

TEST(Robin, RectangleCenterGradientVanishes) {
    const auto m = GreenModel::numeric(DomainSpec::rectangle(2.0, 1.0), 1.0 / 64);
    const auto r = m.robin({0, 0});
    EXPECT_NEAR(r.grad.x, 0.0, 1e-8);
    EXPECT_NEAR(r.grad.y, 0.0, 1e-8);
}

TEST(KirchhoffRouth, SinglePointIsRobin) {
    const auto m = GreenModel::analytic(DomainSpec::unit_disk());
    const auto p = kirchhoff_routh(m, {{0.3, -0.1}});
    const auto r = m.robin({0.3, -0.1});
    EXPECT_DOUBLE_EQ(p.value, r.value);
    EXPECT_DOUBLE_EQ(p.gradient[0], r.grad.x);
}

TEST(KirchhoffRouth, SymmetricPair) {
    const auto m = GreenModel::analytic(DomainSpec::unit_disk());
    const auto p = kirchhoff_routh(m, {{0.3, 0}, {-0.3, 0}});
    EXPECT_LE(std::abs(p.gradient[1]), 1e-8);
    EXPECT_LE(std::abs(p.gradient[3]), 1e-8);
    const double direct = 2 * (-std::log(1 - 0.09) / (2 * pi)) - 2 * disk_green_oracle({0.3, 0}, {-0.3, 0});
    EXPECT_NEAR(p.value, direct, 1e-10);
    EXPECT_THROW(kirchhoff_routh(m, {{0.3, 0}, {0.3, 0}}), Error);
}

TEST(KirchhoffRouth, GradientMatchesDifferences) {
    const auto m = GreenModel::analytic(DomainSpec::unit_disk());
    std::mt19937_64 rng(17);
    for (int k : {2, 3}) {
        std::vector<Point> c;
        for (int i = 0; i < k; ++i) c.push_back(random_in_disk(rng, 0.7));
        const auto p = kirchhoff_routh(m, c);
        const double h = 1e-6;
        for (int j = 0; j < 2 * k; ++j) {
            auto a = c, b = c;
            (j % 2 == 0 ? a[j / 2].x : a[j / 2].y) += h;
            (j % 2 == 0 ? b[j / 2].x : b[j / 2].y) -= h;
            const double fd = (kirchhoff_routh(m, a).value - kirchhoff_routh(m, b).value) / (2 * h);
            EXPECT_NEAR(fd, p.gradient[j], 1e-6);
        }
        EXPECT_LE((p.hessian - p.hessian.transpose()).norm(), 1e-8);
    }
}

TEST(KirchhoffRouth, DiskSinglePointAtOrigin) {
    const auto m = GreenModel::analytic(DomainSpec::unit_disk());
    std::mt19937_64 rng(19);
    std::vector<std::vector<Point>> starts, rotated;
    const double c = std::cos(0.7), s = std::sin(0.7);
    for (int i = 0; i < 20; ++i) {
        const Point p = random_in_disk(rng, 0.9);
        starts.push_back({p});
        rotated.push_back({{c * p.x - s * p.y, s * p.x + c * p.y}});
    }
    const auto res = find_kr_critical(m, 1, starts, 4);
    ASSERT_EQ(res.points.size(), 1u) << res.diagnostic;
    EXPECT_LE(norm(res.points[0].config[0]), 1e-8);
    EXPECT_GT(res.points[0].eigenvalues.front(), 0.0);
    EXPECT_TRUE(res.points[0].nondegenerate);
    const auto rot = find_kr_critical(m, 1, rotated);
    ASSERT_EQ(rot.points.size(), 1u);
    EXPECT_LE(distance(rot.points[0].config[0], res.points[0].config[0]), 1e-8);
}

TEST(KirchhoffRouth, RectangleCenter) {
    const auto m = GreenModel::numeric(DomainSpec::rectangle(2.0, 1.0), 1.0 / 64);
    const auto res = find_kr_critical(m, 1, {{{0.3, 0.1}}, {{-0.4, -0.2}}, {{0.1, 0.25}}});
    ASSERT_EQ(res.points.size(), 1u) << res.diagnostic;
    EXPECT_LE(norm(res.points[0].config[0]), 1e-6);
    EXPECT_TRUE(res.points[0].nondegenerate);
    EXPECT_GT(res.points[0].eigenvalues.front(), 0.0);
}

TEST(KirchhoffRouth, DiskPairHasNoCriticalConfiguration) {
    const auto m = GreenModel::analytic(DomainSpec::unit_disk());
    std::mt19937_64 rng(23);
    std::vector<std::vector<Point>> starts;
    while (starts.size() < 50) {
        const Point a = random_in_disk(rng, 0.9), b = random_in_disk(rng, 0.9);
        if (distance(a, b) > 0.05) starts.push_back({a, b});
    }
    const auto res = find_kr_critical(m, 2, starts, 4);
    int admissible = 0;
    for (const auto& p : res.points) admissible += p.nondegenerate;
    EXPECT_EQ(admissible, 0) << res.diagnostic;
}
