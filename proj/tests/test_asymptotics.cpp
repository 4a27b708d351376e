#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <stdexcept>

#include "lel/asymptotics.hpp"

using namespace lel;

namespace {

const std::vector<double> p_run = {3, 5, 10, 20, 40, 80, 160};

const std::vector<RadialPair>& run(double theta, int refinement = 1) {
    static std::map<std::pair<double, int>, std::vector<RadialPair>> cache;
    auto key = std::pair{theta, refinement};
    auto it = cache.find(key);
    if (it == cache.end()) {
        MeshPolicy pol;
        pol.refinement = refinement;
        it = cache.emplace(key, continue_radial(p_run, theta, pol)).first;
    }
    return it->second;
}

const RadialPair& at(double p, double theta, int refinement = 1) {
    for (const auto& s : run(theta, refinement))
        if (s.ep.p() == p) return s;
    throw std::logic_error("p not in run");
}

std::vector<RadialPair> tail(const std::vector<RadialPair>& r, double p_min) {
    std::vector<RadialPair> out;
    for (const auto& s : r)
        if (s.ep.p() >= p_min) out.push_back(s);
    return out;
}

const double eight_pi_sqrt_e = 8.0 * pi * sqrt_e;

}  // namespace

// ---------------------------------------------------------------------------
// extraction

TEST(Extraction, RadialMaximumAtOrigin) {
    const auto d = extract_bubble(at(40, 0));
    EXPECT_LE(norm(d.x), 1e-10);
    EXPECT_EQ(d.v_max, at(40, 0).v[0]);
    EXPECT_GT(d.mu, 0.0);
    EXPECT_EQ(d.sigma, 0.0);
    EXPECT_GT(d.mass_v, 0.0);
    EXPECT_GT(d.mass_u, 0.0);
    EXPECT_DOUBLE_EQ(d.r_loc, 0.25);
}

TEST(Extraction, MaximumAgainstLeadingLawAtOneSixty) {
    const auto d = extract_bubble(at(160, 0));
    EXPECT_LE(std::abs(d.v_max - predict_rates(ExponentPair(160, 0)).v_max), 1e-3);
    EXPECT_LE(std::abs(d.v_max - sqrt_e), 0.02);
}

TEST(Extraction, EnergyTripleEqualForSymmetricExponents) {
    const auto d = extract_bubble(at(40, 0));
    EXPECT_NEAR(d.energy_uu / d.energy_uv, 1.0, 1e-9);
    EXPECT_NEAR(d.energy_vv / d.energy_uv, 1.0, 1e-9);
}

// The limit 8 pi e is approached from below at rate O(1/p): 61.4, 63.7, 65.4
// at p = 40, 80, 160.
TEST(Extraction, EnergyWithinFivePercentAtEighty) {
    const auto d = extract_bubble(at(80, 0));
    EXPECT_NEAR(d.energy_uv / (8.0 * pi * std::exp(1.0)), 1.0, 0.05);
}

TEST(Extraction, EnergyApproachesLimitMonotonically) {
    const double lim = 8.0 * pi * std::exp(1.0);
    double prev = 1e300;
    for (double p : {20.0, 40.0, 80.0, 160.0}) {
        const double e = std::abs(extract_bubble(at(p, 0)).energy_uv - lim);
        EXPECT_LT(e, prev) << "p = " << p;
        prev = e;
    }
}

TEST(Extraction, MassTrendTowardLimit) {
    double prev = 1e300;
    for (double p : {20.0, 40.0, 80.0, 160.0}) {
        const auto d = extract_bubble(at(p, 0));
        const double e = std::abs(p * d.mass_v - eight_pi_sqrt_e);
        EXPECT_LT(e, prev) << "p = " << p;
        EXPECT_NEAR(d.mass_u / d.mass_v, 1.0, 1e-9);
        prev = e;
    }
}

TEST(Extraction, VMaxAboveUAtMaxForPositiveTheta) {
    for (double p : {40.0, 80.0, 160.0}) {
        const auto d = extract_bubble(at(p, 1));
        EXPECT_GT(d.v_max, d.u_at_max);
        EXPECT_DOUBLE_EQ(d.sigma, std::log(d.v_max));
    }
}

TEST(Extraction, PlanarDiskPeakAtCenter) {
    MeshPolicy pol;
    pol.refinement = 2;
    const auto ref = continue_radial({3, 5}, 0.0, pol).back();
    auto grid = std::make_shared<const Grid2D>(build_grid(DomainSpec::unit_disk(), 1.0 / 64, {{-0.25, -0.25, 0.25, 0.25}}));
    const auto f = solve_planar(ExponentPair(5, 0), grid, field_from_radial(ref, grid, {0, 0}));
    const auto d = extract_bubble(f);
    EXPECT_LE(norm(d.x), 1e-6);
    EXPECT_NEAR(d.v_max / ref.v[0], 1.0, 1e-3);
    const auto dr = extract_bubble(ref, d.r_loc);
    EXPECT_NEAR(d.mass_v / dr.mass_v, 1.0, 1e-2);
    EXPECT_NEAR(d.energy_uv / dr.energy_uv, 1.0, 1e-2);
}

// ---------------------------------------------------------------------------
// rate laws

TEST(Rates, MaximumRemainderOrder) {
    const auto rep = build_rate_report(tail(run(0, 1), 20), tail(run(0, 2), 20));
    ASSERT_EQ(rep.rows.size(), 4u);
    ASSERT_TRUE(rep.v_order.has_value());
    EXPECT_LE(*rep.v_order, -1.5);
    EXPECT_TRUE(std::isnan(rep.rows[0].gap_ratio));
    for (std::size_t i = 1; i < rep.rows.size(); ++i) EXPECT_GT(rep.rows[i].p, rep.rows[i - 1].p);
}

TEST(Rates, ScalingRemainderDecreases) {
    const auto rep = build_rate_report(tail(run(0, 1), 20));
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        EXPECT_LT(std::abs(rep.rows[i].mu_law_remainder()), std::abs(rep.rows[i - 1].mu_law_remainder()));
}

// The remainder of the mu law is O(1/p) with constant near -5.5; at p = 160
// it is about -0.034.
TEST(Rates, ScalingRemainderBelowTwoHundredthsAtOneSixty) {
    const auto rep = build_rate_report(tail(run(0, 1), 20));
    EXPECT_LE(std::abs(rep.rows.back().mu_law_remainder()), 0.02);
}

TEST(Rates, OrdersNeedFourRows) {
    const auto rep = build_rate_report(tail(run(0, 1), 40));
    EXPECT_FALSE(rep.v_order.has_value());
    EXPECT_FALSE(rep.mu_order.has_value());
}

TEST(Rates, Deterministic) {
    const auto a = build_rate_report(tail(run(0, 1), 20));
    const auto b = build_rate_report(tail(run(0, 1), 20));
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        EXPECT_EQ(a.rows[i].v_max, b.rows[i].v_max);
        EXPECT_EQ(a.rows[i].mu, b.rows[i].mu);
        EXPECT_EQ(a.rows[i].energy, b.rows[i].energy);
    }
    EXPECT_EQ(*a.v_order, *b.v_order);
}

// ---------------------------------------------------------------------------
// gap law

TEST(GapLaw, RatioNearOneAtEighty) {
    for (double theta : {1.0, 2.0}) {
        const double g = gap_law_ratio(extract_bubble(at(80, theta)), ExponentPair(80, theta));
        EXPECT_GE(g, 0.9) << "theta = " << theta;
        EXPECT_LE(g, 1.1) << "theta = " << theta;
    }
}

TEST(GapLaw, DeviationDecreasesInP) {
    for (double theta : {1.0, 2.0}) {
        double prev = 1e300;
        for (double p : {40.0, 80.0, 160.0}) {
            const double e = std::abs(gap_law_ratio(extract_bubble(at(p, theta)), ExponentPair(p, theta)) - 1.0);
            EXPECT_LT(e, prev) << "theta = " << theta << " p = " << p;
            prev = e;
        }
    }
}

TEST(GapLaw, UndefinedForEqualExponents) {
    EXPECT_THROW(gap_law_ratio(extract_bubble(at(40, 0)), ExponentPair(40, 0)), Error);
}

// ---------------------------------------------------------------------------
// inner profiles

TEST(Profiles, ScaledErrorBoundedAcrossP) {
    double lo = 1e300, hi = 0.0;
    for (double p : {40.0, 80.0, 160.0}) {
        const auto& s = at(p, 0, 4);
        const auto pe = profile_error(s, extract_bubble(s), s.ep, 10.0);
        const double scaled = pe.z_err * std::pow(p, 1.5);
        lo = std::min(lo, scaled);
        hi = std::max(hi, scaled);
        EXPECT_LT(scaled, 0.2) << "p = " << p;
    }
    EXPECT_LT(hi / lo, 3.0);
}

TEST(Profiles, CenterValuesAndDifferenceBound) {
    const auto& s = at(80, 1, 4);
    const auto d = extract_bubble(s);
    const auto pe = profile_error(s, d, s.ep, 10.0);
    EXPECT_EQ(pe.z0, 0.0);
    EXPECT_NEAR(pe.w0, -d.sigma * gap_law_ratio(d, s.ep), 1e-12);
    EXPECT_NEAR(pe.w0 / -d.sigma, 1.0, 0.1);
    EXPECT_LE(pe.difference_err, pe.z_err + pe.w_err + 1e-12);
    EXPECT_GE(pe.samples, 10);
}

TEST(Profiles, ResolutionError) {
    EXPECT_THROW(profile_error(at(80, 0), extract_bubble(at(80, 0)), ExponentPair(80, 0), 1e-3), Error);
}

// ---------------------------------------------------------------------------
// Pohozaev

TEST(Pohozaev, RadialResidualSmallAtTen) {
    const auto rep = pohozaev_check(at(10, 0), 0.5);
    EXPECT_LE(rep.P_relative(), 1e-3);
    EXPECT_LE(std::abs(rep.Q1_lhs), 1e-6);
    EXPECT_LE(std::abs(rep.Q2_lhs), 1e-6);
    EXPECT_LE(std::abs(rep.Q1_rhs), 1e-6);
    EXPECT_EQ(rep.P_residual, std::abs(rep.P_lhs - rep.P_rhs));
}

TEST(Pohozaev, ResidualSecondOrderUnderRefinement) {
    const double a = pohozaev_check(at(10, 0, 1), 0.5).P_residual;
    const double b = pohozaev_check(at(10, 0, 2), 0.5).P_residual;
    const double c = pohozaev_check(at(10, 0, 4), 0.5).P_residual;
    EXPECT_NEAR(std::log2(a / b), 2.0, 0.3);
    EXPECT_NEAR(std::log2(b / c), 2.0, 0.3);
}

TEST(Pohozaev, GreenClosedForm) {
    const auto model = GreenModel::analytic(DomainSpec::unit_disk());
    const auto rep = pohozaev_green(model, {0, 0}, 0.5);
    EXPECT_NEAR(rep.P_lhs, -1.0 / (2.0 * pi), 1e-4);
}

TEST(Pohozaev, GreenOffCenterTranslationForm) {
    // Q_i(G, G) = -d_i R at the pole
    const auto model = GreenModel::analytic(DomainSpec::unit_disk());
    const Point xn{0.3, 0.1};
    const auto rep = pohozaev_green(model, xn, 0.2);
    const auto R = model.robin(xn);
    EXPECT_NEAR(rep.P_lhs, -1.0 / (2.0 * pi), 1e-4);
    EXPECT_NEAR(rep.Q1_lhs, -R.grad.x, 1e-6);
    EXPECT_NEAR(rep.Q2_lhs, -R.grad.y, 1e-6);
}

TEST(Pohozaev, PlanarDiskAgreesWithRadial) {
    MeshPolicy pol;
    pol.refinement = 2;
    const auto ref = continue_radial({3, 5}, 0.0, pol).back();
    auto grid = std::make_shared<const Grid2D>(build_grid(DomainSpec::unit_disk(), 1.0 / 64, {{-0.4, -0.4, 0.4, 0.4}}));
    const auto f = solve_planar(ExponentPair(5, 0), grid, field_from_radial(ref, grid, {0, 0}));
    const auto rp = pohozaev_check(f, {0, 0}, 0.3);
    const auto rr = pohozaev_check(ref, 0.3);
    EXPECT_NEAR(rp.P_lhs / rr.P_lhs, 1.0, 2e-2);
    EXPECT_LE(rp.P_relative(), 2e-2);
    EXPECT_THROW(pohozaev_check(f, {0.8, 0.0}, 0.3), Error);
}

TEST(Pohozaev, BallMustStayInside) {
    EXPECT_THROW(pohozaev_check(at(10, 0), 1.2), Error);
}

// ---------------------------------------------------------------------------
// outer expansion

TEST(Outer, ErrorSmallAndDecreasing) {
    const auto model = GreenModel::analytic(DomainSpec::unit_disk());
    const std::vector<Point> pts = {{0.4, 0}, {0, 0.6}, {-0.8, 0}, {0.3, 0.3}};
    double prev = 1e300;
    for (double p : {40.0, 80.0, 160.0}) {
        const auto e = outer_expansion_check(at(p, 0), model, pts);
        if (p == 80.0) EXPECT_LE(std::max(e.u_err, e.v_err), 0.5);
        EXPECT_LT(e.u_err, prev) << "p = " << p;
        prev = e.u_err;
    }
}

TEST(Outer, BoundaryRingMatchesTrace) {
    const auto model = GreenModel::analytic(DomainSpec::unit_disk());
    const auto& s = at(80, 0);
    EXPECT_EQ(s.u.back(), 0.0);
    EXPECT_EQ(s.v.back(), 0.0);
    const double r = 1.0 - 1e-6;
    const auto e = outer_expansion_check(s, model, {{r, 0.0}, {0.0, -r}});
    EXPECT_LE(std::max(e.u_err, e.v_err), 1e-3);
}

TEST(Outer, CoefficientFitAtOneSixty) {
    EXPECT_NEAR(outer_coefficient_fit(at(160, 0)) / eight_pi_sqrt_e, 1.0, 0.05);
}

TEST(Outer, RejectsPointsNearBubble) {
    const auto model = GreenModel::analytic(DomainSpec::unit_disk());
    EXPECT_THROW(outer_expansion_check(at(80, 0), model, {{0.1, 0.0}}), Error);
}
