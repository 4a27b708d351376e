#pragma once

// Dirichlet Green function G, regular part H and Robin function R.
//
//   G(x, y) = -(1/2pi) log|x - y| - H(x, y),   R(x) = H(x, x).
//
// The analytic backend covers disks through the image-charge formula. The
// numeric backend solves Delta_x H = 0 with boundary data -(1/2pi) log|x - y|
// on a Shortley-Weller grid and reads H off the grid with a local harmonic
// least-squares fit.

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include <cmath>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include "lel/core.hpp"
#include "lel/domain.hpp"
#include "lel/grid2d.hpp"

namespace lel {

struct GreenEval {
    double value = 0.0;
    Point grad;  // gradient in the first argument
};

struct RobinEval {
    double value = 0.0;
    Point grad;
    Sym2 hessian;
};

namespace detail {

// Unit disk, H(x, y) = -(1/4pi) log(|x|^2|y|^2 - 2 x.y + 1).
inline GreenEval unit_disk_regular(const Point& x, const Point& y) {
    const double A = norm2(x) * norm2(y) - 2.0 * dot(x, y) + 1.0;
    return {-std::log(A) / (4.0 * pi), (-1.0 / (2.0 * pi) / A) * (norm2(y) * x - y)};
}

inline RobinEval unit_disk_robin(const Point& x) {
    const double s = 1.0 - norm2(x);
    RobinEval r;
    r.value = -std::log(s) / (2.0 * pi);
    r.grad = (1.0 / (pi * s)) * x;
    r.hessian.xx = (1.0 / s + 2.0 * x.x * x.x / (s * s)) / pi;
    r.hessian.xy = (2.0 * x.x * x.y / (s * s)) / pi;
    r.hessian.yy = (1.0 / s + 2.0 * x.y * x.y / (s * s)) / pi;
    return r;
}

/// Harmonic polynomial basis of degree <= 3 in local coordinates.
inline constexpr int harmonic_basis_size = 7;

inline void harmonic_basis(double a, double b, double* f, double* fa, double* fb) {
    f[0] = 1.0;            fa[0] = 0.0;                 fb[0] = 0.0;
    f[1] = a;              fa[1] = 1.0;                 fb[1] = 0.0;
    f[2] = b;              fa[2] = 0.0;                 fb[2] = 1.0;
    f[3] = a * a - b * b;  fa[3] = 2.0 * a;             fb[3] = -2.0 * b;
    f[4] = a * b;          fa[4] = b;                   fb[4] = a;
    f[5] = a * a * a - 3.0 * a * b * b;  fa[5] = 3.0 * a * a - 3.0 * b * b;  fb[5] = -6.0 * a * b;
    f[6] = 3.0 * a * a * b - b * b * b;  fa[6] = 6.0 * a * b;                fb[6] = 3.0 * a * a - 3.0 * b * b;
}

}  // namespace detail

/// Local harmonic fit around a base point: the node values and boundary
/// points it reads, plus the least-squares projector.
struct HarmonicStencil {
    Point base;
    double scale = 1.0;
    std::vector<int> nodes;
    std::vector<Point> boundary;
    Eigen::MatrixXd projector;  // basis coefficients = projector * samples
};

/// Grid solve of the regular part with a bounded, thread-safe memo keyed by
/// the source point.
class NumericHarmonic {
public:
    NumericHarmonic(const DomainSpec& domain, double h, std::size_t cache_cap = 128)
        : grid_(build_grid(domain, h)), cap_(cache_cap) {
        lu_.analyzePattern(grid_.laplacian());
        lu_.factorize(grid_.laplacian());
        if (lu_.info() != Eigen::Success) throw Error(ErrorKind::no_convergence, "Laplacian factorization failed");
    }

    const Grid2D& grid() const noexcept { return grid_; }

    /// Node values of H(., y).
    std::shared_ptr<const Eigen::VectorXd> solve(const Point& y) const {
        const Key key{y.x, y.y};
        {
            std::lock_guard lock(cache_mutex_);
            auto it = cache_.find(key);
            if (it != cache_.end()) return it->second;
        }
        auto g = [&y](const Point& b) { return -std::log(distance(b, y)) / (2.0 * pi); };
        const Eigen::VectorXd rhs = -grid_.boundary_term(g);
        std::shared_ptr<const Eigen::VectorXd> sol;
        {
            std::lock_guard lock(solve_mutex_);
            sol = std::make_shared<const Eigen::VectorXd>(lu_.solve(rhs));
        }
        std::lock_guard lock(cache_mutex_);
        auto [it, inserted] = cache_.emplace(key, sol);
        if (inserted) {
            order_.push_back(key);
            while (order_.size() > cap_) {
                cache_.erase(order_.front());
                order_.pop_front();
            }
        }
        return it->second;
    }

    /// Fit stencil around x: nodes within 2.5 h plus boundary points they touch.
    HarmonicStencil stencil(const Point& x) const {
        HarmonicStencil st;
        st.base = x;
        st.scale = grid_.h();
        for (double rad = 2.5 * grid_.h();; rad *= 1.5) {
            st.nodes = grid_.nodes_near(x, rad);
            st.boundary.clear();
            for (int k : st.nodes)
                for (const auto& [b, w] : grid_.row(k).bnd) {
                    bool dup = false;
                    for (const auto& e : st.boundary) dup = dup || distance(e, b) < 1e-12;
                    if (!dup) st.boundary.push_back(b);
                }
            if (st.nodes.size() + st.boundary.size() >= 12) break;
            if (rad > grid_.domain().min_dimension()) throw Error(ErrorKind::domain, "point too far from the grid");
        }
        const auto m = static_cast<Eigen::Index>(st.nodes.size() + st.boundary.size());
        Eigen::MatrixXd B(m, detail::harmonic_basis_size);
        double f[7], fa[7], fb[7];
        Eigen::Index r = 0;
        auto put = [&](const Point& p) {
            detail::harmonic_basis((p.x - x.x) / st.scale, (p.y - x.y) / st.scale, f, fa, fb);
            for (int c = 0; c < detail::harmonic_basis_size; ++c) B(r, c) = f[c];
            ++r;
        };
        for (int k : st.nodes) put(grid_.node(k));
        for (const auto& b : st.boundary) put(b);
        st.projector = B.completeOrthogonalDecomposition().pseudoInverse();
        return st;
    }

    /// H(x, y) and grad_x H through a fixed stencil.
    GreenEval regular(const HarmonicStencil& st, const Point& x, const Point& y) const {
        const auto sol = solve(y);
        Eigen::VectorXd samples(static_cast<Eigen::Index>(st.nodes.size() + st.boundary.size()));
        Eigen::Index r = 0;
        for (int k : st.nodes) samples[r++] = (*sol)[k];
        for (const auto& b : st.boundary) samples[r++] = -std::log(distance(b, y)) / (2.0 * pi);
        const Eigen::VectorXd c = st.projector * samples;
        double f[7], fa[7], fb[7];
        detail::harmonic_basis((x.x - st.base.x) / st.scale, (x.y - st.base.y) / st.scale, f, fa, fb);
        GreenEval out;
        for (int k = 0; k < detail::harmonic_basis_size; ++k) {
            out.value += c[k] * f[k];
            out.grad.x += c[k] * fa[k] / st.scale;
            out.grad.y += c[k] * fb[k] / st.scale;
        }
        return out;
    }

private:
    using Key = std::pair<double, double>;

    Grid2D grid_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
    std::size_t cap_;
    mutable std::mutex cache_mutex_;
    mutable std::mutex solve_mutex_;
    mutable std::map<Key, std::shared_ptr<const Eigen::VectorXd>> cache_;
    mutable std::deque<Key> order_;
};

class GreenModel {
public:
    enum class Backend { analytic, numeric };

    static GreenModel analytic(const DomainSpec& domain) {
        if (!domain.is_disk()) throw Error(ErrorKind::argument, "analytic Green backend exists only for disks");
        GreenModel m;
        m.domain_ = domain;
        return m;
    }

    static GreenModel numeric(const DomainSpec& domain, double h) {
        GreenModel m;
        m.domain_ = domain;
        m.backend_ = Backend::numeric;
        m.h_ = h;
        m.num_ = std::make_shared<NumericHarmonic>(domain, h);
        return m;
    }

    const DomainSpec& domain() const noexcept { return domain_; }
    Backend backend() const noexcept { return backend_; }
    double grid_spacing() const noexcept { return h_; }
    const NumericHarmonic* numeric_state() const noexcept { return num_.get(); }

    /// Finite-difference step for numeric Robin derivatives.
    static constexpr double robin_fd_step = 1e-4;

    /// H(x, y) with grad_x.
    GreenEval regular(const Point& x, const Point& y) const {
        check_interior(x);
        check_interior(y);
        if (backend_ == Backend::numeric) return num_->regular(num_->stencil(x), x, y);
        const double rho = domain_.radius;
        const auto e = detail::unit_disk_regular((x - domain_.center) / rho, (y - domain_.center) / rho);
        return {e.value - std::log(rho) / (2.0 * pi), e.grad / rho};
    }

    /// G(x, y) with grad_x.
    GreenEval green(const Point& x, const Point& y) const {
        check_interior(x);
        check_interior(y);
        const Point d = x - y;
        const double r2 = norm2(d);
        if (r2 == 0.0) throw Error(ErrorKind::domain, "Green function at coincident points");
        const auto H = regular(x, y);
        return {-std::log(r2) / (4.0 * pi) - H.value, (-1.0 / (2.0 * pi * r2)) * d - H.grad};
    }

    RobinEval robin(const Point& x) const {
        check_interior(x);
        if (backend_ == Backend::analytic) {
            const double rho = domain_.radius;
            auto r = detail::unit_disk_robin((x - domain_.center) / rho);
            r.value -= std::log(rho) / (2.0 * pi);
            r.grad = r.grad / rho;
            r.hessian = {r.hessian.xx / (rho * rho), r.hessian.xy / (rho * rho), r.hessian.yy / (rho * rho)};
            return r;
        }
        // one stencil for every evaluation so the differences see a smooth function
        const auto st = num_->stencil(x);
        auto R = [&](double dx, double dy) {
            const Point z{x.x + dx, x.y + dy};
            return num_->regular(st, z, z).value;
        };
        const double r0 = R(0, 0);
        struct Level {
            double gx, gy, hxx, hyy, hxy;
        };
        auto level = [&](double s) {
            const double px = R(s, 0), mx = R(-s, 0), py = R(0, s), my = R(0, -s);
            const double pp = R(s, s), pm = R(s, -s), mp = R(-s, s), mm = R(-s, -s);
            return Level{(px - mx) / (2 * s), (py - my) / (2 * s), (px - 2 * r0 + mx) / (s * s),
                         (py - 2 * r0 + my) / (s * s), (pp - pm - mp + mm) / (4 * s * s)};
        };
        const double s = robin_fd_step;
        const Level a = level(s), b = level(0.5 * s);
        auto rich = [](double coarse, double fine) { return (4.0 * fine - coarse) / 3.0; };
        RobinEval out;
        out.value = r0;
        out.grad = {rich(a.gx, b.gx), rich(a.gy, b.gy)};
        out.hessian = {rich(a.hxx, b.hxx), rich(a.hxy, b.hxy), rich(a.hyy, b.hyy)};
        return out;
    }

private:
    void check_interior(const Point& x) const {
        if (!(domain_.boundary_distance(x) > 0.0))
            throw Error(ErrorKind::domain, "point outside the open domain " + domain_.description);
    }

    DomainSpec domain_;
    Backend backend_ = Backend::analytic;
    double h_ = 0.0;
    std::shared_ptr<NumericHarmonic> num_;
};

}  // namespace lel
