#pragma once

// Planar Newton solver for
//   -Delta u = v^p,  -Delta v = u^q  in Omega,  u = v = 0 on the boundary
// on a composite finite-difference grid, plus initial data built from
// Kirchhoff-Routh points or from a radial solution.

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "lel/core.hpp"
#include "lel/green.hpp"
#include "lel/grid2d.hpp"
#include "lel/kirchhoff_routh.hpp"
#include "lel/predict.hpp"
#include "lel/radial.hpp"

namespace lel {

struct PairField {
    std::shared_ptr<const Grid2D> grid;
    Eigen::VectorXd u, v;  // interior nodes; the boundary trace is zero
    ExponentPair ep{1.0, 0.0};
    double residual = 0.0;
    int iterations = 0;
    int damping_steps = 0;
    int linear_iterations = 0;

    /// Largest node value of v and its node index.
    std::pair<double, int> v_peak() const {
        Eigen::Index k = 0;
        const double m = v.maxCoeff(&k);
        return {m, static_cast<int>(k)};
    }
};

enum class LinearBackend { krylov, direct };

struct PlanarSolveOptions {
    int max_iter = 50;
    double rel_tol = 1e-10;
    double positivity_floor = 1e-12;
    double clip = 1e-12;             // lower clip of the bases in v^p, u^q
    LinearBackend backend = LinearBackend::krylov;
    double linear_tol = 1e-10;       // relative residual reduction of each inner solve
    int linear_max_iter = 2000;
    // optional forcing: -Delta u = v^p + fu, -Delta v = u^q + fv
    Eigen::VectorXd forcing_u, forcing_v;
};

namespace detail {

struct PlanarResidual {
    Eigen::VectorXd fu, fv;  // -L u - v^p - forcing
    double norm = 0.0;
    double scale = 1.0;
};

inline double clipped_pow(double x, double e, double clip) { return pow_clamped(std::max(x, clip), e); }

inline PlanarResidual planar_residual(const Eigen::SparseMatrix<double>& L, const ExponentPair& ep,
                                      const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                                      const PlanarSolveOptions& opt) {
    const auto n = u.size();
    Eigen::VectorXd vp(n), uq(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        vp[i] = clipped_pow(v[i], ep.p(), opt.clip);
        uq[i] = clipped_pow(u[i], ep.q(), opt.clip);
    }
    PlanarResidual r;
    r.fu = -(L * u) - vp;
    r.fv = -(L * v) - uq;
    if (opt.forcing_u.size() == n) r.fu -= opt.forcing_u;
    if (opt.forcing_v.size() == n) r.fv -= opt.forcing_v;
    r.norm = std::max(r.fu.lpNorm<Eigen::Infinity>(), r.fv.lpNorm<Eigen::Infinity>());
    r.scale = std::max({1.0, vp.lpNorm<Eigen::Infinity>(), uq.lpNorm<Eigen::Infinity>()});
    return r;
}

// Block-diagonal preconditioner diag(-L, -L) with one factorization of -L.
class BlockLaplacianPreconditioner {
public:
    using StorageIndex = int;
    enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic };

    BlockLaplacianPreconditioner() = default;

    void set_laplacian(std::shared_ptr<const Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu) { lu_ = std::move(lu); }

    template <class M> BlockLaplacianPreconditioner& analyzePattern(const M&) { return *this; }
    template <class M> BlockLaplacianPreconditioner& factorize(const M&) { return *this; }
    template <class M> BlockLaplacianPreconditioner& compute(const M&) { return *this; }

    template <class Rhs>
    Eigen::VectorXd solve(const Rhs& b) const {
        const Eigen::Index n = b.size() / 2;
        Eigen::VectorXd out(b.size());
        out.head(n) = lu_->solve(Eigen::VectorXd(b.head(n)));
        out.tail(n) = lu_->solve(Eigen::VectorXd(b.tail(n)));
        return out;
    }

    Eigen::ComputationInfo info() const { return lu_ ? Eigen::Success : Eigen::InvalidInput; }

private:
    std::shared_ptr<const Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
};

}  // namespace detail

/// Damped Newton on the planar system from a positive initial field.
inline PairField solve_planar(const ExponentPair& ep, const std::shared_ptr<const Grid2D>& grid,
                              const PairField& init, const PlanarSolveOptions& opt = {}) {
    if (!grid) throw Error(ErrorKind::argument, "null grid");
    const int n = grid->size();
    if (init.u.size() != n || init.v.size() != n) throw Error(ErrorKind::argument, "initial field does not match grid");
    if ((opt.forcing_u.size() != 0 && opt.forcing_u.size() != n) ||
        (opt.forcing_v.size() != 0 && opt.forcing_v.size() != n))
        throw Error(ErrorKind::argument, "forcing does not match grid");
    if (!(init.u.minCoeff() > 0.0) || !(init.v.minCoeff() > 0.0))
        throw Error(ErrorKind::positivity, "initial guess must be positive at interior nodes");

    const Eigen::SparseMatrix<double> L = grid->laplacian();
    PairField cur = init;
    cur.grid = grid;
    cur.ep = ep;
    cur.iterations = cur.damping_steps = cur.linear_iterations = 0;

    auto res = detail::planar_residual(L, ep, cur.u, cur.v, opt);
    cur.residual = res.norm;
    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i) w[i] = grid->weight(i);
    auto merit = [&](const detail::PlanarResidual& r) {
        return std::sqrt(w.dot(r.fu.cwiseAbs2()) + w.dot(r.fv.cwiseAbs2()));
    };

    std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lap_lu;
    if (opt.backend == LinearBackend::krylov) {
        lap_lu = std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
        const Eigen::SparseMatrix<double> negL = -L;
        lap_lu->compute(negL);
        if (lap_lu->info() != Eigen::Success)
            throw SolveError<PairField>(ErrorKind::no_convergence, "Laplacian factorization failed", cur);
    }
    Eigen::SparseLU<Eigen::SparseMatrix<double>> block_lu;
    bool analysed = false;

    for (int it = 0; it < opt.max_iter; ++it) {
        if (res.norm <= opt.rel_tol * res.scale) return cur;
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(static_cast<std::size_t>(L.nonZeros()) * 2 + 2 * n);
        for (int k = 0; k < L.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator e(L, k); e; ++e) {
                trips.emplace_back(e.row(), e.col(), -e.value());
                trips.emplace_back(n + e.row(), n + e.col(), -e.value());
            }
        for (int i = 0; i < n; ++i) {
            trips.emplace_back(i, n + i, -ep.p() * detail::clipped_pow(cur.v[i], ep.p() - 1.0, opt.clip));
            trips.emplace_back(n + i, i, -ep.q() * detail::clipped_pow(cur.u[i], ep.q() - 1.0, opt.clip));
        }
        Eigen::SparseMatrix<double> J(2 * n, 2 * n);
        J.setFromTriplets(trips.begin(), trips.end());
        Eigen::VectorXd rhs(2 * n);
        rhs << -res.fu, -res.fv;

        Eigen::VectorXd d;
        if (opt.backend == LinearBackend::direct) {
            if (!analysed) {
                block_lu.analyzePattern(J);
                analysed = true;
            }
            block_lu.factorize(J);
            if (block_lu.info() != Eigen::Success)
                throw SolveError<PairField>(ErrorKind::no_convergence, "singular planar Jacobian", cur);
            d = block_lu.solve(rhs);
        } else {
            Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, detail::BlockLaplacianPreconditioner> krylov;
            krylov.preconditioner().set_laplacian(lap_lu);
            krylov.compute(J);
            krylov.setTolerance(opt.linear_tol);
            krylov.setMaxIterations(opt.linear_max_iter);
            d = krylov.solve(rhs);
            cur.linear_iterations += static_cast<int>(krylov.iterations());
            if (krylov.info() != Eigen::Success)
                throw SolveError<PairField>(ErrorKind::linear_solve,
                                            "linear solve stagnated after " + std::to_string(krylov.iterations()) +
                                                " iterations (relative residual " + std::to_string(krylov.error()) +
                                                ")",
                                            cur);
        }
        const auto du = d.head(n), dv = d.tail(n);

        double alpha = 1.0;
        auto positive = [&](double a) {
            return (cur.u + a * du).minCoeff() > 0.0 && (cur.v + a * dv).minCoeff() > 0.0;
        };
        while (!positive(alpha)) {
            alpha *= 0.5;
            ++cur.damping_steps;
            if (alpha < opt.positivity_floor)
                throw SolveError<PairField>(ErrorKind::positivity, "positivity damping hit its floor", cur);
        }
        const double m0 = merit(res);
        PairField trial = cur;
        detail::PlanarResidual tres;
        for (int back = 0;; ++back) {
            trial.u = cur.u + alpha * du;
            trial.v = cur.v + alpha * dv;
            tres = detail::planar_residual(L, ep, trial.u, trial.v, opt);
            if (merit(tres) < (1.0 - 1e-4 * alpha) * m0 || back >= 10) break;
            alpha *= 0.5;
            ++cur.damping_steps;
        }
        trial.iterations = cur.iterations + 1;
        trial.damping_steps = cur.damping_steps;
        trial.linear_iterations = cur.linear_iterations;
        trial.residual = tres.norm;
        cur = std::move(trial);
        res = std::move(tres);
    }
    if (res.norm <= opt.rel_tol * res.scale) return cur;
    throw SolveError<PairField>(ErrorKind::no_convergence,
                                "planar Newton did not converge in " + std::to_string(opt.max_iter) + " iterations", cur);
}

/// Interior residual of a field against the unforced system.
inline double planar_residual_norm(const PairField& f) {
    const auto r = detail::planar_residual(f.grid->laplacian(), f.ep, f.u, f.v, PlanarSolveOptions{});
    return r.norm / r.scale;
}

// ---------------------------------------------------------------------------
// Initial data

/// Bubble superposition at the points of a Kirchhoff-Routh critical
/// configuration. Each bubble uses the rates predicted from its own
/// Phi_{k,i} = R(x_i) - sum_{j != i} G(x_i, x_j), and is blended at radius
/// p mu_i into the outer field (8 pi sqrt(e) / p) sum_i G(x, x_i).
inline PairField initial_guess_from_kr(const GreenModel& model, const ExponentPair& ep, const KRPoint& kr_point,
                                       const std::shared_ptr<const Grid2D>& grid) {
    if (!grid) throw Error(ErrorKind::argument, "null grid");
    const auto& xs = kr_point.config;
    if (xs.empty()) throw Error(ErrorKind::argument, "empty Kirchhoff-Routh configuration");
    for (const auto& x : xs)
        if (!(grid->domain().boundary_distance(x) > 0.0))
            throw Error(ErrorKind::domain, "bubble placement outside the domain");
    const double p = ep.p();
    struct Bubble {
        Point x;
        RatePrediction rate;
        double rb;
    };
    std::vector<Bubble> bubbles;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double phi = model.robin(xs[i]).value;
        for (std::size_t j = 0; j < xs.size(); ++j)
            if (j != i) phi -= model.green(xs[i], xs[j]).value;
        const auto rate = predict_rates(ep, phi);
        bubbles.push_back({xs[i], rate, detail::bubble_blend_radius(p, rate.mu)});
    }
    PairField g;
    g.grid = grid;
    g.ep = ep;
    g.u.resize(grid->size());
    g.v.resize(grid->size());
    for (int k = 0; k < grid->size(); ++k) {
        const Point& z = grid->node(k);
        double outer = 0.0, wsum = 0.0, vin = 0.0, uin = 0.0;
        for (const auto& b : bubbles) {
            const double r = distance(z, b.x);
            if (r > 0.0) outer += model.green(z, b.x).value;
            const double w = detail::blend_weight(r, b.rb);
            const double rho = r / b.rate.mu;
            const double U = -2.0 * std::log1p(rho * rho / 8.0);
            vin += w * b.rate.v_max * (1.0 + U / p);
            uin += w * b.rate.u_max * (1.0 + U / p);
            wsum += w;
        }
        outer *= 8.0 * pi * sqrt_e / p;
        const double rest = std::max(0.0, 1.0 - wsum);
        g.v[k] = std::max(1e-12, vin + rest * outer);
        g.u[k] = std::max(1e-12, uin + rest * outer);
    }
    return g;
}

/// Samples a unit-disk radial solution, shifted to `center`, onto the grid.
inline PairField field_from_radial(const RadialPair& sol, const std::shared_ptr<const Grid2D>& grid,
                                   const Point& center) {
    if (!grid) throw Error(ErrorKind::argument, "null grid");
    PairField g;
    g.grid = grid;
    g.ep = sol.ep;
    g.u.resize(grid->size());
    g.v.resize(grid->size());
    for (int k = 0; k < grid->size(); ++k) {
        const double r = std::min(1.0, distance(grid->node(k), center));
        g.u[k] = std::max(1e-12, sol.u_at(r));
        g.v[k] = std::max(1e-12, sol.v_at(r));
    }
    return g;
}

/// Values and gradients of a planar field off the nodes, from a local
/// quadratic least-squares fit over nodes within 2.5 local spacings.
/// Boundary points within the fit radius enter with value zero.
struct FieldSample {
    double u = 0.0, v = 0.0;
    Point grad_u, grad_v;
};

inline FieldSample sample_field(const PairField& f, const Point& x) {
    const Grid2D& g = *f.grid;
    if (!(g.domain().boundary_distance(x) >= 0.0)) throw Error(ErrorKind::domain, "sample point outside the domain");
    const double h = g.local_h(g.nearest_node(x));
    std::vector<int> nodes;
    for (double rad = 2.5 * h;; rad *= 1.25) {
        nodes = g.nodes_near(x, rad);
        if (nodes.size() >= 10) break;
        if (rad > g.domain().min_dimension()) throw Error(ErrorKind::domain, "too few nodes near sample point");
    }
    std::vector<Point> bnd;
    for (int k : nodes)
        for (const auto& [b, w] : g.row(k).bnd)
            if (distance(b, x) <= 2.5 * h) bnd.push_back(b);
    const auto m = static_cast<Eigen::Index>(nodes.size() + bnd.size());
    Eigen::MatrixXd B(m, 6);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m, 2);
    Eigen::Index r = 0;
    auto put = [&](const Point& p) {
        const double a = (p.x - x.x) / h, b = (p.y - x.y) / h;
        B.row(r) << 1.0, a, b, a * a, a * b, b * b;
    };
    for (int k : nodes) {
        put(g.node(k));
        rhs(r, 0) = f.u[k];
        rhs(r, 1) = f.v[k];
        ++r;
    }
    for (const auto& b : bnd) {
        put(b);
        ++r;
    }
    const Eigen::MatrixXd c = B.colPivHouseholderQr().solve(rhs);
    return {c(0, 0), c(0, 1), {c(1, 0) / h, c(2, 0) / h}, {c(1, 1) / h, c(2, 1) / h}};
}

/// p * int grad u . grad v through the discrete Green identity
/// p * sum_i w_i u_i (-Delta_h v)_i.
inline double planar_energy(const PairField& f) {
    const Eigen::VectorXd lv = -(f.grid->laplacian() * f.v);
    double s = 0.0;
    for (int i = 0; i < f.grid->size(); ++i) s += f.grid->weight(i) * f.u[i] * lv[i];
    return f.ep.p() * s;
}

}  // namespace lel
