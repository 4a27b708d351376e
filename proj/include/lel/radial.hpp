#pragma once

// Radial Lane-Emden system on the unit disk
//   u'' + u'/r + v^p = 0,  v'' + v'/r + u^q = 0,  u'(0) = v'(0) = 0,  u(1) = v(1) = 0,
// discretised by a finite-volume three-point polar Laplacian on a graded mesh
// and solved by damped Newton with continuation in p.

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lel/core.hpp"
#include "lel/predict.hpp"

namespace lel {

// ---------------------------------------------------------------------------
// Mesh

struct RadialMesh {
    std::vector<double> r;  // r[0] = 0, r.back() = 1
    double grading = 1.1;
    double inner_scale = 0.0;

    int size() const noexcept { return static_cast<int>(r.size()); }

    /// Half-cell radii r_{i+1/2}.
    double face(int i) const { return 0.5 * (r[i] + r[i + 1]); }

    /// Control-volume area / 2pi: (r_{i+1/2}^2 - r_{i-1/2}^2) / 2.
    double cell(int i) const {
        const double hi = i + 1 < size() ? face(i) : r[i];
        const double lo = i > 0 ? face(i - 1) : 0.0;
        return 0.5 * (hi * hi - lo * lo);
    }

    /// Index of the last node with r <= x.
    int locate(double x) const {
        const auto it = std::upper_bound(r.begin(), r.end(), x);
        return std::clamp(static_cast<int>(it - r.begin()) - 1, 0, size() - 2);
    }
};

namespace radial_defaults {
inline constexpr double h_max = 0.02;
}

namespace detail {

struct MeshSpacing {
    double h0, gam, hm;
    double operator()(double x) const {
        const double a2 = h0 * h0 + gam * gam * x * x;
        return 1.0 / std::sqrt(1.0 / a2 + 1.0 / (hm * hm));
    }
};

// RK4 march of dr/dxi = c * spacing(r), 8 substeps per unit xi. Records r at
// integer xi when out is given; returns the xi at which r reaches stop_at.
inline double mesh_march(const MeshSpacing& spacing, double c, double xi_end, std::vector<double>* out,
                         double stop_at) {
    const int sub = 8;
    const double dxi = 1.0 / sub;
    double x = 0.0, xi = 0.0;
    if (out) out->push_back(0.0);
    for (int n = 0; xi < xi_end - 1e-12; ++n) {
        const double k1 = c * spacing(x);
        const double k2 = c * spacing(x + 0.5 * dxi * k1);
        const double k3 = c * spacing(x + 0.5 * dxi * k2);
        const double k4 = c * spacing(x + dxi * k3);
        const double nx = x + dxi / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        if (stop_at > 0.0 && nx >= stop_at) return xi + dxi * (stop_at - x) / (nx - x);
        x = nx;
        xi += dxi;
        if (out && (n + 1) % sub == 0) out->push_back(x);
    }
    return xi;
}

inline MeshSpacing mesh_spacing(double mu_hint, double grading) {
    return {0.25 * mu_hint, grading - 1.0, radial_defaults::h_max};
}

}  // namespace detail

/// Number of intervals the unscaled spacing function puts on [0, 1].
inline double natural_interval_count(double mu_hint, double grading) {
    return detail::mesh_march(detail::mesh_spacing(mu_hint, grading), 1.0, 1e300, nullptr, 1.0);
}

/// Graded mesh of M nodes whose spacing is proportional to
/// sqrt(h0^2 + ((g-1) r)^2), softly capped at h_max, with h0 = mu_hint / 4.
/// Doubling M - 1 halves every spacing.
inline RadialMesh build_mesh(double mu_hint, int M, double grading) {
    if (!(mu_hint > 0.0) || !(mu_hint < 0.1)) throw Error(ErrorKind::argument, "mu_hint must lie in (0, 0.1)");
    if (M < 200) throw Error(ErrorKind::argument, "radial mesh needs M >= 200 nodes");
    if (!(grading > 1.0)) throw Error(ErrorKind::argument, "grading must exceed 1");
    const auto spacing = detail::mesh_spacing(mu_hint, grading);
    const double total = detail::mesh_march(spacing, 1.0, 1e300, nullptr, 1.0);
    RadialMesh m;
    m.grading = grading;
    m.inner_scale = mu_hint;
    detail::mesh_march(spacing, total / (M - 1), M - 1, &m.r, 0.0);
    m.r.resize(static_cast<std::size_t>(M));
    const double end = m.r.back();
    for (double& x : m.r) x /= end;
    m.r.back() = 1.0;
    const auto inside = std::count_if(m.r.begin(), m.r.end(), [&](double x) { return x <= 10.0 * mu_hint; });
    if (inside < 20)
        throw Error(ErrorKind::parameter, "mesh too coarse: only " + std::to_string(inside) + " nodes in [0, 10 mu_hint]");
    return m;
}

// ---------------------------------------------------------------------------
// Solution container

struct RadialPair {
    RadialMesh mesh;
    std::vector<double> u, v;  // at every node, zero at r = 1
    ExponentPair ep{1.0, 0.0};
    double residual = 0.0;
    int iterations = 0;
    int damping_steps = 0;

    double u_at(double x) const { return interp(u, x); }
    double v_at(double x) const { return interp(v, x); }
    double du_at(double x) const { return dinterp(u, x); }
    double dv_at(double x) const { return dinterp(v, x); }

    /// Scaling parameter (p v(0)^{p-1})^{-1/2}.
    double mu() const { return scaling_parameter(ep.p(), v[0]); }

private:
    // local cubic through four nodes
    std::array<double, 4> weights(double x, int& first, bool deriv) const {
        const int n = mesh.size();
        int i = mesh.locate(x);
        first = std::clamp(i - 1, 0, n - 4);
        std::array<double, 4> w{};
        const double* t = &mesh.r[first];
        for (int a = 0; a < 4; ++a) {
            double num = deriv ? 0.0 : 1.0, den = 1.0;
            for (int b = 0; b < 4; ++b) {
                if (b == a) continue;
                den *= t[a] - t[b];
            }
            if (!deriv) {
                for (int b = 0; b < 4; ++b)
                    if (b != a) num *= x - t[b];
            } else {
                for (int c = 0; c < 4; ++c) {
                    if (c == a) continue;
                    double prod = 1.0;
                    for (int b = 0; b < 4; ++b)
                        if (b != a && b != c) prod *= x - t[b];
                    num += prod;
                }
            }
            w[a] = num / den;
        }
        return w;
    }
    double interp(const std::vector<double>& f, double x) const {
        if (x < 0.0 || x > 1.0) throw Error(ErrorKind::domain, "radius outside [0, 1]");
        int first = 0;
        const auto w = weights(x, first, false);
        double s = 0.0;
        for (int a = 0; a < 4; ++a) s += w[a] * f[first + a];
        return s;
    }
    double dinterp(const std::vector<double>& f, double x) const {
        if (x < 0.0 || x > 1.0) throw Error(ErrorKind::domain, "radius outside [0, 1]");
        int first = 0;
        const auto w = weights(x, first, true);
        double s = 0.0;
        for (int a = 0; a < 4; ++a) s += w[a] * f[first + a];
        return s;
    }
};

// ---------------------------------------------------------------------------
// Discrete operator

namespace detail {

/// (K f)_i = r_{i+1/2}(f_{i+1}-f_i)/dr_+ - r_{i-1/2}(f_i-f_{i-1})/dr_-, so that
/// Delta f ~ (K f)_i / A_i.
inline std::vector<double> radial_flux_form(const RadialMesh& m, const std::vector<double>& f) {
    const int n = m.size() - 1;
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        double k = m.face(i) * (f[i + 1] - f[i]) / (m.r[i + 1] - m.r[i]);
        if (i > 0) k -= m.face(i - 1) * (f[i] - f[i - 1]) / (m.r[i] - m.r[i - 1]);
        out[i] = k;
    }
    return out;
}

struct RadialResidual {
    std::vector<double> fu, fv;  // pointwise, (K u)/A + v^p
    double norm = 0.0;           // max |pointwise|
    double scale = 1.0;          // max(1, ||v^p||, ||u^q||)
};

inline RadialResidual radial_residual(const RadialMesh& m, const ExponentPair& ep, const std::vector<double>& u,
                                      const std::vector<double>& v) {
    const auto ku = radial_flux_form(m, u), kv = radial_flux_form(m, v);
    RadialResidual r;
    const int n = m.size() - 1;
    r.fu.resize(n);
    r.fv.resize(n);
    for (int i = 0; i < n; ++i) {
        const double a = m.cell(i);
        const double vp = pow_clamped(v[i], ep.p()), uq = pow_clamped(u[i], ep.q());
        r.fu[i] = ku[i] / a + vp;
        r.fv[i] = kv[i] / a + uq;
        r.norm = std::max({r.norm, std::abs(r.fu[i]), std::abs(r.fv[i])});
        r.scale = std::max({r.scale, vp, uq});
    }
    return r;
}

}  // namespace detail

struct RadialSolveOptions {
    int max_iter = 50;
    double rel_tol = 1e-10;
    double positivity_floor = 1e-12;  // smallest admissible step fraction
};

/// Damped Newton for the radial system from a positive initial pair.
inline RadialPair solve_radial(const ExponentPair& ep, const RadialPair& init, const RadialSolveOptions& opt = {}) {
    const RadialMesh& m = init.mesh;
    const int n = m.size() - 1;  // unknowns per field
    if (static_cast<int>(init.u.size()) != m.size() || static_cast<int>(init.v.size()) != m.size())
        throw Error(ErrorKind::argument, "initial pair does not match its mesh");
    for (int i = 0; i < n; ++i)
        if (!(init.u[i] > 0.0) || !(init.v[i] > 0.0))
            throw Error(ErrorKind::positivity, "initial guess must be positive at interior nodes");

    RadialPair cur = init;
    cur.ep = ep;
    cur.u.back() = cur.v.back() = 0.0;
    cur.iterations = 0;
    cur.damping_steps = 0;

    auto res = detail::radial_residual(m, ep, cur.u, cur.v);
    cur.residual = res.norm;
    auto merit = [&](const detail::RadialResidual& r) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += m.cell(i) * (r.fu[i] * r.fu[i] + r.fv[i] * r.fv[i]);
        return std::sqrt(s);
    };

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    bool analysed = false;
    for (int it = 0; it < opt.max_iter; ++it) {
        if (res.norm <= opt.rel_tol * res.scale) return cur;
        // J = [[-K, -A p v^{p-1}], [-A q u^{q-1}, -K]] acting on (du, dv); rows scaled by 1/A
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(static_cast<std::size_t>(8 * n));
        Eigen::VectorXd rhs(2 * n);
        for (int i = 0; i < n; ++i) {
            const double a = m.cell(i);
            const double cp = m.face(i) / (m.r[i + 1] - m.r[i]) / a;
            const double cm = i > 0 ? m.face(i - 1) / (m.r[i] - m.r[i - 1]) / a : 0.0;
            for (int blk = 0; blk < 2; ++blk) {
                const int row = blk * n + i;
                trips.emplace_back(row, row, -(cp + cm));
                if (i + 1 < n) trips.emplace_back(row, blk * n + i + 1, cp);
                if (i > 0) trips.emplace_back(row, blk * n + i - 1, cm);
            }
            trips.emplace_back(i, n + i, ep.p() * pow_clamped(cur.v[i], ep.p() - 1.0));
            trips.emplace_back(n + i, i, ep.q() * pow_clamped(cur.u[i], ep.q() - 1.0));
            rhs[i] = -res.fu[i];
            rhs[n + i] = -res.fv[i];
        }
        Eigen::SparseMatrix<double> J(2 * n, 2 * n);
        J.setFromTriplets(trips.begin(), trips.end());
        if (!analysed) {
            lu.analyzePattern(J);
            analysed = true;
        }
        lu.factorize(J);
        if (lu.info() != Eigen::Success)
            throw SolveError<RadialPair>(ErrorKind::no_convergence, "singular radial Jacobian", cur);
        const Eigen::VectorXd d = lu.solve(rhs);

        double alpha = 1.0;
        auto positive = [&](double a) {
            for (int i = 0; i < n; ++i)
                if (!(cur.u[i] + a * d[i] > 0.0) || !(cur.v[i] + a * d[n + i] > 0.0)) return false;
            return true;
        };
        while (!positive(alpha)) {
            alpha *= 0.5;
            ++cur.damping_steps;
            if (alpha < opt.positivity_floor)
                throw SolveError<RadialPair>(ErrorKind::positivity, "positivity damping hit its floor", cur);
        }
        const double m0 = merit(res);
        RadialPair trial = cur;
        detail::RadialResidual tres;
        for (int back = 0;; ++back) {
            for (int i = 0; i < n; ++i) {
                trial.u[i] = cur.u[i] + alpha * d[i];
                trial.v[i] = cur.v[i] + alpha * d[n + i];
            }
            tres = detail::radial_residual(m, ep, trial.u, trial.v);
            if (merit(tres) < (1.0 - 1e-4 * alpha) * m0 || back >= 10) break;
            alpha *= 0.5;
            ++cur.damping_steps;
        }
        trial.iterations = cur.iterations + 1;
        trial.damping_steps = cur.damping_steps;
        trial.residual = tres.norm;
        cur = std::move(trial);
        res = std::move(tres);
    }
    if (res.norm <= opt.rel_tol * res.scale) return cur;
    throw SolveError<RadialPair>(ErrorKind::no_convergence,
                                 "radial Newton did not converge in " + std::to_string(opt.max_iter) + " iterations",
                                 cur);
}

// ---------------------------------------------------------------------------
// Globalized start

namespace detail {

/// Solves -(K w)_i = A_i f_i, w_n = 0 (Thomas sweep).
inline std::vector<double> radial_poisson(const RadialMesh& m, const std::vector<double>& f) {
    const int n = m.size() - 1;
    std::vector<double> lo(n), di(n), up(n), rhs(n), w(m.size(), 0.0);
    for (int i = 0; i < n; ++i) {
        const double cp = m.face(i) / (m.r[i + 1] - m.r[i]);
        const double cm = i > 0 ? m.face(i - 1) / (m.r[i] - m.r[i - 1]) : 0.0;
        lo[i] = -cm;
        di[i] = cp + cm;
        up[i] = -cp;
        rhs[i] = m.cell(i) * f[i];
    }
    for (int i = 1; i < n; ++i) {
        const double k = lo[i] / di[i - 1];
        di[i] -= k * up[i - 1];
        rhs[i] -= k * rhs[i - 1];
    }
    for (int i = n - 1; i >= 0; --i) w[i] = (rhs[i] - (i + 1 < n ? up[i] * w[i + 1] : 0.0)) / di[i];
    return w;
}

/// Scales (a, b) putting (a u, b v) on the ray where each equation, tested
/// against the other component, balances:
///   ab E = b^{p+1} int v^{p+1},  ab E = a^{q+1} int u^{q+1},  E = int grad u . grad v.
inline std::pair<double, double> ray_scales(const RadialMesh& m, const ExponentPair& ep, const std::vector<double>& u,
                                            const std::vector<double>& v) {
    const int n = m.size() - 1;
    double E = 0.0, A = 0.0, B = 0.0;
    for (int i = 0; i < n; ++i) {
        E += m.face(i) * (u[i + 1] - u[i]) * (v[i + 1] - v[i]) / (m.r[i + 1] - m.r[i]);
        A += m.cell(i) * pow_clamped(v[i], ep.p() + 1.0);
        B += m.cell(i) * pow_clamped(u[i], ep.q() + 1.0);
    }
    if (!(E > 0.0) || !(A > 0.0) || !(B > 0.0) || !std::isfinite(A) || !std::isfinite(B))
        throw Error(ErrorKind::parameter, "ray projection undefined for this pair");
    const double lE = std::log(E), lA = std::log(A), lB = std::log(B), p = ep.p(), q = ep.q();
    const double lb = (lE - lB - q * (lA - lE)) / (p * q - 1.0);
    const double la = lA - lE + p * lb;
    return {std::exp(la), std::exp(lb)};
}

}  // namespace detail

struct GlobalStartOptions {
    int max_sweeps = 400;
    double sweep_tol = 1e-4;  // relative sup change that hands over to Newton
};

/// Any positive pair: ray projection, normalized fixed-point sweeps
/// u <- (-Delta)^{-1} v^p, v <- (-Delta)^{-1} u^q, then damped Newton.
inline RadialPair solve_radial_global(const ExponentPair& ep, const RadialPair& init,
                                      const GlobalStartOptions& gopt = {}, const RadialSolveOptions& opt = {}) {
    const RadialMesh& m = init.mesh;
    const int n = m.size() - 1;
    if (static_cast<int>(init.u.size()) != m.size() || static_cast<int>(init.v.size()) != m.size())
        throw Error(ErrorKind::argument, "initial pair does not match its mesh");
    for (int i = 0; i < n; ++i)
        if (!(init.u[i] > 0.0) || !(init.v[i] > 0.0))
            throw Error(ErrorKind::positivity, "initial guess must be positive at interior nodes");
    RadialPair cur = init;
    cur.ep = ep;
    cur.u.back() = cur.v.back() = 0.0;
    auto project = [&] {
        const auto [a, b] = detail::ray_scales(m, ep, cur.u, cur.v);
        for (auto& x : cur.u) x *= a;
        for (auto& x : cur.v) x *= b;
    };
    project();
    int sweeps = 0;
    for (; sweeps < gopt.max_sweeps; ++sweeps) {
        std::vector<double> fu(n), fv(n);
        for (int i = 0; i < n; ++i) {
            fu[i] = pow_clamped(cur.v[i], ep.p());
            fv[i] = pow_clamped(cur.u[i], ep.q());
        }
        const auto old = cur.v;
        cur.u = detail::radial_poisson(m, fu);
        cur.v = detail::radial_poisson(m, fv);
        project();
        double d = 0.0, s = 0.0;
        for (int i = 0; i < n; ++i) {
            d = std::max(d, std::abs(cur.v[i] - old[i]));
            s = std::max(s, cur.v[i]);
        }
        if (d <= gopt.sweep_tol * s) break;
    }
    auto out = solve_radial(ep, cur, opt);
    out.iterations += sweeps;
    return out;
}

// ---------------------------------------------------------------------------
// Initial data

/// u = v = A (1 - r^2).
inline RadialPair cap_guess(const RadialMesh& mesh, const ExponentPair& ep, double amplitude = 2.0) {
    RadialPair g;
    g.mesh = mesh;
    g.ep = ep;
    for (double x : mesh.r) {
        g.u.push_back(amplitude * (1.0 - x * x));
        g.v.push_back(amplitude * (1.0 - x * x));
    }
    return g;
}

namespace detail {

// smooth switch from 1 (r << rb) to 0 (r >> rb) in log r
inline double blend_weight(double r, double rb) {
    if (r <= 0.0) return 1.0;
    return 0.5 * (1.0 - std::tanh(std::log(r / rb) / 0.5));
}

inline double bubble_blend_radius(double p, double mu) { return std::min(0.3, p * mu); }

}  // namespace detail

/// Inner ansatz v_max (1 + U(r/mu)/p) blended at r = p mu into the outer field
/// (8 pi sqrt(e)/p) G(r, 0), clipped below at 1e-12.
inline RadialPair bubble_guess(const RadialMesh& mesh, const ExponentPair& ep, double amplitude = 1.0) {
    const auto pr = predict_rates(ep);
    const double p = ep.p();
    const double rb = detail::bubble_blend_radius(p, pr.mu);
    RadialPair g;
    g.mesh = mesh;
    g.ep = ep;
    for (double x : mesh.r) {
        const double U = -2.0 * std::log1p((x / pr.mu) * (x / pr.mu) / 8.0);
        const double outer = x > 0.0 ? -4.0 * sqrt_e / p * std::log(x) : 0.0;
        const double w = detail::blend_weight(x, rb);
        const double vi = pr.v_max * (1.0 + U / p), ui = pr.u_max * (1.0 + U / p);
        g.v.push_back(std::max(1e-12, amplitude * (w * vi + (1.0 - w) * outer)));
        g.u.push_back(std::max(1e-12, amplitude * (w * ui + (1.0 - w) * outer)));
    }
    g.u.back() = g.v.back() = 0.0;
    return g;
}

/// Guess at exponent ep_new on mesh from a solution at a smaller p: the inner
/// profile is carried in the rescaled variable r/mu, the outer field by p u.
inline RadialPair transfer_guess(const RadialPair& prev, const RadialMesh& mesh, const ExponentPair& ep_new) {
    const double p0 = prev.ep.p(), p1 = ep_new.p();
    const double mu0 = prev.mu();
    const auto pr = predict_rates(ep_new);
    const double rb = detail::bubble_blend_radius(p1, pr.mu);
    const double v00 = prev.v[0], u00 = prev.u[0];
    RadialPair g;
    g.mesh = mesh;
    g.ep = ep_new;
    for (double x : mesh.r) {
        const double xs = std::min(1.0, x / pr.mu * mu0);
        // z(rho) = p (v(mu rho)/v(0) - 1)
        const double zv = p0 * (prev.v_at(xs) / v00 - 1.0), zu = p0 * (prev.u_at(xs) / u00 - 1.0);
        const double vi = pr.v_max * (1.0 + zv / p1), ui = pr.u_max * (1.0 + zu / p1);
        const double w = detail::blend_weight(x, rb);
        const double vo = p0 / p1 * prev.v_at(x), uo = p0 / p1 * prev.u_at(x);
        g.v.push_back(std::max(1e-12, w * vi + (1.0 - w) * vo));
        g.u.push_back(std::max(1e-12, w * ui + (1.0 - w) * uo));
    }
    g.u.back() = g.v.back() = 0.0;
    return g;
}

// ---------------------------------------------------------------------------
// Continuation

/// Mesh sizing for the solver. The node count follows from the spacing
/// function: M - 1 = natural count / lambda, so the innermost spacing is about
/// lambda * mu / 4. Pushing it much below mu / 20 lets roundoff in the
/// pointwise residual (about eps v / h_min^2) reach the 1e-10 relative target.
struct MeshPolicy {
    double lambda = 0.4;
    double grading = 1.025;
    int min_nodes = 400;
    int refinement = 1;  // multiplies the interval count (1, 2, 4, ...)
};

inline RadialMesh mesh_for(const ExponentPair& ep, const MeshPolicy& pol) {
    const double mu = std::min(0.09, predict_rates(ep).mu);
    const double n0 = natural_interval_count(mu, pol.grading);
    const int intervals = std::max(pol.min_nodes - 1, static_cast<int>(std::ceil(n0 / pol.lambda)));
    return build_mesh(mu, intervals * pol.refinement + 1, pol.grading);
}

/// Solves at every p in p_grid, warm-starting each solve from the previous
/// one; failed steps are bisected down to 0.25 in p.
inline std::vector<RadialPair> continue_radial(const std::vector<double>& p_grid, double theta,
                                               const MeshPolicy& pol = {}, const RadialSolveOptions& opt = {}) {
    if (p_grid.empty()) throw Error(ErrorKind::argument, "empty p grid");
    for (std::size_t i = 1; i < p_grid.size(); ++i)
        if (!(p_grid[i] > p_grid[i - 1])) throw Error(ErrorKind::argument, "p grid must be increasing");
    std::vector<RadialPair> out;
    const ExponentPair ep0(p_grid.front(), theta);
    RadialPair last;
    try {
        const auto mesh = mesh_for(ep0, pol);
        last = solve_radial(ep0, cap_guess(mesh, ep0), opt);
    } catch (const Error&) {
        const auto mesh = mesh_for(ep0, pol);
        last = solve_radial(ep0, bubble_guess(mesh, ep0), opt);
    }
    out.push_back(last);
    for (std::size_t k = 1; k < p_grid.size(); ++k) {
        double p = last.ep.p();
        double step = p_grid[k] - p;
        while (p < p_grid[k]) {
            const double target = std::min(p + step, p_grid[k]);
            const ExponentPair ep(target, theta);
            try {
                const auto mesh = mesh_for(ep, pol);
                last = solve_radial(ep, transfer_guess(last, mesh, ep), opt);
                p = target;
                step = std::max(step, p_grid[k] - p);  // restore after a successful bisected step
            } catch (const Error& e) {
                step *= 0.5;
                if (step < 0.25)
                    throw SolveError<std::vector<RadialPair>>(
                        ErrorKind::continuation,
                        "continuation stalled after p = " + std::to_string(p) + " (" + e.what() + ")", out);
            }
        }
        out.push_back(last);
    }
    return out;
}

}  // namespace lel
