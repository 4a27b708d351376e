#pragma once

// Diagnostics read off solved fields: bubble data, rate and gap laws, inner
// profile errors, Pohozaev forms and the outer Green expansion.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "lel/core.hpp"
#include "lel/green.hpp"
#include "lel/planar.hpp"
#include "lel/predict.hpp"
#include "lel/radial.hpp"
#include "lel/special.hpp"

namespace lel {

struct BubbleDiagnostics {
    Point x;
    double v_max = 0.0;
    double u_at_max = 0.0;
    double mu = 0.0;
    double sigma = 0.0;
    double r_loc = 0.0;
    double mass_v = 0.0;     // int_{B_r} v^p
    double mass_u = 0.0;     // int_{B_r} u^q
    double energy_uv = 0.0;  // p int grad u . grad v
    double energy_uu = 0.0;  // p int |grad u|^2
    double energy_vv = 0.0;  // p int |grad v|^2
    ExponentPair ep{1.0, 0.0};
};

namespace detail {

inline constexpr double gauss3_x[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
inline constexpr double gauss3_w[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

// 2 pi int_0^R f(s) s ds over the radial mesh cells, three Gauss points per cell
template <class F>
double radial_disk_integral(const RadialMesh& m, double R, F&& f) {
    double s = 0.0;
    for (int i = 0; i + 1 < m.size() && m.r[i] < R; ++i) {
        const double a = m.r[i], b = std::min(m.r[i + 1], R);
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        for (int k = 0; k < 3; ++k) {
            const double x = c + h * gauss3_x[k];
            s += gauss3_w[k] * h * f(x) * x;
        }
    }
    return 2.0 * pi * s;
}

// p int over the disk of the face-gradient products, 2 pi sum r_f (da db / dr)
inline double radial_gradient_product(const RadialMesh& m, const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (int i = 0; i + 1 < m.size(); ++i)
        s += m.face(i) * (a[i + 1] - a[i]) * (b[i + 1] - b[i]) / (m.r[i + 1] - m.r[i]);
    return 2.0 * pi * s;
}

// vertex offset and peak value of the parabola through (-h, fm), (0, f0), (h, fp)
inline std::pair<double, double> parabola_peak(double fm, double f0, double fp, double h) {
    const double curv = fm - 2.0 * f0 + fp;
    if (!(curv < 0.0)) return {0.0, f0};
    const double t = 0.5 * (fm - fp) / curv;
    return {t * h, f0 - 0.125 * (fp - fm) * (fp - fm) / curv};
}

inline void fill_scales(BubbleDiagnostics& d) {
    d.mu = scaling_parameter(d.ep.p(), d.v_max);
    d.sigma = d.ep.theta() * std::log(d.v_max);
}

}  // namespace detail

/// Bubble data of a unit-disk radial solution. r_loc <= 0 selects the
/// default 0.25 dist(x_n, boundary) = 0.25.
inline BubbleDiagnostics extract_bubble(const RadialPair& sol, double r_loc = 0.0) {
    const auto& m = sol.mesh;
    if (sol.v.empty()) throw Error(ErrorKind::extraction, "empty radial solution");
    const auto it = std::max_element(sol.v.begin(), sol.v.end());
    if (it != sol.v.begin()) throw Error(ErrorKind::extraction, "maximum of v is not at the center");
    BubbleDiagnostics d;
    d.ep = sol.ep;
    // parabola through the mirrored node r_1: its vertex is the center
    d.x = {detail::parabola_peak(sol.v[1], sol.v[0], sol.v[1], m.r[1]).first, 0.0};
    d.v_max = sol.v[0];
    d.u_at_max = sol.u[0];
    d.r_loc = r_loc > 0.0 ? r_loc : 0.25;
    if (d.r_loc >= 1.0) throw Error(ErrorKind::domain, "mass ball leaves the disk");
    const double p = sol.ep.p(), q = sol.ep.q();
    d.mass_v = detail::radial_disk_integral(m, d.r_loc, [&](double r) { return pow_clamped(sol.v_at(r), p); });
    d.mass_u = detail::radial_disk_integral(m, d.r_loc, [&](double r) { return pow_clamped(sol.u_at(r), q); });
    d.energy_uv = p * detail::radial_gradient_product(m, sol.u, sol.v);
    d.energy_uu = p * detail::radial_gradient_product(m, sol.u, sol.u);
    d.energy_vv = p * detail::radial_gradient_product(m, sol.v, sol.v);
    detail::fill_scales(d);
    return d;
}

/// Bubble data of a planar field around its largest node value.
inline BubbleDiagnostics extract_bubble(const PairField& f, double r_loc = 0.0) {
    const Grid2D& g = *f.grid;
    const auto [vk, k] = f.v_peak();
    const auto [I, J] = g.lattice(k);
    const int st = g.is_fine(k) ? 1 : 2;
    const double h = g.local_h(k);
    auto at = [&](int a, int b) {
        const int m = g.index_at(a, b);
        if (m < 0) throw Error(ErrorKind::extraction, "maximum of v sits next to the boundary");
        return m;
    };
    const int xm = at(I - st, J), xp = at(I + st, J), ym = at(I, J - st), yp = at(I, J + st);
    const auto [dx, px] = detail::parabola_peak(f.v[xm], vk, f.v[xp], h);
    const auto [dy, py] = detail::parabola_peak(f.v[ym], vk, f.v[yp], h);
    BubbleDiagnostics d;
    d.ep = f.ep;
    d.x = g.node(k) + Point{dx, dy};
    d.v_max = px + py - vk;
    // u at the refined point from the same separable parabolas
    auto quad = [](double fm, double f0, double fp, double t) {
        return f0 + 0.5 * t * (fp - fm) + 0.5 * t * t * (fp - 2.0 * f0 + fm);
    };
    d.u_at_max = quad(f.u[xm], f.u[k], f.u[xp], dx / h) + quad(f.u[ym], f.u[k], f.u[yp], dy / h) - f.u[k];
    const double dist = g.domain().boundary_distance(d.x);
    d.r_loc = r_loc > 0.0 ? r_loc : 0.25 * dist;
    if (d.r_loc >= dist) throw Error(ErrorKind::domain, "mass ball leaves the domain");
    const double p = f.ep.p(), q = f.ep.q();
    for (int i = 0; i < g.size(); ++i) {
        if (distance(g.node(i), d.x) >= d.r_loc) continue;
        d.mass_v += g.weight(i) * pow_clamped(f.v[i], p);
        d.mass_u += g.weight(i) * pow_clamped(f.u[i], q);
    }
    const auto L = g.laplacian();
    const Eigen::VectorXd lu = -(L * f.u), lv = -(L * f.v);
    for (int i = 0; i < g.size(); ++i) {
        d.energy_uv += g.weight(i) * f.u[i] * lv[i];
        d.energy_uu += g.weight(i) * f.u[i] * lu[i];
        d.energy_vv += g.weight(i) * f.v[i] * lv[i];
    }
    d.energy_uv *= p;
    d.energy_uu *= p;
    d.energy_vv *= p;
    detail::fill_scales(d);
    return d;
}

/// p (v_max - u(x_n)) / (theta v_max log v_max); tends to 1.
inline double gap_law_ratio(const BubbleDiagnostics& d, const ExponentPair& ep) {
    if (ep.theta() == 0.0) throw Error(ErrorKind::argument, "gap ratio is undefined for theta = 0");
    return ep.p() * (d.v_max - d.u_at_max) / (ep.theta() * d.v_max * std::log(d.v_max));
}

// ---------------------------------------------------------------------------
// Inner profiles

struct ProfileError {
    double z_err = 0.0;  // sup |z - (U + t*/p)|
    double w_err = 0.0;  // sup |w - (U - sigma + s*/p)|
    double z0 = 0.0;     // z at the center
    double w0 = 0.0;     // w at the center
    int samples = 0;
    // sup over samples of |(w - z) + sigma - (s* - t*)/p|
    double difference_err = 0.0;
};

/// Rescaled profiles z = p/v0 (v(mu y) - v0), w = p/v0 (u(mu y) - v0) against
/// the corrected bubble on |y| <= rho, sampled at the mesh nodes.
inline ProfileError profile_error(const RadialPair& sol, const BubbleDiagnostics& d, const ExponentPair& ep,
                                  double rho) {
    const double R = rho * d.mu;
    if (!(R < 1.0)) throw Error(ErrorKind::domain, "rho mu reaches the boundary");
    const auto& m = sol.mesh;
    int inside = 0;
    for (double r : m.r) inside += r <= R;
    if (inside < 10) throw Error(ErrorKind::resolution, "fewer than 10 mesh nodes inside rho mu");
    const auto c = CorrectionConstants::make(ep.theta(), d.sigma);
    const double p = ep.p(), v0 = d.v_max;
    ProfileError out;
    for (int i = 0; i < inside; ++i) {
        const double y = m.r[i] / d.mu;
        const double z = p / v0 * (sol.v[i] - v0);
        const double w = p / v0 * (sol.u[i] - v0);
        const auto cp = correction_profiles(y, c);
        const double U = eval_bubble_radial(y);
        const double ez = z - (U + cp.t_star / p);
        const double ew = w - (U - d.sigma + cp.s_star / p);
        out.z_err = std::max(out.z_err, std::abs(ez));
        out.w_err = std::max(out.w_err, std::abs(ew));
        out.difference_err = std::max(out.difference_err, std::abs((w - z) + d.sigma - (cp.s_star - cp.t_star) / p));
        if (i == 0) {
            out.z0 = z;
            out.w0 = w;
        }
        ++out.samples;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pohozaev forms on a circle B_r(c)
//   P  = -2r oint <grad u, nu><grad v, nu> + r oint <grad u, grad v>
//   Q_i = -oint (<grad u, nu> d_i v + <grad v, nu> d_i u) + oint <grad u, grad v> nu_i
// against r oint F - 2 int_{B_r} F and oint F nu_i, F = u^{q+1}/(q+1) + v^{p+1}/(p+1).

struct PohozaevReport {
    double r = 0.0;
    double P_lhs = 0.0, P_rhs = 0.0;
    double Q1_lhs = 0.0, Q1_rhs = 0.0;
    double Q2_lhs = 0.0, Q2_rhs = 0.0;
    double P_residual = 0.0, Q1_residual = 0.0, Q2_residual = 0.0;

    double P_relative() const { return P_residual / std::abs(P_lhs); }
};

struct BoundarySample {
    Point grad_u, grad_v;
    double F = 0.0;
};

inline constexpr int pohozaev_angles = 256;

/// Boundary quadrature (trapezoid in the angle) given a boundary sampler and
/// the interior integral of F.
inline PohozaevReport pohozaev_forms(const Point& c, double r, const std::function<BoundarySample(const Point&)>& at,
                                     double interior_F, int n_theta = pohozaev_angles) {
    PohozaevReport out;
    out.r = r;
    const double ds = 2.0 * pi * r / n_theta;
    double bF = 0.0;
    for (int k = 0; k < n_theta; ++k) {
        const double t = 2.0 * pi * k / n_theta;
        const Point nu{std::cos(t), std::sin(t)};
        const auto s = at(c + r * nu);
        const double gun = dot(s.grad_u, nu), gvn = dot(s.grad_v, nu), guv = dot(s.grad_u, s.grad_v);
        out.P_lhs += ds * (-2.0 * r * gun * gvn + r * guv);
        out.Q1_lhs += ds * (-(gun * s.grad_v.x + gvn * s.grad_u.x) + guv * nu.x);
        out.Q2_lhs += ds * (-(gun * s.grad_v.y + gvn * s.grad_u.y) + guv * nu.y);
        bF += ds * s.F;
        out.Q1_rhs += ds * s.F * nu.x;
        out.Q2_rhs += ds * s.F * nu.y;
    }
    out.P_rhs = r * bF - 2.0 * interior_F;
    out.P_residual = std::abs(out.P_lhs - out.P_rhs);
    out.Q1_residual = std::abs(out.Q1_lhs - out.Q1_rhs);
    out.Q2_residual = std::abs(out.Q2_lhs - out.Q2_rhs);
    return out;
}

/// Pohozaev check on a unit-disk radial solution, ball centered at the origin.
inline PohozaevReport pohozaev_check(const RadialPair& sol, double r) {
    if (!(r > 0.0 && r < 1.0)) throw Error(ErrorKind::domain, "Pohozaev ball leaves the disk");
    const double p = sol.ep.p(), q = sol.ep.q();
    auto F = [&](double s) {
        return pow_clamped(sol.u_at(s), q + 1.0) / (q + 1.0) + pow_clamped(sol.v_at(s), p + 1.0) / (p + 1.0);
    };
    const double du = sol.du_at(r), dv = sol.dv_at(r), Fr = F(r);
    auto at = [&](const Point& x) {
        const Point e = (1.0 / norm(x)) * x;
        return BoundarySample{du * e, dv * e, Fr};
    };
    return pohozaev_forms({0.0, 0.0}, r, at, detail::radial_disk_integral(sol.mesh, r, F));
}

/// Pohozaev check on a planar field; values off the nodes come from local
/// quadratic fits, the interior integral from the node weights.
inline PohozaevReport pohozaev_check(const PairField& f, const Point& c, double r) {
    const Grid2D& g = *f.grid;
    if (!(r > 0.0) || !(g.domain().boundary_distance(c) > r)) throw Error(ErrorKind::domain, "Pohozaev ball leaves the domain");
    const double p = f.ep.p(), q = f.ep.q();
    auto F = [&](double u, double v) {
        return pow_clamped(u, q + 1.0) / (q + 1.0) + pow_clamped(v, p + 1.0) / (p + 1.0);
    };
    double interior = 0.0;
    for (int i = 0; i < g.size(); ++i)
        if (distance(g.node(i), c) < r) interior += g.weight(i) * F(f.u[i], f.v[i]);
    auto at = [&](const Point& x) {
        const auto s = sample_field(f, x);
        return BoundarySample{s.grad_u, s.grad_v, F(std::max(s.u, 0.0), std::max(s.v, 0.0))};
    };
    return pohozaev_forms(c, r, at, interior);
}

/// P and Q forms of u = v = G(x_n, .), for which both right-hand sides vanish.
inline PohozaevReport pohozaev_green(const GreenModel& model, const Point& xn, double r) {
    if (!(model.domain().boundary_distance(xn) > r)) throw Error(ErrorKind::domain, "Pohozaev ball leaves the domain");
    auto at = [&](const Point& x) {
        const auto e = model.green(x, xn);
        return BoundarySample{e.grad, e.grad, 0.0};
    };
    return pohozaev_forms(xn, r, at, 0.0);
}

// ---------------------------------------------------------------------------
// Outer expansion p u -> 8 pi sqrt(e) sum_i G(x, x_i)

struct OuterError {
    double u_err = 0.0;
    double v_err = 0.0;
};

inline constexpr double outer_min_distance = 0.2;

inline OuterError outer_expansion_check(const std::function<std::pair<double, double>(const Point&)>& uv,
                                        double p, const GreenModel& model, const std::vector<Point>& bubbles,
                                        const std::vector<Point>& test_points) {
    OuterError out;
    for (const auto& x : test_points) {
        double G = 0.0;
        for (const auto& b : bubbles) {
            if (distance(x, b) < outer_min_distance)
                throw Error(ErrorKind::domain, "test point too close to a bubble");
            G += model.green(x, b).value;
        }
        const auto [u, v] = uv(x);
        out.u_err = std::max(out.u_err, std::abs(p * u - 8.0 * pi * sqrt_e * G));
        out.v_err = std::max(out.v_err, std::abs(p * v - 8.0 * pi * sqrt_e * G));
    }
    return out;
}

inline OuterError outer_expansion_check(const RadialPair& sol, const GreenModel& model,
                                        const std::vector<Point>& test_points) {
    auto uv = [&](const Point& x) {
        const double r = std::min(1.0, norm(x));
        return std::pair{sol.u_at(r), sol.v_at(r)};
    };
    return outer_expansion_check(uv, sol.ep.p(), model, {{0.0, 0.0}}, test_points);
}

inline OuterError outer_expansion_check(const PairField& f, const GreenModel& model, const std::vector<Point>& bubbles,
                                        const std::vector<Point>& test_points) {
    auto uv = [&](const Point& x) {
        const auto s = sample_field(f, x);
        return std::pair{s.u, s.v};
    };
    return outer_expansion_check(uv, f.ep.p(), model, bubbles, test_points);
}

/// Least-squares slope through the origin of p u(r) against
/// G(r, 0) = -log(r) / (2 pi) over mesh nodes with r >= r_min.
inline double outer_coefficient_fit(const RadialPair& sol, double r_min = outer_min_distance) {
    double sxy = 0.0, sxx = 0.0;
    for (int i = 0; i + 1 < sol.mesh.size(); ++i) {
        const double r = sol.mesh.r[i];
        if (r < r_min) continue;
        const double G = -std::log(r) / (2.0 * pi);
        sxy += G * sol.ep.p() * sol.u[i];
        sxx += G * G;
    }
    if (sxx == 0.0) throw Error(ErrorKind::resolution, "no mesh nodes in the outer region");
    return sxy / sxx;
}

// ---------------------------------------------------------------------------
// Rate reports

struct RateRow {
    double p = 0.0, theta = 0.0;
    double v_max = 0.0, v_pred = 0.0;
    double u_max = 0.0, u_pred = 0.0;
    double mu = 0.0, mu_pred = 0.0;
    double gap_ratio = std::numeric_limits<double>::quiet_NaN();
    double energy = 0.0;
    double mass = 0.0;  // p int_{B_r} v^p

    /// -log mu - p/4 - (3/2 log 2 + 3/4 + theta/8) - 2 pi Phi
    double mu_law_remainder(double phi = 0.0) const {
        return -std::log(mu) - p / 4.0 - (1.5 * std::log(2.0) + 0.75 + theta / 8.0) - 2.0 * pi * phi;
    }
};

struct RateReport {
    std::vector<RateRow> rows;
    double phi = 0.0;
    std::optional<double> v_order, u_order, mu_order;
};

namespace detail {

inline std::optional<double> fitted_order(const std::vector<RateRow>& rows, const std::function<double(const RateRow&)>& err) {
    if (rows.size() < 4) return std::nullopt;
    std::vector<double> xs, ys;
    for (const auto& r : rows) {
        const double e = std::abs(err(r));
        if (!(e > 0.0)) return std::nullopt;
        xs.push_back(std::log(r.p));
        ys.push_back(std::log(e));
    }
    return least_squares_slope(xs, ys);
}

}  // namespace detail

/// Rows for a continuation run. When a run on a mesh refined twice is given,
/// the maxima are Richardson-extrapolated (second order) before comparison.
inline RateReport build_rate_report(const std::vector<RadialPair>& runs, const std::vector<RadialPair>& fine = {},
                                    double phi = 0.0) {
    if (!fine.empty() && fine.size() != runs.size()) throw Error(ErrorKind::argument, "refined run has another length");
    RateReport rep;
    rep.phi = phi;
    for (std::size_t k = 0; k < runs.size(); ++k) {
        const auto& s = runs[k];
        auto d = extract_bubble(s);
        if (!fine.empty()) {
            if (fine[k].ep.p() != s.ep.p() || fine[k].ep.theta() != s.ep.theta())
                throw Error(ErrorKind::argument, "refined run has other exponents");
            const auto df = extract_bubble(fine[k]);
            d.v_max = (4.0 * df.v_max - d.v_max) / 3.0;
            d.u_at_max = (4.0 * df.u_at_max - d.u_at_max) / 3.0;
            d.energy_uv = (4.0 * df.energy_uv - d.energy_uv) / 3.0;
            d.mass_v = (4.0 * df.mass_v - d.mass_v) / 3.0;
            detail::fill_scales(d);
        }
        const auto pr = predict_rates(s.ep, phi);
        RateRow row;
        row.p = s.ep.p();
        row.theta = s.ep.theta();
        row.v_max = d.v_max;
        row.v_pred = pr.v_max;
        row.u_max = d.u_at_max;
        row.u_pred = pr.u_max;
        row.mu = d.mu;
        row.mu_pred = pr.mu;
        if (s.ep.theta() > 0.0) row.gap_ratio = gap_law_ratio(d, s.ep);
        row.energy = d.energy_uv;
        row.mass = s.ep.p() * d.mass_v;
        rep.rows.push_back(row);
    }
    std::sort(rep.rows.begin(), rep.rows.end(), [](const RateRow& a, const RateRow& b) { return a.p < b.p; });
    rep.v_order = detail::fitted_order(rep.rows, [](const RateRow& r) { return r.v_max - r.v_pred; });
    rep.u_order = detail::fitted_order(rep.rows, [](const RateRow& r) { return r.u_max - r.u_pred; });
    rep.mu_order = detail::fitted_order(rep.rows, [phi](const RateRow& r) { return r.mu_law_remainder(phi); });
    return rep;
}

}  // namespace lel
