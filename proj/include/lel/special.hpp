#pragma once

// Limit profiles of the rescaled Lane-Emden system: the Liouville bubble U,
// the kernel functions phi_0..phi_3 of the linearized limit system, the radial
// correction psi_0, and the first-order correction profiles s*, t*.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "lel/core.hpp"
#include "lel/ode.hpp"
#include "lel/quadrature.hpp"

namespace lel {

// ---------------------------------------------------------------------------
// Liouville bubble

/// U_theta(x) = theta/2 - 2 log(1 + e^{theta/2} |x|^2 / 8); theta = 0 gives U.
inline double eval_bubble_radial(double r, double theta = 0.0) noexcept {
    const double a = std::exp(0.5 * theta);
    return 0.5 * theta - 2.0 * std::log1p(a * r * r / 8.0);
}

inline double eval_bubble(const Point& x, double theta = 0.0) noexcept {
    return eval_bubble_radial(norm(x), theta);
}

/// dU/dr for theta = 0.
inline double bubble_derivative(double r) noexcept { return -4.0 * r / (8.0 + r * r); }

/// e^{U(r)} = 64 / (8 + r^2)^2.
inline double bubble_density(double r) noexcept {
    const double d = 8.0 + r * r;
    return 64.0 / (d * d);
}

// ---------------------------------------------------------------------------
// Kernel functions phi_0, phi_1, phi_2 (closed form)

struct KernelEval {
    double value = 0.0;
    Point grad;
    double laplacian = 0.0;
};

/// phi_0 = (8 - |x|^2)/(8 + |x|^2), phi_i = x_i/(8 + |x|^2) with analytic
/// gradient and Laplacian.
inline KernelEval eval_phi(int j, const Point& x) {
    const double r2 = norm2(x);
    const double d = 8.0 + r2;
    KernelEval k;
    switch (j) {
        case 0: {
            k.value = (8.0 - r2) / d;
            const double dr_over_r = -32.0 / (d * d);
            k.grad = dr_over_r * x;
            k.laplacian = -64.0 * (8.0 - r2) / (d * d * d);
            return k;
        }
        case 1:
        case 2: {
            const double xi = x[j - 1];
            k.value = xi / d;
            const double g = 1.0 / d;
            const double gp_over_r = -2.0 / (d * d);
            Point e = j == 1 ? Point{1.0, 0.0} : Point{0.0, 1.0};
            k.grad = g * e + (xi * gp_over_r) * x;
            k.laplacian = -64.0 * xi / (d * d * d);
            return k;
        }
        default:
            throw Error(ErrorKind::argument, "eval_phi: index must be 0, 1 or 2, got " + std::to_string(j));
    }
}

/// phi_0 as a radial function with its r-derivative.
inline double phi0_radial(double r) noexcept { return (8.0 - r * r) / (8.0 + r * r); }
inline double phi0_derivative(double r) noexcept {
    const double d = 8.0 + r * r;
    return -32.0 * r / (d * d);
}

// ---------------------------------------------------------------------------
// Sampled radial profiles

enum class ProfileMethod { series, ode, closed_form };

/// Radial function sampled on a log-uniform grid, evaluated by cubic Hermite
/// interpolation in s = log r.
class RadialProfile {
public:
    RadialProfile() = default;

    RadialProfile(const LogRadialSamples& samples, ProfileMethod method) : method_(method) {
        const std::size_t n = samples.s.size();
        if (n < 2) throw Error(ErrorKind::argument, "radial profile needs at least two samples");
        s0_ = samples.s.front();
        ds_ = (samples.s.back() - s0_) / static_cast<double>(n - 1);
        radii_.resize(n);
        values_ = samples.value;
        slopes_ = samples.flux;
        derivs_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            radii_[i] = std::exp(samples.s[i]);
            derivs_[i] = slopes_[i] / radii_[i];
        }
    }

    ProfileMethod method() const noexcept { return method_; }
    double r_min() const noexcept { return radii_.front(); }
    double r_max() const noexcept { return radii_.back(); }
    const std::vector<double>& radii() const noexcept { return radii_; }
    const std::vector<double>& values() const noexcept { return values_; }
    const std::vector<double>& derivatives() const noexcept { return derivs_; }

    struct Eval {
        double value;
        double derivative;
    };

    Eval operator()(double r) const {
        if (!(r >= r_min() * (1.0 - 1e-12)) || !(r <= r_max() * (1.0 + 1e-12)))
            throw Error(ErrorKind::domain, "radial profile evaluated outside its sampled range");
        const double s = std::log(r);
        const auto last = static_cast<double>(radii_.size() - 2);
        const double pos = std::clamp((s - s0_) / ds_, 0.0, last + 1.0);
        const auto i = static_cast<std::size_t>(std::min(std::floor(pos), last));
        const double t = pos - static_cast<double>(i);
        const double h = ds_;
        const double y0 = values_[i], y1 = values_[i + 1];
        const double m0 = slopes_[i] * h, m1 = slopes_[i + 1] * h;
        const double t2 = t * t, t3 = t2 * t;
        const double value = (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * m1;
        const double dvalue_dt = (6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * m0 + (-6 * t2 + 6 * t) * y1 + (3 * t2 - 2 * t) * m1;
        return {value, dvalue_dt / h / r};
    }

private:
    ProfileMethod method_ = ProfileMethod::ode;
    double s0_ = 0.0;
    double ds_ = 1.0;
    std::vector<double> radii_;
    std::vector<double> values_;
    std::vector<double> slopes_;  // r * phi'(r)
    std::vector<double> derivs_;
};

namespace profile_grid {
inline constexpr double r_start = 1e-3;  // series start for the ODE paths
inline constexpr double r_end = 1e5;
inline constexpr double ds = 0.005;
}  // namespace profile_grid

// ---------------------------------------------------------------------------
// Correction constants

/// Flux constant C0 = (e^{sqrt7 pi/2} + e^{-sqrt7 pi/2}) / pi.
inline double kernel_flux_constant() noexcept {
    const double a = std::sqrt(7.0) * pi / 2.0;
    return (std::exp(a) + std::exp(-a)) / pi;
}

struct CorrectionConstants {
    double C0 = 0.0;
    double m = 0.0;
    double l = 0.0;
    double sigma = 0.0;
    double theta = 0.0;

    static CorrectionConstants make(double theta, double sigma) {
        if (!(theta >= 0.0)) throw Error(ErrorKind::argument, "correction constants require theta >= 0");
        CorrectionConstants c;
        c.C0 = kernel_flux_constant();
        c.m = -2.0 * theta / c.C0;
        c.l = c.m + theta + sigma;
        c.sigma = sigma;
        c.theta = theta;
        return c;
    }
};

// ---------------------------------------------------------------------------
// phi_3 = 2F1(d, 1 - d; 1; r^2 / (8 + r^2)),  d = (1 + i sqrt7)/2

struct SeriesEval {
    double value = 0.0;
    double derivative = 0.0;  // d/dr
    std::size_t terms = 0;
    bool converged = false;
};

inline constexpr std::size_t phi3_series_term_cap = 10000;
inline constexpr double phi3_series_radius = 6.0;

/// Power series in z = r^2/(8+r^2). The coefficients are real because
/// (d + j)(1 - d + j) = j^2 + j + 2.
inline SeriesEval eval_phi3_series(double r) {
    if (!(r >= 0.0)) throw Error(ErrorKind::argument, "eval_phi3_series: r must be >= 0");
    const double d = 8.0 + r * r;
    const double z = r * r / d;
    const double dz_dr = 16.0 * r / (d * d);
    SeriesEval out;
    double term = 1.0;   // a_j z^j
    double sum = 1.0;
    double dsum = 0.0;   // sum_j j a_j z^{j-1}
    const double tail_factor = z < 1.0 ? z / (1.0 - z) : 1e300;
    for (std::size_t j = 0; j < phi3_series_term_cap; ++j) {
        const double jj = static_cast<double>(j);
        const double ratio = (jj * jj + jj + 2.0) / ((jj + 1.0) * (jj + 1.0));
        if (z == 0.0) {
            out.converged = true;
            out.terms = 1;
            break;
        }
        const double dterm = (jj + 1.0) * term * ratio;  // (j+1) a_{j+1} z^j
        term *= ratio * z;
        sum += term;
        dsum += dterm;
        out.terms = j + 2;
        if (term * tail_factor <= 1e-16 * std::abs(sum) && dterm * (jj + 2.0) * tail_factor <= 1e-16 * std::abs(dsum)) {
            out.converged = true;
            break;
        }
    }
    out.value = sum;
    out.derivative = dsum * dz_dr;
    return out;
}

/// phi_3 by integrating -phi'' - phi'/r + e^U phi = 0 from phi(0) = 1, phi'(0) = 0.
inline RadialProfile build_phi3_ode_profile(double r_end = profile_grid::r_end, double ds = profile_grid::ds) {
    const double r0 = profile_grid::r_start;
    const OdeState y0{1.0 + 0.25 * r0 * r0, 0.5 * r0 * r0};
    auto rhs = [](double r, double phi, double) { return r * r * bubble_density(r) * phi; };
    return RadialProfile(integrate_log_radial(rhs, std::log(r0), std::log(r_end), ds, y0), ProfileMethod::ode);
}

inline const RadialProfile& phi3_ode_profile() {
    static const RadialProfile profile = build_phi3_ode_profile();
    return profile;
}

/// phi_3 and phi_3'. Series for r <= 6, ODE profile beyond, logarithmic
/// continuation past the sampled range.
inline RadialProfile::Eval eval_phi3(double r) {
    if (!(r >= 0.0)) throw Error(ErrorKind::argument, "eval_phi3: r must be >= 0");
    if (r <= phi3_series_radius) {
        const auto s = eval_phi3_series(r);
        if (!s.converged) throw Error(ErrorKind::series, "phi3 series failed its tail bound");
        return {s.value, s.derivative};
    }
    const auto& prof = phi3_ode_profile();
    if (r <= prof.r_max()) return prof(r);
    const double R = prof.r_max();
    const double half_c0 = 0.5 * kernel_flux_constant();
    const double base = prof(R).value;
    return {base + half_c0 * (std::log1p(r * r / 8.0) - std::log1p(R * R / 8.0)), half_c0 * 2.0 * r / (8.0 + r * r)};
}

/// Least-squares slope of phi_3 against log(1 + r^2/8) on n points uniform in r.
inline double phi3_log_slope(double r_lo, double r_hi, int n = 201) {
    std::vector<double> xs, ys;
    for (int i = 0; i < n; ++i) {
        const double r = r_lo + (r_hi - r_lo) * i / (n - 1.0);
        xs.push_back(std::log1p(r * r / 8.0));
        ys.push_back(eval_phi3(r).value);
    }
    return least_squares_slope(xs, ys);
}

// ---------------------------------------------------------------------------
// psi_0: radial solution of -Delta psi - e^U psi + U^2 e^U / 2 = 0, psi(0) = psi'(0) = 0

inline RadialProfile build_psi0_ode_profile(double r_end = profile_grid::r_end, double ds = profile_grid::ds) {
    const double r0 = profile_grid::r_start;
    // psi = r^6/1152 + O(r^8) near the origin
    const double r6 = std::pow(r0, 6);
    const OdeState y0{r6 / 1152.0, 6.0 * r6 / 1152.0};
    auto rhs = [](double r, double psi, double) {
        const double u = eval_bubble_radial(r);
        return r * r * bubble_density(r) * (0.5 * u * u - psi);
    };
    return RadialProfile(integrate_log_radial(rhs, std::log(r0), std::log(r_end), ds, y0), ProfileMethod::ode);
}

inline const RadialProfile& psi0_ode_profile() {
    static const RadialProfile profile = build_psi0_ode_profile();
    return profile;
}

/// psi_0 and psi_0' from the ODE path. Past the sampled range the
/// 12 log r growth is continued.
inline RadialProfile::Eval eval_psi0(double r) {
    if (!(r >= 0.0)) throw Error(ErrorKind::argument, "eval_psi0: r must be >= 0");
    const auto& prof = psi0_ode_profile();
    if (r < prof.r_min()) {
        const double r5 = std::pow(r, 5);
        return {r5 * r / 1152.0, 6.0 * r5 / 1152.0};
    }
    if (r <= prof.r_max()) return prof(r);
    const double R = prof.r_max();
    return {prof(R).value + 12.0 * std::log(r / R), 12.0 / r};
}

/// Least-squares slope of psi_0 against log r on n log-spaced points.
inline double psi0_log_slope(double r_lo, double r_hi, int n = 101) {
    std::vector<double> xs, ys;
    for (int i = 0; i < n; ++i) {
        const double s = std::log(r_lo) + (std::log(r_hi) - std::log(r_lo)) * i / (n - 1.0);
        xs.push_back(s);
        ys.push_back(eval_psi0(std::exp(s)).value);
    }
    return least_squares_slope(xs, ys);
}

/// Integrand s(1 - s^2)/(1 + s^2)^3 log^2(1 + s^2) of the variation-of-parameters formula.
inline double psi0_kernel_integrand(double s) noexcept {
    const double s2 = s * s;
    const double l = std::log1p(s2);
    const double d = 1.0 + s2;
    return s * (1.0 - s2) / (d * d * d) * l * l;
}

/// Auxiliary function of the closed form, in the variable rho = |x|/sqrt(8).
inline double psi0_tilde(double rho) {
    if (rho < 1e-6) return 0.0;  // O(rho^5)
    const double inner = integrate(psi0_kernel_integrand, 0.0, rho, 1e-13, 12).value;
    const double a = 1.0 + rho * rho;
    const double b = 1.0 + rho;
    return 16.0 * a * a / (rho * b * b) * inner;
}

/// Closed-form psi_0 by variation of parameters around phi_0. Valid away from
/// the removable singularity at r = sqrt(8); used as a cross-check on [0, 2.5].
inline double eval_psi0_closed_form(double r) {
    if (!(r >= 0.0)) throw Error(ErrorKind::argument, "eval_psi0_closed_form: r must be >= 0");
    if (r == 0.0) return 0.0;
    const double a = r / std::sqrt(8.0);
    if (a >= 0.95) throw Error(ErrorKind::domain, "closed-form psi0 is only evaluated for r < 0.95 sqrt(8)");
    const double pt1 = psi0_tilde(1.0);
    auto outer = [pt1](double s) {
        const double w = 1.0 - s;
        return (psi0_tilde(s) - pt1) / (w * w);
    };
    const double integral = integrate(outer, 0.0, a, 1e-11, 12).value;
    return phi0_radial(r) * (integral + pt1 * a / (1.0 - a));
}

// ---------------------------------------------------------------------------
// Correction profiles s*, t*

struct CorrectionProfiles {
    double s_star = 0.0;
    double t_star = 0.0;
    double s_star_derivative = 0.0;
    double t_star_derivative = 0.0;
};

/// s* = psi0 + l phi0 + m phi3 - (theta + sigma) U + sigma theta + sigma^2/2,
/// t* = psi0 + l phi0 - m phi3 - (theta + sigma).
inline CorrectionProfiles correction_profiles(double r, const CorrectionConstants& c) {
    const auto psi = eval_psi0(r);
    const auto p3 = eval_phi3(r);
    const double p0 = phi0_radial(r), dp0 = phi0_derivative(r);
    const double u = eval_bubble_radial(r), du = bubble_derivative(r);
    const double ts = c.theta + c.sigma;
    CorrectionProfiles out;
    out.s_star = psi.value + c.l * p0 + c.m * p3.value - ts * u + c.sigma * c.theta + 0.5 * c.sigma * c.sigma;
    out.t_star = psi.value + c.l * p0 - c.m * p3.value - ts;
    out.s_star_derivative = psi.derivative + c.l * dp0 + c.m * p3.derivative - ts * du;
    out.t_star_derivative = psi.derivative + c.l * dp0 - c.m * p3.derivative;
    return out;
}

inline CorrectionProfiles correction_profiles(double r, const ExponentPair& ep, double sigma) {
    return correction_profiles(r, CorrectionConstants::make(ep.theta(), sigma));
}

/// Outward flux 2 pi R t*'(R) of t* through the circle of radius R.
inline double laplacian_tstar_flux(double R, const CorrectionConstants& c) {
    return 2.0 * pi * R * correction_profiles(R, c).t_star_derivative;
}

/// \int_{R^2} Delta t*: flux at R = 1e3 and 1e4 extrapolated linearly in 1/R.
inline QuadResult laplacian_tstar_integral(const CorrectionConstants& c) {
    const double f3 = laplacian_tstar_flux(1e3, c);
    const double f4 = laplacian_tstar_flux(1e4, c);
    return {(10.0 * f4 - f3) / 9.0, std::abs(f4 - f3) / 9.0};
}

// ---------------------------------------------------------------------------
// Reference integrals

struct NamedIntegral {
    std::string name;
    double value = 0.0;
    double error = 0.0;
};

/// Quadrature values of the integrals the asymptotic expansion is assembled from.
inline std::vector<NamedIntegral> reference_integrals(double theta) {
    std::vector<NamedIntegral> out;
    auto add = [&out](std::string name, QuadResult q) { out.push_back({std::move(name), q.value, q.error}); };

    add("int_eU", integrate_radial_plane([theta](double r) { return std::exp(eval_bubble_radial(r, theta)); }));
    add("int_U_eU_phi0", integrate_radial_plane([](double r) {
            return eval_bubble_radial(r) * bubble_density(r) * phi0_radial(r);
        }));
    // \int y_1 e^U phi_1 = pi \int_0^inf r^3 e^U / (8 + r^2) dr after the angular integral
    {
        auto q = integrate_half_line([](double r) { return r * r * r * bubble_density(r) / (8.0 + r * r); });
        add("int_y1_eU_phi1", {pi * q.value, pi * q.error});
    }
    add("int_eU_phi3", integrate_radial_plane([](double r) { return bubble_density(r) * eval_phi3(r).value; }, 1e-10));
    {
        auto q = integrate_radial_plane([](double r) { return std::log(r) * bubble_density(r); });
        add("int_logy_eU_over_2pi", {q.value / (2.0 * pi), q.error / (2.0 * pi)});
    }
    add("psi_tilde_integral", integrate_half_line(psi0_kernel_integrand));
    add("flux_lap_tstar", laplacian_tstar_integral(CorrectionConstants::make(theta, 0.5 * theta)));
    return out;
}

}  // namespace lel
