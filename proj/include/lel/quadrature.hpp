#pragma once

// Adaptive quadrature helpers. Improper radial integrals are mapped to [0, 1)
// with t = r / (1 + r) and handed to an adaptive Gauss-Kronrod rule.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <string>

#include "lel/core.hpp"

namespace lel {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
};

namespace detail {

inline void check_quadrature(const QuadResult& q, double tol, const char* what) {
    if (!std::isfinite(q.value) || q.error > tol * std::max(1.0, std::abs(q.value)))
        throw Error(ErrorKind::quadrature,
                    std::string(what) + " did not converge (error estimate " + std::to_string(q.error) + ")");
}

}  // namespace detail

/// Adaptive Gauss-Kronrod on a finite interval.
template <class F>
QuadResult integrate(F&& f, double a, double b, double tol = 1e-12, unsigned max_depth = 25) {
    QuadResult q;
    q.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, max_depth, tol, &q.error);
    detail::check_quadrature(q, 1e3 * tol, "finite-interval quadrature");
    return q;
}

/// \int_0^\infty f(r) dr through r = t / (1 - t).
template <class F>
QuadResult integrate_half_line(F&& f, double tol = 1e-12, unsigned max_depth = 25) {
    auto mapped = [&](double t) {
        if (t >= 1.0) return 0.0;
        const double s = 1.0 - t;
        return f(t / s) / (s * s);
    };
    QuadResult q;
    q.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(mapped, 0.0, 1.0, max_depth, tol, &q.error);
    detail::check_quadrature(q, 1e3 * tol, "half-line quadrature");
    return q;
}

/// \int_{R^2} g(|x|) dx = 2 pi \int_0^\infty g(r) r dr.
template <class G>
QuadResult integrate_radial_plane(G&& g, double tol = 1e-12) {
    auto q = integrate_half_line([&](double r) { return g(r) * r; }, tol);
    q.value *= 2.0 * pi;
    q.error *= 2.0 * pi;
    return q;
}

}  // namespace lel
