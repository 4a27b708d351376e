#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace lel {

inline constexpr double pi = std::numbers::pi;
inline constexpr double sqrt_e = 1.6487212707001282;  // e^{1/2}

/// Planar point / vector.
struct Point {
    double x = 0.0;
    double y = 0.0;

    constexpr Point& operator+=(const Point& o) noexcept { x += o.x; y += o.y; return *this; }
    constexpr Point& operator-=(const Point& o) noexcept { x -= o.x; y -= o.y; return *this; }
    friend constexpr Point operator+(Point a, const Point& b) noexcept { return a += b; }
    friend constexpr Point operator-(Point a, const Point& b) noexcept { return a -= b; }
    friend constexpr Point operator*(double s, const Point& a) noexcept { return {s * a.x, s * a.y}; }
    friend constexpr Point operator*(const Point& a, double s) noexcept { return {s * a.x, s * a.y}; }
    friend constexpr Point operator/(const Point& a, double s) noexcept { return {a.x / s, a.y / s}; }
    friend constexpr bool operator==(const Point&, const Point&) = default;
    constexpr double operator[](int i) const noexcept { return i == 0 ? x : y; }
};

inline double dot(const Point& a, const Point& b) noexcept { return a.x * b.x + a.y * b.y; }
inline double norm2(const Point& a) noexcept { return dot(a, a); }
inline double norm(const Point& a) noexcept { return std::hypot(a.x, a.y); }
inline double distance(const Point& a, const Point& b) noexcept { return norm(a - b); }

/// Symmetric 2x2 matrix stored as (xx, xy, yy).
struct Sym2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;
};

enum class ErrorKind {
    argument,
    domain,
    parameter,
    no_convergence,
    linear_solve,
    positivity,
    continuation,
    quadrature,
    series,
    resolution,
    extraction,
    probe,
    config,
    io,
};

inline const char* to_string(ErrorKind k) noexcept {
    switch (k) {
        case ErrorKind::argument: return "argument";
        case ErrorKind::domain: return "domain";
        case ErrorKind::parameter: return "parameter";
        case ErrorKind::no_convergence: return "no-convergence";
        case ErrorKind::linear_solve: return "linear-solve";
        case ErrorKind::positivity: return "positivity";
        case ErrorKind::continuation: return "continuation";
        case ErrorKind::quadrature: return "quadrature";
        case ErrorKind::series: return "series";
        case ErrorKind::resolution: return "resolution";
        case ErrorKind::extraction: return "extraction";
        case ErrorKind::probe: return "probe";
        case ErrorKind::config: return "config";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Solver failure that keeps the last iterate for inspection or restart.
template <class Iterate>
class SolveError : public Error {
public:
    SolveError(ErrorKind kind, const std::string& what, Iterate last)
        : Error(kind, what), last_(std::move(last)) {}

    const Iterate& last_iterate() const noexcept { return last_; }

private:
    Iterate last_;
};

/// Exponent pair (p, q) with q = p + theta, theta >= 0.
class ExponentPair {
public:
    ExponentPair(double p, double theta) : p_(p), theta_(theta) {
        if (!(p >= 1.0) || !(theta >= 0.0) || !std::isfinite(p) || !std::isfinite(theta))
            throw Error(ErrorKind::argument, "exponent pair requires p >= 1 and theta >= 0");
    }

    static ExponentPair from_pq(double p, double q) {
        if (!(q >= p)) throw Error(ErrorKind::argument, "exponent pair requires q >= p");
        return ExponentPair(p, q - p);
    }

    double p() const noexcept { return p_; }
    double q() const noexcept { return p_ + theta_; }
    double theta() const noexcept { return theta_; }
    bool symmetric() const noexcept { return theta_ == 0.0; }

private:
    double p_;
    double theta_;
};

/// x^e for x > 0 evaluated as exp(e log x), with x clamped below at 1e-300.
inline double pow_clamped(double x, double e) noexcept {
    return std::exp(e * std::log(std::max(x, 1e-300)));
}

/// Unweighted least-squares slope of ys against xs.
inline double least_squares_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) throw Error(ErrorKind::argument, "slope fit needs matching samples");
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double den = n * sxx - sx * sx;
    if (den == 0.0) throw Error(ErrorKind::argument, "slope fit on degenerate abscissae");
    return (n * sxy - sx * sy) / den;
}

}  // namespace lel
