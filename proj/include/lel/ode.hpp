#pragma once

// Second-order radial ODEs  phi'' + phi'/r = F(r, phi)  written in s = log r,
// where they become  phi_ss = r^2 F(r, phi)  and the polar-axis singularity
// disappears. Integration uses an adaptive Fehlberg 7(8) pair.

#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <vector>

#include "lel/core.hpp"

namespace lel {

using OdeState = std::array<double, 2>;  // (phi, r phi') = (phi, phi_s)

struct LogRadialSamples {
    std::vector<double> s;      // log r, uniform
    std::vector<double> value;  // phi
    std::vector<double> flux;   // r phi'(r)
};

/// Integrates phi_ss = rhs(r, phi, phi_s) from s0 with state y0 and records the
/// solution on the uniform s-grid s0, s0 + ds, ..., s1.
template <class Rhs>
LogRadialSamples integrate_log_radial(Rhs&& rhs, double s0, double s1, double ds, OdeState y0,
                                      double rel_tol = 1e-10, double abs_tol = 1e-13) {
    namespace odeint = boost::numeric::odeint;
    if (!(s1 > s0) || !(ds > 0.0)) throw Error(ErrorKind::argument, "invalid log-radial integration range");

    const auto n = static_cast<std::size_t>(std::ceil((s1 - s0) / ds));
    LogRadialSamples out;
    out.s.reserve(n + 1);
    std::vector<double> times(n + 1);
    for (std::size_t i = 0; i <= n; ++i) times[i] = s0 + (s1 - s0) * static_cast<double>(i) / static_cast<double>(n);

    auto system = [&](const OdeState& y, OdeState& dy, double s) {
        const double r = std::exp(s);
        dy[0] = y[1];
        dy[1] = rhs(r, y[0], y[1]);
    };
    auto observer = [&](const OdeState& y, double s) {
        out.s.push_back(s);
        out.value.push_back(y[0]);
        out.flux.push_back(y[1]);
    };
    auto stepper = odeint::make_controlled(abs_tol, rel_tol, odeint::runge_kutta_fehlberg78<OdeState>());
    odeint::integrate_times(stepper, system, y0, times.begin(), times.end(), ds / 4.0, observer);
    return out;
}

}  // namespace lel
