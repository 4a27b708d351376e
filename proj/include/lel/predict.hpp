#pragma once

// Leading-order predictions for one bubble at a point with Kirchhoff-Routh
// value Phi: maxima of v and u, and the scaling parameter mu.

#include <cmath>

#include "lel/core.hpp"

namespace lel {

struct RatePrediction {
    double v_max = 0.0;
    double u_max = 0.0;
    double mu = 0.0;
    double log_mu = 0.0;
};

inline RatePrediction predict_rates(const ExponentPair& ep, double phi_ki = 0.0) {
    const double p = ep.p(), th = ep.theta();
    if (!(p > 1.0)) throw Error(ErrorKind::argument, "rate prediction needs p > 1");
    const double base = 1.0 - std::log(p) / (p - 1.0);
    const double common = 4.0 * pi * phi_ki + 3.0 * std::log(2.0) + 2.0;
    RatePrediction r;
    r.v_max = sqrt_e * (base + (common + th / 4.0) / p);
    r.u_max = sqrt_e * (base + (common + (0.25 - sqrt_e / 2.0) * th) / p);
    r.log_mu = -p / 4.0 - (2.0 * pi * phi_ki + 1.5 * std::log(2.0) + 0.75 + th / 8.0);
    r.mu = std::exp(r.log_mu);
    return r;
}

/// mu = (p v_max^{p-1})^{-1/2}, evaluated through its logarithm.
inline double scaling_parameter(double p, double v_max) {
    return std::exp(-0.5 * (std::log(p) + (p - 1.0) * std::log(v_max)));
}

}  // namespace lel
