#pragma once

// Linearized operator around a radial solution,
//   L (xi, eta) = (-Delta xi - p v^{p-1} eta, -Delta eta - q u^{q-1} xi),
// split into angular modes on the radial mesh, and the kernel modes of the
// limit operators -Delta -+ e^U on the plane.

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "lel/core.hpp"
#include "lel/radial.hpp"
#include "lel/special.hpp"

namespace lel {

struct SpectralProbe {
    std::vector<double> singular_values;  // ascending, the k smallest over all modes
    std::vector<int> modes;               // angular mode of each value
    std::vector<bool> converged;
    double laplacian_scale = 0.0;         // smallest eigenvalue of the discrete -Delta
    double scaled_min = 0.0;              // singular_values[0] / laplacian_scale
    bool nondegenerate = false;
    int iterations = 0;
};

struct ProbeOptions {
    int k = 4;
    int max_mode = 4;
    bool potentials = true;   // false drops the p v^{p-1}, q u^{q-1} blocks
    bool swap_blocks = false; // probe the operator with (xi, eta) and (p, q) roles exchanged
    int max_iter = 500;
    double tol = 1e-11;
    double floor = 1e-6;
    unsigned seed = 7;
};

namespace detail {

// Mode-j operator in finite-volume form
//   Khat = [[K + j^2 D, -A P], [-A Q, K + j^2 D]],
// K the stiffness of the flux form, D_i = log(r_{i+1/2} / r_{i-1/2}), A the
// cell areas. The probed operator is B = A^{-1/2} Khat A^{-1/2}, the mode
// restriction of L in the L^2 basis. Khat has O(1) entries on any mesh while
// B carries 1/h^2, so every solve goes through Khat.
struct ModeOperator {
    Eigen::SparseMatrix<double> khat;
    Eigen::VectorXd sqrt_area;  // A^{1/2}, repeated for both blocks
};

inline ModeOperator mode_operator(const RadialPair& sol, int j, const ProbeOptions& opt) {
    const auto& m = sol.mesh;
    const int n_all = m.size() - 1;
    const int first = j == 0 ? 0 : 1;  // regularity at the axis forces xi(0) = 0 for j >= 1
    const int n = n_all - first;
    std::vector<Eigen::Triplet<double>> trips;
    const double p = opt.swap_blocks ? sol.ep.q() : sol.ep.p();
    const double q = opt.swap_blocks ? sol.ep.p() : sol.ep.q();
    const auto& vv = opt.swap_blocks ? sol.u : sol.v;
    const auto& uu = opt.swap_blocks ? sol.v : sol.u;
    ModeOperator op;
    op.sqrt_area.resize(2 * n);
    for (int i = first; i < n_all; ++i) {
        const int row = i - first;
        const double a = m.cell(i);
        op.sqrt_area[row] = op.sqrt_area[n + row] = std::sqrt(a);
        const double cp = m.face(i) / (m.r[i + 1] - m.r[i]);
        const double cm = i > 0 ? m.face(i - 1) / (m.r[i] - m.r[i - 1]) : 0.0;
        double diag = cp + cm;
        if (j > 0) diag += double(j) * j * std::log(m.face(i) / m.face(i - 1));
        for (int blk = 0; blk < 2; ++blk) {
            const int off = blk * n;
            trips.emplace_back(off + row, off + row, diag);
            if (i + 1 < n_all) trips.emplace_back(off + row, off + row + 1, -cp);
            if (i - 1 >= first) trips.emplace_back(off + row, off + row - 1, -cm);
        }
        if (opt.potentials) {
            trips.emplace_back(row, n + row, -a * p * pow_clamped(vv[i], p - 1.0));
            trips.emplace_back(n + row, row, -a * q * pow_clamped(uu[i], q - 1.0));
        }
    }
    op.khat.resize(2 * n, 2 * n);
    op.khat.setFromTriplets(trips.begin(), trips.end());
    return op;
}

struct SmallestSingular {
    std::vector<double> values;
    bool converged = false;
    int iterations = 0;
};

// Subspace iteration on (B^T B)^{-1} = B^{-1} B^{-T}; Ritz values are taken
// from V = B^{-T} Q so that B itself is never applied.
inline SmallestSingular smallest_singular_values(const ModeOperator& op, int k, int max_iter, double tol,
                                                 unsigned seed) {
    const Eigen::Index n = op.khat.rows();
    const Eigen::Index b = std::min<Eigen::Index>(n, k + 4);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu, lut;
    lu.compute(op.khat);
    const Eigen::SparseMatrix<double> kt = op.khat.transpose();
    lut.compute(kt);
    if (lu.info() != Eigen::Success || lut.info() != Eigen::Success)
        throw Error(ErrorKind::probe, "linearized operator is numerically singular");
    const Eigen::VectorXd& s = op.sqrt_area;
    // B^{-1} x = A^{1/2} Khat^{-1} A^{1/2} x
    auto inv = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return s.cwiseProduct(lu.solve(s.cwiseProduct(x))); };
    auto inv_t = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return s.cwiseProduct(lut.solve(s.cwiseProduct(x)));
    };
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd X(n, b);
    for (Eigen::Index c = 0; c < b; ++c)
        for (Eigen::Index r = 0; r < n; ++r) X(r, c) = nd(rng);
    SmallestSingular out;
    std::vector<double> prev;
    for (int it = 1; it <= max_iter; ++it) {
        const Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
        const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, b);
        Eigen::MatrixXd V(n, b);
        for (Eigen::Index c = 0; c < b; ++c) V.col(c) = inv_t(Q.col(c));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(V.transpose() * V);
        // descending eigenvalues of Q^T (B^T B)^{-1} Q are 1 / sigma^2 ascending
        std::vector<double> cur;
        for (int i = 0; i < k && i < b; ++i) cur.push_back(1.0 / std::sqrt(es.eigenvalues()[b - 1 - i]));
        const Eigen::MatrixXd Vr = V * es.eigenvectors().rowwise().reverse();
        for (Eigen::Index c = 0; c < b; ++c) X.col(c) = inv(Vr.col(c));
        out.iterations = it;
        if (!prev.empty()) {
            bool ok = true;
            for (std::size_t i = 0; i < cur.size(); ++i) ok = ok && std::abs(cur[i] - prev[i]) <= tol * cur[i];
            if (ok) {
                out.values = cur;
                out.converged = true;
                return out;
            }
        }
        prev = cur;
    }
    out.values = prev;
    return out;
}

}  // namespace detail

/// k smallest singular values of the linearized operator over angular modes
/// 0..max_mode (modes j >= 1 carry multiplicity two on the disk).
inline SpectralProbe linearized_probe(const RadialPair& sol, const ProbeOptions& opt = {}) {
    if (opt.k < 1 || opt.max_mode < 0) throw Error(ErrorKind::argument, "probe needs k >= 1 and max_mode >= 0");
    struct Entry {
        double s;
        int mode;
        bool conv;
    };
    std::vector<Entry> all;
    SpectralProbe out;
    for (int j = 0; j <= opt.max_mode; ++j) {
        const auto r = detail::smallest_singular_values(detail::mode_operator(sol, j, opt), opt.k, opt.max_iter, opt.tol,
                                                        opt.seed + static_cast<unsigned>(j));
        out.iterations += r.iterations;
        for (double s : r.values)
            for (int mult = 0; mult < (j == 0 ? 1 : 2); ++mult) all.push_back({s, j, r.converged});
    }
    std::stable_sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) { return a.s < b.s; });
    for (int i = 0; i < opt.k && i < static_cast<int>(all.size()); ++i) {
        out.singular_values.push_back(all[i].s);
        out.modes.push_back(all[i].mode);
        out.converged.push_back(all[i].conv);
    }
    ProbeOptions lap = opt;
    lap.potentials = false;
    out.laplacian_scale =
        detail::smallest_singular_values(detail::mode_operator(sol, 0, lap), 1, opt.max_iter, opt.tol, opt.seed).values[0];
    out.scaled_min = out.singular_values.front() / out.laplacian_scale;
    out.nondegenerate = out.scaled_min > opt.floor;
    const bool all_conv = std::all_of(out.converged.begin(), out.converged.end(), [](bool c) { return c; });
    if (!all_conv) throw SolveError<SpectralProbe>(ErrorKind::probe, "inverse iteration did not converge", out);
    return out;
}

// ---------------------------------------------------------------------------
// Limit kernel modes
//   phi'' + phi'/r - j^2 phi / r^2 - sign e^U phi = 0,  e^U = (1 + r^2/8)^{-2}
// shot from phi ~ r^j (1 + sign r^2 / (4 (j + 1))).

enum class Growth { decaying, bounded, logarithmic, power };

inline const char* to_string(Growth g) noexcept {
    switch (g) {
        case Growth::decaying: return "decaying";
        case Growth::bounded: return "bounded";
        case Growth::logarithmic: return "logarithmic";
        case Growth::power: return "power";
    }
    return "unknown";
}

struct ModeClass {
    int j = 0;
    int sign = 1;
    Growth growth = Growth::power;
    double exponent = 0.0;  // r phi'/phi at the far radius
    double flux_near = 0.0; // r phi' at 1e3
    double flux_far = 0.0;  // r phi' at 1e4
    double value_far = 0.0;
    bool admissible = false;
    int multiplicity = 1;
};

namespace kernel_modes {
inline constexpr double r_start = 1e-4;
inline constexpr double r_near = 1e3;
inline constexpr double r_far = 1e4;
}  // namespace kernel_modes

inline ModeClass limit_kernel_modes(int j, int sign, double tau) {
    if (j < 0) throw Error(ErrorKind::argument, "mode index must be >= 0");
    if (sign != 1 && sign != -1) throw Error(ErrorKind::argument, "sign must be +1 or -1");
    if (!(tau > 0.0 && tau < 1.0)) throw Error(ErrorKind::argument, "tau must lie in (0, 1)");
    using State = std::array<double, 2>;  // phi, r phi'
    namespace ode = boost::numeric::odeint;
    const double jj = double(j) * j;
    auto rhs = [&](const State& y, State& dy, double s) {
        const double r = std::exp(s);
        const double eU = 1.0 / ((1.0 + r * r / 8.0) * (1.0 + r * r / 8.0));
        dy[0] = y[1];
        dy[1] = (jj + sign * r * r * eU) * y[0];
    };
    const double r0 = kernel_modes::r_start, c = sign / (4.0 * (j + 1.0));
    const double rj = std::pow(r0, j);
    State y{rj * (1.0 + c * r0 * r0), rj * (j + (j + 2.0) * c * r0 * r0)};
    double peak = std::abs(y[0]);
    auto observe = [&](const State& x, double) { peak = std::max(peak, std::abs(x[0])); };
    auto stepper = ode::make_controlled(1e-13, 1e-12, ode::runge_kutta_fehlberg78<State>());
    ode::integrate_adaptive(stepper, rhs, y, std::log(r0), std::log(kernel_modes::r_near), 1e-3, observe);
    ModeClass out;
    out.j = j;
    out.sign = sign;
    out.multiplicity = j == 0 ? 1 : 2;
    out.flux_near = y[1];
    ode::integrate_adaptive(stepper, rhs, y, std::log(kernel_modes::r_near), std::log(kernel_modes::r_far), 1e-3,
                            observe);
    out.flux_far = y[1];
    out.value_far = y[0];
    out.exponent = y[1] / y[0];
    if (std::abs(y[0]) <= 1e-6 * peak || out.exponent <= -0.5)
        out.growth = Growth::decaying;
    else if (out.exponent >= 0.5)
        out.growth = Growth::power;
    else if (std::abs(out.flux_far) <= 1e-4 * std::abs(y[0]))
        out.growth = Growth::bounded;
    else if (std::abs(out.flux_far - out.flux_near) <= 1e-2 * std::abs(out.flux_far))
        out.growth = Growth::logarithmic;
    else
        out.growth = Growth::power;
    // under |phi| <= C (1 + r)^tau only power growth with exponent > tau is excluded
    out.admissible = out.growth != Growth::power || out.exponent <= tau;
    return out;
}

/// Dimension of the admissible kernel over both signs and modes 0..max_mode.
inline int admissible_kernel_dimension(int max_mode, double tau) {
    int dim = 0;
    for (int sign : {-1, 1})
        for (int j = 0; j <= max_mode; ++j) {
            const auto m = limit_kernel_modes(j, sign, tau);
            if (m.admissible) dim += m.multiplicity;
        }
    return dim;
}

}  // namespace lel
