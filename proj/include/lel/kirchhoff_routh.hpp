#pragma once

// Kirchhoff-Routh functional
//   Phi_k(x_1..x_k) = sum_i [ R(x_i) - sum_{j != i} G(x_i, x_j) ]
// and a multistart damped-Newton search for its critical points.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <thread>
#include <vector>

#include "lel/core.hpp"
#include "lel/green.hpp"

namespace lel {

struct KRPoint {
    std::vector<Point> config;
    double value = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
    std::vector<double> eigenvalues;  // ascending
    bool nondegenerate = false;
};

namespace kr {
inline constexpr double grad_tol = 1e-10;
inline constexpr double dedup_radius = 1e-6;
inline constexpr double collapse_cutoff = 1e-4;
inline constexpr double degeneracy_floor = 1e-8;
inline constexpr double hessian_step = 1e-5;
}  // namespace kr

namespace detail {

inline void check_config(const GreenModel& model, const std::vector<Point>& c) {
    if (c.empty()) throw Error(ErrorKind::argument, "empty Kirchhoff-Routh configuration");
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (!model.domain().contains(c[i])) throw Error(ErrorKind::domain, "configuration point outside the domain");
        for (std::size_t j = 0; j < i; ++j)
            if (c[i] == c[j]) throw Error(ErrorKind::domain, "coincident configuration points");
    }
}

// interaction part of the gradient: -2 sum_{j != i} grad_x G(x_i, x_j)
inline Eigen::VectorXd interaction_gradient(const GreenModel& model, const std::vector<Point>& c) {
    const auto k = static_cast<Eigen::Index>(c.size());
    Eigen::VectorXd g = Eigen::VectorXd::Zero(2 * k);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j) {
            if (i == j) continue;
            const auto e = model.green(c[i], c[j]);
            g[2 * i] -= 2.0 * e.grad.x;
            g[2 * i + 1] -= 2.0 * e.grad.y;
        }
    return g;
}

}  // namespace detail

/// Value, gradient and Hessian of Phi_k at a configuration.
inline KRPoint kirchhoff_routh(const GreenModel& model, const std::vector<Point>& config) {
    detail::check_config(model, config);
    const auto k = static_cast<Eigen::Index>(config.size());
    KRPoint out;
    out.config = config;
    out.gradient = detail::interaction_gradient(model, config);
    out.hessian = Eigen::MatrixXd::Zero(2 * k, 2 * k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const auto r = model.robin(config[i]);
        out.value += r.value;
        for (Eigen::Index j = 0; j < k; ++j)
            if (j != i) out.value -= model.green(config[i], config[j]).value;
        out.gradient[2 * i] += r.grad.x;
        out.gradient[2 * i + 1] += r.grad.y;
        out.hessian(2 * i, 2 * i) += r.hessian.xx;
        out.hessian(2 * i, 2 * i + 1) += r.hessian.xy;
        out.hessian(2 * i + 1, 2 * i) += r.hessian.xy;
        out.hessian(2 * i + 1, 2 * i + 1) += r.hessian.yy;
    }
    if (k > 1) {
        const double s = kr::hessian_step;
        for (Eigen::Index c = 0; c < 2 * k; ++c) {
            auto plus = config, minus = config;
            if (c % 2 == 0) {
                plus[c / 2].x += s;
                minus[c / 2].x -= s;
            } else {
                plus[c / 2].y += s;
                minus[c / 2].y -= s;
            }
            out.hessian.col(c) +=
                (detail::interaction_gradient(model, plus) - detail::interaction_gradient(model, minus)) / (2 * s);
        }
    }
    const Eigen::MatrixXd sym = 0.5 * (out.hessian + out.hessian.transpose());
    out.hessian = sym;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    out.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    double mn = 1e300;
    for (double e : out.eigenvalues) mn = std::min(mn, std::abs(e));
    out.nondegenerate = mn > kr::degeneracy_floor;
    return out;
}

struct KRSearch {
    std::vector<KRPoint> points;
    int converged_runs = 0;
    int escaped_runs = 0;
    int stalled_runs = 0;
    std::string diagnostic;
};

namespace detail {

enum class NewtonOutcome { converged, escaped, stalled };

inline bool admissible(const GreenModel& model, const std::vector<Point>& c) {
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (model.domain().boundary_distance(c[i]) < kr::collapse_cutoff) return false;
        for (std::size_t j = 0; j < i; ++j)
            if (distance(c[i], c[j]) < kr::collapse_cutoff) return false;
    }
    return true;
}

inline std::pair<NewtonOutcome, KRPoint> kr_newton(const GreenModel& model, std::vector<Point> x, int max_iter = 100) {
    if (!admissible(model, x)) return {NewtonOutcome::escaped, {}};
    KRPoint cur = kirchhoff_routh(model, x);
    for (int it = 0; it < max_iter; ++it) {
        const double gn = cur.gradient.norm();
        if (gn <= kr::grad_tol) return {NewtonOutcome::converged, cur};
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cur.hessian);
        Eigen::VectorXd lam = es.eigenvalues();
        for (Eigen::Index i = 0; i < lam.size(); ++i)
            if (std::abs(lam[i]) < 1e-12) lam[i] = lam[i] < 0 ? -1e-12 : 1e-12;
        const Eigen::VectorXd step =
            -(es.eigenvectors() * (es.eigenvectors().transpose() * cur.gradient).cwiseQuotient(lam));
        double alpha = 1.0;
        bool accepted = false;
        while (alpha >= 1e-6) {
            auto trial = x;
            for (std::size_t i = 0; i < x.size(); ++i) {
                trial[i].x += alpha * step[2 * i];
                trial[i].y += alpha * step[2 * i + 1];
            }
            if (admissible(model, trial)) {
                KRPoint next = kirchhoff_routh(model, trial);
                if (next.gradient.norm() < gn) {
                    x = std::move(trial);
                    cur = std::move(next);
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            // a full step that leaves the admissible set counts as an escape
            auto full = x;
            for (std::size_t i = 0; i < x.size(); ++i) {
                full[i].x += step[2 * i];
                full[i].y += step[2 * i + 1];
            }
            return {admissible(model, full) ? NewtonOutcome::stalled : NewtonOutcome::escaped, cur};
        }
    }
    return {cur.gradient.norm() <= kr::grad_tol ? NewtonOutcome::converged : NewtonOutcome::stalled, cur};
}

inline double config_distance(std::vector<Point> a, std::vector<Point> b) {
    auto lex = [](const Point& p, const Point& q) { return p.x < q.x || (p.x == q.x && p.y < q.y); };
    std::sort(a.begin(), a.end(), lex);
    std::sort(b.begin(), b.end(), lex);
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, distance(a[i], b[i]));
    return d;
}

}  // namespace detail

/// Damped Newton on grad Phi_k from each start; converged points are
/// deduplicated and returned with their Hessian spectrum.
inline KRSearch find_kr_critical(const GreenModel& model, int k, const std::vector<std::vector<Point>>& starts,
                                 unsigned threads = 1) {
    if (k < 1) throw Error(ErrorKind::argument, "k must be >= 1");
    for (const auto& s : starts) {
        if (static_cast<int>(s.size()) != k) throw Error(ErrorKind::argument, "start size differs from k");
        detail::check_config(model, s);
    }
    std::vector<std::pair<detail::NewtonOutcome, KRPoint>> results(starts.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < starts.size(); i = next++) results[i] = detail::kr_newton(model, starts[i]);
    };
    const unsigned nt = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(starts.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < nt; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    KRSearch out;
    for (auto& [outcome, pt] : results) {
        switch (outcome) {
            case detail::NewtonOutcome::escaped: ++out.escaped_runs; continue;
            case detail::NewtonOutcome::stalled: ++out.stalled_runs; continue;
            case detail::NewtonOutcome::converged: ++out.converged_runs; break;
        }
        bool dup = false;
        for (const auto& q : out.points) dup = dup || detail::config_distance(q.config, pt.config) < kr::dedup_radius;
        if (!dup) out.points.push_back(std::move(pt));
    }
    out.diagnostic = std::to_string(starts.size()) + " starts: " + std::to_string(out.converged_runs) + " converged, " +
                     std::to_string(out.escaped_runs) + " escaped, " + std::to_string(out.stalled_runs) + " stalled; " +
                     std::to_string(out.points.size()) + " distinct critical points";
    return out;
}

}  // namespace lel
