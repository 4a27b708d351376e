#pragma once

// Composite finite-difference grid on a supported domain: a uniform lattice of
// spacing h, optionally refined to h/2 inside boxes, with Shortley-Weller arms
// where the lattice meets a curved boundary.
//
// Nodes live on a fine lattice of spacing q = h/2 indexed by (I, J). Coarse
// nodes sit at even (I, J) outside every open box; fine nodes are all lattice
// points strictly inside a box. A fine node whose neighbour falls on a box edge
// at an odd position reads a ghost value interpolated (cubic) along the edge.

#include <Eigen/SparseCore>

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "lel/core.hpp"
#include "lel/domain.hpp"

namespace lel {

struct RefineBox {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
};

struct StencilRow {
    std::vector<std::pair<int, double>> cols;    // includes the diagonal
    std::vector<std::pair<Point, double>> bnd;   // boundary points carrying Dirichlet data
};

class Grid2D {
public:
    const DomainSpec& domain() const noexcept { return domain_; }
    double h() const noexcept { return h_; }
    const std::vector<RefineBox>& boxes() const noexcept { return boxes_; }
    int size() const noexcept { return static_cast<int>(nodes_.size()); }

    const Point& node(int i) const { return nodes_[i]; }
    const std::vector<Point>& nodes() const noexcept { return nodes_; }
    double weight(int i) const { return weights_[i]; }
    double local_h(int i) const { return fine_[i] ? 0.5 * h_ : h_; }
    bool is_fine(int i) const { return fine_[i]; }
    const StencilRow& row(int i) const { return rows_[i]; }
    std::pair<int, int> lattice(int i) const { return lattice_[i]; }

    /// Lattice point (I, J) in fine units.
    Point lattice_point(int I, int J) const noexcept { return origin_ + Point{I * q(), J * q()}; }

    /// Unknown index at lattice (I, J), or -1.
    int index_at(int I, int J) const noexcept {
        if (std::abs(I) > n_ || std::abs(J) > n_) return -1;
        return map_[static_cast<std::size_t>((I + n_) * (2 * n_ + 1) + (J + n_))];
    }

    /// Node indices within distance rad of x.
    std::vector<int> nodes_near(const Point& x, double rad) const {
        std::vector<int> out;
        const int I0 = static_cast<int>(std::floor((x.x - origin_.x - rad) / q()));
        const int I1 = static_cast<int>(std::ceil((x.x - origin_.x + rad) / q()));
        const int J0 = static_cast<int>(std::floor((x.y - origin_.y - rad) / q()));
        const int J1 = static_cast<int>(std::ceil((x.y - origin_.y + rad) / q()));
        for (int I = I0; I <= I1; ++I)
            for (int J = J0; J <= J1; ++J) {
                const int k = index_at(I, J);
                if (k >= 0 && distance(nodes_[k], x) <= rad) out.push_back(k);
            }
        return out;
    }

    int nearest_node(const Point& x) const {
        for (double rad = h_; rad < 4.0 * domain_.min_dimension(); rad *= 2.0) {
            const auto near = nodes_near(x, rad);
            if (near.empty()) continue;
            int best = near.front();
            for (int k : near)
                if (distance(nodes_[k], x) < distance(nodes_[best], x)) best = k;
            return best;
        }
        throw Error(ErrorKind::domain, "no grid node near the requested point");
    }

    /// Discrete Laplacian on the unknowns (zero boundary data).
    Eigen::SparseMatrix<double> laplacian() const {
        std::vector<Eigen::Triplet<double>> trips;
        for (int i = 0; i < size(); ++i)
            for (const auto& [c, w] : rows_[i].cols) trips.emplace_back(i, c, w);
        Eigen::SparseMatrix<double> L(size(), size());
        L.setFromTriplets(trips.begin(), trips.end());
        return L;
    }

    /// Boundary contribution b with Delta_h u = L u + b for Dirichlet data g.
    template <class G>
    Eigen::VectorXd boundary_term(G&& g) const {
        Eigen::VectorXd b = Eigen::VectorXd::Zero(size());
        for (int i = 0; i < size(); ++i)
            for (const auto& [pt, w] : rows_[i].bnd) b[i] += w * g(pt);
        return b;
    }

    template <class F>
    Eigen::VectorXd sample(F&& f) const {
        Eigen::VectorXd out(size());
        for (int i = 0; i < size(); ++i) out[i] = f(nodes_[i]);
        return out;
    }

private:
    friend Grid2D build_grid(const DomainSpec&, double, const std::vector<RefineBox>&);

    double q() const noexcept { return 0.5 * h_; }

    DomainSpec domain_;
    double h_ = 0.0;
    std::vector<RefineBox> boxes_;
    Point origin_;
    int n_ = 0;
    std::vector<int> map_;
    std::vector<Point> nodes_;
    std::vector<std::pair<int, int>> lattice_;
    std::vector<bool> fine_;
    std::vector<double> weights_;
    std::vector<StencilRow> rows_;
};

/// Builds the composite grid. Boxes are snapped outward to the coarse lattice
/// and must stay four coarse cells away from the boundary and from each other.
inline Grid2D build_grid(const DomainSpec& domain, double h, const std::vector<RefineBox>& refine = {}) {
    if (!(h > 0.0) || h > domain.min_dimension() / 16.0 * (1.0 + 1e-12))
        throw Error(ErrorKind::parameter, "grid spacing must satisfy 0 < h <= min-dimension/16");
    Grid2D g;
    g.domain_ = domain;
    g.h_ = h;
    g.origin_ = domain.middle();
    const double q = 0.5 * h;
    const double half_extent = 0.5 * std::max(domain.width, domain.height);
    g.n_ = static_cast<int>(std::ceil(half_extent / q)) + 2;
    const int n = g.n_;
    const int side = 2 * n + 1;
    g.map_.assign(static_cast<std::size_t>(side) * side, -1);

    // boxes in lattice units, even bounds
    struct IBox {
        int I0, I1, J0, J1;
    };
    std::vector<IBox> ib;
    for (const auto& b : refine) {
        auto lo = [&](double v, double o) { return 2 * static_cast<int>(std::floor((v - o) / h + 1e-9)); };
        auto hi = [&](double v, double o) { return 2 * static_cast<int>(std::ceil((v - o) / h - 1e-9)); };
        IBox box{lo(b.x0, g.origin_.x), hi(b.x1, g.origin_.x), lo(b.y0, g.origin_.y), hi(b.y1, g.origin_.y)};
        if (box.I1 - box.I0 < 4 || box.J1 - box.J0 < 4)
            throw Error(ErrorKind::parameter, "refinement box must span at least two coarse cells");
        for (int I : {box.I0, box.I1})
            for (int J : {box.J0, box.J1})
                if (domain.boundary_distance(g.lattice_point(I, J)) < 4.0 * h)
                    throw Error(ErrorKind::parameter, "refinement box too close to the boundary");
        for (const auto& o : ib)
            if (box.I0 < o.I1 + 8 && o.I0 < box.I1 + 8 && box.J0 < o.J1 + 8 && o.J0 < box.J1 + 8)
                throw Error(ErrorKind::parameter, "refinement boxes overlap or touch");
        ib.push_back(box);
        g.boxes_.push_back({g.lattice_point(box.I0, 0).x, g.lattice_point(0, box.J0).y, g.lattice_point(box.I1, 0).x,
                            g.lattice_point(0, box.J1).y});
    }
    auto inside_box = [&](int I, int J) {
        for (const auto& b : ib)
            if (I > b.I0 && I < b.I1 && J > b.J0 && J < b.J1) return true;
        return false;
    };
    // 0: not on a box edge, 1: edge, 2: corner
    auto box_edge = [&](int I, int J) {
        for (const auto& b : ib) {
            const bool onI = (I == b.I0 || I == b.I1) && J >= b.J0 && J <= b.J1;
            const bool onJ = (J == b.J0 || J == b.J1) && I >= b.I0 && I <= b.I1;
            if (onI && onJ) return 2;
            if (onI || onJ) return 1;
        }
        return 0;
    };
    const double margin = 1e-3 * h;
    auto interior = [&](int I, int J) { return domain.boundary_distance(g.lattice_point(I, J)) > margin; };

    for (int I = -n; I <= n; ++I)
        for (int J = -n; J <= n; ++J) {
            const bool fine = inside_box(I, J);
            const bool coarse = !fine && I % 2 == 0 && J % 2 == 0;
            if (!(fine || coarse) || !interior(I, J)) continue;
            g.map_[static_cast<std::size_t>((I + n) * side + (J + n))] = static_cast<int>(g.nodes_.size());
            g.nodes_.push_back(g.lattice_point(I, J));
            g.lattice_.emplace_back(I, J);
            g.fine_.push_back(fine);
            double w = fine ? q * q : h * h;
            if (!fine) {
                const int e = box_edge(I, J);
                if (e == 1) w = 0.75 * h * h;
                if (e == 2) w = 15.0 / 16.0 * h * h;
            }
            g.weights_.push_back(w);
        }
    if (g.nodes_.empty()) throw Error(ErrorKind::parameter, "grid has no interior nodes");

    g.rows_.resize(g.nodes_.size());
    for (int i = 0; i < g.size(); ++i) {
        const auto [I, J] = g.lattice_[i];
        const int step = g.fine_[i] ? 1 : 2;
        const double d = step * q;
        const Point p = g.nodes_[i];
        StencilRow row;
        double diag = 0.0;
        for (int axis = 0; axis < 2; ++axis) {
            // arm length and contribution builder for each direction
            double arm[2];
            std::vector<std::pair<int, double>> nb_cols[2];
            Point bpt[2];
            bool is_bnd[2] = {false, false};
            for (int s = 0; s < 2; ++s) {
                const int dir = s == 0 ? -1 : 1;
                const int NI = I + (axis == 0 ? dir * step : 0);
                const int NJ = J + (axis == 1 ? dir * step : 0);
                const int k = g.index_at(NI, NJ);
                if (k >= 0) {
                    arm[s] = d;
                    nb_cols[s].emplace_back(k, 1.0);
                } else if (!g.fine_[i] || !interior(NI, NJ)) {
                    arm[s] = domain.axis_arm(p, axis, dir);
                    if (!(arm[s] > 0.0)) throw Error(ErrorKind::parameter, "degenerate boundary arm");
                    is_bnd[s] = true;
                    bpt[s] = p;
                    if (axis == 0) bpt[s].x += dir * arm[s];
                    else bpt[s].y += dir * arm[s];
                } else {
                    // ghost on a box edge: cubic interpolation along the edge
                    arm[s] = d;
                    const int tI = axis == 0 ? 0 : 1, tJ = axis == 0 ? 1 : 0;  // tangent direction
                    const int offs[4] = {-3, -1, 1, 3};
                    const double wts[4] = {-1.0 / 16, 9.0 / 16, 9.0 / 16, -1.0 / 16};
                    for (int t = 0; t < 4; ++t) {
                        const int k2 = g.index_at(NI + tI * offs[t], NJ + tJ * offs[t]);
                        if (k2 < 0) throw Error(ErrorKind::parameter, "ghost interpolation stencil leaves the grid");
                        nb_cols[s].emplace_back(k2, wts[t]);
                    }
                }
            }
            const double am = arm[0], ap = arm[1];
            const double cm = 2.0 / (am * (am + ap)), cp = 2.0 / (ap * (am + ap));
            diag -= 2.0 / (am * ap);
            const double c[2] = {cm, cp};
            for (int s = 0; s < 2; ++s) {
                if (is_bnd[s]) row.bnd.emplace_back(bpt[s], c[s]);
                for (const auto& [k, w] : nb_cols[s]) row.cols.emplace_back(k, c[s] * w);
            }
        }
        row.cols.emplace_back(i, diag);
        g.rows_[i] = std::move(row);
    }
    return g;
}

}  // namespace lel
