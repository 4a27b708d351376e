#pragma once

#include <cmath>
#include <string>

#include "lel/core.hpp"

namespace lel {

/// Supported planar domains. Rectangles are centered at the origin.
struct DomainSpec {
    enum class Kind { unit_disk, rectangle, scaled_disk };

    Kind kind = Kind::unit_disk;
    double width = 2.0;
    double height = 2.0;
    Point center;
    double radius = 1.0;
    std::string description = "unit-disk";

    static DomainSpec unit_disk() { return {}; }

    static DomainSpec rectangle(double w, double h) {
        if (!(w > 0.0) || !(h > 0.0)) throw Error(ErrorKind::argument, "rectangle needs positive width and height");
        DomainSpec d;
        d.kind = Kind::rectangle;
        d.width = w;
        d.height = h;
        d.radius = 0.0;
        d.description = "rectangle(" + std::to_string(w) + "x" + std::to_string(h) + ")";
        return d;
    }

    static DomainSpec scaled_disk(Point c, double r) {
        if (!(r > 0.0)) throw Error(ErrorKind::argument, "disk radius must be positive");
        DomainSpec d;
        d.kind = Kind::scaled_disk;
        d.center = c;
        d.radius = r;
        d.width = d.height = 2.0 * r;
        d.description = "disk(center=(" + std::to_string(c.x) + "," + std::to_string(c.y) + "),r=" + std::to_string(r) + ")";
        return d;
    }

    bool is_disk() const noexcept { return kind != Kind::rectangle; }
    Point middle() const noexcept { return kind == Kind::rectangle ? Point{} : center; }
    double min_dimension() const noexcept { return std::min(width, height); }

    /// Signed distance to the boundary, positive inside.
    double boundary_distance(const Point& x) const noexcept {
        if (is_disk()) return radius - distance(x, center);
        return std::min(0.5 * width - std::abs(x.x), 0.5 * height - std::abs(x.y));
    }

    bool contains(const Point& x) const noexcept { return boundary_distance(x) > 0.0; }

    /// Distance from interior x to the boundary along +-e_axis.
    double axis_arm(const Point& x, int axis, int dir) const {
        const double s = static_cast<double>(dir);
        if (!is_disk()) {
            const double half = axis == 0 ? 0.5 * width : 0.5 * height;
            return half - s * x[axis];
        }
        const Point d = x - center;
        const double a = d[axis], b = d[1 - axis];
        const double disc = radius * radius - b * b;
        if (disc < 0.0) throw Error(ErrorKind::domain, "axis ray misses the disk");
        return std::sqrt(disc) - s * a;
    }
};

}  // namespace lel
