#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qerest/geometry.hpp"

namespace qerest {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
};

/// Cached, thread-safe. n >= 1.
const GaussRule& gauss_legendre(int n);

struct WeightedPoint {
    Vec2 x;
    double w;
};

struct BoundaryNode {
    Vec2 x;
    Vec2 normal;   ///< outward unit normal of M
    double w;      ///< arclength weight
};

/// Parametrised boundary patch, u in [0, 1].
///   segment      a -> b
///   arc          center + r (cos t, sin t), t from t0 to t1 (rx is the radius)
///   ellipse_arc  center + (rx cos t, ry sin t), t from t0 to t1
/// normal_sign = +1 when the outward normal of M is the curve's right-hand normal for
/// segments / the radial direction for arcs, -1 otherwise.
struct BoundaryPatch {
    enum class Kind { segment, arc, ellipse_arc };
    Kind kind = Kind::segment;
    Vec2 a, b;
    Vec2 center;
    double rx = 1.0, ry = 1.0;
    double t0 = 0.0, t1 = 0.0;
    double normal_sign = 1.0;

    static BoundaryPatch segment(Vec2 a, Vec2 b) { return {Kind::segment, a, b, {}, 1.0, 1.0, 0.0, 0.0, 1.0}; }
    static BoundaryPatch arc(Vec2 c, double r, double t0, double t1, double sign = 1.0) {
        return {Kind::arc, {}, {}, c, r, r, t0, t1, sign};
    }
    static BoundaryPatch ellipse_arc(Vec2 c, double rx, double ry, double t0, double t1) {
        return {Kind::ellipse_arc, {}, {}, c, rx, ry, t0, t1, 1.0};
    }

    Vec2 point(double u) const;
    Vec2 normal(double u) const;
    double speed(double u) const;   ///< |dx/du|
    double length() const;
};

/// Product-rule cell.
///   box    [lo.x, hi.x] x [lo.y, hi.y]
///   polar  center + (ax r cos t, ay r sin t), t in [t0, t1], r from r0 to the outer limit:
///          circle: r1; line_x: edge / cos t; line_y: edge / sin t
struct InteriorCell {
    enum class Kind { box, polar };
    enum class Outer { circle, line_x, line_y };
    Kind kind = Kind::box;
    Vec2 lo, hi;
    Vec2 center;
    double ax = 1.0, ay = 1.0;
    double t0 = 0.0, t1 = 0.0;
    double r0 = 0.0, r1 = 1.0;
    Outer outer = Outer::circle;
    double edge = 0.0;

    static InteriorCell box(Vec2 lo, Vec2 hi) {
        InteriorCell c;
        c.lo = lo;
        c.hi = hi;
        return c;
    }
    static InteriorCell polar(Vec2 center, double ax, double ay, double t0, double t1, double r0, double r1) {
        InteriorCell c;
        c.kind = Kind::polar;
        c.center = center;
        c.ax = ax;
        c.ay = ay;
        c.t0 = t0;
        c.t1 = t1;
        c.r0 = r0;
        c.r1 = r1;
        return c;
    }
};

/// Region tiling M by `copies` mirror images (reflections about the symmetry axes of the
/// domain; for the Sinai cell, the diagonal). `boundary` is the part of the fundamental
/// region's boundary lying on the Dirichlet boundary and not automatically satisfied by the
/// symmetry-adapted basis.
struct FundamentalRegion {
    std::vector<BoundaryPatch> boundary;
    std::vector<InteriorCell> cells;
    double copies = 1.0;
    Vec2 rellich_origin;
    Vec2 center;
    bool diagonal = false;

    bool contains(const BilliardDomain& domain, Vec2 p) const;
    double boundary_length() const;
};

FundamentalRegion fundamental_region(const BilliardDomain& domain);
/// Cells tiling all of M.
std::vector<InteriorCell> full_cells(const BilliardDomain& domain);

/// Gauss product rule resolving oscillations at frequency k: ceil(scale * k * extent) + 24
/// nodes per direction.
std::vector<WeightedPoint> interior_rule(std::span<const InteriorCell> cells, double k, double scale);
std::vector<BoundaryNode> boundary_rule(std::span<const BoundaryPatch> patches, double k, double scale);

/// `count` midpoint nodes spread over the patches in proportion to length (at least 4 each).
std::vector<BoundaryNode> collocation_nodes(std::span<const BoundaryPatch> patches, int count);

/// First `count` points of a seeded uniform stream restricted to the fundamental region.
std::vector<Vec2> interior_cloud(const BilliardDomain& domain, const FundamentalRegion& region, int count,
                                 std::uint64_t seed);

} // namespace qerest
