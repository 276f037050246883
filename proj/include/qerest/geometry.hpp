#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qerest/vec2.hpp"

namespace qerest {

enum class DomainKind { rectangle, disk, ellipse, stadium, sinai_cell };

std::string to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string& name);

/// Shape parameters. Meaning of (a, b) per kind:
///   rectangle  [0,a] x [0,b]
///   disk       radius a, centred at the origin
///   ellipse    semi-axes a (along x) and b (along y), centred at the origin
///   stadium    straight half-length a, cap radius b, centred at the origin
///   sinai_cell square [0,a]^2 with the quarter disk of radius b about the origin removed
struct DomainSpec {
    DomainKind kind = DomainKind::rectangle;
    double a = 1.0;
    double b = 1.0;
};

struct SegmentPiece {
    Vec2 a;
    Vec2 b;
};

/// Circular arc; positive sweep runs counter-clockwise.
struct ArcPiece {
    Vec2 center;
    double radius = 1.0;
    double start_angle = 0.0;
    double sweep = 0.0;
};

/// Full axis-aligned ellipse, traversed counter-clockwise from angle 0.
struct EllipsePiece {
    Vec2 center;
    double semi_x = 1.0;
    double semi_y = 1.0;
};

using BoundaryPiece = std::variant<SegmentPiece, ArcPiece, EllipsePiece>;

// Piece parametrisation uses u in [0,1]; proportional to arclength for segments and arcs,
// proportional to the polar angle for the ellipse.
Vec2 piece_point(const BoundaryPiece& piece, double u);
/// Unit tangent in the direction of traversal.
Vec2 piece_tangent(const BoundaryPiece& piece, double u);
/// |dx/du|.
double piece_speed(const BoundaryPiece& piece, double u);
double piece_length(const BoundaryPiece& piece);
Vec2 piece_start(const BoundaryPiece& piece);
Vec2 piece_end(const BoundaryPiece& piece);

/// Outward unit normal for a point lying on the piece (domain is on the left of traversal).
Vec2 piece_outward_normal(const BoundaryPiece& piece, Vec2 p);

/// Smallest t > t_min with origin + t*dir on the piece, if any. dir must be a unit vector.
std::optional<double> piece_ray_hit(const BoundaryPiece& piece, Vec2 origin, Vec2 dir, double t_min);

double piece_distance(const BoundaryPiece& piece, Vec2 p);

struct DomainMetrics {
    double area = 0.0;
    double perimeter = 0.0;
};

/// Planar billiard table bounded by a single positively oriented loop of pieces.
/// Immutable after construction.
class BilliardDomain {
public:
    static BilliardDomain rectangle(double width, double height);
    static BilliardDomain disk(double radius);
    static BilliardDomain ellipse(double semi_x, double semi_y);
    static BilliardDomain stadium(double half_length, double radius);
    static BilliardDomain sinai_cell(double side, double radius);
    static BilliardDomain from_spec(const DomainSpec& spec);

    DomainKind kind() const { return spec_.kind; }
    const DomainSpec& spec() const { return spec_; }
    std::span<const BoundaryPiece> pieces() const { return pieces_; }
    std::span<const Vec2> corners() const { return corners_; }

    double area() const { return metrics_.area; }
    double perimeter() const { return metrics_.perimeter; }

    /// Centre of the two mirror axes for rectangle/disk/ellipse/stadium.
    Vec2 symmetry_center() const { return center_; }
    bool has_mirror_symmetry() const { return spec_.kind != DomainKind::sinai_cell; }

    bool contains(Vec2 p) const;
    /// Unsigned Euclidean distance to the boundary.
    double boundary_distance(Vec2 p) const;
    /// Negative inside, positive outside.
    double signed_distance(Vec2 p) const;
    double corner_distance(Vec2 p) const;

    /// Axis-aligned bounding box (min corner, max corner).
    std::pair<Vec2, Vec2> bounding_box() const;

    /// Area enclosed by the boundary loop via Green's theorem, evaluated piece by piece.
    double enclosed_area_from_pieces() const;

private:
    BilliardDomain(DomainSpec spec, std::vector<BoundaryPiece> pieces, Vec2 center);

    DomainSpec spec_;
    std::vector<BoundaryPiece> pieces_;
    std::vector<Vec2> corners_;
    Vec2 center_;
    DomainMetrics metrics_;
};

/// Closed-form area and perimeter.
DomainMetrics domain_metrics(const BilliardDomain& domain);

struct CurveFrame {
    Vec2 point;
    Vec2 tangent;
    Vec2 normal;
};

/// Interior test curve N, parametrised by arclength s in [0, L]. The normal is the
/// tangent rotated by +90 degrees so (T, nu) is positively oriented.
class CurveSegment {
public:
    enum class Shape { segment, arc };

    static CurveSegment segment(const BilliardDomain& domain, Vec2 start, Vec2 end);
    /// Arc of the circle (center, radius) from start_angle to end_angle (counter-clockwise
    /// when end_angle > start_angle).
    static CurveSegment arc(const BilliardDomain& domain, Vec2 center, double radius,
                            double start_angle, double end_angle);

    Shape shape() const { return shape_; }
    double length() const { return length_; }
    /// Minimum distance from the curve to the domain boundary.
    double clearance() const { return clearance_; }
    const BilliardDomain& domain() const { return domain_; }

    Vec2 start() const { return point(0.0); }
    Vec2 end() const { return point(length_); }

    // No range checks; curve_frame() is the checked entry point.
    Vec2 point(double s) const;
    Vec2 tangent(double s) const;
    Vec2 normal(double s) const;

    /// Arclength of the foot point and signed normal offset of p; no tube check.
    std::pair<double, double> local_coordinates(Vec2 p) const;

    struct Hit {
        double t;
        double s;
    };
    /// Intersections of the segment {x + t*dir : t_min < t <= t_max} with N, sorted by t.
    std::vector<Hit> intersect_leg(Vec2 x, Vec2 dir, double t_min, double t_max) const;

    Vec2 segment_start() const { return p0_; }
    Vec2 arc_center() const { return p0_; }
    double arc_radius() const { return radius_; }

private:
    CurveSegment(const BilliardDomain& domain, Shape shape);
    void finish();

    BilliardDomain domain_;
    Shape shape_;
    Vec2 p0_;             // segment start, or arc centre
    Vec2 dir_;            // segment unit direction
    double radius_ = 0.0; // arc radius
    double angle0_ = 0.0; // arc start angle
    double orient_ = 1.0; // +1 counter-clockwise arc, -1 clockwise
    double length_ = 0.0;
    double clearance_ = 0.0;
};

/// Point, unit tangent and unit normal at arclength s. Throws std::domain_error outside [0, L].
CurveFrame curve_frame(const CurveSegment& curve, double s);

/// Signed offset of x from N along the normal (the normal coordinate f with f|_N = 0, |df| = 1).
/// Throws std::range_error when x is not within the tubular neighbourhood of width clearance.
double signed_normal_coordinate(const CurveSegment& curve, Vec2 x);

} // namespace qerest
