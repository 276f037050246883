#include "qerest/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>

#include "qerest/errors.hpp"

namespace qerest {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kJoinTol = 1e-12;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

/// Roots of a t^2 + 2 b t + c = 0, ascending. Cancellation-free form.
int solve_quadratic(double a, double b, double c, std::array<double, 2>& roots) {
    const double disc = b * b - a * c;
    if (disc < 0.0 || a == 0.0) return 0;
    const double sq = std::sqrt(disc);
    const double q = -(b + std::copysign(sq, b));
    if (q == 0.0) {
        roots = {0.0, 0.0};
        return 2;
    }
    double t1 = q / a;
    double t2 = c / q;
    if (t1 > t2) std::swap(t1, t2);
    roots = {t1, t2};
    return 2;
}

/// Offset of angle phi from start, measured in the arc's traversal direction, in [0, 2pi).
double arc_offset(const ArcPiece& arc, double phi) {
    const double sgn = arc.sweep >= 0.0 ? 1.0 : -1.0;
    double off = std::fmod(sgn * (phi - arc.start_angle), kTwoPi);
    if (off < 0.0) off += kTwoPi;
    return off;
}

bool arc_contains_angle(const ArcPiece& arc, double phi, double slack) {
    const double off = arc_offset(arc, phi);
    const double span = std::abs(arc.sweep);
    return off <= span + slack || off >= kTwoPi - slack;
}

double segment_distance(Vec2 a, Vec2 b, Vec2 p) {
    const Vec2 d = b - a;
    const double len2 = dot(d, d);
    double w = len2 > 0.0 ? dot(p - a, d) / len2 : 0.0;
    w = std::clamp(w, 0.0, 1.0);
    return distance(a + d * w, p);
}

double ellipse_distance(const EllipsePiece& e, Vec2 p) {
    const Vec2 q = p - e.center;
    auto dist2 = [&](double th) {
        const double dx = q.x - e.semi_x * std::cos(th);
        const double dy = q.y - e.semi_y * std::sin(th);
        return dx * dx + dy * dy;
    };
    constexpr int kScan = 256;
    int best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kScan; ++i) {
        const double v = dist2(kTwoPi * i / kScan);
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    const double lo = kTwoPi * (best - 1) / kScan;
    const double hi = kTwoPi * (best + 1) / kScan;
    const auto r = boost::math::tools::brent_find_minima(dist2, lo, hi, 52);
    return std::sqrt(std::min(r.second, best_val));
}

double ellipse_perimeter(double a, double b) {
    const double major = std::max(a, b);
    const double minor = std::min(a, b);
    const double e = std::sqrt(1.0 - (minor * minor) / (major * major));
    return 4.0 * major * std::comp_ellint_2(e);
}

} // namespace

std::string to_string(DomainKind kind) {
    switch (kind) {
    case DomainKind::rectangle: return "rectangle";
    case DomainKind::disk: return "disk";
    case DomainKind::ellipse: return "ellipse";
    case DomainKind::stadium: return "stadium";
    case DomainKind::sinai_cell: return "sinai_cell";
    }
    return "unknown";
}

DomainKind domain_kind_from_string(const std::string& name) {
    if (name == "rectangle") return DomainKind::rectangle;
    if (name == "disk") return DomainKind::disk;
    if (name == "ellipse") return DomainKind::ellipse;
    if (name == "stadium") return DomainKind::stadium;
    if (name == "sinai_cell") return DomainKind::sinai_cell;
    throw ConfigError("unknown domain kind '" + name + "'");
}

// ---------------------------------------------------------------------------
// Pieces

Vec2 piece_point(const BoundaryPiece& piece, double u) {
    return std::visit(Overloaded{
        [u](const SegmentPiece& s) { return s.a + (s.b - s.a) * u; },
        [u](const ArcPiece& a) {
            const double phi = a.start_angle + u * a.sweep;
            return a.center + Vec2{std::cos(phi), std::sin(phi)} * a.radius;
        },
        [u](const EllipsePiece& e) {
            const double phi = kTwoPi * u;
            return e.center + Vec2{e.semi_x * std::cos(phi), e.semi_y * std::sin(phi)};
        }},
        piece);
}

Vec2 piece_tangent(const BoundaryPiece& piece, double u) {
    return std::visit(Overloaded{
        [](const SegmentPiece& s) { return (s.b - s.a).normalized(); },
        [u](const ArcPiece& a) {
            const double phi = a.start_angle + u * a.sweep;
            const double sgn = a.sweep >= 0.0 ? 1.0 : -1.0;
            return Vec2{-std::sin(phi), std::cos(phi)} * sgn;
        },
        [u](const EllipsePiece& e) {
            const double phi = kTwoPi * u;
            return Vec2{-e.semi_x * std::sin(phi), e.semi_y * std::cos(phi)}.normalized();
        }},
        piece);
}

double piece_speed(const BoundaryPiece& piece, double u) {
    return std::visit(Overloaded{
        [](const SegmentPiece& s) { return (s.b - s.a).norm(); },
        [](const ArcPiece& a) { return a.radius * std::abs(a.sweep); },
        [u](const EllipsePiece& e) {
            const double phi = kTwoPi * u;
            return kTwoPi * std::hypot(e.semi_x * std::sin(phi), e.semi_y * std::cos(phi));
        }},
        piece);
}

double piece_length(const BoundaryPiece& piece) {
    return std::visit(Overloaded{
        [](const SegmentPiece& s) { return (s.b - s.a).norm(); },
        [](const ArcPiece& a) { return a.radius * std::abs(a.sweep); },
        [](const EllipsePiece& e) { return ellipse_perimeter(e.semi_x, e.semi_y); }},
        piece);
}

Vec2 piece_start(const BoundaryPiece& piece) { return piece_point(piece, 0.0); }
Vec2 piece_end(const BoundaryPiece& piece) { return piece_point(piece, 1.0); }

Vec2 piece_outward_normal(const BoundaryPiece& piece, Vec2 p) {
    return std::visit(Overloaded{
        [](const SegmentPiece& s) {
            const Vec2 t = (s.b - s.a).normalized();
            return Vec2{t.y, -t.x};
        },
        [p](const ArcPiece& a) {
            const double sgn = a.sweep >= 0.0 ? 1.0 : -1.0;
            return (p - a.center).normalized() * sgn;
        },
        [p](const EllipsePiece& e) {
            const Vec2 q = p - e.center;
            return Vec2{q.x / (e.semi_x * e.semi_x), q.y / (e.semi_y * e.semi_y)}.normalized();
        }},
        piece);
}

std::optional<double> piece_ray_hit(const BoundaryPiece& piece, Vec2 origin, Vec2 dir, double t_min) {
    return std::visit(Overloaded{
        [&](const SegmentPiece& s) -> std::optional<double> {
            const Vec2 d = s.b - s.a;
            const double denom = cross(dir, d);
            if (std::abs(denom) < 1e-300) return std::nullopt;
            const Vec2 r = s.a - origin;
            const double t = cross(r, d) / denom;
            const double w = cross(r, dir) / denom;
            const double slack = kJoinTol / d.norm();
            if (t > t_min && w >= -slack && w <= 1.0 + slack) return t;
            return std::nullopt;
        },
        [&](const ArcPiece& a) -> std::optional<double> {
            const Vec2 q = origin - a.center;
            std::array<double, 2> roots{};
            const int n = solve_quadratic(dot(dir, dir), dot(q, dir), dot(q, q) - a.radius * a.radius, roots);
            for (int i = 0; i < n; ++i) {
                const double t = roots[i];
                if (t <= t_min) continue;
                const Vec2 p = q + dir * t;
                if (arc_contains_angle(a, std::atan2(p.y, p.x), kJoinTol / a.radius)) return t;
            }
            return std::nullopt;
        },
        [&](const EllipsePiece& e) -> std::optional<double> {
            const Vec2 q{(origin.x - e.center.x) / e.semi_x, (origin.y - e.center.y) / e.semi_y};
            const Vec2 d{dir.x / e.semi_x, dir.y / e.semi_y};
            std::array<double, 2> roots{};
            const int n = solve_quadratic(dot(d, d), dot(q, d), dot(q, q) - 1.0, roots);
            for (int i = 0; i < n; ++i) {
                if (roots[i] > t_min) return roots[i];
            }
            return std::nullopt;
        }},
        piece);
}

double piece_distance(const BoundaryPiece& piece, Vec2 p) {
    return std::visit(Overloaded{
        [p](const SegmentPiece& s) { return segment_distance(s.a, s.b, p); },
        [p](const ArcPiece& a) {
            const Vec2 q = p - a.center;
            const double r = q.norm();
            if (r > 0.0 && arc_contains_angle(a, std::atan2(q.y, q.x), 0.0)) return std::abs(r - a.radius);
            return std::min(distance(p, piece_start(a)), distance(p, piece_end(a)));
        },
        [p](const EllipsePiece& e) { return ellipse_distance(e, p); }},
        piece);
}

// ---------------------------------------------------------------------------
// Domain

BilliardDomain::BilliardDomain(DomainSpec spec, std::vector<BoundaryPiece> pieces, Vec2 center)
    : spec_(spec), pieces_(std::move(pieces)), center_(center) {
    const std::size_t n = pieces_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& cur = pieces_[i];
        const auto& next = pieces_[(i + 1) % n];
        if (distance(piece_end(cur), piece_start(next)) > 1e-12) {
            throw std::logic_error("boundary pieces do not form a closed loop");
        }
        const Vec2 t_out = piece_tangent(cur, 1.0);
        const Vec2 t_in = piece_tangent(next, 0.0);
        if (std::abs(cross(t_out, t_in)) > 1e-9 || dot(t_out, t_in) < 0.0) {
            corners_.push_back(piece_start(next));
        }
    }
    metrics_ = domain_metrics(*this);
}

BilliardDomain BilliardDomain::rectangle(double width, double height) {
    if (!(width > 0.0 && height > 0.0)) throw ConfigError("rectangle sides must be positive");
    const Vec2 p0{0.0, 0.0}, p1{width, 0.0}, p2{width, height}, p3{0.0, height};
    return BilliardDomain({DomainKind::rectangle, width, height},
                          {SegmentPiece{p0, p1}, SegmentPiece{p1, p2}, SegmentPiece{p2, p3}, SegmentPiece{p3, p0}},
                          {0.5 * width, 0.5 * height});
}

BilliardDomain BilliardDomain::disk(double radius) {
    if (!(radius > 0.0)) throw ConfigError("disk radius must be positive");
    return BilliardDomain({DomainKind::disk, radius, radius}, {ArcPiece{{0.0, 0.0}, radius, 0.0, kTwoPi}}, {0.0, 0.0});
}

BilliardDomain BilliardDomain::ellipse(double semi_x, double semi_y) {
    if (!(semi_x > 0.0 && semi_y > 0.0)) throw ConfigError("ellipse semi-axes must be positive");
    return BilliardDomain({DomainKind::ellipse, semi_x, semi_y}, {EllipsePiece{{0.0, 0.0}, semi_x, semi_y}}, {0.0, 0.0});
}

BilliardDomain BilliardDomain::stadium(double half_length, double radius) {
    if (!(half_length > 0.0 && radius > 0.0)) throw ConfigError("stadium half-length and radius must be positive");
    const double a = half_length, r = radius;
    const double pi = std::numbers::pi;
    return BilliardDomain({DomainKind::stadium, a, r},
                          {SegmentPiece{{-a, -r}, {a, -r}}, ArcPiece{{a, 0.0}, r, -0.5 * pi, pi},
                           SegmentPiece{{a, r}, {-a, r}}, ArcPiece{{-a, 0.0}, r, 0.5 * pi, pi}},
                          {0.0, 0.0});
}

BilliardDomain BilliardDomain::sinai_cell(double side, double radius) {
    if (!(side > 0.0 && radius > 0.0 && radius < side)) {
        throw ConfigError("sinai_cell needs 0 < radius < side");
    }
    const double s = side, r = radius;
    return BilliardDomain({DomainKind::sinai_cell, s, r},
                          {SegmentPiece{{r, 0.0}, {s, 0.0}}, SegmentPiece{{s, 0.0}, {s, s}},
                           SegmentPiece{{s, s}, {0.0, s}}, SegmentPiece{{0.0, s}, {0.0, r}},
                           ArcPiece{{0.0, 0.0}, r, 0.5 * std::numbers::pi, -0.5 * std::numbers::pi}},
                          {0.5 * s, 0.5 * s});
}

BilliardDomain BilliardDomain::from_spec(const DomainSpec& spec) {
    switch (spec.kind) {
    case DomainKind::rectangle: return rectangle(spec.a, spec.b);
    case DomainKind::disk: return disk(spec.a);
    case DomainKind::ellipse: return ellipse(spec.a, spec.b);
    case DomainKind::stadium: return stadium(spec.a, spec.b);
    case DomainKind::sinai_cell: return sinai_cell(spec.a, spec.b);
    }
    throw ConfigError("unknown domain kind");
}

bool BilliardDomain::contains(Vec2 p) const {
    const double a = spec_.a, b = spec_.b;
    switch (spec_.kind) {
    case DomainKind::rectangle: return p.x > 0.0 && p.x < a && p.y > 0.0 && p.y < b;
    case DomainKind::disk: return p.x * p.x + p.y * p.y < a * a;
    case DomainKind::ellipse: return (p.x / a) * (p.x / a) + (p.y / b) * (p.y / b) < 1.0;
    case DomainKind::stadium: return segment_distance({-a, 0.0}, {a, 0.0}, p) < b;
    case DomainKind::sinai_cell:
        return p.x > 0.0 && p.x < a && p.y > 0.0 && p.y < a && p.x * p.x + p.y * p.y > b * b;
    }
    return false;
}

double BilliardDomain::boundary_distance(Vec2 p) const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& piece : pieces_) d = std::min(d, piece_distance(piece, p));
    return d;
}

double BilliardDomain::signed_distance(Vec2 p) const {
    const double d = boundary_distance(p);
    return contains(p) ? -d : d;
}

double BilliardDomain::corner_distance(Vec2 p) const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& c : corners_) d = std::min(d, distance(c, p));
    return d;
}

std::pair<Vec2, Vec2> BilliardDomain::bounding_box() const {
    const double a = spec_.a, b = spec_.b;
    switch (spec_.kind) {
    case DomainKind::rectangle: return {{0.0, 0.0}, {a, b}};
    case DomainKind::disk: return {{-a, -a}, {a, a}};
    case DomainKind::ellipse: return {{-a, -b}, {a, b}};
    case DomainKind::stadium: return {{-a - b, -b}, {a + b, b}};
    case DomainKind::sinai_cell: return {{0.0, 0.0}, {a, a}};
    }
    return {};
}

double BilliardDomain::enclosed_area_from_pieces() const {
    double twice_area = 0.0;
    for (const auto& piece : pieces_) {
        twice_area += std::visit(Overloaded{
            [](const SegmentPiece& s) { return cross(s.a, s.b); },
            [](const ArcPiece& a) {
                const double s0 = a.start_angle, s1 = a.start_angle + a.sweep;
                return a.radius * a.radius * a.sweep +
                       a.radius * (a.center.x * (std::sin(s1) - std::sin(s0)) -
                                   a.center.y * (std::cos(s1) - std::cos(s0)));
            },
            [](const EllipsePiece& e) { return kTwoPi * e.semi_x * e.semi_y; }},
            piece);
    }
    return 0.5 * twice_area;
}

DomainMetrics domain_metrics(const BilliardDomain& domain) {
    const double a = domain.spec().a, b = domain.spec().b;
    const double pi = std::numbers::pi;
    switch (domain.kind()) {
    case DomainKind::rectangle: return {a * b, 2.0 * (a + b)};
    case DomainKind::disk: return {pi * a * a, 2.0 * pi * a};
    case DomainKind::ellipse: return {pi * a * b, ellipse_perimeter(a, b)};
    case DomainKind::stadium: return {4.0 * a * b + pi * b * b, 4.0 * a + 2.0 * pi * b};
    case DomainKind::sinai_cell: return {a * a - 0.25 * pi * b * b, 4.0 * a - 2.0 * b + 0.5 * pi * b};
    }
    return {};
}

// ---------------------------------------------------------------------------
// Curves

CurveSegment::CurveSegment(const BilliardDomain& domain, Shape shape) : domain_(domain), shape_(shape) {}

CurveSegment CurveSegment::segment(const BilliardDomain& domain, Vec2 start, Vec2 end) {
    CurveSegment c(domain, Shape::segment);
    c.p0_ = start;
    c.length_ = distance(start, end);
    if (!(c.length_ > 0.0)) throw ConfigError("curve segment has zero length");
    c.dir_ = (end - start) / c.length_;
    c.finish();
    return c;
}

CurveSegment CurveSegment::arc(const BilliardDomain& domain, Vec2 center, double radius, double start_angle,
                               double end_angle) {
    if (!(radius > 0.0)) throw ConfigError("curve arc radius must be positive");
    if (!(std::abs(end_angle - start_angle) > 0.0) || std::abs(end_angle - start_angle) >= kTwoPi) {
        throw ConfigError("curve arc must sweep an angle in (0, 2pi)");
    }
    CurveSegment c(domain, Shape::arc);
    c.p0_ = center;
    c.radius_ = radius;
    c.angle0_ = start_angle;
    c.orient_ = end_angle > start_angle ? 1.0 : -1.0;
    c.length_ = radius * std::abs(end_angle - start_angle);
    c.finish();
    return c;
}

void CurveSegment::finish() {
    constexpr int kSamples = 2048;
    double best = std::numeric_limits<double>::infinity();
    int best_i = 0;
    for (int i = 0; i <= kSamples; ++i) {
        const Vec2 p = point(length_ * i / kSamples);
        if (!domain_.contains(p)) {
            throw ConfigError("curve leaves the domain interior");
        }
        const double d = domain_.boundary_distance(p);
        if (d < best) {
            best = d;
            best_i = i;
        }
    }
    const double lo = length_ * std::max(0, best_i - 1) / kSamples;
    const double hi = length_ * std::min(kSamples, best_i + 1) / kSamples;
    const auto r = boost::math::tools::brent_find_minima(
        [this](double s) { return domain_.boundary_distance(point(s)); }, lo, hi, 52);
    clearance_ = std::min(best, r.second);
    if (!(clearance_ > 0.0)) throw ConfigError("curve touches the boundary (clearance must be > 0)");
}

Vec2 CurveSegment::point(double s) const {
    if (shape_ == Shape::segment) return p0_ + dir_ * s;
    const double phi = angle0_ + orient_ * s / radius_;
    return p0_ + Vec2{std::cos(phi), std::sin(phi)} * radius_;
}

Vec2 CurveSegment::tangent(double s) const {
    if (shape_ == Shape::segment) return dir_;
    const double phi = angle0_ + orient_ * s / radius_;
    return Vec2{-std::sin(phi), std::cos(phi)} * orient_;
}

Vec2 CurveSegment::normal(double s) const { return perp(tangent(s)); }

std::pair<double, double> CurveSegment::local_coordinates(Vec2 p) const {
    if (shape_ == Shape::segment) {
        const Vec2 q = p - p0_;
        return {dot(q, dir_), dot(q, perp(dir_))};
    }
    const Vec2 q = p - p0_;
    const double span = length_ / radius_;
    double off = std::fmod(orient_ * (std::atan2(q.y, q.x) - angle0_), kTwoPi);
    if (off < 0.0) off += kTwoPi;
    if (off > span + 0.5 * (kTwoPi - span)) off -= kTwoPi;
    return {off * radius_, -orient_ * (q.norm() - radius_)};
}

std::vector<CurveSegment::Hit> CurveSegment::intersect_leg(Vec2 x, Vec2 dir, double t_min, double t_max) const {
    std::vector<Hit> hits;
    if (shape_ == Shape::segment) {
        const double denom = cross(dir, dir_);
        if (std::abs(denom) < 1e-300) return hits;
        const Vec2 r = p0_ - x;
        const double t = cross(r, dir_) / denom;
        const double s = cross(r, dir) / denom;
        if (t > t_min && t <= t_max && s >= 0.0 && s <= length_) hits.push_back({t, s});
        return hits;
    }
    const Vec2 q = x - p0_;
    std::array<double, 2> roots{};
    const int n = solve_quadratic(dot(dir, dir), dot(q, dir), dot(q, q) - radius_ * radius_, roots);
    for (int i = 0; i < n; ++i) {
        const double t = roots[i];
        if (!(t > t_min && t <= t_max)) continue;
        const double s = local_coordinates(x + dir * t).first;
        if (s >= 0.0 && s <= length_) hits.push_back({t, s});
    }
    return hits;
}

CurveFrame curve_frame(const CurveSegment& curve, double s) {
    if (!(s >= 0.0 && s <= curve.length())) {
        throw std::domain_error("curve_frame: arclength outside [0, L]");
    }
    return {curve.point(s), curve.tangent(s), curve.normal(s)};
}

double signed_normal_coordinate(const CurveSegment& curve, Vec2 x) {
    const auto [s, delta] = curve.local_coordinates(x);
    const double slack = 1e-12 * curve.length();   // endpoints recomputed from their coordinates
    if (!(s >= -slack && s <= curve.length() + slack) || !(std::abs(delta) < curve.clearance())) {
        throw std::range_error("signed_normal_coordinate: point outside the tubular neighbourhood of N");
    }
    return delta;
}

} // namespace qerest
