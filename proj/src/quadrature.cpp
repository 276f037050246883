#include "qerest/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>

#include <gsl/gsl_integration.h>

#include "qerest/errors.hpp"

namespace qerest {

namespace {

constexpr double kPi = std::numbers::pi;

int nodes_for(double k, double extent, double scale) {
    return static_cast<int>(std::ceil(scale * k * extent)) + 24;
}

} // namespace

const GaussRule& gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    static std::mutex mu;
    static std::map<int, std::unique_ptr<GaussRule>> cache;
    std::lock_guard lock(mu);
    auto& slot = cache[n];
    if (!slot) {
        auto rule = std::make_unique<GaussRule>();
        gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(static_cast<size_t>(n));
        if (!table) throw std::bad_alloc();
        rule->x.resize(n);
        rule->w.resize(n);
        for (int i = 0; i < n; ++i) {
            gsl_integration_glfixed_point(-1.0, 1.0, static_cast<size_t>(i), &rule->x[i], &rule->w[i], table);
        }
        gsl_integration_glfixed_table_free(table);
        slot = std::move(rule);
    }
    return *slot;
}

Vec2 BoundaryPatch::point(double u) const {
    switch (kind) {
    case Kind::segment: return a + (b - a) * u;
    case Kind::arc: {
        const double t = t0 + (t1 - t0) * u;
        return center + Vec2{std::cos(t), std::sin(t)} * rx;
    }
    case Kind::ellipse_arc: {
        const double t = t0 + (t1 - t0) * u;
        return center + Vec2{rx * std::cos(t), ry * std::sin(t)};
    }
    }
    return {};
}

Vec2 BoundaryPatch::normal(double u) const {
    switch (kind) {
    case Kind::segment: {
        const Vec2 d = (b - a).normalized();
        return Vec2{d.y, -d.x} * normal_sign;
    }
    case Kind::arc: {
        const double t = t0 + (t1 - t0) * u;
        return Vec2{std::cos(t), std::sin(t)} * normal_sign;
    }
    case Kind::ellipse_arc: {
        const double t = t0 + (t1 - t0) * u;
        return Vec2{ry * std::cos(t), rx * std::sin(t)}.normalized() * normal_sign;
    }
    }
    return {};
}

double BoundaryPatch::speed(double u) const {
    switch (kind) {
    case Kind::segment: return (b - a).norm();
    case Kind::arc: return std::abs(t1 - t0) * rx;
    case Kind::ellipse_arc: {
        const double t = t0 + (t1 - t0) * u;
        return std::abs(t1 - t0) * std::hypot(rx * std::sin(t), ry * std::cos(t));
    }
    }
    return 0.0;
}

double BoundaryPatch::length() const {
    if (kind != Kind::ellipse_arc) return speed(0.0);
    const auto& g = gauss_legendre(64);
    double acc = 0.0;
    for (std::size_t i = 0; i < g.x.size(); ++i) acc += 0.5 * g.w[i] * speed(0.5 * (g.x[i] + 1.0));
    return acc;
}

bool FundamentalRegion::contains(const BilliardDomain& domain, Vec2 p) const {
    if (!domain.contains(p)) return false;
    if (diagonal) return p.y <= p.x;
    return p.x >= center.x && p.y >= center.y;
}

double FundamentalRegion::boundary_length() const {
    double acc = 0.0;
    for (const auto& patch : boundary) acc += patch.length();
    return acc;
}

FundamentalRegion fundamental_region(const BilliardDomain& domain) {
    const auto& spec = domain.spec();
    FundamentalRegion r;
    r.center = domain.symmetry_center();
    r.rellich_origin = r.center;
    r.copies = 4.0;
    const double a = spec.a, b = spec.b;
    switch (spec.kind) {
    case DomainKind::rectangle:
        r.boundary = {BoundaryPatch::segment({a, 0.5 * b}, {a, b}), BoundaryPatch::segment({a, b}, {0.5 * a, b})};
        r.cells = {InteriorCell::box({0.5 * a, 0.5 * b}, {a, b})};
        break;
    case DomainKind::disk:
        r.boundary = {BoundaryPatch::arc({0, 0}, a, 0.0, 0.5 * kPi)};
        r.cells = {InteriorCell::polar({0, 0}, 1.0, 1.0, 0.0, 0.5 * kPi, 0.0, a)};
        break;
    case DomainKind::ellipse:
        r.boundary = {BoundaryPatch::ellipse_arc({0, 0}, a, b, 0.0, 0.5 * kPi)};
        r.cells = {InteriorCell::polar({0, 0}, a, b, 0.0, 0.5 * kPi, 0.0, 1.0)};
        break;
    case DomainKind::stadium:
        r.boundary = {BoundaryPatch::arc({a, 0}, b, 0.0, 0.5 * kPi), BoundaryPatch::segment({a, b}, {0, b})};
        r.cells = {InteriorCell::box({0, 0}, {a, b}), InteriorCell::polar({a, 0}, 1.0, 1.0, 0.0, 0.5 * kPi, 0.0, b)};
        break;
    case DomainKind::sinai_cell: {
        r.diagonal = true;
        r.copies = 2.0;
        r.rellich_origin = {0, 0};
        r.boundary = {BoundaryPatch::segment({a, 0}, {a, a}), BoundaryPatch::arc({0, 0}, b, 0.0, 0.25 * kPi, -1.0)};
        auto cell = InteriorCell::polar({0, 0}, 1.0, 1.0, 0.0, 0.25 * kPi, b, 0.0);
        cell.outer = InteriorCell::Outer::line_x;
        cell.edge = a;
        r.cells = {cell};
        break;
    }
    }
    return r;
}

std::vector<InteriorCell> full_cells(const BilliardDomain& domain) {
    const auto& spec = domain.spec();
    const double a = spec.a, b = spec.b;
    switch (spec.kind) {
    case DomainKind::rectangle: return {InteriorCell::box({0, 0}, {a, b})};
    case DomainKind::disk: return {InteriorCell::polar({0, 0}, 1.0, 1.0, 0.0, 2.0 * kPi, 0.0, a)};
    case DomainKind::ellipse: return {InteriorCell::polar({0, 0}, a, b, 0.0, 2.0 * kPi, 0.0, 1.0)};
    case DomainKind::stadium:
        return {InteriorCell::box({-a, -b}, {a, b}),
                InteriorCell::polar({a, 0}, 1.0, 1.0, -0.5 * kPi, 0.5 * kPi, 0.0, b),
                InteriorCell::polar({-a, 0}, 1.0, 1.0, 0.5 * kPi, 1.5 * kPi, 0.0, b)};
    case DomainKind::sinai_cell: {
        auto lower = InteriorCell::polar({0, 0}, 1.0, 1.0, 0.0, 0.25 * kPi, b, 0.0);
        lower.outer = InteriorCell::Outer::line_x;
        lower.edge = a;
        auto upper = InteriorCell::polar({0, 0}, 1.0, 1.0, 0.25 * kPi, 0.5 * kPi, b, 0.0);
        upper.outer = InteriorCell::Outer::line_y;
        upper.edge = a;
        return {lower, upper};
    }
    }
    return {};
}

std::vector<WeightedPoint> interior_rule(std::span<const InteriorCell> cells, double k, double scale) {
    std::vector<WeightedPoint> out;
    for (const auto& c : cells) {
        if (c.kind == InteriorCell::Kind::box) {
            const double wx = c.hi.x - c.lo.x, wy = c.hi.y - c.lo.y;
            const auto& gx = gauss_legendre(nodes_for(k, wx, scale));
            const auto& gy = gauss_legendre(nodes_for(k, wy, scale));
            out.reserve(out.size() + gx.x.size() * gy.x.size());
            for (std::size_t i = 0; i < gx.x.size(); ++i) {
                const double x = c.lo.x + 0.5 * wx * (gx.x[i] + 1.0);
                for (std::size_t j = 0; j < gy.x.size(); ++j) {
                    const double y = c.lo.y + 0.5 * wy * (gy.x[j] + 1.0);
                    out.push_back({{x, y}, 0.25 * wx * wy * gx.w[i] * gy.w[j]});
                }
            }
            continue;
        }
        auto outer = [&](double t) {
            switch (c.outer) {
            case InteriorCell::Outer::circle: return c.r1;
            case InteriorCell::Outer::line_x: return c.edge / std::cos(t);
            case InteriorCell::Outer::line_y: return c.edge / std::sin(t);
            }
            return c.r1;
        };
        const double scale_xy = std::max(c.ax, c.ay);
        const double r_max = std::max(outer(c.t0), outer(c.t1));
        const auto& gr = gauss_legendre(nodes_for(k, scale_xy * (r_max - c.r0), scale));
        const auto& gt = gauss_legendre(nodes_for(k, scale_xy * r_max * (c.t1 - c.t0), scale));
        out.reserve(out.size() + gr.x.size() * gt.x.size());
        for (std::size_t i = 0; i < gt.x.size(); ++i) {
            const double t = c.t0 + 0.5 * (c.t1 - c.t0) * (gt.x[i] + 1.0);
            const double wt = 0.5 * (c.t1 - c.t0) * gt.w[i];
            const double r1 = outer(t);
            const double ct = std::cos(t), st = std::sin(t);
            for (std::size_t j = 0; j < gr.x.size(); ++j) {
                const double r = c.r0 + 0.5 * (r1 - c.r0) * (gr.x[j] + 1.0);
                const double wr = 0.5 * (r1 - c.r0) * gr.w[j];
                out.push_back({c.center + Vec2{c.ax * r * ct, c.ay * r * st}, c.ax * c.ay * r * wr * wt});
            }
        }
    }
    return out;
}

std::vector<BoundaryNode> boundary_rule(std::span<const BoundaryPatch> patches, double k, double scale) {
    std::vector<BoundaryNode> out;
    for (const auto& p : patches) {
        const auto& g = gauss_legendre(nodes_for(k, p.length(), scale));
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            const double u = 0.5 * (g.x[i] + 1.0);
            out.push_back({p.point(u), p.normal(u), 0.5 * g.w[i] * p.speed(u)});
        }
    }
    return out;
}

std::vector<BoundaryNode> collocation_nodes(std::span<const BoundaryPatch> patches, int count) {
    double total = 0.0;
    std::vector<double> lengths;
    for (const auto& p : patches) {
        lengths.push_back(p.length());
        total += lengths.back();
    }
    std::vector<BoundaryNode> out;
    for (std::size_t j = 0; j < patches.size(); ++j) {
        const int m = std::max(4, static_cast<int>(std::ceil(count * lengths[j] / total)));
        for (int i = 0; i < m; ++i) {
            const double u = (i + 0.5) / m;
            out.push_back({patches[j].point(u), patches[j].normal(u), patches[j].speed(u) / m});
        }
    }
    return out;
}

std::vector<Vec2> interior_cloud(const BilliardDomain& domain, const FundamentalRegion& region, int count,
                                 std::uint64_t seed) {
    const auto [lo, hi] = domain.bounding_box();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(lo.x, hi.x), uy(lo.y, hi.y);
    std::vector<Vec2> out;
    out.reserve(count);
    std::int64_t attempts = 0;
    while (static_cast<int>(out.size()) < count) {
        if (++attempts > 1000LL * (count + 10)) throw NumericalError("interior_cloud: region has negligible area");
        const Vec2 p{ux(rng), uy(rng)};
        if (region.contains(domain, p)) out.push_back(p);
    }
    return out;
}

} // namespace qerest
