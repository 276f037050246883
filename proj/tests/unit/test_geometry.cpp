#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "qerest/geometry.hpp"

using namespace qerest;
using doctest::Approx;

constexpr double pi = std::numbers::pi;

TEST_CASE("segment curve frame") {
    const auto dom = BilliardDomain::rectangle(1.0, 1.0);
    const auto n = CurveSegment::segment(dom, {0.2, 0.5}, {0.8, 0.5});
    CHECK(n.length() == Approx(0.6));
    const auto f = curve_frame(n, 0.3);
    CHECK(f.point.x == Approx(0.5));
    CHECK(f.point.y == Approx(0.5));
    CHECK(f.tangent.x == Approx(1.0));
    CHECK(f.tangent.y == Approx(0.0));
    CHECK(f.normal.x == Approx(0.0));
    CHECK(f.normal.y == Approx(1.0));
    const auto f0 = curve_frame(n, 0.0);
    CHECK(f0.point == Vec2{0.2, 0.5});
    CHECK_THROWS_AS(curve_frame(n, -1e-3), std::domain_error);
    CHECK_THROWS_AS(curve_frame(n, 0.7), std::domain_error);
    CHECK(n.clearance() == Approx(0.2));
}

TEST_CASE("arc frame rotates at rate 1/r") {
    const auto dom = BilliardDomain::disk(2.0);
    const double r = 0.7;
    const auto n = CurveSegment::arc(dom, {0.1, -0.2}, r, 0.3, 2.5);
    CHECK(n.length() == Approx(r * 2.2));
    const double ds = 1e-4;
    for (double s = 0.05; s < n.length() - ds; s += 0.13) {
        const auto a = curve_frame(n, s), b = curve_frame(n, s + ds);
        const double turn = std::atan2(cross(a.tangent, b.tangent), dot(a.tangent, b.tangent));
        CHECK(turn == Approx(ds / r).epsilon(1e-8));
        // tangent from finite differences of the point
        const Vec2 fd = (curve_frame(n, s + ds).point - curve_frame(n, s - ds).point) / (2 * ds);
        CHECK(distance(fd, a.tangent) < 1e-7);
        CHECK(a.normal == perp(a.tangent));
    }
}

TEST_CASE("signed normal coordinate") {
    const auto dom = BilliardDomain::stadium(1.0, 1.0);
    const auto seg = CurveSegment::segment(dom, {-0.8, 0.3}, {0.6, 0.45});
    const auto arc = CurveSegment::arc(dom, {0.0, 0.0}, 0.5, 0.2, 2.0);
    for (const auto* n : {&seg, &arc}) {
        for (double s : {0.0, 0.1, 0.5, n->length()}) {
            const auto f = curve_frame(*n, s);
            CHECK(std::abs(signed_normal_coordinate(*n, f.point)) < 1e-14);
            if (s > 0.0 && s < n->length()) {
                for (double d : {-0.01, 1e-3, 0.02}) {
                    CHECK(signed_normal_coordinate(*n, f.point + d * f.normal) == Approx(d).epsilon(1e-10));
                }
            }
        }
        // |grad f| = 1 by central differences at random tube points
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> us(0.05, 0.95), ud(-0.5, 0.5);
        const double w = 0.5 * n->clearance();
        const double e = 1e-6;
        for (int i = 0; i < 100; ++i) {
            const auto f = curve_frame(*n, us(rng) * n->length());
            const Vec2 x = f.point + ud(rng) * w * f.normal;
            const double gx = (signed_normal_coordinate(*n, x + Vec2{e, 0}) - signed_normal_coordinate(*n, x - Vec2{e, 0})) / (2 * e);
            const double gy = (signed_normal_coordinate(*n, x + Vec2{0, e}) - signed_normal_coordinate(*n, x - Vec2{0, e})) / (2 * e);
            CHECK(std::hypot(gx, gy) == Approx(1.0).epsilon(1e-6));
        }
    }
    CHECK_THROWS_AS(signed_normal_coordinate(seg, {0.0, -0.9}), std::range_error);
}

TEST_CASE("domain metrics closed forms") {
    auto m = domain_metrics(BilliardDomain::rectangle(1.0, 2.0));
    CHECK(m.area == Approx(2.0));
    CHECK(m.perimeter == Approx(6.0));
    m = domain_metrics(BilliardDomain::disk(1.0));
    CHECK(m.area == Approx(pi));
    CHECK(m.perimeter == Approx(2 * pi));
    const auto st = BilliardDomain::stadium(1.0, 1.0);
    m = domain_metrics(st);
    CHECK(m.area == Approx(4.0 + pi));
    CHECK(m.perimeter == Approx(4.0 + 2 * pi));
    // independent: Green's theorem over the pieces and summed piece lengths
    CHECK(st.enclosed_area_from_pieces() == Approx(4.0 + pi).epsilon(1e-12));
    double per = 0.0;
    for (const auto& p : st.pieces()) per += piece_length(p);
    CHECK(per == Approx(4.0 + 2 * pi).epsilon(1e-12));
    const auto el = BilliardDomain::ellipse(2.0, 1.0);
    CHECK(el.area() == Approx(2 * pi));
    CHECK(el.enclosed_area_from_pieces() == Approx(2 * pi).epsilon(1e-9));
    CHECK(el.perimeter() == Approx(9.688448220547675).epsilon(1e-10));
    const auto sc = BilliardDomain::sinai_cell(1.0, 0.25);
    CHECK(sc.area() == Approx(1.0 - pi * 0.0625 / 4));
}

TEST_CASE("stadium area by Monte Carlo") {
    const auto st = BilliardDomain::stadium(1.0, 1.0);
    const auto [lo, hi] = st.bounding_box();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ux(lo.x, hi.x), uy(lo.y, hi.y);
    const int n = 400000;
    int in = 0;
    for (int i = 0; i < n; ++i) in += st.contains({ux(rng), uy(rng)});
    const double box = (hi.x - lo.x) * (hi.y - lo.y);
    const double est = box * in / n;
    const double sd = box * std::sqrt(0.5 * 0.5 / n);
    CHECK(std::abs(est - (4.0 + pi)) < 5 * sd);
}

TEST_CASE("containment and distances") {
    const auto st = BilliardDomain::stadium(1.0, 1.0);
    CHECK(st.contains({0.0, 0.0}));
    CHECK(st.contains({1.9, 0.0}));
    CHECK_FALSE(st.contains({1.9, 0.9}));
    CHECK(st.boundary_distance({0.0, 0.0}) == Approx(1.0));
    CHECK(st.boundary_distance({1.5, 0.0}) == Approx(0.5));
    CHECK(st.signed_distance({0.0, 0.5}) == Approx(-0.5));
    CHECK(st.signed_distance({0.0, 1.5}) == Approx(0.5));
    const auto sq = BilliardDomain::rectangle(1.0, 1.0);
    CHECK(sq.corners().size() == 4);
    CHECK(sq.corner_distance({0.9, 0.9}) == Approx(std::sqrt(0.02)));
}

TEST_CASE("curve must lie inside the domain") {
    const auto sq = BilliardDomain::rectangle(1.0, 1.0);
    CHECK_THROWS(CurveSegment::segment(sq, {0.5, 0.5}, {1.5, 0.5}));
    CHECK_THROWS(CurveSegment::segment(sq, {0.5, 0.5}, {0.5, 0.5}));
}

TEST_CASE("piece ray hits") {
    const SegmentPiece seg{{1.0, 0.0}, {1.0, 1.0}};
    const auto t = piece_ray_hit(seg, {0.5, 0.5}, {1.0, 0.0}, 0.0);
    REQUIRE(t);
    CHECK(*t == Approx(0.5));
    CHECK_FALSE(piece_ray_hit(seg, {0.5, 0.5}, {-1.0, 0.0}, 0.0));
    const ArcPiece arc{{0.0, 0.0}, 1.0, 0.0, pi};
    const auto ta = piece_ray_hit(arc, {0.0, 0.0}, {0.0, 1.0}, 0.0);
    REQUIRE(ta);
    CHECK(*ta == Approx(1.0));
    CHECK_FALSE(piece_ray_hit(arc, {0.0, 0.0}, {0.0, -1.0}, 0.0));
}
