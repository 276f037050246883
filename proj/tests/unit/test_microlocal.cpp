#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "qerest/errors.hpp"
#include "qerest/microlocal.hpp"

using namespace qerest;
using doctest::Approx;

constexpr double pi = std::numbers::pi;

namespace {

CurveSymbol momentum_symbol(const CurveSegment& n, MomentumFactor a1) {
    const double L = n.length();
    return CurveSymbol("m", {{SpatialFactor::cosine_window(0.01 * L, 0.99 * L), std::move(a1)}}, L, 0.005 * L);
}

} // namespace

TEST_CASE("projection and tangential momentum") {
    const auto dom = BilliardDomain::rectangle(1.0, 1.0);
    const auto n = CurveSegment::segment(dom, {0.2, 0.5}, {0.8, 0.5});
    const double th = 0.7;
    const auto rho = TransversalPoint::make(n, 0.25, {std::cos(th), std::sin(th)});
    const auto c = project_piE(rho);
    CHECK(c.s == 0.25);
    CHECK(c.sigma == Approx(std::cos(th)));
    CHECK(TransversalPoint::make(n, 0.1, {0.0, 1.0}).sigma == Approx(0.0));
    CHECK(TransversalPoint::make(n, 0.1, {1.0, 0.0}).sigma == Approx(1.0));
}

TEST_CASE("gamma reflection") {
    const auto dom = BilliardDomain::stadium(1.0, 1.0);
    const auto h = CurveSegment::segment(dom, {-0.5, 0.3}, {0.5, 0.3});
    const auto g = involution_gammaE(h, TransversalPoint::make(h, 0.4, Vec2{0.6, 0.8}));
    CHECK(g.xi.x == Approx(0.6));
    CHECK(g.xi.y == Approx(-0.8));
    CHECK(g.s == 0.4);

    const auto n = CurveSegment::arc(dom, {0.0, 0.0}, 0.6, 0.3, 2.4);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 1000; ++i) {
        const auto rho = sample_nu(n, rng);
        const auto g1 = involution_gammaE(n, rho);
        const auto g2 = involution_gammaE(n, g1);
        CHECK(distance(g2.xi, rho.xi) < 1e-14);
        CHECK(g2.s == rho.s);
        const auto p = project_piE(rho), q = project_piE(g1);
        CHECK(p.s == q.s);
        CHECK(std::abs(p.sigma - q.sigma) < 1e-14);
        CHECK(g1.xi_n == Approx(-rho.xi_n));
    }
}

TEST_CASE("Cauchy weight factor") {
    CHECK(cauchy_weight_factor(0.3, {1.0, 0.0}) == 1.0);
    CHECK(cauchy_weight_factor(0.6, {0.0, 1.0}) == Approx(0.64));
    // sheet average of |a + b xi_n|^2
    const double s = 0.2, a = 0.7, b = -1.3, xn = std::sqrt(1 - s * s);
    CHECK(cauchy_weight_factor(s, {a, b}) == Approx(0.5 * ((a + b * xn) * (a + b * xn) + (a - b * xn) * (a - b * xn))));
}

TEST_CASE("nu limits of simple symbols") {
    const auto dom = BilliardDomain::stadium(1.0, 1.0);
    const auto n = CurveSegment::segment(dom, {-0.9, 0.35}, {0.7, 0.5});
    const double L = n.length(), A = dom.area();
    const double a0int = SpatialFactor::cosine_window(0.01 * L, 0.99 * L).integral();
    CHECK(a0int == Approx(0.49 * L));

    const NuMeasureQuadrature q(n, 256, 256);
    CHECK(q.total_mass() == Approx(L / A).epsilon(1e-10));
    CHECK(q.liouville_total() == Approx(pi * A));

    const double one = nu_limit(n, momentum_symbol(n, MomentumFactor::constant(1.0)), {1.0, 0.0});
    CHECK(one == Approx(a0int / A).epsilon(1e-10));
    const double odd = nu_limit(n, momentum_symbol(n, MomentumFactor::poly({0.0, 1.0})), {1.0, 0.0});
    CHECK(std::abs(odd) < 1e-14);
    const double sq = nu_limit(n, momentum_symbol(n, MomentumFactor::poly({0.0, 0.0, 1.0})), {1.0, 0.0});
    CHECK(sq == Approx(a0int / (2 * A)).epsilon(1e-10));
    // beta weights: (1/pi) int (1 - sigma^2) / sqrt(1 - sigma^2) = 1/2
    const double b = nu_limit(n, momentum_symbol(n, MomentumFactor::constant(1.0)), {0.0, 1.0});
    CHECK(b == Approx(a0int / (2 * A)).epsilon(1e-10));

    CurveSymbol other("x", {{SpatialFactor::bump(0.5, 0.2), MomentumFactor::constant(1.0)}}, 2 * L, 0.1);
    CHECK_THROWS_AS(nu_limit(n, other, {1.0, 0.0}), ConfigError);
}

TEST_CASE("nu limit against brute-force quadrature of the Liouville lift") {
    // (1/(pi A)) int_0^L int_0^pi a(s, cos th) dth ds: plain trapezoid in th, no Chebyshev weights.
    const auto dom = BilliardDomain::ellipse(2.0, 1.0);
    const auto n = CurveSegment::arc(dom, {0.2, 0.0}, 0.5, -1.0, 1.5);
    const double L = n.length();
    CurveSymbol sym("mix",
                    {{SpatialFactor::bump(0.5 * L, 0.3 * L), MomentumFactor::bump(0.3, 0.4)},
                     {SpatialFactor::cosine_window(0.1 * L, 0.8 * L), MomentumFactor::poly({0.5, 0.0, -1.0, 0.2})}},
                    L, 0.05 * L);
    const int ns = 600, nt = 600;
    double acc = 0.0;
    for (int i = 0; i < ns; ++i) {
        const double s = (i + 0.5) * L / ns;
        for (int j = 0; j < nt; ++j) {
            const double th = (j + 0.5) * pi / nt;
            acc += sym(s, std::cos(th));
        }
    }
    const double brute = acc * (L / ns) * (pi / nt) / (pi * dom.area());
    CHECK(nu_limit(n, sym, {1.0, 0.0}) == Approx(brute).epsilon(1e-6));
}

TEST_CASE("Wilson interval") {
    const auto [lo, hi] = wilson_interval(0, 100);
    CHECK(lo == 0.0);
    CHECK(hi == Approx(0.036994).epsilon(1e-4));
    const auto [l2, h2] = wilson_interval(50, 100);
    CHECK(l2 == Approx(0.40383).epsilon(1e-4));
    CHECK(h2 == Approx(0.59617).epsilon(1e-4));
}

TEST_CASE("no return before the horizon means no exceptional points") {
    const auto dom = BilliardDomain::stadium(1.0, 1.0);
    const auto n = CurveSegment::segment(dom, {-0.3, 0.1}, {0.3, 0.1});
    // every return to N needs a boundary bounce and so takes > 2 * clearance
    const double T = 1.9 * n.clearance();
    const auto e = exceptional_fraction(dom, n, 0.01, T, 500, {}, 5);
    CHECK(e.fraction == 0.0);
    CHECK(e.exceptional == 0);
    CHECK(e.samples == 500);
    CHECK_THROWS_AS(exceptional_fraction(dom, n, 0.01, T, 0, {}, 5), std::domain_error);
}

TEST_CASE("symmetry axis versus a generic segment in the stadium") {
    const auto dom = BilliardDomain::stadium(1.0, 1.0);
    const auto axis = CurveSegment::segment(dom, {-1.5, 0.0}, {1.5, 0.0});
    const auto off = CurveSegment::segment(dom, {-1.2, 0.3}, {0.9, 0.55});
    const auto ea = exceptional_fraction(dom, axis, 0.5, 50.0, 400, {}, 17);
    const auto eo = exceptional_fraction(dom, off, 0.5, 50.0, 400, {}, 17);
    CHECK(ea.fraction > 0.8);
    CHECK(eo.fraction < 0.02);
    CHECK(ea.used + ea.excluded == ea.samples);
}

TEST_CASE("estimates are reproducible and thread-count independent") {
    const auto dom = BilliardDomain::stadium(1.0, 1.0);
    const auto axis = CurveSegment::segment(dom, {-1.5, 0.0}, {1.5, 0.0});
    const auto a = exceptional_fraction(dom, axis, 0.5, 10.0, 200, {}, 99, 1);
    const auto b = exceptional_fraction(dom, axis, 0.5, 10.0, 200, {}, 99, 3);
    CHECK(a.exceptional == b.exceptional);
    CHECK(a.excluded == b.excluded);
    const auto sweep = exceptional_sweep(dom, axis, 0.5, 10.0, 200, {}, {1.0}, 99);
    REQUIRE(sweep.size() == 1);
    CHECK(sweep[0].exceptional == a.exceptional);
}

TEST_CASE("sample_nu marginals") {
    const auto dom = BilliardDomain::rectangle(1.0, 1.0);
    const auto n = CurveSegment::segment(dom, {0.2, 0.5}, {0.8, 0.5});
    std::mt19937_64 rng(1);
    const int m = 200000;
    double s_mean = 0, sig2 = 0, sheet = 0;
    for (int i = 0; i < m; ++i) {
        const auto r = sample_nu(n, rng);
        s_mean += r.s;
        sig2 += r.sigma * r.sigma;
        sheet += r.xi_n > 0 ? 1 : -1;
        CHECK(std::abs(r.xi.norm() - 1.0) < 1e-14);
    }
    CHECK(s_mean / m == Approx(0.3).epsilon(0.01));
    CHECK(sig2 / m == Approx(0.5).epsilon(0.01));   // E[cos^2] for a uniform angle
    CHECK(std::abs(sheet / m) < 0.01);
}
