#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <gsl/gsl_sf_bessel.h>

#include "qerest/basis.hpp"
#include "qerest/quadrature.hpp"
#include "qerest/seeds.hpp"
#include "qerest/spectral_solver.hpp"

using namespace qerest;
using doctest::Approx;

constexpr double pi = std::numbers::pi;

namespace {

// Dirichlet k of the a x b rectangle in [lo, hi], by enumeration.
std::vector<double> lattice(double a, double b, double lo, double hi) {
    std::vector<double> out;
    for (int m = 1; m * pi / a <= hi; ++m) {
        for (int n = 1; n * pi / b <= hi; ++n) {
            const double k = pi * std::hypot(m / a, n / b);
            if (k >= lo && k <= hi) out.push_back(k);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Unit disk: zeros of J_m, m >= 1 counted twice.
std::vector<double> bessel_zeros(double lo, double hi) {
    std::vector<double> out;
    for (int m = 0;; ++m) {
        if (gsl_sf_bessel_zero_Jnu(m, 1) > hi) break;
        for (int s = 1;; ++s) {
            const double z = gsl_sf_bessel_zero_Jnu(m, s);
            if (z > hi) break;
            if (z < lo) continue;
            out.push_back(z);
            if (m > 0) out.push_back(z);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

double tension_at(const BilliardDomain& dom, double k) {
    double best = 1e300;
    SolverParams p;
    for (const auto cls : symmetry_classes(dom)) {
        const TensionProblem tp(dom, cls, k, p);
        best = std::min(best, tp.evaluate(k).tension);
    }
    return best;
}

} // namespace

TEST_CASE("Gauss-Legendre rule") {
    const auto& g = gauss_legendre(12);
    double acc = 0;
    for (std::size_t i = 0; i < g.x.size(); ++i) acc += g.w[i] * std::pow(g.x[i], 22);
    CHECK(acc == Approx(2.0 / 23).epsilon(1e-13));
}

TEST_CASE("interior rule integrates over the whole stadium") {
    const auto st = BilliardDomain::stadium(1.0, 1.0);
    const auto cells = full_cells(st);
    const auto rule = interior_rule(cells, 5.0, 0.7);
    double area = 0, mx2 = 0;
    for (const auto& p : rule) {
        area += p.w;
        mx2 += p.w * p.x.x * p.x.x;
    }
    CHECK(area == Approx(4 + pi).epsilon(1e-12));
    // int x^2 over the rectangle [-1,1]^2 plus two half disks shifted by +-1
    const double rect = 2 * 2.0 / 3;
    const double caps = 2 * (pi / 8 + (4.0 / 3) + pi / 2);
    CHECK(mx2 == Approx(rect + caps).epsilon(1e-12));
}

TEST_CASE("seeds") {
    CHECK(derive_seed(1, SeedStream::flow_samples, 0) != derive_seed(1, SeedStream::flow_samples, 1));
    CHECK(derive_seed(1, SeedStream::flow_samples, 0) != derive_seed(1, SeedStream::birkhoff, 0));
    CHECK(derive_seed(7, SeedStream::basis_jitter, 3) == derive_seed(7, SeedStream::basis_jitter, 3));
}

TEST_CASE("plane waves solve Helmholtz") {
    const auto st = BilliardDomain::stadium(1.0, 1.0);
    const double k = 7.3;
    const auto b = BasisSet::plane_waves(st, k, {1, 0}, {0.2, 0.7, 1.3});
    const double e = 1e-4;
    const Vec2 x{0.3, 0.4};
    const std::vector<Vec2> pts{x, x + Vec2{e, 0}, x - Vec2{e, 0}, x + Vec2{0, e}, x - Vec2{0, e}};
    const auto v = b.values(pts);
    for (int j = 0; j < b.size(); ++j) {
        const double lap = (v(1, j) + v(2, j) + v(3, j) + v(4, j) - 4 * v(0, j)) / (e * e);
        CHECK(std::abs(lap + k * k * v(0, j)) < 1e-4 * k * k);
    }
    // odd in x about the centre
    const auto m = b.values(std::vector<Vec2>{{0.3, 0.4}, {-0.3, 0.4}});
    for (int j = 0; j < b.size(); ++j) CHECK(m(0, j) == Approx(-m(1, j)));
}

TEST_CASE("combine survives cancelling coefficients") {
    const auto st = BilliardDomain::stadium(1.0, 1.0);
    const auto b = BasisSet::plane_waves(st, 60.0, {0, 1}, {0.7, 0.7, 1.1});
    const std::vector<Vec2> pts{{0.3, 0.4}, {-1.7, 0.2}, {1.2, -0.9}, {0.0, 0.0}};
    Eigen::VectorXd c(3);
    c << 1e10 + 1.0, -1e10, 0.5;
    const auto u = b.combine(pts, c);
    const auto v = b.values(pts);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        CHECK(std::abs(u(r) - (v(r, 0) + 0.5 * v(r, 2))) < 1e-8);
    }
    CHECK_THROWS_AS(b.combine(pts, Eigen::VectorXd::Ones(2)), std::invalid_argument);
}

TEST_CASE("missing-level flag") {
    const auto rect = BilliardDomain::rectangle(1.0, 2.0);
    auto w = find_spectrum(rect, 3.0, 10.0);
    CHECK_FALSE(w.missing_levels);
    // dropping one level stays inside the count fluctuation, dropping six does not
    w.pairs.erase(w.pairs.begin() + 3);
    CHECK_FALSE(slice_window(rect, w, 3.0, 10.0).missing_levels);
    w.pairs.erase(w.pairs.begin(), w.pairs.begin() + 5);
    CHECK(slice_window(rect, w, 3.0, 10.0).missing_levels);
}

TEST_CASE("tension at and between eigenvalues") {
    const auto rect = BilliardDomain::rectangle(1.0, 2.0);
    const double k11 = pi * std::sqrt(1.25);
    const double at = tension_at(rect, k11);
    CHECK(at < 1e-8);
    const double k12 = pi * std::sqrt(2.0);
    CHECK(tension_at(rect, 0.5 * (k11 + k12)) > 1e3 * at);
    const auto disk = BilliardDomain::disk(1.0);
    CHECK(tension_at(disk, gsl_sf_bessel_zero_Jnu(0, 1)) < 1e-8);
}

TEST_CASE("rectangle window matches the lattice") {
    const auto rect = BilliardDomain::rectangle(1.0, 2.0);
    const auto w = find_spectrum(rect, 3.0, 10.0);
    const auto ref = lattice(1.0, 2.0, 3.0, 10.0);
    REQUIRE(w.pairs.size() == ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(w.pairs[i].k - ref[i]) < 1e-7);
    CHECK_FALSE(w.missing_levels);
    CHECK(w.h == Approx(2.0 / 13.0));
    for (const auto& p : w.pairs) {
        const auto nd = norm_diagnostics(rect, p);
        CHECK(nd.quadrature_norm2 == Approx(1.0).epsilon(1e-8));
        CHECK(nd.rellich_norm2 == Approx(1.0).epsilon(1e-6));
    }
    const auto gram = gram_matrix(rect, w.pairs);
    CHECK((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("disk window matches Bessel zeros with multiplicities") {
    const auto disk = BilliardDomain::disk(1.0);
    const auto w = find_spectrum(disk, 2.0, 6.0);
    const auto ref = bessel_zeros(2.0, 6.0);
    REQUIRE(w.pairs.size() == ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(w.pairs[i].k - ref[i]) < 1e-7);
    // each m >= 1 level shows up twice (cos and sin classes); the J_0 zeros 2.405 and 5.520 are simple
    int doubles = 0;
    for (std::size_t i = 1; i < w.pairs.size(); ++i) {
        if (std::abs(w.pairs[i].k - w.pairs[i - 1].k) < 1e-7) {
            ++doubles;
            CHECK(w.pairs[i].basis.cls != w.pairs[i - 1].basis.cls);
        }
    }
    CHECK(2 * doubles == static_cast<int>(ref.size()) - 2);
}

TEST_CASE("rectangle eigenfunction values") {
    const auto rect = BilliardDomain::rectangle(1.0, 2.0);
    const auto w = find_spectrum(rect, 3.4, 3.6);
    REQUIRE(w.pairs.size() == 1);
    const std::vector<Vec2> pts{{0.5, 1.0}, {0.2, 0.3}};
    const auto u = evaluate_eigenfunction(rect, w.pairs[0], pts);
    const double sign = u[0] > 0 ? 1 : -1;
    CHECK(sign * u[0] == Approx(std::sqrt(2.0)).epsilon(1e-7));
    CHECK(sign * u[1] == Approx(std::sqrt(2.0) * std::sin(0.2 * pi) * std::sin(0.15 * pi)).epsilon(1e-7));
    const auto g = evaluate_gradient(rect, w.pairs[0], pts);
    CHECK(sign * g[1].x == Approx(std::sqrt(2.0) * pi * std::cos(0.2 * pi) * std::sin(0.15 * pi)).epsilon(1e-6));
    CHECK(sign * g[1].y == Approx(std::sqrt(2.0) * 0.5 * pi * std::sin(0.2 * pi) * std::cos(0.15 * pi)).epsilon(1e-6));

    // Dirichlet condition on 1000 boundary samples
    std::vector<Vec2> bd;
    for (int i = 0; i < 1000; ++i) {
        const double t = (i + 0.5) / 1000 * 6.0;
        if (t < 1) bd.push_back({t, 0});
        else if (t < 3) bd.push_back({1, t - 1});
        else if (t < 4) bd.push_back({4 - t, 2});
        else bd.push_back({0, 6 - t});
    }
    const auto ub = evaluate_eigenfunction(rect, w.pairs[0], bd);
    for (double x : ub) CHECK(std::abs(x) < std::max(1e-7, 10 * w.pairs[0].boundary_residual));
}

TEST_CASE("disk m = 0 mode against the normalised Bessel function") {
    const auto disk = BilliardDomain::disk(1.0);
    const double j01 = gsl_sf_bessel_zero_Jnu(0, 1);
    const auto w = find_spectrum(disk, 2.3, 2.5);
    REQUIRE(w.pairs.size() == 1);
    // ||J0(j r)||^2 over the unit disk = pi J1(j)^2
    const double c = 1.0 / (std::sqrt(pi) * std::abs(gsl_sf_bessel_J1(j01)));
    const std::vector<Vec2> pts{{0, 0}, {0.3, 0.2}, {-0.5, 0.6}};
    const auto u = evaluate_eigenfunction(disk, w.pairs[0], pts);
    const double sign = u[0] > 0 ? 1 : -1;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(std::abs(sign * u[i] - c * gsl_sf_bessel_J0(j01 * pts[i].norm())) < 1e-6);
    }
}

TEST_CASE("empty and zero-width windows") {
    const auto rect = BilliardDomain::rectangle(1.0, 2.0);
    const auto w = find_spectrum(rect, 0.5, 3.0);
    CHECK(w.pairs.empty());
    const auto wc = weyl_check(rect, w);
    CHECK(wc.count == 0);
    CHECK(std::isfinite(wc.rel_leading));
    const auto z = find_spectrum(rect, 5.0, 5.0);
    CHECK(z.pairs.empty());
    const auto zc = weyl_check(rect, z);
    CHECK(zc.rel_leading == 0.0);
    CHECK(zc.rel_two_term == 0.0);
}

TEST_CASE("Weyl count for the rectangle from zero") {
    const auto rect = BilliardDomain::rectangle(1.0, 2.0);
    const auto w = find_spectrum(rect, 0.0, 25.0);
    const auto ref = lattice(1.0, 2.0, 0.0, 25.0);
    CHECK(w.pairs.size() == ref.size());
    const auto wc = weyl_check(rect, w);
    CHECK(wc.count == static_cast<int>(ref.size()));
    CHECK(std::abs(wc.rel_leading) < 0.2);
    CHECK(std::abs(wc.rel_two_term) < 0.05);
}

TEST_CASE("slicing keeps pairs in range") {
    const auto rect = BilliardDomain::rectangle(1.0, 2.0);
    const auto w = find_spectrum(rect, 3.0, 10.0);
    const auto s = slice_window(rect, w, 5.0, 8.0);
    CHECK(s.k_min == 5.0);
    CHECK(s.h == Approx(2.0 / 13.0));
    CHECK(s.pairs.size() == lattice(1.0, 2.0, 5.0, 8.0).size());
    for (const auto& p : s.pairs) CHECK((p.k >= 5.0 && p.k <= 8.0));
}

TEST_CASE("results do not depend on the thread count") {
    const auto st = BilliardDomain::stadium(1.0, 1.0);
    const auto a = find_spectrum(st, 8.0, 10.0, {}, 1);
    const auto b = find_spectrum(st, 8.0, 10.0, {}, 2);
    REQUIRE(a.pairs.size() == b.pairs.size());
    for (std::size_t i = 0; i < a.pairs.size(); ++i) {
        CHECK(a.pairs[i].k == b.pairs[i].k);
        CHECK(a.pairs[i].coefficients == b.pairs[i].coefficients);
    }
}
