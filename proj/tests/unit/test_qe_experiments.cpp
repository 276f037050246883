#include "doctest.h"

#include <cmath>
#include <numbers>

#include "qerest/errors.hpp"
#include "qerest/qe_experiments.hpp"

using namespace qerest;
using doctest::Approx;

constexpr double pi = std::numbers::pi;

namespace {

DeviationRecord rec(double dev, bool excluded = false) {
    DeviationRecord r;
    r.deviation = dev;
    r.excluded = excluded;
    return r;
}

const SpectrumWindow& rect_window() {
    static const SpectrumWindow w = find_spectrum(BilliardDomain::rectangle(1.0, 2.0), 3.0, 10.0);
    return w;
}

} // namespace

TEST_CASE("window sums") {
    WindowStats s;
    s.h = 0.1;
    DeviationRecord r;
    r.matrix_element = r.nu_limit = 0.37;
    r.deviation = 0.0;
    s.records = {r, r, r};
    summarize(s);
    CHECK(s.sum == 0.0);
    CHECK(s.count == 3);

    WindowStats one;
    one.h = 0.2;
    one.records = {rec(0.5)};
    summarize(one);
    CHECK(one.sum == Approx(0.04 * 0.5));
    CHECK(one.mean == Approx(0.5));

    WindowStats mixed;
    mixed.h = 1.0;
    mixed.records = {rec(1.0), rec(3.0), rec(100.0, true)};
    summarize(mixed);
    CHECK(mixed.count == 2);
    CHECK(mixed.excluded == 1);
    CHECK(mixed.mean == Approx(2.0));
    CHECK(mixed.excluded_fraction() == Approx(1.0 / 3));
}

TEST_CASE("density-one extraction") {
    const std::vector<DeviationRecord> all{rec(0.1), rec(0.2), rec(0.05), rec(0.3)};
    auto d = density_one_extract(all, 0.3);
    CHECK(d.fraction == 1.0);
    CHECK(d.indices.size() == 4);
    d = density_one_extract(all, 0.25);
    CHECK(d.fraction == Approx(3.0 / 4));
    CHECK(d.indices == std::vector<std::size_t>{0, 1, 2});
    d = density_one_extract(all, 0.0);
    CHECK(d.fraction == 0.0);
    CHECK(d.defined);
    const auto empty = density_one_extract(std::span<const DeviationRecord>{}, 0.1);
    CHECK_FALSE(empty.defined);
    CHECK(std::isnan(empty.fraction));
    CHECK_THROWS_AS(density_one_extract(all, -1e-3), ConfigError);
    const std::vector<DeviationRecord> with_excluded{rec(0.1), rec(0.0, true)};
    CHECK(density_one_extract(with_excluded, 0.05).fraction == 0.0);
}

TEST_CASE("deviation percentile") {
    const std::vector<DeviationRecord> r{rec(4), rec(1), rec(3), rec(2), rec(9, true)};
    CHECK(deviation_percentile(r, 0.0) == 1.0);
    CHECK(deviation_percentile(r, 1.0) == 4.0);
    CHECK(deviation_percentile(r, 0.5) == Approx(2.5));
    CHECK(std::isnan(deviation_percentile(std::span<const DeviationRecord>{}, 0.5)));
}

TEST_CASE("nu mass") {
    const auto st = BilliardDomain::stadium(1.0, 1.0);
    const auto n = CurveSegment::segment(st, {-1.0, 0.3}, {1.0, 0.3});
    CHECK(nu_mass(n, {1.0, 0.0}) == Approx(2.0 / (4 + pi)));
    CHECK(nu_mass(n, {0.0, 1.0}) == Approx(1.0 / (4 + pi)));
}

TEST_CASE("constant observable is exact") {
    const auto rect = BilliardDomain::rectangle(1.0, 2.0);
    const auto& w = rect_window();
    const auto obs = AmbientObservable::constant(rect, 2.5);
    const auto s = qe_ambient_window(rect, w, obs, w.h);
    CHECK(s.count == static_cast<int>(w.pairs.size()));
    for (const auto& r : s.records) {
        CHECK(r.deviation < 1e-8);
        CHECK_FALSE(r.excluded);
    }
    const auto disk = BilliardDomain::disk(1.0);
    const auto wd = find_spectrum(disk, 2.0, 6.0);
    for (const auto& r : qe_ambient_window(disk, wd, AmbientObservable::constant(disk, 1.0), wd.h).records) {
        CHECK(r.deviation < 1e-8);
    }
}

TEST_CASE("rectangle mode does not equidistribute") {
    const auto rect = BilliardDomain::rectangle(1.0, 2.0);
    const auto w = find_spectrum(rect, 3.4, 3.6);
    REQUIRE(w.pairs.size() == 1);
    const auto chi = [](Vec2 x) { return std::pow(std::sin(pi * x.x), 2); };
    // 2 int sin^4(pi x) dx int sin^2(pi y / 2) dy = 2 (3/8) 1 = 3/4
    CHECK(ambient_matrix_element(rect, w.pairs[0], chi, 0.7) == Approx(0.75).epsilon(1e-10));
}

TEST_CASE("bump observable limit") {
    const auto st = BilliardDomain::stadium(1.0, 1.0);
    const auto obs = AmbientObservable::bump(st, {0.3, 0.2}, 0.5);
    // plain polar midpoint rule for the bump's integral
    const int n = 20000;
    double radial = 0;
    for (int i = 0; i < n; ++i) {
        const double u = (i + 0.5) / n;
        radial += unit_bump(u) * u / n;
    }
    CHECK(obs.limit == Approx(2 * pi * 0.25 * radial / st.area()).epsilon(1e-8));
    CHECK(obs.chi({0.3, 0.2}) == 1.0);
    CHECK(obs.chi({0.9, 0.2}) == 0.0);
    CHECK_THROWS_AS(AmbientObservable::bump(st, {1.5, 0.5}, 0.5), ConfigError);
}

TEST_CASE("restriction statistics on rectangle modes") {
    const auto rect = BilliardDomain::rectangle(1.0, 2.0);
    const auto& w = rect_window();
    const auto n = CurveSegment::segment(rect, {0.1, 0.77}, {0.9, 0.77});
    const auto traces = window_traces(rect, w, n, {1.0, 0.0});
    REQUIRE(traces.traces.size() == w.pairs.size());
    for (std::size_t i = 0; i < w.pairs.size(); ++i) {
        CHECK(traces.failures[i].empty());
        CHECK(traces.traces[i].k == w.pairs[i].k);
        CHECK(traces.traces[i].h == Approx(1.0 / w.pairs[i].k));
    }
    const CurveSymbol mult("mult", {{SpatialFactor::cosine_window(0.1, 0.7), MomentumFactor::constant(1.0)}},
                           n.length(), 0.05);
    const auto s = restriction_statistics(traces, n, mult, w.h);
    CHECK(s.limit == Approx(0.3 / 2.0).epsilon(1e-10));
    CHECK(s.count == static_cast<int>(w.pairs.size()));
    double acc = 0;
    for (const auto& r : s.records) {
        CHECK(r.deviation == Approx(std::abs(r.matrix_element - s.limit)));
        CHECK(r.symbol_id == "mult");
        acc += r.deviation;
    }
    CHECK(s.sum == Approx(w.h * w.h * acc));

    auto flagged = w;
    flagged.missing_levels = true;
    CHECK_THROWS_AS(qe_restriction_window(rect, flagged, n, mult, {1.0, 0.0}, w.h), NumericalError);
}

TEST_CASE("records CSV") {
    DeviationRecord r;
    r.k = 3.5;
    r.h = 0.25;
    r.symbol_id = "a";
    r.weights = {0.0, 1.0};
    r.matrix_element = 0.1;
    r.nu_limit = 0.2;
    r.deviation = 0.1;
    r.flags = "x;y";
    const std::vector<DeviationRecord> v{r};
    const auto csv = records_csv(v);
    CHECK(csv.rfind("k,h,symbol_id,alpha,beta,matrix_element,nu_limit,deviation,flags\n", 0) == 0);
    CHECK(csv.find("3.5,0.25,a,0,1,0.10000000000000001,0.20000000000000001,0.10000000000000001,x;y\n") != std::string::npos);
}
