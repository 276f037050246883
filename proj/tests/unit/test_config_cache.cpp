#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "qerest/cache.hpp"
#include "qerest/config.hpp"

using namespace qerest;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({
  "domain": {"kind": "stadium", "a": 1, "b": 1},
  "curve": {"type": "segment", "start": [-1.2, 0.3], "end": [0.9, 0.55]},
  "windows": {"ranges": [[10, 12]]},
  "symbols": [{"id": "mult", "margin": 0.1, "terms": [{"a0": {"type": "cosine_window", "left": 0.2, "right": 1.8}}]}]
})";

fs::path scratch(const std::string& name) {
    const char* env = std::getenv("QEREST_TEST_TMP");
    fs::path p = fs::path(env ? env : fs::temp_directory_path().string()) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

bool has_violation(const ConfigValidationError& e, const std::string& needle) {
    for (const auto& v : e.violations()) {
        if (v.find(needle) != std::string::npos) return true;
    }
    return false;
}

SpectrumWindow synthetic_window(int pairs) {
    SpectrumWindow w;
    w.k_min = 10.0;
    w.k_max = 20.0;
    w.h = 2.0 / 30.0;
    for (int i = 0; i < pairs; ++i) {
        EigenPair p;
        p.k = 10.0 + i * 0.1 + 1.0 / 3.0;
        p.basis = {BasisType::real_plane_waves, {i % 2, (i / 2) % 2}, 5 + i, 20.123456789, 42};
        for (int j = 0; j < p.basis.size; ++j) p.coefficients.push_back(std::sin(1.0 + i * 7.1 + j * 0.37) / 3.0);
        p.norm_constant = 1.0 / 7.0 + i;
        p.tension = 1e-11 * (i + 1);
        p.boundary_residual = 3e-10;
        p.rellich_deviation = 1e-12;
        p.multiplicity = 1 + i % 2;
        w.pairs.push_back(p);
    }
    w.weyl_leading = 51.7;
    w.weyl_two_term = 50.1;
    w.weyl_deviation = -0.0331;
    return w;
}

} // namespace

TEST_CASE("minimal config gets defaults") {
    const auto c = parse_config(kMinimal);
    CHECK(c.domain.kind == DomainKind::stadium);
    CHECK(c.symbols.size() == 1);
    CHECK(c.symbols[0].terms[0].a1.is_constant());
    CHECK(c.symbols[0].terms[0].a1.value == 1.0);
    CHECK(c.weights == std::vector<CauchyWeights>{{1.0, 0.0}});
    CHECK(c.flow.t0 == 0.5);
    CHECK(c.flow.horizon == 50.0);
    CHECK(c.flow.tol.glancing == 1e-8);
    CHECK(c.qe.points_per_wavelength == 10.0);
    CHECK(c.qe.density_percentile == 0.9);
    CHECK(c.solver == SolverParams{});
    CHECK(c.cache_dir == "qerest-cache");
    const auto w = c.windows.windows();
    REQUIRE(w.size() == 1);
    CHECK(w[0].h == Approx(2.0 / 22.0));
}

TEST_CASE("canonical form round-trips") {
    const auto c = parse_config(kMinimal);
    const auto again = parse_config(to_json(c).dump());
    CHECK(to_json(again) == to_json(c));
    CHECK(config_id(again) == config_id(c));
}

TEST_CASE("config id ignores comments, whitespace and output paths") {
    const std::string commented = std::string("// demo\n") + kMinimal;
    CHECK(config_id(parse_config(commented)) == config_id(parse_config(kMinimal)));
    auto c = parse_config(kMinimal);
    const auto id = config_id(c);
    c.cache_dir = "/elsewhere";
    c.output_dir = "out2";
    CHECK(config_id(c) == id);
    c.seed = 7;
    CHECK(config_id(c) != id);
    CHECK(id.size() == 64);
}

TEST_CASE("validation errors name the field") {
    auto j = nlohmann::json::parse(kMinimal);
    j["flow_check"] = {{"tolerances", {{"glancing", -1}}}};
    try {
        parse_config(j.dump());
        FAIL("expected a validation error");
    } catch (const ConfigValidationError& e) {
        CHECK(has_violation(e, "flow_check.tolerances.glancing"));
        CHECK(has_violation(e, "must be > 0"));
    }
}

TEST_CASE("all violations are reported together") {
    auto j = nlohmann::json::parse(kMinimal);
    j["bogus"] = 1;
    j["domain"]["kind"] = "triangle";
    j["qe"] = {{"points_per_wavelength", 4}};
    j["weights"] = {{0, 0}};
    try {
        parse_config(j.dump());
        FAIL("expected a validation error");
    } catch (const ConfigValidationError& e) {
        CHECK(e.violations().size() >= 4);
        CHECK(has_violation(e, "bogus: unknown key"));
        CHECK(has_violation(e, "domain.kind"));
        CHECK(has_violation(e, "qe.points_per_wavelength"));
        CHECK(has_violation(e, "weights[0]"));
    }
    CHECK_THROWS_AS(parse_config("{not json"), ConfigValidationError);
}

TEST_CASE("cross-field checks") {
    auto j = nlohmann::json::parse(kMinimal);
    j["curve"]["end"] = {3.0, 0.55};
    CHECK_THROWS_AS(parse_config(j.dump()), ConfigValidationError);
    j = nlohmann::json::parse(kMinimal);
    j["symbols"][0]["terms"][0]["a0"]["left"] = 0.01;
    try {
        parse_config(j.dump());
        FAIL("expected a validation error");
    } catch (const ConfigValidationError& e) {
        CHECK(has_violation(e, "symbols[0]"));
    }
    j = nlohmann::json::parse(kMinimal);
    j["ambient"] = {{{"id", "b"}, {"type", "bump"}, {"center", {1.8, 0.0}}, {"radius", 0.5}}};
    CHECK_THROWS_AS(parse_config(j.dump()), ConfigValidationError);
}

TEST_CASE("dyadic windows") {
    WindowScheme w;
    w.k0 = 5.0;
    w.count = 3;
    const auto r = w.windows();
    REQUIRE(r.size() == 3);
    CHECK(r[0].k_min == Approx(5.0));
    CHECK(r[0].k_max == Approx(5.0 * std::sqrt(2.0)));
    CHECK(r[2].h == Approx(1.0 / 20.0));
    CHECK(r[2].k_min == Approx(20.0));
}

TEST_CASE("exact number formatting") {
    for (double x : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-310, 3.141592653589793}) {
        CHECK(parse_exact(format_exact(x)) == x);
    }
    CHECK_THROWS_AS(parse_exact("1.5x"), CacheCorruptError);
}

TEST_CASE("cache round trip is bitwise exact") {
    const auto dir = scratch("cache-roundtrip");
    const auto dom = BilliardDomain::stadium(1.0, 1.0);
    const SolverParams params;
    const auto w = synthetic_window(50);
    const auto back = cache_roundtrip(dom, params, w, dir);
    REQUIRE(back.pairs.size() == 50);
    CHECK(back.k_min == w.k_min);
    CHECK(back.h == w.h);
    // Weyl diagnostics are re-derived on load, everything else comes back bit for bit
    CHECK(back.weyl_deviation == weyl_check(dom, back).rel_leading);
    CHECK(back.tension_evaluations == w.tension_evaluations);
    for (std::size_t i = 0; i < 50; ++i) {
        const auto& a = w.pairs[i];
        const auto& b = back.pairs[i];
        CHECK(a.k == b.k);
        CHECK(a.coefficients == b.coefficients);
        CHECK(a.norm_constant == b.norm_constant);
        CHECK(a.basis.cls == b.basis.cls);
        CHECK(a.basis.k == b.basis.k);
        CHECK(a.basis.seed == b.basis.seed);
        CHECK(a.multiplicity == b.multiplicity);
    }
}

TEST_CASE("tampered manifests are refused") {
    const auto dir = scratch("cache-tamper");
    const auto dom = BilliardDomain::stadium(1.0, 1.0);
    const SolverParams params;
    SpectrumCache cache(dir);
    const auto manifest = cache.save(dom.spec(), params, synthetic_window(5));
    auto m = nlohmann::json::parse(read_file(manifest));
    m["pairs"][2]["k"] = format_exact(10.5);
    atomic_write(manifest, m.dump(1));
    CHECK_THROWS_AS(cache.load(dom.spec(), params, 10.0, 20.0), CacheCorruptError);

    // corrupt coefficient bytes
    const auto manifest2 = cache.save(dom.spec(), params, synthetic_window(5));
    m = nlohmann::json::parse(read_file(manifest2));
    const auto coeff = manifest2.parent_path() / m["coefficients"].get<std::string>();
    std::string bytes = read_file(coeff);
    bytes[3] ^= 0x10;
    atomic_write(coeff, bytes);
    CHECK_THROWS_AS(cache.load(dom.spec(), params, 10.0, 20.0), CacheCorruptError);
}

TEST_CASE("stale solver version signals a recompute and leaves files alone") {
    const auto dir = scratch("cache-stale");
    const auto dom = BilliardDomain::stadium(1.0, 1.0);
    const SolverParams params;
    SpectrumCache cache(dir);
    const auto manifest = cache.save(dom.spec(), params, synthetic_window(3));
    auto m = nlohmann::json::parse(read_file(manifest));
    m["solver_version"] = "mps-999";
    const std::string edited = m.dump(1);
    atomic_write(manifest, edited);
    const auto r = cache.load(dom.spec(), params, 10.0, 20.0);
    CHECK(r.status == SpectrumCache::Status::stale_version);
    CHECK_FALSE(r.window);
    CHECK(read_file(manifest) == edited);
    CHECK(cache.load_covering(dom.spec(), params, 12.0, 15.0).status == SpectrumCache::Status::miss);
}

TEST_CASE("covering lookups slice the narrowest entry") {
    const auto dir = scratch("cache-cover");
    const auto dom = BilliardDomain::stadium(1.0, 1.0);
    const SolverParams params;
    SpectrumCache cache(dir);
    auto wide = synthetic_window(50);
    wide.k_min = 5.0;
    wide.k_max = 30.0;
    cache.save(dom.spec(), params, wide);
    auto narrow = synthetic_window(50);
    cache.save(dom.spec(), params, narrow);
    const auto r = cache.load_covering(dom.spec(), params, 11.0, 12.0);
    REQUIRE(r.status == SpectrumCache::Status::hit);
    CHECK(r.manifest.filename().string() == spectrum_id(dom.spec(), params, 10.0, 20.0) + ".json");
    CHECK(r.window->k_min == 11.0);
    CHECK(r.window->h == Approx(2.0 / 23.0));
    for (const auto& p : r.window->pairs) CHECK((p.k >= 11.0 && p.k <= 12.0));
    CHECK(r.window->pairs.size() == 10);
    CHECK(cache.load_covering(dom.spec(), params, 4.0, 12.0).status == SpectrumCache::Status::miss);
    SolverParams other = params;
    other.seed = 1;
    CHECK(cache.load_covering(dom.spec(), other, 11.0, 12.0).status == SpectrumCache::Status::miss);
}

TEST_CASE("sha256") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
