#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "qerest/cache.hpp"
#include "qerest/cli.hpp"
#include "json.hpp"

using namespace qerest;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const char* env = std::getenv("QEREST_TEST_TMP");
    fs::path p = fs::path(env ? env : fs::temp_directory_path().string()) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

struct Run {
    int code;
    std::string out, err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "qerest");
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path write_config(const fs::path& dir, const std::string& name, const std::string& text) {
    const auto p = dir / name;
    atomic_write(p, text);
    return p;
}

const char* kRectangle = R"({
  // small integrable example
  "domain": {"kind": "rectangle", "a": 1, "b": 2},
  "curve": {"type": "segment", "start": [0.1, 0.77], "end": [0.9, 0.77]},
  "windows": {"ranges": [[3, 6], [6, 9]]},
  "symbols": [{"id": "mult", "margin": 0.05, "terms": [{"a0": {"type": "cosine_window", "left": 0.1, "right": 0.7}}]}],
  "weights": [[1, 0], [0, 1]],
  "ambient": [{"id": "one", "type": "constant", "value": 1}],
  "flow_check": {"samples": 100, "T": 10},
  "seed": 3
})";

const char* kAxis = R"({
  "domain": {"kind": "stadium", "a": 1, "b": 1},
  "curve": {"type": "segment", "start": [-1.5, 0], "end": [1.5, 0]},
  "windows": {"ranges": [[5, 6]]},
  "symbols": [{"id": "mult", "margin": 0.1, "terms": [{"a0": {"type": "bump", "center": 1.5, "width": 1}}]}],
  "flow_check": {"samples": 300, "T": 50, "sweep": [1]},
  "seed": 1
})";

} // namespace

TEST_CASE("unknown subcommand prints usage and exits 1") {
    const auto r = cli({"frobnicate"});
    CHECK(r.code == exit_validation);
    CHECK(r.err.find("qe-run") != std::string::npos);
    CHECK(cli({}).code == exit_validation);
}

TEST_CASE("help exits 0") {
    const auto r = cli({"--help"});
    CHECK(r.code == exit_ok);
    CHECK(r.out.find("flow-check") != std::string::npos);
}

TEST_CASE("missing or invalid config exits 1") {
    const auto dir = scratch("cli-bad");
    CHECK(cli({"qe-run"}).code == exit_validation);
    CHECK(cli({"qe-run", "--config", (dir / "nope.json").string()}).code == exit_validation);
    const auto bad = write_config(dir, "bad.json", R"({"domain": {"kind": "stadium", "a": -1, "b": 1}})");
    const auto r = cli({"spectrum", "--config", bad.string()});
    CHECK(r.code == exit_validation);
    CHECK(r.err.find("domain.a") != std::string::npos);
    const auto good = write_config(dir, "good.json", kRectangle);
    CHECK(cli({"spectrum", "--config", good.string(), "--windows", "x"}).code == exit_validation);
    CHECK(cli({"spectrum", "--config", good.string(), "--windows", "5", "--cache-dir", (dir / "c").string(),
               "--out-dir", (dir / "o").string()})
              .code == exit_validation);
}

TEST_CASE("report without cached spectra is a runtime failure") {
    const auto dir = scratch("cli-report-miss");
    const auto cfg = write_config(dir, "c.json", kRectangle);
    const auto r = cli({"report", "--config", cfg.string(), "--cache-dir", (dir / "cache").string(), "--out-dir",
                        (dir / "out").string()});
    CHECK(r.code == exit_runtime);
}

TEST_CASE("qe-run twice gives identical outputs from the cache") {
    const auto dir = scratch("cli-qe");
    const auto cfg = write_config(dir, "c.json", kRectangle);
    const std::vector<std::string> common{"--config", cfg.string(), "--cache-dir", (dir / "cache").string()};
    auto args = common;
    args.insert(args.begin(), "qe-run");
    args.insert(args.end(), {"--out-dir", (dir / "a").string()});
    const auto first = cli(args);
    REQUIRE(first.code == exit_ok);
    CHECK(first.err.find("config-id") != std::string::npos);
    args = common;
    args.insert(args.begin(), "qe-run");
    args.insert(args.end(), {"--out-dir", (dir / "b").string(), "--threads", "2"});
    REQUIRE(cli(args).code == exit_ok);
    args = common;
    args.insert(args.begin(), "report");
    args.insert(args.end(), {"--out-dir", (dir / "c").string()});
    REQUIRE(cli(args).code == exit_ok);
    for (const char* f : {"report.json", "records.csv"}) {
        const auto a = read_file(dir / "a" / f);
        CHECK(a == read_file(dir / "b" / f));
        CHECK(a == read_file(dir / "c" / f));
    }
    const auto report = nlohmann::json::parse(read_file(dir / "a" / "report.json"));
    CHECK(report["schema"] == "qerest-report/1");
    CHECK(report["windows"].size() == 2);
    CHECK(report["complete"].get<bool>());
    for (const auto& w : report["windows"]) {
        CHECK(w["restriction"].size() == 2);
        CHECK(w["ambient"][0]["max_deviation"].get<double>() < 1e-8);
    }
    // cache precedence: the flag wins over the environment
    ::setenv("QEREST_CACHE", (dir / "env-cache").string().c_str(), 1);
    args = common;
    args.insert(args.begin(), "report");
    args.insert(args.end(), {"--out-dir", (dir / "d").string()});
    CHECK(cli(args).code == exit_ok);
    CHECK(cli({"report", "--config", cfg.string(), "--out-dir", (dir / "e").string()}).code == exit_runtime);
    ::unsetenv("QEREST_CACHE");
}

TEST_CASE("flow-check on the symmetry axis raises the advisory") {
    const auto dir = scratch("cli-flow");
    const auto cfg = write_config(dir, "axis.json", kAxis);
    const auto r = cli({"flow-check", "--config", cfg.string(), "--cache-dir", (dir / "cache").string(), "--out-dir",
                        (dir / "out").string()});
    REQUIRE(r.code == exit_ok);
    CHECK(r.out.find("ADVISORY: dynamical condition violated") != std::string::npos);
    const auto fc = nlohmann::json::parse(read_file(dir / "out" / "flow_check.json"));
    CHECK(fc["estimate"]["fraction"].get<double>() > 0.8);
    CHECK(fc["advisories"][0] == "dynamical condition violated");
    // second run reads the cached estimate and agrees
    const auto again = cli({"flow-check", "--config", cfg.string(), "--cache-dir", (dir / "cache").string(), "--out-dir",
                            (dir / "out2").string()});
    CHECK(read_file(dir / "out" / "flow_check.json") == read_file(dir / "out2" / "flow_check.json"));
}

TEST_CASE("spectrum subcommand") {
    const auto dir = scratch("cli-spectrum");
    const auto cfg = write_config(dir, "c.json", kRectangle);
    const auto r = cli({"spectrum", "--config", cfg.string(), "--windows", "0", "--cache-dir", (dir / "cache").string(),
                        "--out-dir", (dir / "out").string()});
    REQUIRE(r.code == exit_ok);
    const auto s = nlohmann::json::parse(read_file(dir / "out" / "spectrum.json"));
    REQUIRE(s["windows"].size() == 1);
    // pi sqrt(m^2 + n^2/4) in [3, 6]: (1,1) (1,2) (1,3)
    CHECK(s["windows"][0]["eigencount"] == 3);
}
