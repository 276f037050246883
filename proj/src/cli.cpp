#include "qerest/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "qerest/cache.hpp"
#include "qerest/config.hpp"
#include "qerest/errors.hpp"
#include "qerest/qe_experiments.hpp"

namespace qerest {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonFlags {
    std::string config;
    std::string cache_dir;
    std::string out_dir;
    unsigned threads = 1;
    std::optional<std::uint64_t> seed;
    std::string windows;
};

void add_common(CLI::App* sub, CommonFlags& f) {
    sub->add_option("--config", f.config, "experiment config (JSON)")->required();
    sub->add_option("--cache-dir", f.cache_dir, "eigenpair cache directory (default: $QEREST_CACHE, then the config)");
    sub->add_option("--out-dir", f.out_dir, "output directory (default: from the config)");
    sub->add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", f.seed, "master seed (overrides the config)");
    sub->add_option("--windows", f.windows, "comma-separated window indices (default: all)");
}

std::vector<int> parse_windows(const std::string& list) {
    std::vector<int> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            const int v = std::stoi(item, &pos);
            if (pos != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ConfigError("--windows: '" + item + "' is not a window index");
        }
    }
    if (out.empty()) throw ConfigError("--windows: empty list");
    return out;
}

struct Context {
    ExperimentConfig config;
    RunOptions options;
    std::string id;
};

Context prepare(const CommonFlags& f, std::ostream& err) {
    std::string text;
    try {
        text = read_file(f.config);
    } catch (const std::runtime_error& e) {
        throw ConfigError(e.what());
    }
    Context c;
    c.config = parse_config(text);
    if (f.seed) {
        c.config.seed = *f.seed;
        c.config.solver.seed = *f.seed;
    }
    std::string cache = c.config.cache_dir;
    if (const char* env = std::getenv("QEREST_CACHE"); env && *env) cache = env;
    if (!f.cache_dir.empty()) cache = f.cache_dir;
    c.options.cache_dir = cache;
    c.options.out_dir = f.out_dir.empty() ? fs::path(c.config.output_dir) : fs::path(f.out_dir);
    c.options.threads = f.threads;
    if (!f.windows.empty()) c.options.windows = parse_windows(f.windows);
    c.options.log = [&err](const std::string& m) { err << "[qerest] " << m << "\n"; };
    c.id = config_id(c.config);
    err << "[qerest] config-id " << c.id << " seed " << c.config.seed << "\n";
    return c;
}

int cmd_spectrum(const CommonFlags& f, std::ostream& out, std::ostream& err) {
    auto c = prepare(f, err);
    const auto all = c.config.windows.windows();
    std::vector<int> idx;
    if (c.options.windows) {
        idx = *c.options.windows;
    } else {
        for (int i = 0; i < static_cast<int>(all.size()); ++i) idx.push_back(i);
    }
    json summary = {{"config_id", c.id}, {"seed", c.config.seed}, {"solver_version", kSolverVersion}};
    json windows = json::array();
    bool ok = true;
    for (int i : idx) {
        if (i < 0 || i >= static_cast<int>(all.size())) throw ConfigError("window index " + std::to_string(i) + " out of range");
        const auto& r = all[i];
        const auto w = obtain_spectrum(c.config.domain, c.config.solver, r.k_min, r.k_max, c.options);
        const auto weyl = weyl_check(BilliardDomain::from_spec(c.config.domain), w);
        json ks = json::array();
        for (const auto& p : w.pairs) ks.push_back(p.k);
        windows.push_back({{"index", i},
                           {"k_min", r.k_min},
                           {"k_max", r.k_max},
                           {"eigencount", w.pairs.size()},
                           {"weyl_leading", weyl.leading},
                           {"weyl_two_term", weyl.two_term},
                           {"rel_leading", weyl.rel_leading},
                           {"rel_two_term", weyl.rel_two_term},
                           {"missing_levels", w.missing_levels},
                           {"k", ks}});
        out << "window " << i << " k in [" << r.k_min << ", " << r.k_max << "]: " << w.pairs.size()
            << " levels (Weyl two-term " << weyl.two_term << ")" << (w.missing_levels ? "  MISSING LEVELS" : "") << "\n";
        ok = ok && !w.missing_levels;
    }
    summary["windows"] = windows;
    atomic_write(c.options.out_dir / "spectrum.json", summary.dump(1) + "\n");
    return ok ? exit_ok : exit_runtime;
}

int cmd_flow(const CommonFlags& f, std::ostream& out, std::ostream& err) {
    auto c = prepare(f, err);
    auto fc = flow_check(c.config, c.options);
    fc["config_id"] = c.id;
    fc["advisories"] = json::array();
    if (fc.value("violated", false)) fc["advisories"].push_back("dynamical condition violated");
    atomic_write(c.options.out_dir / "flow_check.json", fc.dump(1) + "\n");
    const auto& e = fc["estimate"];
    out << "exceptional fraction " << e["fraction"].get<double>() << " (95% CI [" << e["ci"][0].get<double>() << ", "
        << e["ci"][1].get<double>() << "], n_used " << e["n_used"].get<std::int64_t>() << ")\n";
    for (const auto& s : fc["sweep"]) {
        out << "  direction tol " << s["tolerances"]["direction"].get<double>() << ": " << s["fraction"].get<double>() << "\n";
    }
    if (fc.contains("birkhoff")) {
        for (const auto& r : fc["birkhoff"]["runs"]) {
            out << "  Birkhoff average " << r["average"].get<double>() << " vs area ratio "
                << fc["birkhoff"]["area_ratio"].get<double>() << "\n";
        }
    }
    if (fc["violated"].get<bool>()) out << "ADVISORY: dynamical condition violated\n";
    return exit_ok;
}

int cmd_qe(const CommonFlags& f, bool cache_only, std::ostream& out, std::ostream& err) {
    auto c = prepare(f, err);
    c.options.cache_only = cache_only;
    const auto t0 = std::chrono::steady_clock::now();
    const auto report = run_experiment(c.config, c.options);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    err << "[qerest] finished in " << secs << " s\n";
    for (const auto& w : report.json["windows"]) {
        out << "window " << w["index"].get<int>() << " [" << w["k_min"].get<double>() << ", " << w["k_max"].get<double>()
            << "]";
        if (w.contains("eigencount")) out << ": " << w["eigencount"].get<std::size_t>() << " levels";
        out << (w["valid"].get<bool>() ? "" : "  INVALID") << "\n";
        if (w.contains("restriction")) {
            for (const auto& r : w["restriction"]) {
                out << "  " << r["symbol"].get<std::string>() << " (" << r["weights"][0].get<double>() << ","
                    << r["weights"][1].get<double>() << ")  S_bar " << r["S_bar"].get<double>() << "\n";
            }
        }
        if (w.contains("ambient")) {
            for (const auto& a : w["ambient"]) {
                out << "  ambient " << a["observable"].get<std::string>() << "  S_bar " << a["S_bar"].get<double>() << "\n";
            }
        }
    }
    for (const auto& a : report.json["advisories"]) out << "ADVISORY: " << a.get<std::string>() << "\n";
    for (const auto& fl : report.json["failures"]) err << "[qerest] failure: " << fl.get<std::string>() << "\n";
    out << "report: " << (c.options.out_dir / "report.json").string() << "\n";
    return report.complete ? exit_ok : exit_runtime;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"qerest: quantum ergodic restriction experiments on planar billiards"};
    app.name(args.empty() ? "qerest" : fs::path(args[0]).filename().string());
    app.require_subcommand(1);
    CommonFlags spectrum_f, flow_f, qe_f, report_f;
    auto* spectrum = app.add_subcommand("spectrum", "compute and cache eigenpairs for the configured windows");
    auto* flow = app.add_subcommand("flow-check", "exceptional-set estimate and Birkhoff diagnostics");
    auto* qe = app.add_subcommand("qe-run", "full experiment: spectra, restriction and ambient statistics, flow check");
    auto* report = app.add_subcommand("report", "re-render report.json and records.csv from cached data only");
    add_common(spectrum, spectrum_f);
    add_common(flow, flow_f);
    add_common(qe, qe_f);
    add_common(report, report_f);

    std::vector<std::string> rev(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
    std::reverse(rev.begin(), rev.end());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return exit_validation;
    }

    try {
        if (spectrum->parsed()) return cmd_spectrum(spectrum_f, out, err);
        if (flow->parsed()) return cmd_flow(flow_f, out, err);
        if (qe->parsed()) return cmd_qe(qe_f, false, out, err);
        if (report->parsed()) return cmd_qe(report_f, true, out, err);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return exit_validation;
    } catch (const std::exception& e) {
        err << "runtime failure: " << e.what() << "\n";
        return exit_runtime;
    }
    err << app.help();
    return exit_validation;
}

} // namespace qerest
