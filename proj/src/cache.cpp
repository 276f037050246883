#include "qerest/cache.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <unistd.h>

#include "qerest/config.hpp"
#include "qerest/errors.hpp"

namespace qerest {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_exact(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_exact(const std::string& s) {
    char* end = nullptr;
    const double x = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw CacheCorruptError("malformed number '" + s + "' in cache manifest");
    return x;
}

std::string spectrum_family_id(const DomainSpec& domain, const SolverParams& params) {
    json j = {{"domain", to_json(domain)}, {"solver", to_json(params)}, {"seed", params.seed}};
    return sha256_hex(j.dump()).substr(0, 24);
}

std::string spectrum_id(const DomainSpec& domain, const SolverParams& params, double k_min, double k_max) {
    const std::string s = spectrum_family_id(domain, params) + "|" + format_exact(k_min) + "|" + format_exact(k_max);
    return sha256_hex(s).substr(0, 24);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void atomic_write(const fs::path& path, const std::string& bytes) {
    fs::create_directories(path.parent_path());
    static thread_local std::mt19937_64 rng(std::random_device{}());
    char tag[32];
    std::snprintf(tag, sizeof tag, ".tmp-%d-%016llx", static_cast<int>(::getpid()),
                  static_cast<unsigned long long>(rng()));
    const fs::path tmp = path.string() + tag;
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("cannot move " + tmp.string() + " into place: " + ec.message());
    }
}

namespace {

void put_le(std::string& out, double x) {
    auto bits = std::bit_cast<std::uint64_t>(x);
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>(bits & 0xffu));
        bits >>= 8;
    }
}

double get_le(const std::string& in, std::size_t offset) {
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = (bits << 8) | static_cast<unsigned char>(in[offset + i]);
    return std::bit_cast<double>(bits);
}

json pair_json(const EigenPair& p, std::size_t offset) {
    return {{"k", format_exact(p.k)},
            {"basis",
             {{"type", to_string(p.basis.type)},
              {"class", to_string(p.basis.cls)},
              {"size", p.basis.size},
              {"k", format_exact(p.basis.k)},
              {"seed", p.basis.seed}}},
            {"offset", offset},
            {"count", p.coefficients.size()},
            {"norm_constant", format_exact(p.norm_constant)},
            {"tension", format_exact(p.tension)},
            {"boundary_residual", format_exact(p.boundary_residual)},
            {"rellich_deviation", format_exact(p.rellich_deviation)},
            {"multiplicity", p.multiplicity}};
}

std::string str(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string()) throw CacheCorruptError(std::string("cache manifest lacks '") + key + "'");
    return j[key].get<std::string>();
}

} // namespace

SpectrumWindow read_manifest(const fs::path& manifest, std::string* solver_version) {
    json m;
    try {
        m = json::parse(read_file(manifest));
    } catch (const json::exception& e) {
        throw CacheCorruptError("unreadable cache manifest " + manifest.string() + ": " + e.what());
    }
    try {
        if (m.value("format", "") != kCacheFormat) throw CacheCorruptError("unknown cache format in " + manifest.string());
        if (solver_version) *solver_version = str(m, "solver_version");
        const json& pairs = m.at("pairs");
        if (sha256_hex(pairs.dump()) != str(m, "pairs_sha256")) {
            throw CacheCorruptError("cache manifest " + manifest.string() + " fails its checksum; recompute advised");
        }
        const fs::path coeff_path = manifest.parent_path() / str(m, "coefficients");
        std::string bytes;
        try {
            bytes = read_file(coeff_path);
        } catch (const std::runtime_error&) {
            throw CacheCorruptError("missing coefficient file " + coeff_path.string() + "; recompute advised");
        }
        if (sha256_hex(bytes) != str(m, "coefficients_sha256")) {
            throw CacheCorruptError("coefficient file " + coeff_path.string() + " fails its checksum; recompute advised");
        }
        SpectrumWindow w;
        w.k_min = parse_exact(str(m, "k_min"));
        w.k_max = parse_exact(str(m, "k_max"));
        w.h = parse_exact(str(m, "h"));
        w.weyl_deviation = parse_exact(str(m, "weyl_deviation"));
        w.weyl_deviation_two_term = parse_exact(str(m, "weyl_deviation_two_term"));
        w.weyl_leading = parse_exact(str(m, "weyl_leading"));
        w.weyl_two_term = parse_exact(str(m, "weyl_two_term"));
        w.missing_levels = m.at("missing_levels").get<bool>();
        w.rejected_minima = m.at("rejected_minima").get<int>();
        w.tension_evaluations = m.at("tension_evaluations").get<std::int64_t>();
        if (m.at("eigencount").get<std::size_t>() != pairs.size()) throw CacheCorruptError("eigencount mismatch in " + manifest.string());
        for (const auto& e : pairs) {
            EigenPair p;
            p.k = parse_exact(str(e, "k"));
            const auto& b = e.at("basis");
            p.basis.type = basis_type_from_string(b.at("type").get<std::string>());
            p.basis.cls = symmetry_class_from_string(b.at("class").get<std::string>());
            p.basis.size = b.at("size").get<int>();
            p.basis.k = parse_exact(str(b, "k"));
            p.basis.seed = b.at("seed").get<std::uint64_t>();
            const auto offset = e.at("offset").get<std::size_t>();
            const auto count = e.at("count").get<std::size_t>();
            if ((offset + count) * 8 > bytes.size()) throw CacheCorruptError("coefficient range out of bounds in " + manifest.string());
            p.coefficients.resize(count);
            for (std::size_t i = 0; i < count; ++i) p.coefficients[i] = get_le(bytes, 8 * (offset + i));
            p.norm_constant = parse_exact(str(e, "norm_constant"));
            p.tension = parse_exact(str(e, "tension"));
            p.boundary_residual = parse_exact(str(e, "boundary_residual"));
            p.rellich_deviation = parse_exact(str(e, "rellich_deviation"));
            p.multiplicity = e.at("multiplicity").get<int>();
            w.pairs.push_back(std::move(p));
        }
        return w;
    } catch (const json::exception& e) {
        throw CacheCorruptError("malformed cache manifest " + manifest.string() + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw CacheCorruptError("malformed cache manifest " + manifest.string() + ": " + e.what());
    }
}

SpectrumCache::SpectrumCache(fs::path dir) : dir_(std::move(dir)) {}

fs::path SpectrumCache::save(const DomainSpec& domain, const SolverParams& params, const SpectrumWindow& window,
                             const std::string& config_id) const {
    const std::string family = spectrum_family_id(domain, params);
    const std::string id = spectrum_id(domain, params, window.k_min, window.k_max);
    const fs::path base = dir_ / family;

    std::string bytes;
    json pairs = json::array();
    std::size_t offset = 0;
    for (const auto& p : window.pairs) {
        pairs.push_back(pair_json(p, offset));
        for (double c : p.coefficients) put_le(bytes, c);
        offset += p.coefficients.size();
    }
    const std::string coeff_sha = sha256_hex(bytes);
    const std::string coeff_name = id + "-" + coeff_sha.substr(0, 8) + ".f64";

    json m;
    m["format"] = kCacheFormat;
    m["solver_version"] = kSolverVersion;
    m["config_id"] = config_id;
    m["spectrum_id"] = id;
    m["family_id"] = family;
    m["domain"] = to_json(domain);
    m["solver"] = to_json(params);
    m["seed"] = params.seed;
    m["k_min"] = format_exact(window.k_min);
    m["k_max"] = format_exact(window.k_max);
    m["h"] = format_exact(window.h);
    m["eigencount"] = window.pairs.size();
    m["weyl_deviation"] = format_exact(window.weyl_deviation);
    m["weyl_deviation_two_term"] = format_exact(window.weyl_deviation_two_term);
    m["weyl_leading"] = format_exact(window.weyl_leading);
    m["weyl_two_term"] = format_exact(window.weyl_two_term);
    m["missing_levels"] = window.missing_levels;
    m["rejected_minima"] = window.rejected_minima;
    m["tension_evaluations"] = window.tension_evaluations;
    m["coefficients"] = coeff_name;
    m["coefficients_sha256"] = coeff_sha;
    m["pairs_sha256"] = sha256_hex(pairs.dump());
    m["pairs"] = pairs;

    atomic_write(base / coeff_name, bytes);
    const fs::path manifest = base / (id + ".json");
    atomic_write(manifest, m.dump(1));
    return manifest;
}

SpectrumCache::Lookup SpectrumCache::load(const DomainSpec& domain, const SolverParams& params, double k_min,
                                          double k_max) const {
    Lookup out;
    out.manifest = dir_ / spectrum_family_id(domain, params) / (spectrum_id(domain, params, k_min, k_max) + ".json");
    if (!fs::exists(out.manifest)) return out;
    std::string version;
    auto w = read_manifest(out.manifest, &version);
    if (version != kSolverVersion) {
        out.status = Status::stale_version;
        return out;
    }
    // the Weyl diagnostics (and the missing-level flag) follow the current params
    const auto check = slice_window(BilliardDomain::from_spec(domain), w, w.k_min, w.k_max, params);
    w.weyl_leading = check.weyl_leading;
    w.weyl_two_term = check.weyl_two_term;
    w.weyl_deviation = check.weyl_deviation;
    w.weyl_deviation_two_term = check.weyl_deviation_two_term;
    w.missing_levels = check.missing_levels;
    out.status = Status::hit;
    out.window = std::move(w);
    return out;
}

SpectrumCache::Lookup SpectrumCache::load_covering(const DomainSpec& domain, const SolverParams& params, double k_min,
                                                   double k_max) const {
    auto exact = load(domain, params, k_min, k_max);
    if (exact.status == Status::hit) return exact;
    Lookup out;
    const fs::path base = dir_ / spectrum_family_id(domain, params);
    if (!fs::is_directory(base)) return out;
    // Pick the narrowest covering entry; ties broken by path for determinism.
    std::optional<std::pair<double, fs::path>> best;
    for (const auto& entry : fs::directory_iterator(base)) {
        const auto& path = entry.path();
        if (path.extension() != ".json") continue;
        json m;
        try {
            m = json::parse(read_file(path));
        } catch (const std::exception&) {
            continue;
        }
        if (m.value("solver_version", "") != kSolverVersion) continue;
        const double a = parse_exact(m.value("k_min", "nan")), b = parse_exact(m.value("k_max", "nan"));
        if (!(a <= k_min && b >= k_max)) continue;
        const double width = b - a;
        if (!best || width < best->first || (width == best->first && path < best->second)) best = {{width, path}};
    }
    if (!best) return out;
    const auto full = read_manifest(best->second);
    out.status = Status::hit;
    out.manifest = best->second;
    out.window = slice_window(BilliardDomain::from_spec(domain), full, k_min, k_max, params);
    return out;
}

SpectrumWindow cache_roundtrip(const BilliardDomain& domain, const SolverParams& params, const SpectrumWindow& window,
                               const fs::path& dir) {
    SpectrumCache cache(dir);
    cache.save(domain.spec(), params, window);
    auto r = cache.load(domain.spec(), params, window.k_min, window.k_max);
    if (r.status != SpectrumCache::Status::hit) throw CacheCorruptError("cache round trip did not find the saved window");
    return std::move(*r.window);
}

} // namespace qerest
