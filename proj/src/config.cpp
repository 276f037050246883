#include "qerest/config.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <set>

#include <openssl/evp.h>

namespace qerest {

using nlohmann::json;

ConfigValidationError::ConfigValidationError(std::vector<std::string> violations)
    : ConfigError([&] {
          std::string msg = "invalid config (" + std::to_string(violations.size()) + " problem" +
                            (violations.size() == 1 ? "" : "s") + "):";
          for (const auto& v : violations) msg += "\n  " + v;
          return msg;
      }()),
      violations_(std::move(violations)) {}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 failed");
    }
    std::string hex;
    hex.reserve(2 * len);
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

namespace {

// Walks a JSON object, recording every violation with its dotted path.
class Reader {
public:
    explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

    void error(const std::string& path, const std::string& what) { errors_.push_back(path + ": " + what); }

    bool object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
        if (!j.is_object()) {
            error(path, "must be an object");
            return false;
        }
        std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& [key, _] : j.items()) {
            if (!ok.count(key)) error(join(path, key), "unknown key");
        }
        return true;
    }

    const json* child(const json& j, const std::string& path, const char* key, bool required) {
        auto it = j.find(key);
        if (it == j.end()) {
            if (required) error(join(path, key), "missing required key");
            return nullptr;
        }
        return &*it;
    }

    // Numbers; `check` returns an empty string when the value is acceptable, else the constraint text.
    void number(const json& j, const std::string& path, const char* key, double& out, bool required,
                const std::function<std::string(double)>& check = {}) {
        const json* v = child(j, path, key, required);
        if (!v) return;
        if (!v->is_number()) {
            error(join(path, key), "must be a number");
            return;
        }
        const double x = v->get<double>();
        if (!std::isfinite(x)) {
            error(join(path, key), "must be finite");
            return;
        }
        if (check) {
            const auto msg = check(x);
            if (!msg.empty()) {
                error(join(path, key), msg + " (got " + json(x).dump() + ")");
                return;
            }
        }
        out = x;
    }

    void integer(const json& j, const std::string& path, const char* key, std::int64_t& out, bool required,
                 std::int64_t min) {
        const json* v = child(j, path, key, required);
        if (!v) return;
        if (!v->is_number_integer()) {
            error(join(path, key), "must be an integer");
            return;
        }
        const auto x = v->get<std::int64_t>();
        if (x < min) {
            error(join(path, key), "must be >= " + std::to_string(min) + " (got " + std::to_string(x) + ")");
            return;
        }
        out = x;
    }

    void string(const json& j, const std::string& path, const char* key, std::string& out, bool required) {
        const json* v = child(j, path, key, required);
        if (!v) return;
        if (!v->is_string()) {
            error(join(path, key), "must be a string");
            return;
        }
        out = v->get<std::string>();
    }

    void boolean(const json& j, const std::string& path, const char* key, bool& out) {
        const json* v = child(j, path, key, false);
        if (!v) return;
        if (!v->is_boolean()) {
            error(join(path, key), "must be true or false");
            return;
        }
        out = v->get<bool>();
    }

    bool point(const json& j, const std::string& path, const char* key, Vec2& out, bool required) {
        const json* v = child(j, path, key, required);
        if (!v) return false;
        if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
            error(join(path, key), "must be a point [x, y]");
            return false;
        }
        out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
        return true;
    }

    static std::string join(const std::string& path, const std::string& key) {
        return path.empty() ? key : path + "." + key;
    }
    static std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

private:
    std::vector<std::string>& errors_;
};

std::string positive(double x) { return x > 0.0 ? "" : "must be > 0"; }
std::string nonnegative(double x) { return x >= 0.0 ? "" : "must be >= 0"; }

void read_domain(Reader& r, const json& j, DomainSpec& d) {
    const std::string p = "domain";
    if (!r.object(j, p, {"kind", "a", "b"})) return;
    std::string kind;
    r.string(j, p, "kind", kind, true);
    if (!kind.empty()) {
        try {
            d.kind = domain_kind_from_string(kind);
        } catch (const ConfigError&) {
            r.error(p + ".kind", "must be one of rectangle, disk, ellipse, stadium, sinai_cell (got '" + kind + "')");
        }
    }
    r.number(j, p, "a", d.a, true, positive);
    r.number(j, p, "b", d.b, d.kind != DomainKind::disk, positive);
    if (d.kind == DomainKind::disk) d.b = d.a;
}

void read_curve(Reader& r, const json& j, CurveSpec& c) {
    const std::string p = "curve";
    if (!r.object(j, p, {"type", "start", "end", "center", "radius", "start_angle", "end_angle"})) return;
    std::string type;
    r.string(j, p, "type", type, true);
    if (type == "segment") {
        c.shape = CurveSegment::Shape::segment;
        r.point(j, p, "start", c.start, true);
        r.point(j, p, "end", c.end, true);
    } else if (type == "arc") {
        c.shape = CurveSegment::Shape::arc;
        r.point(j, p, "center", c.center, true);
        r.number(j, p, "radius", c.radius, true, positive);
        r.number(j, p, "start_angle", c.start_angle, true);
        r.number(j, p, "end_angle", c.end_angle, true);
    } else if (!type.empty()) {
        r.error(p + ".type", "must be 'segment' or 'arc' (got '" + type + "')");
    }
}

void read_windows(Reader& r, const json& j, WindowScheme& w) {
    const std::string p = "windows";
    if (!r.object(j, p, {"E", "k0", "count", "ranges"})) return;
    if (j.contains("ranges")) {
        if (j.contains("k0") || j.contains("count")) r.error(p, "give either 'ranges' or 'k0'/'count', not both");
        const auto& list = j["ranges"];
        if (!list.is_array() || list.empty()) {
            r.error(p + ".ranges", "must be a non-empty list of [k_min, k_max]");
            return;
        }
        for (std::size_t i = 0; i < list.size(); ++i) {
            const auto& e = list[i];
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
                r.error(Reader::index(p + ".ranges", i), "must be [k_min, k_max]");
                continue;
            }
            const double a = e[0].get<double>(), b = e[1].get<double>();
            if (!(a > 0.0 && b > a)) {
                r.error(Reader::index(p + ".ranges", i), "needs 0 < k_min < k_max");
                continue;
            }
            w.ranges.emplace_back(a, b);
        }
        return;
    }
    if (const json* e = r.child(j, p, "E", false)) {
        if (!e->is_array() || e->size() != 2 || !(*e)[0].is_number() || !(*e)[1].is_number() ||
            !((*e)[0].get<double>() > 0.0 && (*e)[1].get<double>() > (*e)[0].get<double>())) {
            r.error(p + ".E", "must be [E_lo, E_hi] with 0 < E_lo < E_hi");
        } else {
            w.e_lo = (*e)[0].get<double>();
            w.e_hi = (*e)[1].get<double>();
        }
    }
    r.number(j, p, "k0", w.k0, true, positive);
    std::int64_t count = 0;
    r.integer(j, p, "count", count, true, 1);
    w.count = static_cast<int>(count);
}

void read_solver(Reader& r, const json& j, SolverParams& s) {
    const std::string p = "solver";
    if (!r.object(j, p,
                  {"basis", "basis_factor", "points_per_wavelength", "interior_extra", "rank_tol", "tension_threshold",
                   "residual_cap", "refine_tol", "dedup_tol", "scan_fraction", "degeneracy_probe", "quadrature_scale",
                   "chunk_fraction", "weyl_slack"})) {
        return;
    }
    std::string basis;
    r.string(j, p, "basis", basis, false);
    if (!basis.empty()) {
        try {
            s.basis = basis_type_from_string(basis);
        } catch (const std::invalid_argument&) {
            r.error(p + ".basis", "must be real_plane_waves, fourier_bessel or corner_bessel (got '" + basis + "')");
        }
    }
    r.number(j, p, "basis_factor", s.basis_factor, false, [](double x) { return x >= 1.5 ? "" : "must be >= 1.5"; });
    r.number(j, p, "points_per_wavelength", s.points_per_wavelength, false,
             [](double x) { return x >= 6.0 ? "" : "must be >= 6"; });
    std::int64_t extra = s.interior_extra;
    r.integer(j, p, "interior_extra", extra, false, 1);
    s.interior_extra = static_cast<int>(extra);
    r.number(j, p, "rank_tol", s.rank_tol, false, positive);
    r.number(j, p, "tension_threshold", s.tension_threshold, false, positive);
    r.number(j, p, "residual_cap", s.residual_cap, false, positive);
    r.number(j, p, "refine_tol", s.refine_tol, false, positive);
    r.number(j, p, "dedup_tol", s.dedup_tol, false, positive);
    r.number(j, p, "scan_fraction", s.scan_fraction, false,
             [](double x) { return x > 0.0 && x <= 0.125 ? "" : "must be in (0, 1/8]"; });
    r.number(j, p, "degeneracy_probe", s.degeneracy_probe, false, positive);
    r.number(j, p, "quadrature_scale", s.quadrature_scale, false, positive);
    r.number(j, p, "chunk_fraction", s.chunk_fraction, false, positive);
    r.number(j, p, "weyl_slack", s.weyl_slack, false, positive);
}

SpatialFactor read_a0(Reader& r, const json& j, const std::string& p) {
    SpatialFactor f;
    if (!r.object(j, p, {"type", "center", "width", "left", "right"})) return f;
    std::string type;
    r.string(j, p, "type", type, true);
    if (type == "bump") {
        double c = 0.0, w = 1.0;
        r.number(j, p, "center", c, true);
        r.number(j, p, "width", w, true, positive);
        f = SpatialFactor::bump(c, w);
    } else if (type == "cosine_window") {
        double a = 0.0, b = 1.0;
        r.number(j, p, "left", a, true);
        r.number(j, p, "right", b, true);
        if (!(b > a)) r.error(p, "cosine_window needs left < right");
        f = SpatialFactor::cosine_window(a, b);
    } else if (!type.empty()) {
        r.error(p + ".type", "must be 'bump' or 'cosine_window' (got '" + type + "')");
    }
    return f;
}

MomentumFactor read_a1(Reader& r, const json& j, const std::string& p) {
    MomentumFactor f;
    if (!r.object(j, p, {"type", "value", "coeffs", "center", "width"})) return f;
    std::string type;
    r.string(j, p, "type", type, true);
    if (type == "const") {
        double v = 1.0;
        r.number(j, p, "value", v, true);
        f = MomentumFactor::constant(v);
    } else if (type == "poly") {
        const json* c = r.child(j, p, "coeffs", true);
        if (c) {
            if (!c->is_array() || c->empty() || c->size() > 5 ||
                !std::all_of(c->begin(), c->end(), [](const json& x) { return x.is_number(); })) {
                r.error(p + ".coeffs", "must list 1..5 numbers (degree <= 4)");
            } else {
                f = MomentumFactor::poly(c->get<std::vector<double>>());
            }
        }
    } else if (type == "bump") {
        double c = 0.0, w = 1.0;
        r.number(j, p, "center", c, true);
        r.number(j, p, "width", w, true, positive);
        f = MomentumFactor::bump(c, w);
    } else if (!type.empty()) {
        r.error(p + ".type", "must be 'const', 'poly' or 'bump' (got '" + type + "')");
    }
    return f;
}

void read_symbols(Reader& r, const json& j, std::vector<SymbolSpec>& out) {
    if (!j.is_array() || j.empty()) {
        r.error("symbols", "must be a non-empty list");
        return;
    }
    std::set<std::string> ids;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto p = Reader::index("symbols", i);
        const auto& e = j[i];
        if (!r.object(e, p, {"id", "margin", "terms"})) continue;
        SymbolSpec s;
        r.string(e, p, "id", s.id, true);
        if (!s.id.empty() && !ids.insert(s.id).second) r.error(p + ".id", "duplicate symbol id '" + s.id + "'");
        if (s.id.find_first_of(",\"\n") != std::string::npos) r.error(p + ".id", "must not contain commas, quotes or newlines");
        r.number(e, p, "margin", s.margin, true, positive);
        const json* terms = r.child(e, p, "terms", true);
        if (terms) {
            if (!terms->is_array() || terms->empty()) {
                r.error(p + ".terms", "must be a non-empty list");
            } else {
                for (std::size_t t = 0; t < terms->size(); ++t) {
                    const auto tp = Reader::index(p + ".terms", t);
                    const auto& te = (*terms)[t];
                    if (!r.object(te, tp, {"a0", "a1"})) continue;
                    SymbolTerm term;
                    if (const json* a0 = r.child(te, tp, "a0", true)) term.a0 = read_a0(r, *a0, tp + ".a0");
                    if (const json* a1 = r.child(te, tp, "a1", false)) term.a1 = read_a1(r, *a1, tp + ".a1");
                    s.terms.push_back(term);
                }
            }
        }
        out.push_back(std::move(s));
    }
}

void read_weights(Reader& r, const json& j, std::vector<CauchyWeights>& out) {
    out.clear();
    if (!j.is_array() || j.empty()) {
        r.error("weights", "must be a non-empty list of [alpha, beta]");
        return;
    }
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& e = j[i];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
            r.error(Reader::index("weights", i), "must be [alpha, beta]");
            continue;
        }
        CauchyWeights w{e[0].get<double>(), e[1].get<double>()};
        if (w.alpha == 0.0 && w.beta == 0.0) r.error(Reader::index("weights", i), "alpha and beta cannot both be 0");
        out.push_back(w);
    }
}

void read_ambient(Reader& r, const json& j, std::vector<AmbientSpec>& out) {
    if (!j.is_array()) {
        r.error("ambient", "must be a list");
        return;
    }
    std::set<std::string> ids;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto p = Reader::index("ambient", i);
        const auto& e = j[i];
        if (!r.object(e, p, {"id", "type", "value", "center", "radius"})) continue;
        AmbientSpec a;
        r.string(e, p, "id", a.id, true);
        if (!a.id.empty() && !ids.insert(a.id).second) r.error(p + ".id", "duplicate observable id '" + a.id + "'");
        std::string type;
        r.string(e, p, "type", type, true);
        if (type == "constant") {
            a.kind = AmbientSpec::Kind::constant;
            r.number(e, p, "value", a.value, true);
        } else if (type == "bump") {
            a.kind = AmbientSpec::Kind::bump;
            r.point(e, p, "center", a.center, true);
            r.number(e, p, "radius", a.radius, true, positive);
        } else if (!type.empty()) {
            r.error(p + ".type", "must be 'constant' or 'bump' (got '" + type + "')");
        }
        out.push_back(a);
    }
}

void read_flow(Reader& r, const json& j, FlowCheckSpec& f) {
    const std::string p = "flow_check";
    if (!r.object(j, p, {"enabled", "t0", "T", "samples", "tolerances", "sweep", "birkhoff"})) return;
    r.boolean(j, p, "enabled", f.enabled);
    r.number(j, p, "t0", f.t0, false, positive);
    r.number(j, p, "T", f.horizon, false, positive);
    if (!(f.t0 < f.horizon)) r.error(p, "needs t0 < T");
    r.integer(j, p, "samples", f.samples, false, 1);
    if (const json* t = r.child(j, p, "tolerances", false)) {
        const std::string tp = p + ".tolerances";
        if (r.object(*t, tp, {"glancing", "corner", "position_rel", "direction", "time", "bounce_cap"})) {
            r.number(*t, tp, "glancing", f.tol.glancing, false, positive);
            r.number(*t, tp, "corner", f.tol.corner, false, positive);
            r.number(*t, tp, "position_rel", f.tol.position_rel, false, positive);
            r.number(*t, tp, "direction", f.tol.direction, false, positive);
            r.number(*t, tp, "time", f.tol.time, false, positive);
            std::int64_t cap = static_cast<std::int64_t>(f.tol.bounce_cap);
            r.integer(*t, tp, "bounce_cap", cap, false, 1);
            f.tol.bounce_cap = static_cast<std::uint64_t>(cap);
        }
    }
    if (const json* s = r.child(j, p, "sweep", false)) {
        if (!s->is_array() || s->empty() ||
            !std::all_of(s->begin(), s->end(), [](const json& x) { return x.is_number() && x.get<double>() > 0.0; })) {
            r.error(p + ".sweep", "must be a non-empty list of positive tolerance scales");
        } else {
            f.sweep = s->get<std::vector<double>>();
        }
    }
    if (const json* b = r.child(j, p, "birkhoff", false)) {
        const std::string bp = p + ".birkhoff";
        if (r.object(*b, bp, {"center", "radius", "T", "dt", "trajectories"})) {
            BirkhoffSpec spec;
            r.point(*b, bp, "center", spec.center, true);
            r.number(*b, bp, "radius", spec.radius, true, positive);
            r.number(*b, bp, "T", spec.horizon, false, positive);
            r.number(*b, bp, "dt", spec.dt, false, positive);
            std::int64_t n = spec.trajectories;
            r.integer(*b, bp, "trajectories", n, false, 1);
            spec.trajectories = static_cast<int>(n);
            f.birkhoff = spec;
        }
    }
}

void read_qe(Reader& r, const json& j, QESpec& q) {
    const std::string p = "qe";
    if (!r.object(j, p, {"points_per_wavelength", "density_epsilon", "density_percentile", "excluded_cap", "ambient_scale"})) {
        return;
    }
    r.number(j, p, "points_per_wavelength", q.points_per_wavelength, false,
             [](double x) { return x >= 10.0 ? "" : "must be >= 10"; });
    if (j.contains("density_epsilon") && !j["density_epsilon"].is_null()) {
        double e = 0.0;
        r.number(j, p, "density_epsilon", e, true, nonnegative);
        q.density_epsilon = e;
    }
    r.number(j, p, "density_percentile", q.density_percentile, false,
             [](double x) { return x > 0.0 && x <= 1.0 ? "" : "must be in (0, 1]"; });
    r.number(j, p, "excluded_cap", q.excluded_cap, false, [](double x) { return x >= 0.0 && x < 1.0 ? "" : "must be in [0, 1)"; });
    r.number(j, p, "ambient_scale", q.ambient_scale, false, positive);
}

json point_json(Vec2 p) { return json::array({p.x, p.y}); }

json a0_json(const SpatialFactor& f) {
    if (f.kind == SpatialFactor::Kind::bump) return {{"type", "bump"}, {"center", f.p1}, {"width", f.p2}};
    return {{"type", "cosine_window"}, {"left", f.p1}, {"right", f.p2}};
}

json a1_json(const MomentumFactor& f) {
    switch (f.kind) {
    case MomentumFactor::Kind::constant: return {{"type", "const"}, {"value", f.value}};
    case MomentumFactor::Kind::poly: return {{"type", "poly"}, {"coeffs", f.coeffs}};
    case MomentumFactor::Kind::bump: return {{"type", "bump"}, {"center", f.center}, {"width", f.width}};
    }
    return {};
}

} // namespace

std::vector<WindowRange> WindowScheme::windows() const {
    std::vector<WindowRange> out;
    if (!ranges.empty()) {
        for (const auto& [a, b] : ranges) out.push_back({a, b, 2.0 / (a + b)});
        return out;
    }
    for (int i = 0; i < count; ++i) {
        const double h = 1.0 / (k0 * std::ldexp(1.0, i));
        out.push_back({std::sqrt(e_lo) / h, std::sqrt(e_hi) / h, h});
    }
    return out;
}

CurveSegment CurveSpec::build(const BilliardDomain& domain) const {
    if (shape == CurveSegment::Shape::segment) return CurveSegment::segment(domain, start, end);
    return CurveSegment::arc(domain, center, radius, start_angle, end_angle);
}

CurveSymbol SymbolSpec::build(double curve_length) const { return CurveSymbol(id, terms, curve_length, margin); }

ExperimentConfig parse_config(std::string_view text) {
    json root;
    try {
        root = json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigValidationError({std::string("not valid JSON: ") + e.what()});
    }
    std::vector<std::string> errors;
    Reader r(errors);
    ExperimentConfig c;
    if (!r.object(root, "",
                  {"schema", "domain", "curve", "windows", "solver", "symbols", "weights", "ambient", "flow_check", "qe",
                   "seed", "cache_dir", "output_dir"})) {
        throw ConfigValidationError(std::move(errors));
    }
    if (root.contains("schema") && root["schema"] != kConfigSchema) {
        r.error("schema", std::string("unsupported schema (expected '") + kConfigSchema + "')");
    }
    if (const json* d = r.child(root, "", "domain", true)) read_domain(r, *d, c.domain);
    if (const json* d = r.child(root, "", "curve", true)) read_curve(r, *d, c.curve);
    if (const json* d = r.child(root, "", "windows", true)) read_windows(r, *d, c.windows);
    if (const json* d = r.child(root, "", "solver", false)) read_solver(r, *d, c.solver);
    if (const json* d = r.child(root, "", "symbols", true)) read_symbols(r, *d, c.symbols);
    if (const json* d = r.child(root, "", "weights", false)) read_weights(r, *d, c.weights);
    if (const json* d = r.child(root, "", "ambient", false)) read_ambient(r, *d, c.ambient);
    if (const json* d = r.child(root, "", "flow_check", false)) read_flow(r, *d, c.flow);
    if (const json* d = r.child(root, "", "qe", false)) read_qe(r, *d, c.qe);
    if (const json* s = r.child(root, "", "seed", false)) {
        if (!s->is_number_unsigned()) {
            r.error("seed", "must be a non-negative integer");
        } else {
            c.seed = s->get<std::uint64_t>();
        }
    }
    r.string(root, "", "cache_dir", c.cache_dir, false);
    r.string(root, "", "output_dir", c.output_dir, false);
    c.solver.seed = c.seed;

    // Cross-field checks need the geometry; only attempted once the parts parsed cleanly.
    if (errors.empty()) {
        try {
            const auto domain = BilliardDomain::from_spec(c.domain);
            try {
                const auto curve = c.curve.build(domain);
                for (std::size_t i = 0; i < c.symbols.size(); ++i) {
                    try {
                        (void)c.symbols[i].build(curve.length());
                    } catch (const ConfigError& e) {
                        r.error(Reader::index("symbols", i), e.what());
                    }
                }
            } catch (const ConfigError& e) {
                r.error("curve", e.what());
            }
            for (std::size_t i = 0; i < c.ambient.size(); ++i) {
                const auto& a = c.ambient[i];
                if (a.kind == AmbientSpec::Kind::bump && !(domain.contains(a.center) &&
                                                           domain.boundary_distance(a.center) > a.radius)) {
                    r.error(Reader::index("ambient", i), "bump support must stay a positive distance from the boundary");
                }
            }
            if (c.solver.basis) {
                try {
                    const auto cls = symmetry_classes(domain).front();
                    (void)BasisSet(domain, {*c.solver.basis, cls, 2, 1.0, 0});
                } catch (const ConfigError& e) {
                    r.error("solver.basis", e.what());
                }
            }
        } catch (const ConfigError& e) {
            r.error("domain", e.what());
        }
    }
    if (!errors.empty()) throw ConfigValidationError(std::move(errors));
    return c;
}

json to_json(const DomainSpec& spec) { return {{"kind", to_string(spec.kind)}, {"a", spec.a}, {"b", spec.b}}; }

json to_json(const SolverParams& s) {
    json j = {{"basis_factor", s.basis_factor},
              {"points_per_wavelength", s.points_per_wavelength},
              {"interior_extra", s.interior_extra},
              {"rank_tol", s.rank_tol},
              {"tension_threshold", s.tension_threshold},
              {"residual_cap", s.residual_cap},
              {"refine_tol", s.refine_tol},
              {"dedup_tol", s.dedup_tol},
              {"scan_fraction", s.scan_fraction},
              {"degeneracy_probe", s.degeneracy_probe},
              {"quadrature_scale", s.quadrature_scale},
              {"chunk_fraction", s.chunk_fraction},
              {"weyl_slack", s.weyl_slack}};
    if (s.basis) j["basis"] = to_string(*s.basis);
    return j;
}

json to_json(const CurveSpec& c) {
    if (c.shape == CurveSegment::Shape::segment) {
        return {{"type", "segment"}, {"start", point_json(c.start)}, {"end", point_json(c.end)}};
    }
    return {{"type", "arc"},
            {"center", point_json(c.center)},
            {"radius", c.radius},
            {"start_angle", c.start_angle},
            {"end_angle", c.end_angle}};
}

json to_json(const ExperimentConfig& c) {
    json j;
    j["schema"] = kConfigSchema;
    j["domain"] = to_json(c.domain);
    j["curve"] = to_json(c.curve);
    if (!c.windows.ranges.empty()) {
        json r = json::array();
        for (const auto& [a, b] : c.windows.ranges) r.push_back({a, b});
        j["windows"] = {{"ranges", r}};
    } else {
        j["windows"] = {{"E", {c.windows.e_lo, c.windows.e_hi}}, {"k0", c.windows.k0}, {"count", c.windows.count}};
    }
    j["solver"] = to_json(c.solver);
    json syms = json::array();
    for (const auto& s : c.symbols) {
        json terms = json::array();
        for (const auto& t : s.terms) terms.push_back({{"a0", a0_json(t.a0)}, {"a1", a1_json(t.a1)}});
        syms.push_back({{"id", s.id}, {"margin", s.margin}, {"terms", terms}});
    }
    j["symbols"] = syms;
    json w = json::array();
    for (const auto& x : c.weights) w.push_back({x.alpha, x.beta});
    j["weights"] = w;
    json amb = json::array();
    for (const auto& a : c.ambient) {
        if (a.kind == AmbientSpec::Kind::constant) {
            amb.push_back({{"id", a.id}, {"type", "constant"}, {"value", a.value}});
        } else {
            amb.push_back({{"id", a.id}, {"type", "bump"}, {"center", point_json(a.center)}, {"radius", a.radius}});
        }
    }
    j["ambient"] = amb;
    json flow = {{"enabled", c.flow.enabled},
                 {"t0", c.flow.t0},
                 {"T", c.flow.horizon},
                 {"samples", c.flow.samples},
                 {"tolerances",
                  {{"glancing", c.flow.tol.glancing},
                   {"corner", c.flow.tol.corner},
                   {"position_rel", c.flow.tol.position_rel},
                   {"direction", c.flow.tol.direction},
                   {"time", c.flow.tol.time},
                   {"bounce_cap", c.flow.tol.bounce_cap}}},
                 {"sweep", c.flow.sweep}};
    if (c.flow.birkhoff) {
        const auto& b = *c.flow.birkhoff;
        flow["birkhoff"] = {{"center", point_json(b.center)},
                            {"radius", b.radius},
                            {"T", b.horizon},
                            {"dt", b.dt},
                            {"trajectories", b.trajectories}};
    }
    j["flow_check"] = flow;
    j["qe"] = {{"points_per_wavelength", c.qe.points_per_wavelength},
               {"density_epsilon", c.qe.density_epsilon ? json(*c.qe.density_epsilon) : json(nullptr)},
               {"density_percentile", c.qe.density_percentile},
               {"excluded_cap", c.qe.excluded_cap},
               {"ambient_scale", c.qe.ambient_scale}};
    j["seed"] = c.seed;
    j["cache_dir"] = c.cache_dir;
    j["output_dir"] = c.output_dir;
    return j;
}

std::string config_id(const ExperimentConfig& config) {
    json j = to_json(config);
    j.erase("cache_dir");
    j.erase("output_dir");
    return sha256_hex(j.dump());
}

} // namespace qerest
