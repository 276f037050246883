#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qerest/billiard_flow.hpp"
#include "qerest/errors.hpp"
#include "qerest/geometry.hpp"
#include "qerest/microlocal.hpp"
#include "qerest/spectral_solver.hpp"
#include "qerest/symbol.hpp"
#include "json.hpp"

namespace qerest {

inline constexpr const char* kConfigSchema = "qerest-config/1";

/// All schema violations found in one pass.
class ConfigValidationError : public ConfigError {
public:
    explicit ConfigValidationError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const { return violations_; }

private:
    std::vector<std::string> violations_;
};

struct CurveSpec {
    CurveSegment::Shape shape = CurveSegment::Shape::segment;
    Vec2 start, end;              ///< segment
    Vec2 center;                  ///< arc
    double radius = 0.0;
    double start_angle = 0.0;
    double end_angle = 0.0;

    CurveSegment build(const BilliardDomain& domain) const;
};

struct SymbolSpec {
    std::string id;
    double margin = 0.0;
    std::vector<SymbolTerm> terms;

    CurveSymbol build(double curve_length) const;
};

/// Multiplication observable for ambient statistics.
///   constant(value)           chi = value on all of M
///   bump(center, radius)      chi(x) = unit_bump(|x - center| / radius)
struct AmbientSpec {
    enum class Kind { constant, bump };
    std::string id;
    Kind kind = Kind::constant;
    double value = 1.0;
    Vec2 center;
    double radius = 0.0;
};

struct WindowRange {
    double k_min = 0.0;
    double k_max = 0.0;
    double h = 0.0;
};

/// Either dyadic (h_i = 1 / (k0 2^i), k in [sqrt(E_lo) / h_i, sqrt(E_hi) / h_i]) or an explicit list
/// of k-ranges (h = 2 / (k_min + k_max)).
struct WindowScheme {
    double e_lo = 1.0;
    double e_hi = 2.0;
    double k0 = 0.0;
    int count = 0;
    std::vector<std::pair<double, double>> ranges;

    std::vector<WindowRange> windows() const;
};

struct BirkhoffSpec {
    Vec2 center;
    double radius = 0.0;
    double horizon = 1e4;
    double dt = 0.01;
    int trajectories = 4;
};

struct FlowCheckSpec {
    bool enabled = true;
    double t0 = 0.5;
    double horizon = 50.0;
    std::int64_t samples = 2000;
    ToleranceSet tol;
    std::vector<double> sweep{0.1, 1.0, 10.0, 100.0};   ///< tolerance scales
    std::optional<BirkhoffSpec> birkhoff;
};

struct QESpec {
    double points_per_wavelength = 10.0;   ///< restriction grid density at the top k of a window
    std::optional<double> density_epsilon; ///< default: percentile of first-window deviations
    double density_percentile = 0.9;
    double excluded_cap = 0.02;
    double ambient_scale = 0.7;            ///< interior quadrature scale for ambient matrix elements
};

struct ExperimentConfig {
    DomainSpec domain;
    CurveSpec curve;
    WindowScheme windows;
    SolverParams solver;
    std::vector<SymbolSpec> symbols;
    std::vector<CauchyWeights> weights{{1.0, 0.0}};
    std::vector<AmbientSpec> ambient;
    FlowCheckSpec flow;
    QESpec qe;
    std::uint64_t seed = 0;
    std::string cache_dir = "qerest-cache";
    std::string output_dir = "qerest-out";
};

/// Parses the JSON config (comments allowed). Unknown keys, missing required keys and
/// constraint violations are all collected into one ConfigValidationError.
ExperimentConfig parse_config(std::string_view text);

/// Canonical form with every default filled in; the inverse of parse_config.
nlohmann::json to_json(const ExperimentConfig& config);

/// SHA-256 (hex) of the canonical dump, excluding cache and output paths.
std::string config_id(const ExperimentConfig& config);

nlohmann::json to_json(const DomainSpec& spec);
nlohmann::json to_json(const SolverParams& params);
nlohmann::json to_json(const CurveSpec& curve);

std::string sha256_hex(std::string_view data);

} // namespace qerest
