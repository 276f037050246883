#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qerest/config.hpp"
#include "qerest/geometry.hpp"
#include "qerest/microlocal.hpp"
#include "qerest/restriction.hpp"
#include "qerest/spectral_solver.hpp"
#include "qerest/symbol.hpp"
#include "json.hpp"

namespace qerest {

inline constexpr const char* kReportSchema = "qerest-report/1";

struct DeviationRecord {
    double k = 0.0;
    double h = 0.0;                 ///< window scale used in the sums
    std::string symbol_id;
    CauchyWeights weights;
    double matrix_element = 0.0;
    double nu_limit = 0.0;
    double deviation = 0.0;         ///< |matrix_element - nu_limit|
    double norm2 = 0.0;             ///< ||v||^2 on N (restriction records)
    bool excluded = false;
    std::string flags;              ///< ';'-separated
};

struct WindowStats {
    double h = 0.0;
    int count = 0;                  ///< records used
    int excluded = 0;
    double limit = 0.0;             ///< nu_limit or ambient mean, one value per window
    double sum = 0.0;               ///< h^2 * sum of deviations (S_rest or S_amb)
    double mean = 0.0;              ///< sum / (h^2 count): mean deviation
    std::vector<DeviationRecord> records;
    std::vector<std::string> failures;

    double excluded_fraction() const {
        const int total = count + excluded;
        return total > 0 ? static_cast<double>(excluded) / total : 0.0;
    }
};

/// h^2 * sum and mean over the non-excluded records.
void summarize(WindowStats& stats);

/// nu_1-mass of the constant symbol 1 with Cauchy weights: (L / area) (alpha^2 + beta^2 / 2).
double nu_mass(const CurveSegment& curve, const CauchyWeights& weights);

/// Traces of every pair in the window on one grid (k_max of the window, `ppw` points per wavelength).
/// Failed restrictions leave an empty trace and a message.
struct TraceSet {
    CurveGrid grid;
    CauchyWeights weights;
    std::vector<RestrictedTrace> traces;
    std::vector<std::string> failures;   ///< per pair; empty on success
};

TraceSet window_traces(const BilliardDomain& domain, const SpectrumWindow& window, const CurveSegment& curve,
                       const CauchyWeights& weights, double ppw = 10.0, unsigned threads = 1);

/// Matrix elements with per-pair scale h_j = 1 / k_j against nu_limit; sums use `h`.
WindowStats restriction_statistics(const TraceSet& traces, const CurveSegment& curve, const CurveSymbol& symbol,
                                   double h, unsigned threads = 1);

/// Requires window.missing_levels == false (NumericalError otherwise).
WindowStats qe_restriction_window(const BilliardDomain& domain, const SpectrumWindow& window, const CurveSegment& curve,
                                  const CurveSymbol& symbol, const CauchyWeights& weights, double h, double ppw = 10.0,
                                  unsigned threads = 1);

/// Multiplication observable chi on M with its limit (1/area) int_M chi.
struct AmbientObservable {
    std::string id;
    std::function<double(Vec2)> chi;
    double limit = 0.0;
    double sup = 1.0;   ///< bound on |chi|, scales the convergence tolerance
    Vec2 support_center;
    double support_radius = 0.0;   ///< > 0: chi vanishes outside this disk (integrated on the disk directly)

    static AmbientObservable constant(const BilliardDomain& domain, double value, std::string id = "constant");
    /// unit_bump(|x - center| / radius); ConfigError unless the support clears the boundary.
    static AmbientObservable bump(const BilliardDomain& domain, Vec2 center, double radius, std::string id = "bump");
    static AmbientObservable from_spec(const BilliardDomain& domain, const AmbientSpec& spec);
};

/// <chi u, u> by Gauss quadrature over the fundamental region, chi summed over the mirror images.
double ambient_matrix_element(const BilliardDomain& domain, const EigenPair& pair, const std::function<double(Vec2)>& chi,
                              double quadrature_scale);
/// Same, using a polar rule on the support disk when the observable has one.
double ambient_matrix_element(const BilliardDomain& domain, const EigenPair& pair, const AmbientObservable& obs,
                              double quadrature_scale);

/// Records failing the doubled-rule check (difference > 1e-8 sup|chi|) are excluded with a flag.
WindowStats qe_ambient_window(const BilliardDomain& domain, const SpectrumWindow& window, const AmbientObservable& obs,
                              double h, double quadrature_scale = 0.7, unsigned threads = 1);

struct DensityOne {
    std::vector<std::size_t> indices;   ///< into the record list
    double fraction = 0.0;
    bool defined = false;               ///< false for an empty record set
    double epsilon = 0.0;
};

/// Records (excluded ones skipped) with deviation <= eps. Throws ConfigError for eps < 0.
DensityOne density_one_extract(std::span<const DeviationRecord> records, double eps);

/// Linear-interpolated q-quantile of the non-excluded deviations (NaN for an empty set).
double deviation_percentile(std::span<const DeviationRecord> records, double q);

struct RunOptions {
    std::filesystem::path cache_dir;
    std::filesystem::path out_dir;
    unsigned threads = 1;
    std::optional<std::vector<int>> windows;   ///< subset of window indices
    bool cache_only = false;                   ///< never compute spectra or flow estimates
    bool write_files = true;
    std::function<void(const std::string&)> log;
};

/// Loads the window's spectrum from the cache (exact or covering entry) or computes and stores it.
SpectrumWindow obtain_spectrum(const DomainSpec& domain, const SolverParams& params, double k_min, double k_max,
                               const RunOptions& options, bool* from_cache = nullptr);

/// Exceptional-set sweep plus optional Birkhoff diagnostics, cached by content hash.
nlohmann::json flow_check(const ExperimentConfig& config, const RunOptions& options);

struct QEReport {
    nlohmann::json json;
    std::vector<DeviationRecord> records;
    std::string config_id;
    bool complete = true;    ///< every window valid and every stage succeeded
};

QEReport run_experiment(const ExperimentConfig& config, const RunOptions& options);

/// CSV with header k,h,symbol_id,alpha,beta,matrix_element,nu_limit,deviation,flags.
std::string records_csv(std::span<const DeviationRecord> records);

} // namespace qerest
