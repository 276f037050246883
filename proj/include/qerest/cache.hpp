#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "qerest/geometry.hpp"
#include "qerest/spectral_solver.hpp"
#include "json.hpp"

namespace qerest {

inline constexpr const char* kCacheFormat = "qerest-cache/1";

/// Identifies spectra that are interchangeable: same domain and solver parameters. Any cached
/// window of a family can be sliced to serve a sub-range.
std::string spectrum_family_id(const DomainSpec& domain, const SolverParams& params);
/// Family plus the exact k-range.
std::string spectrum_id(const DomainSpec& domain, const SolverParams& params, double k_min, double k_max);

/// "%.17g": round-trips every double exactly.
std::string format_exact(double x);
double parse_exact(const std::string& s);

/// On-disk eigenpair cache. Layout:
///   <dir>/<family>/<spectrum-id>.json            manifest
///   <dir>/<family>/<spectrum-id>-<sha8>.f64      coefficients, little-endian binary64, concatenated
/// Files are written to temporaries and renamed into place, so concurrent writers of the same
/// window leave one valid entry.
class SpectrumCache {
public:
    explicit SpectrumCache(std::filesystem::path dir);

    enum class Status { hit, miss, stale_version };

    struct Lookup {
        Status status = Status::miss;
        std::optional<SpectrumWindow> window;
        std::filesystem::path manifest;
    };

    /// Writes (or atomically replaces) the entry for the window's exact range.
    std::filesystem::path save(const DomainSpec& domain, const SolverParams& params, const SpectrumWindow& window,
                               const std::string& config_id = "") const;

    /// Exact-range lookup. A manifest written by another solver version gives stale_version
    /// (files are left untouched). Integrity failures throw CacheCorruptError.
    Lookup load(const DomainSpec& domain, const SolverParams& params, double k_min, double k_max) const;

    /// Smallest current-version entry of the family whose range covers [k_min, k_max], sliced to it.
    Lookup load_covering(const DomainSpec& domain, const SolverParams& params, double k_min, double k_max) const;

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
};

/// Reads one manifest (with its coefficient file) without any version filtering.
/// Throws CacheCorruptError on checksum or format problems.
SpectrumWindow read_manifest(const std::filesystem::path& manifest, std::string* solver_version = nullptr);

/// Save to `dir` and load back.
SpectrumWindow cache_roundtrip(const BilliardDomain& domain, const SolverParams& params, const SpectrumWindow& window,
                               const std::filesystem::path& dir);

/// Whole-file write via a temporary in the same directory plus rename.
void atomic_write(const std::filesystem::path& path, const std::string& bytes);

std::string read_file(const std::filesystem::path& path);

} // namespace qerest
