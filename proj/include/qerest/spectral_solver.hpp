#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qerest/basis.hpp"
#include "qerest/geometry.hpp"
#include "qerest/quadrature.hpp"

namespace qerest {

/// Bumped whenever solver output for identical inputs can change; cached spectra carrying a
/// different tag are recomputed.
inline constexpr const char* kSolverVersion = "mps-4";

struct SolverParams {
    double basis_factor = 4.0;            ///< c_b in ceil(c_b k P / 2pi)
    double points_per_wavelength = 8.0;   ///< boundary collocation density
    int interior_extra = 20;              ///< interior cloud = basis size + this
    double rank_tol = 1e-14;              ///< SVD truncation relative to the largest singular value
    double tension_threshold = 1e-6;      ///< accept a refined minimum below this
    double residual_cap = 1e-7;           ///< relative boundary residual cap
    double refine_tol = 1e-9;             ///< absolute tolerance in k
    double dedup_tol = 1e-7;
    double scan_fraction = 0.125;         ///< grid step / Weyl mean spacing
    double degeneracy_probe = 3.0;        ///< fine local scan when the second tension at a minimum is below
                                          ///< this multiple of the bracket-end tension
    double quadrature_scale = 0.7;        ///< interior/boundary Gauss nodes per unit k*length
    double chunk_fraction = 0.1;          ///< basis size is frozen over chunks of width ~ this * k
    double weyl_slack = 3.0;              ///< missing-level flag: two-term deficit above this many std devs
    std::optional<BasisType> basis;       ///< default per domain kind
    std::uint64_t seed = 0;

    bool operator==(const SolverParams&) const = default;
};

struct TensionResult {
    double tension = 0.0;   ///< tan of the smallest subspace angle
    double second = 0.0;    ///< same for the second singular value
    int rank = 0;           ///< retained rank of [A_B; A_I]
    Eigen::VectorXd all;    ///< every tension value, ascending
    Eigen::MatrixXd coefficients;   ///< basis coefficients of the requested smallest directions
};

/// Boundary/interior sampling for one symmetry class and a frozen basis size.
class TensionProblem {
public:
    TensionProblem(const BilliardDomain& domain, SymmetryClass cls, double k_ref, const SolverParams& params);
    TensionProblem(const BilliardDomain& domain, const BasisDescriptor& desc, const SolverParams& params);

    /// `vectors` smallest directions returned as coefficient columns.
    TensionResult evaluate(double k, int vectors = 0) const;
    TensionResult evaluate(const BasisSet& basis, int vectors = 0) const;

    BasisDescriptor descriptor(double k) const;
    SymmetryClass symmetry_class() const { return cls_; }
    int basis_size() const { return size_; }
    std::size_t boundary_points() const { return boundary_.size(); }
    std::size_t interior_points() const { return cloud_.size(); }
    const FundamentalRegion& region() const { return region_; }

private:
    void prepare(double k_ref);

    const BilliardDomain* domain_;
    SolverParams params_;
    SymmetryClass cls_;
    BasisType type_;
    int size_ = 0;
    FundamentalRegion region_;
    std::vector<Vec2> boundary_;
    std::vector<double> boundary_weight_;
    std::vector<Vec2> cloud_;
};

/// Smallest generalized singular value (subspace-angle tension) of the basis at its own k.
/// Throws NumericalError when the stacked matrix has no usable rank.
double tension(const BilliardDomain& domain, const BasisSet& basis, const SolverParams& params = {});

struct EigenPair {
    double k = 0.0;
    BasisDescriptor basis;
    std::vector<double> coefficients;   ///< scaled to max |c| = 1
    double norm_constant = 1.0;         ///< u = norm_constant * sum c_i phi_i has unit L2(M) norm
    double tension = 0.0;
    double boundary_residual = 0.0;     ///< ||u||_{dM} / (||d_n u||_{dM} / k)
    double rellich_deviation = 0.0;     ///< |Rellich norm - 1|
    int multiplicity = 1;               ///< size of the degenerate group the pair came from
};

struct SpectrumWindow {
    double k_min = 0.0;
    double k_max = 0.0;
    double h = 0.0;                     ///< semiclassical parameter assigned to the window
    std::vector<EigenPair> pairs;       ///< sorted by k (ties by class label)
    double weyl_deviation = 0.0;        ///< relative deviation from the leading Weyl term
    double weyl_deviation_two_term = 0.0;
    double weyl_leading = 0.0;
    double weyl_two_term = 0.0;
    bool missing_levels = false;
    int rejected_minima = 0;            ///< refined minima above the tension threshold or residual cap
    std::int64_t tension_evaluations = 0;
};

/// Eigenvalues k in [k_min, k_max] with normalised eigenfunctions. h defaults to 2/(k_min + k_max).
SpectrumWindow find_spectrum(const BilliardDomain& domain, double k_min, double k_max, const SolverParams& params = {},
                             unsigned threads = 1);

/// Pairs with k in [k_min, k_max] (h set to 2/(k_min + k_max)); Weyl statistics recomputed.
SpectrumWindow slice_window(const BilliardDomain& domain, const SpectrumWindow& window, double k_min, double k_max,
                            const SolverParams& params = {});

std::vector<double> evaluate_eigenfunction(const BilliardDomain& domain, const EigenPair& pair,
                                           std::span<const Vec2> points);
std::vector<Vec2> evaluate_gradient(const BilliardDomain& domain, const EigenPair& pair, std::span<const Vec2> points);

struct WeylCheck {
    int count = 0;
    double leading = 0.0;               ///< area (k_max^2 - k_min^2) / (4 pi)
    double two_term = 0.0;              ///< leading - perimeter (k_max - k_min) / (4 pi)
    double rel_leading = 0.0;
    double rel_two_term = 0.0;
};

/// Relative deviations of the count from the Weyl predictions (0 when both count and prediction vanish).
WeylCheck weyl_check(const BilliardDomain& domain, const SpectrumWindow& window);

/// <u_i, u_j>_{L2(M)} by Gauss quadrature over all of M.
Eigen::MatrixXd gram_matrix(const BilliardDomain& domain, std::span<const EigenPair> pairs, double quadrature_scale = 0.7);

struct NormDiagnostics {
    double quadrature_norm2 = 0.0;
    double rellich_norm2 = 0.0;
    double boundary_residual = 0.0;
};

/// Norms of the pair as stored (1 for a correctly normalised pair).
NormDiagnostics norm_diagnostics(const BilliardDomain& domain, const EigenPair& pair, double quadrature_scale = 0.7);

} // namespace qerest
