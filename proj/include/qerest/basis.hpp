#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qerest/geometry.hpp"

namespace qerest {

/// Parity class under the domain's reflections (0 = even, 1 = odd).
/// D2-symmetric domains: px about the vertical axis, py about the horizontal axis.
/// Sinai cell: px is the parity about the diagonal, py is unused (0).
struct SymmetryClass {
    int px = 0;
    int py = 0;
    bool operator==(const SymmetryClass&) const = default;
};

std::string to_string(SymmetryClass cls);
SymmetryClass symmetry_class_from_string(const std::string& label);
/// Classes that together span the whole Dirichlet spectrum of the domain.
std::vector<SymmetryClass> symmetry_classes(const BilliardDomain& domain);

enum class BasisType { real_plane_waves, fourier_bessel, corner_bessel };

std::string to_string(BasisType type);
BasisType basis_type_from_string(const std::string& name);

/// Everything needed to rebuild a basis (stored with eigenpairs and in the cache).
struct BasisDescriptor {
    BasisType type = BasisType::real_plane_waves;
    SymmetryClass cls;
    int size = 0;                 ///< number of functions
    double k = 0.0;               ///< frequency the basis is instantiated at
    std::uint64_t seed = 0;       ///< direction jitter (plane waves)
};

/// Helmholtz solutions (Delta + k^2) phi = 0, adapted to one symmetry class.
///   real_plane_waves  f_px(k cos(th) (x - xc)) f_py(k sin(th) (y - yc)), th in (0, pi/2) equispaced with jitter,
///                     f_0 = cos, f_1 = sin
///   fourier_bessel    J_m(k r) {cos, sin}(m th) about the centre, m restricted to the class
///   corner_bessel     sin(2 m th) {J_2m, Y_2m}(k r) about the origin, m parity from the class
class BasisSet {
public:
    BasisSet() = default;
    BasisSet(const BilliardDomain& domain, const BasisDescriptor& desc);
    /// Plane waves at explicit angles (tests).
    static BasisSet plane_waves(const BilliardDomain& domain, double k, SymmetryClass cls, std::vector<double> angles);

    const BasisDescriptor& descriptor() const { return desc_; }
    BasisType type() const { return desc_.type; }
    int size() const { return desc_.size; }
    double k() const { return desc_.k; }
    Vec2 center() const { return center_; }

    /// values(i, j) = phi_j(points[i]).
    Eigen::MatrixXd values(std::span<const Vec2> points) const;
    /// sum_j c_j phi_j(points[i]). Plane waves are summed in extended precision: expansion
    /// coefficients of a nearly dependent plane-wave set cancel by many orders of magnitude.
    Eigen::VectorXd combine(std::span<const Vec2> points, const Eigen::VectorXd& c) const;
    /// Partial derivatives, same layout.
    void gradients(std::span<const Vec2> points, Eigen::MatrixXd& dx, Eigen::MatrixXd& dy) const;

private:
    BasisDescriptor desc_;
    Vec2 center_;
    std::vector<double> angles_;   // plane waves
    std::vector<int> orders_;      // Bessel orders
    bool sine_ = false;            // fourier_bessel angular factor
};

/// Preferred basis type for a domain: Fourier-Bessel for the disk, corner Bessel for the
/// Sinai cell, real plane waves otherwise.
BasisType default_basis_type(DomainKind kind);

/// Number of basis functions per class at frequency k with size factor c_b.
int default_basis_size(const BilliardDomain& domain, BasisType type, double k, double size_factor);

} // namespace qerest
