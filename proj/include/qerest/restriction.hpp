#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "qerest/geometry.hpp"
#include "qerest/microlocal.hpp"
#include "qerest/spectral_solver.hpp"
#include "qerest/symbol.hpp"

namespace qerest {

/// Uniform midpoint grid s_i = (i + 1/2) L / n on [0, L]; every node carries the weight L / n.
struct CurveGrid {
    double length = 0.0;
    int n = 0;

    double ds() const { return length / n; }
    double s(int i) const { return (i + 0.5) * ds(); }
    bool operator==(const CurveGrid&) const = default;
};

/// Grid with spacing <= 2 pi / (points_per_wavelength * k_max).
CurveGrid make_curve_grid(const CurveSegment& curve, double k_max, double points_per_wavelength = 10.0);

struct RestrictedTrace {
    CurveGrid grid;
    std::vector<std::complex<double>> values;
    double h = 0.0;
    CauchyWeights weights;
    double k = 0.0;        ///< source eigenvalue (0 for synthetic traces)
    std::string source;    ///< free-form id of the source eigenpair
};

/// v(s) = alpha u(x(s)) + beta k^-1 <grad u(x(s)), nu(s)>. h defaults to 1/k.
/// Throws ConfigError when the grid resolves fewer than `min_ppw` points per wavelength 2 pi / k.
RestrictedTrace restrict_trace(const BilliardDomain& domain, const EigenPair& pair, const CurveSegment& curve,
                               const CurveGrid& grid, const CauchyWeights& weights, double h = 0.0,
                               double min_ppw = 10.0);

/// Weyl-type quantisation of a separable symbol on the grid at scale h: each term acts as
/// (a0 M + M a0) / 2, M the Fourier multiplier a1(h D_s) times the momentum cutoff, applied on
/// the grid zero-padded to twice its length. Constant a1 is applied as an exact scalar.
class CurveOperator {
public:
    CurveOperator(const CurveSymbol& symbol, double h, const CurveGrid& grid);

    const CurveSymbol& symbol() const { return symbol_; }
    double h() const { return h_; }
    const CurveGrid& grid() const { return grid_; }

    std::vector<std::complex<double>> apply(std::span<const std::complex<double>> v) const;

private:
    CurveSymbol symbol_;
    double h_;
    CurveGrid grid_;
    std::vector<std::vector<double>> a0_;           // per term, on the grid
    std::vector<std::vector<double>> multiplier_;   // per term, on the padded frequency grid (empty if constant)
};

/// Throws ConfigError on a grid or h mismatch.
RestrictedTrace apply_symbol(const CurveOperator& op, const RestrictedTrace& v);

struct MatrixElement {
    double value = 0.0;            ///< Re <A v, v>
    double imag_residual = 0.0;    ///< |Im <A v, v>|
    bool warning = false;          ///< imag_residual > 1e-6 |value| (real symbols only)
};

MatrixElement matrix_element(const CurveOperator& op, const RestrictedTrace& v);

/// ||v||^2 on the grid.
double trace_norm2(const RestrictedTrace& v);

/// h^2 * sum ||v_j||^2.
double norm_sum_check(std::span<const RestrictedTrace> traces, double h);

} // namespace qerest
