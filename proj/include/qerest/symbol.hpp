#pragma once

#include <string>
#include <vector>

namespace qerest {

/// Smooth compactly supported bump exp(1 - 1/(1 - u^2)) for |u| < 1, zero otherwise; peak value 1.
double unit_bump(double u);

/// C-infinity cutoff in the tangential momentum: 1 for |sigma| <= 1.2, 0 for |sigma| >= 1.5.
double momentum_cutoff(double sigma);

/// Spatial factor a0(s) on the curve.
///   bump(center, width):     unit_bump((s - center) / width)
///   cosine_window(l, r):     (1 - cos(2 pi (s - l) / (r - l))) / 2 on [l, r], zero outside
///   constant(v, L):          v on all of [0, L] (identity symbol only)
struct SpatialFactor {
    enum class Kind { bump, cosine_window, constant };
    Kind kind = Kind::bump;
    double p1 = 0.0;
    double p2 = 1.0;

    static SpatialFactor bump(double center, double width) { return {Kind::bump, center, width}; }
    static SpatialFactor cosine_window(double left, double right) { return {Kind::cosine_window, left, right}; }
    static SpatialFactor constant(double value, double length) { return {Kind::constant, value, length}; }

    double operator()(double s) const;
    double support_begin() const;
    double support_end() const;
    double integral() const;
};

/// Momentum factor a1(sigma).
///   constant(v):             v
///   poly(c0, ..., c4):       sum_i c_i sigma^i (degree <= 4)
///   bump(sigma0, width):     unit_bump((sigma - sigma0) / width)
struct MomentumFactor {
    enum class Kind { constant, poly, bump };
    Kind kind = Kind::constant;
    double value = 1.0;
    std::vector<double> coeffs;
    double center = 0.0;
    double width = 1.0;

    static MomentumFactor constant(double v) { return {Kind::constant, v, {}, 0.0, 1.0}; }
    static MomentumFactor poly(std::vector<double> c);
    static MomentumFactor bump(double sigma0, double width) { return {Kind::bump, 0.0, {}, sigma0, width}; }

    double operator()(double sigma) const;
    bool is_constant() const { return kind == Kind::constant; }
    /// Upper bound of |a1| over |sigma| <= 1.5.
    double sup_abs() const;
};

struct SymbolTerm {
    SpatialFactor a0;
    MomentumFactor a1;
};

/// Separable symbol a(s, sigma) = sum_terms a0(s) a1(sigma) on a curve of a given length.
class CurveSymbol {
public:
    CurveSymbol() = default;
    /// Throws ConfigError when any a0 fails to vanish within `margin` of the curve ends.
    CurveSymbol(std::string id, std::vector<SymbolTerm> terms, double curve_length, double margin);
    /// a = 1 on the whole curve; exempt from the margin rule.
    static CurveSymbol identity(double curve_length);

    const std::string& id() const { return id_; }
    const std::vector<SymbolTerm>& terms() const { return terms_; }
    double margin() const { return margin_; }
    double curve_length() const { return length_; }

    double operator()(double s, double sigma) const;
    /// Upper bound of |a| on [0, L] x [-1.5, 1.5].
    double sup_abs() const;
    bool is_real() const { return true; }

private:
    std::string id_;
    std::vector<SymbolTerm> terms_;
    double length_ = 0.0;
    double margin_ = 0.0;
};

} // namespace qerest
