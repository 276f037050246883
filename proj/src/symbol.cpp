#include "qerest/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "qerest/errors.hpp"

namespace qerest {

namespace {

double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / t);
    const double b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

double unit_bump_integral() {
    static const double value = [] {
        boost::math::quadrature::tanh_sinh<double> integrator;
        return integrator.integrate([](double u) { return unit_bump(u); }, -1.0, 1.0);
    }();
    return value;
}

} // namespace

double unit_bump(double u) {
    if (std::abs(u) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - u * u));
}

double momentum_cutoff(double sigma) {
    constexpr double inner = 1.2, outer = 1.5;
    return 1.0 - smooth_step((std::abs(sigma) - inner) / (outer - inner));
}

double SpatialFactor::operator()(double s) const {
    if (kind == Kind::bump) return unit_bump((s - p1) / p2);
    if (kind == Kind::constant) return p1;
    if (s <= p1 || s >= p2) return 0.0;
    return 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * (s - p1) / (p2 - p1)));
}

double SpatialFactor::support_begin() const {
    if (kind == Kind::constant) return 0.0;
    return kind == Kind::bump ? p1 - p2 : p1;
}
double SpatialFactor::support_end() const { return kind == Kind::bump ? p1 + p2 : p2; }

double SpatialFactor::integral() const {
    if (kind == Kind::bump) return p2 * unit_bump_integral();
    if (kind == Kind::constant) return p1 * p2;
    return 0.5 * (p2 - p1);
}

MomentumFactor MomentumFactor::poly(std::vector<double> c) {
    if (c.empty() || c.size() > 5) throw ConfigError("momentum poly needs 1..5 coefficients (degree <= 4)");
    return {Kind::poly, 0.0, std::move(c), 0.0, 1.0};
}

double MomentumFactor::operator()(double sigma) const {
    switch (kind) {
    case Kind::constant: return value;
    case Kind::poly: {
        double acc = 0.0;
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * sigma + *it;
        return acc;
    }
    case Kind::bump: return unit_bump((sigma - center) / width);
    }
    return 0.0;
}

double MomentumFactor::sup_abs() const {
    switch (kind) {
    case Kind::constant: return std::abs(value);
    case Kind::bump: return 1.0;
    case Kind::poly: {
        double acc = 0.0;
        for (std::size_t i = 0; i < coeffs.size(); ++i) acc += std::abs(coeffs[i]) * std::pow(1.5, static_cast<double>(i));
        return acc;
    }
    }
    return 0.0;
}

CurveSymbol::CurveSymbol(std::string id, std::vector<SymbolTerm> terms, double curve_length, double margin)
    : id_(std::move(id)), terms_(std::move(terms)), length_(curve_length), margin_(margin) {
    if (!(margin_ > 0.0)) throw ConfigError("symbol '" + id_ + "': margin must be positive");
    if (terms_.empty()) throw ConfigError("symbol '" + id_ + "': needs at least one term");
    for (const auto& term : terms_) {
        if (term.a0.kind == SpatialFactor::Kind::constant) {
            throw ConfigError("symbol '" + id_ + "': constant spatial factor is reserved for the identity symbol");
        }
        if (!(term.a0.p2 > (term.a0.kind == SpatialFactor::Kind::bump ? 0.0 : term.a0.p1))) {
            throw ConfigError("symbol '" + id_ + "': degenerate spatial factor");
        }
        if (term.a1.kind == MomentumFactor::Kind::bump && !(term.a1.width > 0.0)) {
            throw ConfigError("symbol '" + id_ + "': momentum bump width must be positive");
        }
        if (term.a0.support_begin() < margin_ || term.a0.support_end() > length_ - margin_) {
            throw ConfigError("symbol '" + id_ + "': spatial support must stay within margin of the curve ends");
        }
    }
}

CurveSymbol CurveSymbol::identity(double curve_length) {
    if (!(curve_length > 0.0)) throw ConfigError("identity symbol: curve length must be positive");
    CurveSymbol a;
    a.id_ = "identity";
    a.terms_ = {{SpatialFactor::constant(1.0, curve_length), MomentumFactor::constant(1.0)}};
    a.length_ = curve_length;
    return a;
}

double CurveSymbol::operator()(double s, double sigma) const {
    double acc = 0.0;
    for (const auto& term : terms_) acc += term.a0(s) * term.a1(sigma);
    return acc;
}

double CurveSymbol::sup_abs() const {
    double acc = 0.0;
    for (const auto& term : terms_) acc += term.a1.sup_abs();
    return acc;
}

} // namespace qerest
