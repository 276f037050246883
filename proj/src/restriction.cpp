#include "qerest/restriction.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "qerest/errors.hpp"

namespace qerest {

namespace {

constexpr double kPi = std::numbers::pi;

// FFTW planning is not thread-safe; plans are created once per size under a lock and then
// executed concurrently through the new-array interface on fftw_malloc'd buffers.
struct PlanPair {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
};

const PlanPair& plans_for(int size) {
    static std::mutex mu;
    static std::map<int, PlanPair> cache;
    std::lock_guard lock(mu);
    auto it = cache.find(size);
    if (it != cache.end()) return it->second;
    fftw_complex* buf = fftw_alloc_complex(static_cast<size_t>(size));
    PlanPair p;
    p.forward = fftw_plan_dft_1d(size, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    p.backward = fftw_plan_dft_1d(size, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_free(buf);
    if (!p.forward || !p.backward) throw NumericalError("FFTW planning failed");
    return cache.emplace(size, p).first->second;
}

struct FftwBuffer {
    explicit FftwBuffer(int n) : data(fftw_alloc_complex(static_cast<size_t>(n))), size(n) {
        if (!data) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    fftw_complex* data;
    int size;
};

// out = M in, M the multiplier on the zero-padded grid.
void apply_multiplier(const std::vector<double>& mult, std::span<const std::complex<double>> in,
                      std::vector<std::complex<double>>& out) {
    const int n = static_cast<int>(in.size());
    const int padded = static_cast<int>(mult.size());
    const auto& plans = plans_for(padded);
    FftwBuffer buf(padded);
    for (int i = 0; i < padded; ++i) {
        buf.data[i][0] = i < n ? in[i].real() : 0.0;
        buf.data[i][1] = i < n ? in[i].imag() : 0.0;
    }
    fftw_execute_dft(plans.forward, buf.data, buf.data);
    const double norm = 1.0 / padded;
    for (int i = 0; i < padded; ++i) {
        buf.data[i][0] *= mult[i] * norm;
        buf.data[i][1] *= mult[i] * norm;
    }
    fftw_execute_dft(plans.backward, buf.data, buf.data);
    out.resize(n);
    for (int i = 0; i < n; ++i) out[i] = {buf.data[i][0], buf.data[i][1]};
}

} // namespace

CurveGrid make_curve_grid(const CurveSegment& curve, double k_max, double points_per_wavelength) {
    if (!(k_max > 0.0) || !(points_per_wavelength > 0.0)) throw ConfigError("curve grid: k_max and density must be positive");
    const double spacing = 2.0 * kPi / (points_per_wavelength * k_max);
    return {curve.length(), static_cast<int>(std::ceil(curve.length() / spacing))};
}

RestrictedTrace restrict_trace(const BilliardDomain& domain, const EigenPair& pair, const CurveSegment& curve,
                               const CurveGrid& grid, const CauchyWeights& weights, double h, double min_ppw) {
    if (std::abs(grid.length - curve.length()) > 1e-12 * curve.length()) throw ConfigError("trace grid does not match the curve length");
    if (grid.ds() > 2.0 * kPi / (min_ppw * pair.k) * (1.0 + 1e-12)) {
        throw ConfigError("trace grid too coarse for k = " + std::to_string(pair.k) + " (spacing " +
                          std::to_string(grid.ds()) + ")");
    }
    RestrictedTrace out;
    out.grid = grid;
    out.h = h > 0.0 ? h : 1.0 / pair.k;
    out.weights = weights;
    out.k = pair.k;
    out.values.assign(grid.n, {0.0, 0.0});
    if (weights.alpha == 0.0 && weights.beta == 0.0) return out;
    std::vector<Vec2> x(grid.n);
    for (int i = 0; i < grid.n; ++i) x[i] = curve.point(grid.s(i));
    std::vector<double> u;
    std::vector<Vec2> g;
    if (weights.alpha != 0.0) u = evaluate_eigenfunction(domain, pair, x);
    if (weights.beta != 0.0) g = evaluate_gradient(domain, pair, x);
    for (int i = 0; i < grid.n; ++i) {
        double v = 0.0;
        if (weights.alpha != 0.0) v += weights.alpha * u[i];
        if (weights.beta != 0.0) v += weights.beta * dot(g[i], curve.normal(grid.s(i))) / pair.k;
        out.values[i] = v;
    }
    return out;
}

CurveOperator::CurveOperator(const CurveSymbol& symbol, double h, const CurveGrid& grid)
    : symbol_(symbol), h_(h), grid_(grid) {
    if (!(h > 0.0)) throw ConfigError("curve operator: h must be positive");
    if (grid.n < 1) throw ConfigError("curve operator: empty grid");
    if (std::abs(symbol.curve_length() - grid.length) > 1e-9 * grid.length) {
        throw ConfigError("symbol '" + symbol.id() + "' was built for a different curve length");
    }
    const int padded = 2 * grid.n;
    for (const auto& term : symbol.terms()) {
        std::vector<double> a0(grid.n);
        for (int i = 0; i < grid.n; ++i) a0[i] = term.a0(grid.s(i));
        a0_.push_back(std::move(a0));
        std::vector<double> mult;
        if (!term.a1.is_constant()) {
            mult.resize(padded);
            const double dxi = 2.0 * kPi / (padded * grid.ds());
            for (int j = 0; j < padded; ++j) {
                const int f = j <= padded / 2 ? j : j - padded;
                const double sigma = h * dxi * f;
                mult[j] = term.a1(sigma) * momentum_cutoff(sigma);
            }
        }
        multiplier_.push_back(std::move(mult));
    }
}

std::vector<std::complex<double>> CurveOperator::apply(std::span<const std::complex<double>> v) const {
    const int n = grid_.n;
    if (static_cast<int>(v.size()) != n) throw ConfigError("curve operator: trace length does not match the grid");
    std::vector<std::complex<double>> out(n, {0.0, 0.0});
    std::vector<std::complex<double>> tmp, mv;
    const auto& terms = symbol_.terms();
    for (std::size_t t = 0; t < terms.size(); ++t) {
        const auto& a0 = a0_[t];
        if (multiplier_[t].empty()) {
            const double c = terms[t].a1.value;
            for (int i = 0; i < n; ++i) out[i] += c * a0[i] * v[i];
            continue;
        }
        // (a0 M v + M (a0 v)) / 2
        apply_multiplier(multiplier_[t], v, mv);
        tmp.resize(n);
        for (int i = 0; i < n; ++i) tmp[i] = a0[i] * v[i];
        std::vector<std::complex<double>> m_a0v;
        apply_multiplier(multiplier_[t], tmp, m_a0v);
        for (int i = 0; i < n; ++i) out[i] += 0.5 * (a0[i] * mv[i] + m_a0v[i]);
    }
    return out;
}

RestrictedTrace apply_symbol(const CurveOperator& op, const RestrictedTrace& v) {
    if (!(v.grid == op.grid())) throw ConfigError("apply_symbol: trace grid does not match the operator grid");
    if (std::abs(v.h - op.h()) > 1e-12 * op.h()) throw ConfigError("apply_symbol: trace h does not match the operator h");
    RestrictedTrace out = v;
    out.values = op.apply(v.values);
    return out;
}

MatrixElement matrix_element(const CurveOperator& op, const RestrictedTrace& v) {
    const auto av = apply_symbol(op, v);
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t i = 0; i < v.values.size(); ++i) acc += std::conj(v.values[i]) * av.values[i];
    acc *= v.grid.ds();
    MatrixElement m;
    m.value = acc.real();
    m.imag_residual = std::abs(acc.imag());
    m.warning = op.symbol().is_real() && m.imag_residual > 1e-6 * std::abs(m.value);
    return m;
}

double trace_norm2(const RestrictedTrace& v) {
    double acc = 0.0;
    for (const auto& z : v.values) acc += std::norm(z);
    return acc * v.grid.ds();
}

double norm_sum_check(std::span<const RestrictedTrace> traces, double h) {
    double acc = 0.0;
    for (const auto& t : traces) acc += trace_norm2(t);
    return h * h * acc;
}

} // namespace qerest
