#include "qerest/microlocal.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "qerest/errors.hpp"
#include "qerest/parallel.hpp"
#include "qerest/seeds.hpp"

namespace qerest {

TransversalPoint TransversalPoint::make(const CurveSegment& curve, double s, Vec2 xi) {
    return {s, xi, dot(xi, curve.tangent(s)), dot(xi, curve.normal(s))};
}

CotangentOnN project_piE(const TransversalPoint& rho) { return {rho.s, rho.sigma}; }

TransversalPoint involution_gammaE(const CurveSegment& curve, const TransversalPoint& rho) {
    const Vec2 nu = curve.normal(rho.s);
    return TransversalPoint::make(curve, rho.s, rho.xi - nu * (2.0 * dot(rho.xi, nu)));
}

double cauchy_weight_factor(double sigma, const CauchyWeights& w) {
    const double xi_n2 = std::max(0.0, 1.0 - sigma * sigma);
    return w.alpha * w.alpha + w.beta * w.beta * xi_n2;
}

NuMeasureQuadrature::NuMeasureQuadrature(const CurveSegment& curve, int sigma_nodes, int s_nodes) {
    if (sigma_nodes < 1 || s_nodes < 1) throw std::invalid_argument("NuMeasureQuadrature: node counts must be >= 1");
    const double pi = std::numbers::pi;
    sigma_.resize(sigma_nodes);
    sigma_w_.assign(sigma_nodes, pi / sigma_nodes);
    for (int i = 0; i < sigma_nodes; ++i) sigma_[i] = std::cos((2.0 * i + 1.0) * pi / (2.0 * sigma_nodes));
    const double L = curve.length();
    s_.resize(s_nodes + 1);
    s_w_.assign(s_nodes + 1, L / s_nodes);
    for (int j = 0; j <= s_nodes; ++j) s_[j] = L * j / s_nodes;
    s_w_.front() *= 0.5;
    s_w_.back() *= 0.5;
    liouville_total_ = pi * curve.domain().area();
}

double NuMeasureQuadrature::total_mass() const {
    return integrate([](double, double, int) { return 1.0; });
}

double nu_limit(const CurveSegment& curve, const CurveSymbol& symbol, const CauchyWeights& weights, int sigma_nodes) {
    if (std::abs(symbol.curve_length() - curve.length()) > 1e-9 * curve.length()) {
        throw ConfigError("nu_limit: symbol '" + symbol.id() + "' was built for a different curve");
    }
    const NuMeasureQuadrature quad(curve, sigma_nodes, 1);
    double acc = 0.0;
    for (const auto& term : symbol.terms()) {
        const double momentum = quad.chebyshev([&](double sigma) { return term.a1(sigma) * cauchy_weight_factor(sigma, weights); });
        acc += term.a0.integral() * momentum;
    }
    return acc / quad.liouville_total();
}

TransversalPoint sample_nu(const CurveSegment& curve, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double s = curve.length() * unit(rng);
    const double theta = 2.0 * std::numbers::pi * unit(rng);
    const Vec2 xi = curve.tangent(s) * std::cos(theta) + curve.normal(s) * std::sin(theta);
    return TransversalPoint::make(curve, s, xi);
}

namespace {

struct SampleOutcome {
    bool excluded = false;
    double min_ratio = std::numeric_limits<double>::infinity();
    double time = 0.0;
};

void collect(const BilliardDomain& domain, const CurveSegment& curve, const PhasePoint& start, double t0, double T,
             const ToleranceSet& tol, std::vector<CurveCrossing>& out, bool& truncated) {
    for (const double horizon : {T, -T}) {
        const auto list = crossings_with_curve(domain, curve, start, horizon, tol);
        truncated = truncated || list.truncated;
        for (const auto& c : list.crossings) {
            if (std::abs(c.t) >= t0) out.push_back(c);
        }
    }
}

SampleOutcome evaluate_sample(const BilliardDomain& domain, const CurveSegment& curve, const TransversalPoint& rho,
                              double t0, double T, const ToleranceSet& tol) {
    SampleOutcome out;
    const Vec2 x = curve.point(rho.s);
    const TransversalPoint flipped = involution_gammaE(curve, rho);
    std::vector<CurveCrossing> direct, mirrored;
    bool truncated = false;
    collect(domain, curve, {x, rho.xi}, t0, T, tol, direct, truncated);
    collect(domain, curve, {x, flipped.xi}, t0, T, tol, mirrored, truncated);
    if (truncated) {
        out.excluded = true;
        return out;
    }
    const double pos_tol = tol.position_rel * curve.length();
    for (const auto& a : direct) {
        const Vec2 nu = curve.normal(a.s);
        const Vec2 gamma_xi = a.xi - nu * (2.0 * dot(a.xi, nu));
        for (const auto& b : mirrored) {
            if (std::abs(a.t - b.t) > tol.time) continue;
            const double ratio = std::max(std::abs(a.s - b.s) / pos_tol, distance(b.xi, gamma_xi) / tol.direction);
            if (ratio < out.min_ratio) {
                out.min_ratio = ratio;
                out.time = a.t;
            }
        }
    }
    return out;
}

ExceptionalEstimate summarize(const std::vector<SampleOutcome>& outcomes, double scale, double t0, double T,
                              const ToleranceSet& tol, std::uint64_t seed) {
    ExceptionalEstimate e;
    e.samples = static_cast<std::int64_t>(outcomes.size());
    for (const auto& o : outcomes) {
        if (o.excluded) {
            ++e.excluded;
            continue;
        }
        ++e.used;
        if (o.min_ratio <= scale) ++e.exceptional;
    }
    e.fraction = e.used > 0 ? static_cast<double>(e.exceptional) / e.used : 0.0;
    const auto [lo, hi] = wilson_interval(e.exceptional, e.used);
    e.ci_low = lo;
    e.ci_high = hi;
    e.half_width = 0.5 * (hi - lo);
    e.horizon = T;
    e.t0 = t0;
    e.tol = tol;
    e.tol_scale = scale;
    e.seed = seed;
    return e;
}

std::vector<SampleOutcome> run_samples(const BilliardDomain& domain, const CurveSegment& curve, double t0, double T,
                                       std::int64_t n, const ToleranceSet& tol, std::uint64_t seed, unsigned threads) {
    if (n <= 0) throw std::domain_error("exceptional_fraction: sample count must be >= 1");
    if (!(t0 > 0.0 && t0 < T)) throw std::domain_error("exceptional_fraction: need 0 < t0 < T");
    std::vector<SampleOutcome> outcomes(static_cast<std::size_t>(n));
    parallel_for(outcomes.size(), threads, [&](std::size_t i) {
        std::mt19937_64 rng(derive_seed(seed, SeedStream::flow_samples, i));
        const auto rho = sample_nu(curve, rng);
        outcomes[i] = evaluate_sample(domain, curve, rho, t0, T, tol);
    });
    return outcomes;
}

} // namespace

ExceptionalSample classify_exceptional(const BilliardDomain& domain, const CurveSegment& curve,
                                       const TransversalPoint& rho, double t0, double T, const ToleranceSet& tol,
                                       double tol_scale) {
    const auto o = evaluate_sample(domain, curve, rho, t0, T, tol);
    if (o.excluded) return {ExceptionalStatus::excluded, 0.0};
    if (o.min_ratio <= tol_scale) return {ExceptionalStatus::exceptional, o.time};
    return {ExceptionalStatus::regular, 0.0};
}

std::pair<double, double> wilson_interval(std::int64_t successes, std::int64_t trials, double z) {
    if (trials <= 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

ExceptionalEstimate exceptional_fraction(const BilliardDomain& domain, const CurveSegment& curve, double t0, double T,
                                         std::int64_t n, const ToleranceSet& tol, std::uint64_t seed,
                                         unsigned threads) {
    const auto outcomes = run_samples(domain, curve, t0, T, n, tol, seed, threads);
    return summarize(outcomes, 1.0, t0, T, tol, seed);
}

std::vector<ExceptionalEstimate> exceptional_sweep(const BilliardDomain& domain, const CurveSegment& curve, double t0,
                                                   double T, std::int64_t n, const ToleranceSet& tol,
                                                   const std::vector<double>& tol_scales, std::uint64_t seed,
                                                   unsigned threads) {
    const auto outcomes = run_samples(domain, curve, t0, T, n, tol, seed, threads);
    std::vector<ExceptionalEstimate> out;
    out.reserve(tol_scales.size());
    for (const double scale : tol_scales) out.push_back(summarize(outcomes, scale, t0, T, tol, seed));
    return out;
}

nlohmann::json to_json(const ExceptionalEstimate& e) {
    return {
        {"fraction", e.fraction},
        {"ci", {e.ci_low, e.ci_high}},
        {"n", e.samples},
        {"n_used", e.used},
        {"exceptional", e.exceptional},
        {"T", e.horizon},
        {"t0", e.t0},
        {"tolerances",
         {{"position_rel", e.tol.position_rel * e.tol_scale},
          {"direction", e.tol.direction * e.tol_scale},
          {"time", e.tol.time},
          {"glancing", e.tol.glancing},
          {"corner", e.tol.corner}}},
        {"excluded_bt_fraction", e.excluded_fraction()},
        {"seed", e.seed},
    };
}

} // namespace qerest
