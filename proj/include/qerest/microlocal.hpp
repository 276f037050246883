#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "qerest/billiard_flow.hpp"
#include "qerest/geometry.hpp"
#include "qerest/symbol.hpp"
#include "json.hpp"

namespace qerest {

/// Point of Sigma_1 = S*_N M: foot point on N (arclength s) and a unit direction.
struct TransversalPoint {
    double s = 0.0;
    Vec2 xi;
    double sigma = 0.0;   ///< tangential component <xi, T(s)>
    double xi_n = 0.0;    ///< normal component <xi, nu(s)>

    static TransversalPoint make(const CurveSegment& curve, double s, Vec2 xi);
};

/// Point of the coball bundle B*N.
struct CotangentOnN {
    double s = 0.0;
    double sigma = 0.0;
};

/// Weights of the Cauchy-data restriction alpha * u|_N + beta * k^-1 d_nu u|_N.
struct CauchyWeights {
    double alpha = 1.0;
    double beta = 0.0;
    bool operator==(const CauchyWeights&) const = default;
};

CotangentOnN project_piE(const TransversalPoint& rho);
/// Flip of the normal momentum; fixes s and sigma.
TransversalPoint involution_gammaE(const CurveSegment& curve, const TransversalPoint& rho);

/// |sigma(Q)|^2 averaged over the two sheets: (|a + b xi_n|^2 + |a - b xi_n|^2) / 2 = a^2 + b^2 (1 - sigma^2).
double cauchy_weight_factor(double sigma, const CauchyWeights& w);

/// Quadrature for the limit measure nu_1 on Sigma_1:
///   d nu_1 = (1 / (pi * area)) * ds * dsigma / (2 sqrt(1 - sigma^2)) on each sheet.
/// Gauss-Chebyshev (first kind) in sigma absorbs the weight; trapezoid in s.
class NuMeasureQuadrature {
public:
    explicit NuMeasureQuadrature(const CurveSegment& curve, int sigma_nodes = 2048, int s_nodes = 2048);

    const std::vector<double>& sigma_nodes() const { return sigma_; }
    /// Gauss-Chebyshev weights: integral f(sigma)/sqrt(1-sigma^2) ~ sum w_i f(sigma_i).
    const std::vector<double>& sigma_weights() const { return sigma_w_; }
    double liouville_total() const { return liouville_total_; }   ///< mu_1(S*M) = pi * area

    /// Integral of f(s, sigma, sheet) against nu_1 over both sheets (sheet = +1 or -1).
    template <class F>
    double integrate(F&& f) const {
        double acc = 0.0;
        for (std::size_t j = 0; j < s_.size(); ++j) {
            double inner = 0.0;
            for (std::size_t i = 0; i < sigma_.size(); ++i) {
                inner += sigma_w_[i] * 0.5 * (f(s_[j], sigma_[i], +1) + f(s_[j], sigma_[i], -1));
            }
            acc += s_w_[j] * inner;
        }
        return acc / liouville_total_;
    }

    /// Gauss-Chebyshev integral of g(sigma) / sqrt(1 - sigma^2) over (-1, 1).
    template <class G>
    double chebyshev(G&& g) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < sigma_.size(); ++i) acc += sigma_w_[i] * g(sigma_[i]);
        return acc;
    }

    double total_mass() const;

private:
    std::vector<double> sigma_, sigma_w_, s_, s_w_;
    double liouville_total_ = 0.0;
};

/// Limit value (1/(pi area)) int_0^L int_{-1}^{1} a(s,sigma) w_Q(sigma) / sqrt(1-sigma^2) dsigma ds.
/// Throws ConfigError if the symbol was built for a different curve length.
double nu_limit(const CurveSegment& curve, const CurveSymbol& symbol, const CauchyWeights& weights,
                int sigma_nodes = 2048);

/// Draw from nu_1 (normalised to a probability): s uniform, sigma = cos(uniform angle), sheet +/- equally.
TransversalPoint sample_nu(const CurveSegment& curve, std::mt19937_64& rng);

enum class ExceptionalStatus { regular, exceptional, excluded };

struct ExceptionalSample {
    ExceptionalStatus status = ExceptionalStatus::regular;
    double time = 0.0;   ///< first matching time when exceptional
};

/// Classify one sample: exceptional if phi_t(gamma rho) lies over N and equals gamma(phi_t rho)
/// for some t0 <= |t| <= T. `tol_scale` multiplies the position and direction tolerances.
ExceptionalSample classify_exceptional(const BilliardDomain& domain, const CurveSegment& curve,
                                       const TransversalPoint& rho, double t0, double T, const ToleranceSet& tol,
                                       double tol_scale = 1.0);

struct ExceptionalEstimate {
    double fraction = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double half_width = 0.0;
    std::int64_t samples = 0;        ///< samples drawn
    std::int64_t used = 0;           ///< samples with a defined flow
    std::int64_t exceptional = 0;
    std::int64_t excluded = 0;       ///< flow undefined (B_T) before the horizon
    double horizon = 0.0;
    double t0 = 0.0;
    ToleranceSet tol;
    double tol_scale = 1.0;
    std::uint64_t seed = 0;

    double excluded_fraction() const { return samples > 0 ? static_cast<double>(excluded) / samples : 0.0; }
};

/// Wilson score interval at 95% (z = 1.96).
std::pair<double, double> wilson_interval(std::int64_t successes, std::int64_t trials, double z = 1.96);

/// Monte Carlo estimate of the nu_1-measure of the exceptional set. Throws std::domain_error for n = 0.
ExceptionalEstimate exceptional_fraction(const BilliardDomain& domain, const CurveSegment& curve, double t0, double T,
                                         std::int64_t n, const ToleranceSet& tol, std::uint64_t seed,
                                         unsigned threads = 1);

/// Same samples evaluated at several tolerance scales (one estimate per scale).
std::vector<ExceptionalEstimate> exceptional_sweep(const BilliardDomain& domain, const CurveSegment& curve, double t0,
                                                   double T, std::int64_t n, const ToleranceSet& tol,
                                                   const std::vector<double>& tol_scales, std::uint64_t seed,
                                                   unsigned threads = 1);

nlohmann::json to_json(const ExceptionalEstimate& e);

} // namespace qerest
