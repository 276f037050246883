#include "qerest/billiard_flow.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <variant>

#include "qerest/errors.hpp"

namespace qerest {

namespace {

// Guard against re-detecting the impact we are sitting on.
constexpr double kRehitGuard = 1e-12;

PhasePoint reversed(const PhasePoint& p) { return {p.x, -p.xi}; }

} // namespace

TrajectoryWalker::TrajectoryWalker(const BilliardDomain& domain, PhasePoint start, const ToleranceSet& tol)
    : domain_(domain), tol_(tol) {
    leg_.x = start.x;
    leg_.xi = start.xi;
    leg_.t_start = 0.0;
    plan_leg();
}

void TrajectoryWalker::plan_leg() {
    const auto pieces = domain_.pieces();
    double best = std::numeric_limits<double>::infinity();
    int best_piece = -1;
    for (int i = 0; i < static_cast<int>(pieces.size()); ++i) {
        if (i == last_piece_ && std::holds_alternative<SegmentPiece>(pieces[i])) continue;
        const auto t = piece_ray_hit(pieces[i], leg_.x, leg_.xi, kRehitGuard);
        if (t && *t < best) {
            best = *t;
            best_piece = i;
        }
    }
    if (best_piece < 0) {
        throw NumericalError("billiard ray escaped the domain");
    }
    leg_.duration = best;
    hit_piece_ = best_piece;
}

std::optional<Undefined> TrajectoryWalker::bounce() {
    const Vec2 p = leg_.x + leg_.xi * leg_.duration;
    const double t_hit = leg_.t_start + leg_.duration;
    if (domain_.corner_distance(p) < tol_.corner) {
        return Undefined{UndefinedReason::corner, t_hit};
    }
    const Vec2 n = piece_outward_normal(domain_.pieces()[hit_piece_], p);
    const double c = dot(leg_.xi, n);
    if (std::abs(c) < tol_.glancing) {
        return Undefined{UndefinedReason::glancing, t_hit};
    }
    if (++bounces_ > tol_.bounce_cap) {
        throw ResourceError("billiard flow exceeded the bounce cap");
    }
    leg_.x = p;
    leg_.xi = (leg_.xi - n * (2.0 * c)).normalized();
    leg_.t_start = t_hit;
    last_piece_ = hit_piece_;
    plan_leg();
    return std::nullopt;
}

FlowResult advance(const BilliardDomain& domain, const PhasePoint& rho, double t, const ToleranceSet& tol) {
    if (!std::isfinite(t)) throw std::invalid_argument("advance: time must be finite");
    const bool backward = t < 0.0;
    const double T = std::abs(t);
    TrajectoryWalker walker(domain, backward ? reversed(rho) : rho, tol);
    for (;;) {
        const auto leg = walker.current_leg();
        if (leg.t_start + leg.duration >= T) {
            PhasePoint out{leg.x + leg.xi * (T - leg.t_start), leg.xi};
            return backward ? reversed(out) : out;
        }
        if (auto fail = walker.bounce()) {
            if (backward) fail->time_of_failure = -fail->time_of_failure;
            return *fail;
        }
    }
}

CrossingList crossings_with_curve(const BilliardDomain& domain, const CurveSegment& curve, const PhasePoint& rho,
                                  double T, const ToleranceSet& tol) {
    CrossingList out;
    if (!std::isfinite(T)) throw std::invalid_argument("crossings_with_curve: horizon must be finite");
    const bool backward = T < 0.0;
    const double horizon = std::abs(T);
    const double sgn = backward ? -1.0 : 1.0;
    TrajectoryWalker walker(domain, backward ? reversed(rho) : rho, tol);
    for (;;) {
        const auto leg = walker.current_leg();
        const double span = std::min(leg.duration, horizon - leg.t_start);
        for (const auto& hit : curve.intersect_leg(leg.x, leg.xi, 0.0, span)) {
            const Vec2 xi = leg.xi * sgn;
            const double normal_component = dot(xi, curve.normal(hit.s));
            if (std::abs(normal_component) <= tol.glancing) continue;
            out.crossings.push_back({sgn * (leg.t_start + hit.t), hit.s, xi, normal_component > 0.0 ? 1 : -1});
        }
        if (leg.t_start + leg.duration >= horizon) break;
        if (auto fail = walker.bounce()) {
            out.truncated = true;
            fail->time_of_failure *= sgn;
            out.failure = fail;
            break;
        }
    }
    return out;
}

BirkhoffResult birkhoff_average(const BilliardDomain& domain, const PhaseObservable& observable, const PhasePoint& rho,
                                double T, double dt, const ToleranceSet& tol) {
    if (!(T > 0.0) || !(dt > 0.0) || dt > T) {
        throw std::invalid_argument("birkhoff_average: need 0 < dt <= T");
    }
    const auto n = static_cast<std::int64_t>(std::llround(T / dt));
    const double step = T / static_cast<double>(n);
    TrajectoryWalker walker(domain, rho, tol);
    BirkhoffResult result;
    double sum = 0.0;
    std::int64_t taken = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        const double ts = (static_cast<double>(i) + 0.5) * step;
        bool failed = false;
        while (walker.current_leg().t_start + walker.current_leg().duration < ts) {
            if (auto fail = walker.bounce()) {
                result.failure = fail;
                failed = true;
                break;
            }
        }
        if (failed) break;
        const auto leg = walker.current_leg();
        sum += observable(PhasePoint{leg.x + leg.xi * (ts - leg.t_start), leg.xi});
        ++taken;
    }
    result.complete = taken == n;
    result.time_covered = result.complete ? T : result.failure->time_of_failure;
    result.average = taken > 0 ? sum / static_cast<double>(taken) : 0.0;
    return result;
}

void write_trajectory_csv(std::ostream& out, const BilliardDomain& domain, const PhasePoint& rho, double T,
                          const ToleranceSet& tol) {
    out << "t,x,y,xi_x,xi_y\n" << std::setprecision(17);
    out << 0.0 << ',' << rho.x.x << ',' << rho.x.y << ',' << rho.xi.x << ',' << rho.xi.y << '\n';
    TrajectoryWalker walker(domain, rho, tol);
    while (walker.current_leg().t_start + walker.current_leg().duration < T) {
        if (walker.bounce()) break;
        const auto leg = walker.current_leg();
        out << leg.t_start << ',' << leg.x.x << ',' << leg.x.y << ',' << leg.xi.x << ',' << leg.xi.y << '\n';
    }
}

} // namespace qerest
