#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

#include "qerest/geometry.hpp"

namespace qerest {

/// Point of the unit cosphere bundle S*M: position and unit direction.
struct PhasePoint {
    Vec2 x;
    Vec2 xi;
};

struct ToleranceSet {
    double glancing = 1e-8;      ///< |<xi, n>| at impact below this is glancing
    double corner = 1e-10;       ///< impact this close to a corner is a corner hit
    double position_rel = 1e-6;  ///< position matching on N, relative to length(N)
    double direction = 1e-6;     ///< direction matching (Euclidean distance of unit vectors)
    double time = 1e-9;          ///< crossing pairing by time
    std::uint64_t bounce_cap = 10'000'000;
};

enum class UndefinedReason { corner, glancing };

struct Undefined {
    UndefinedReason reason;
    double time_of_failure;
};

/// Either the flowed point or the reason the broken flow stops being defined.
using FlowResult = std::variant<PhasePoint, Undefined>;

/// Event-by-event walker over a broken billiard trajectory. Runs forward in time only;
/// callers reverse the direction for negative times.
class TrajectoryWalker {
public:
    TrajectoryWalker(const BilliardDomain& domain, PhasePoint start, const ToleranceSet& tol);

    struct Leg {
        Vec2 x;            ///< start of the straight leg
        Vec2 xi;           ///< direction along the leg
        double t_start;    ///< time at x
        double duration;   ///< time until the next boundary impact
    };

    /// The straight leg from the current state to the next boundary impact.
    Leg current_leg() const { return leg_; }

    /// Move to the impact at the end of the current leg and reflect. Returns the failure if
    /// the impact is at a corner or glancing; the walker is then stuck.
    std::optional<Undefined> bounce();

    std::uint64_t bounces() const { return bounces_; }
    const BilliardDomain& domain() const { return domain_; }

private:
    void plan_leg();

    const BilliardDomain& domain_;
    ToleranceSet tol_;
    Leg leg_{};
    int hit_piece_ = -1;
    int last_piece_ = -1;
    std::uint64_t bounces_ = 0;
};

/// Flow by time t (negative t runs the reversed flow). Throws ResourceError on the bounce cap.
FlowResult advance(const BilliardDomain& domain, const PhasePoint& rho, double t, const ToleranceSet& tol = {});

struct CurveCrossing {
    double t;        ///< crossing time (negative for the backward flow)
    double s;        ///< arclength of the crossing point on N
    Vec2 xi;         ///< direction of the forward flow at the crossing
    int sign;        ///< sign of <xi, nu(s)>
};

struct CrossingList {
    std::vector<CurveCrossing> crossings;
    bool truncated = false;                 ///< flow became undefined before |T|
    std::optional<Undefined> failure;
};

/// Transversal crossings of the broken trajectory with N for t in (0, T] (or [T, 0) when T < 0),
/// sorted by |t|. Crossings with |<xi, nu>| <= tol.glancing are dropped.
CrossingList crossings_with_curve(const BilliardDomain& domain, const CurveSegment& curve, const PhasePoint& rho,
                                  double T, const ToleranceSet& tol = {});

struct BirkhoffResult {
    double average = 0.0;
    double time_covered = 0.0;   ///< equals T unless the flow became undefined
    bool complete = true;
    std::optional<Undefined> failure;
};

using PhaseObservable = std::function<double(const PhasePoint&)>;

/// (1/T) * integral_0^T f(phi_t(rho)) dt by midpoint sampling with step dt.
/// On an undefined flow the partial average over the covered time is returned with complete = false.
BirkhoffResult birkhoff_average(const BilliardDomain& domain, const PhaseObservable& observable, const PhasePoint& rho,
                                double T, double dt, const ToleranceSet& tol = {});

/// CSV dump of impacts: t,x,y,xi_x,xi_y per event (the initial state first).
void write_trajectory_csv(std::ostream& out, const BilliardDomain& domain, const PhasePoint& rho, double T,
                          const ToleranceSet& tol = {});

} // namespace qerest
