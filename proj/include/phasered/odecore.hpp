#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phasered/common.hpp"

namespace phasered {

/// Right-hand side of an autonomous ODE dx/dt = F(x) together with the
/// optional analytic Jacobian / divergence and named parameters.
struct VectorFieldSpec {
    int dimension = 0;
    /// F(x): writes dx/dt into `out` (both of size `dimension`).
    std::function<void(std::span<const double>, std::span<double>)> rhs;
    /// F(x) in extended precision; optional. Near-homoclinic orbits need it:
    /// the reinjection distance at mu ~ 1e-13 sits below the double-precision
    /// roundoff amplified along the loop.
    std::function<void(std::span<const long double>, std::span<long double>)> rhs_ld;
    /// DF(x): writes the n*n Jacobian (row-major) into `out`; may be empty.
    std::function<void(std::span<const double>, std::span<double>)> jacobian;
    /// div F(x); may be empty.
    std::function<double(std::span<const double>)> divergence;
    std::map<std::string, double> params;

    /// Fast-slow declaration mu*x' = f(x,y), y' = g(x,y) for relaxation
    /// oscillators; absent for general fields.
    struct FastSlowForm {
        double mu = 0.0;
        std::function<double(double, double)> f, g;
        std::function<double(double, double)> f_x, f_y, g_x, g_y;
    };
    std::optional<FastSlowForm> fast_slow;

    State eval(std::span<const double> x) const {
        State out(dimension);
        rhs(x, out);
        return out;
    }
};

enum class StepMode { FixedStep, Adaptive };

struct IntegratorConfig {
    StepMode mode = StepMode::Adaptive;
    double step = 1e-3;      // fixed mode only
    double rel_tol = 1e-10;  // adaptive mode
    double abs_tol = 1e-12;
    double max_step = 0.0;   // 0 = unbounded
    long max_steps = 50'000'000;
    /// Run the adaptive core in long double arithmetic (uses the field's
    /// rhs_ld when available). Stored trajectories stay double.
    bool extended = false;

    void validate() const;
};

/// One accepted integrator step with the data needed for dense output.
/// Adaptive mode stores the seven Dormand-Prince stages; fixed mode stores
/// the end-point derivatives for cubic Hermite interpolation.
struct StepRecord {
    double t0 = 0.0, h = 0.0;
    std::vector<State> stages;  // adaptive: k1..k7; fixed: {f0, f1}
};

/// Time-ordered solution samples plus per-step interpolation coefficients.
/// Times are strictly increasing; backward solves are handled by callers
/// through a time-reversal substitution.
class Trajectory {
  public:
    Trajectory() = default;
    Trajectory(StepMode mode, int dim) : mode_(mode), dim_(dim) {}

    int dimension() const { return dim_; }
    std::size_t size() const { return times_.size(); }
    double time(std::size_t i) const { return times_[i]; }
    const State& state(std::size_t i) const { return states_[i]; }
    double t_begin() const { return times_.front(); }
    double t_end() const { return times_.back(); }
    const State& back() const { return states_.back(); }
    const std::vector<double>& times() const { return times_; }

    /// Dense evaluation at any t inside [t_begin, t_end].
    State eval(double t) const;
    void eval(double t, std::span<double> out) const;

    void push_initial(double t, const State& y);
    void push_step(StepRecord rec, double t1, const State& y1);

  private:
    std::size_t locate_step(double t) const;

    StepMode mode_ = StepMode::Adaptive;
    int dim_ = 0;
    std::vector<double> times_;
    std::vector<State> states_;
    std::vector<StepRecord> steps_;
};

/// Nonautonomous right-hand side used by library internals (adjoint
/// equations along an orbit are time dependent).
using TimeRhs = std::function<void(double, std::span<const double>, std::span<double>)>;

/// Integrate dx/dt = F(x) over [t0, t1], t1 > t0.
Trajectory integrate(const VectorFieldSpec& field, const State& x0,
                     double t0, double t1, const IntegratorConfig& cfg);

/// Same machinery for an explicitly time-dependent rhs.
Trajectory integrate_rhs(const TimeRhs& rhs, int dim, const State& x0,
                         double t0, double t1, const IntegratorConfig& cfg);

enum class CrossingDirection { Any, Rising, Falling };

struct EventCrossing {
    double time = 0.0;
    State state;
};

/// First zero crossing of event(state) strictly inside the trajectory,
/// refined on the dense output to |event| < 1e-12 * (state scale).
/// Throws SolverError when no sign change of the requested direction exists.
EventCrossing locate_event(const Trajectory& traj,
                           const std::function<double(std::span<const double>)>& event,
                           CrossingDirection dir = CrossingDirection::Any);

/// All crossings of the event over the trajectory, in time order.
std::vector<EventCrossing> locate_all_events(
    const Trajectory& traj,
    const std::function<double(std::span<const double>)>& event,
    CrossingDirection dir = CrossingDirection::Any);

/// Central-difference Jacobian with per-coordinate step 1e-6*max(1,|x_i|).
/// Row-major n*n result.
std::vector<double> jacobian_fd(const VectorFieldSpec& field, const State& x);

/// Jacobian at x: analytic callback when present, finite differences
/// otherwise (row-major).
std::vector<double> jacobian_at(const VectorFieldSpec& field, std::span<const double> x);

/// Divergence at x: analytic callback when present, trace of the Jacobian
/// otherwise.
double divergence_at(const VectorFieldSpec& field, std::span<const double> x);

}  // namespace phasered
