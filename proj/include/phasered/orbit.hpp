#pragma once

#include <functional>
#include <vector>

#include "phasered/odecore.hpp"

namespace phasered {

/// A located stable periodic orbit: anchor state at theta = 0, exact-by-
/// construction omega = 2*pi/T, a dense one-period trajectory from the
/// anchor, and N phase-equispaced samples.
class PeriodicOrbit {
  public:
    PeriodicOrbit() = default;
    PeriodicOrbit(Trajectory cycle, double period, int n_samples);

    int dimension() const { return cycle_.dimension(); }
    const State& anchor() const { return cycle_.state(0); }
    double period() const { return period_; }
    double omega() const { return omega_; }
    double closure_residual() const { return closure_; }

    /// Dense state at phase theta (wrapped into [0, 2*pi)).
    State at_theta(double theta) const;
    /// Dense state at time t from the anchor (wrapped modulo T).
    State at_time(double t) const;

    std::size_t sample_count() const { return samples_.size(); }
    double sample_theta(std::size_t j) const { return kTwoPi * (double)j / (double)samples_.size(); }
    const State& sample_state(std::size_t j) const { return samples_[j]; }

    const Trajectory& cycle() const { return cycle_; }

    /// max |state| over the stored samples; used for tolerance scales.
    double state_scale() const { return scale_; }

  private:
    Trajectory cycle_;
    double period_ = 0.0;
    double omega_ = 0.0;
    double closure_ = 0.0;
    double scale_ = 1.0;
    std::vector<State> samples_;
};

struct OrbitOptions {
    double closure_tol = 1e-10;  // |P(x)-x| target (1e-6 for near-homoclinic runs)
    int relax_returns = 50;
    int newton_max_iters = 50;
    int n_samples = 1000;  // 4000 recommended for near-homoclinic runs
};

/// Locate the stable limit cycle from a guess in its basin: relax by
/// iterating returns to a transversal section, then Newton on the return
/// map of the section through the relaxed point (normal F there).
/// Throws SolverError when no returns are detected or Newton stagnates.
PeriodicOrbit find_periodic_orbit(const VectorFieldSpec& field, const State& guess,
                                  const IntegratorConfig& cfg,
                                  const OrbitOptions& opts = {});

/// Re-base theta = 0 to a crossing of `anchor_event` on the orbit; the
/// period is untouched. `accept` (optional) filters candidate crossings
/// by state. Throws SolverError when the event has no crossing.
PeriodicOrbit set_phase_anchor(
    const VectorFieldSpec& field, const PeriodicOrbit& orbit,
    const std::function<double(std::span<const double>)>& anchor_event,
    const IntegratorConfig& cfg, CrossingDirection dir = CrossingDirection::Any,
    const std::function<bool(std::span<const double>)>& accept = nullptr,
    int n_samples = 0 /* 0: keep the orbit's sample count */);

/// N phase-equispaced (theta_j, state) pairs, theta_j = 2*pi*j/N; N >= 8.
std::vector<std::pair<double, State>> sample_orbit(const PeriodicOrbit& orbit, int n);

/// First rising return to the hyperplane through `base` with normal
/// F(base), integrating forward from `from`. `period_hint` sizes the
/// integration chunks; crossings earlier than `min_time` are ignored.
EventCrossing first_return(const VectorFieldSpec& field, const State& base,
                           const State& from, const IntegratorConfig& cfg,
                           double period_hint, double min_time = 0.0,
                           double max_time = 1e7);

/// Same with an explicit (unit) section normal.
EventCrossing first_section_crossing(const VectorFieldSpec& field, const State& base,
                                     const State& normal, const State& from,
                                     const IntegratorConfig& cfg, double period_hint,
                                     double min_time = 0.0, double max_time = 1e7);

}  // namespace phasered
