#pragma once

#include <vector>

#include "phasered/adjoint.hpp"
#include "phasered/orbit.hpp"

namespace phasered {

struct ReducedState {
    double theta = 0.0;  // wrapped to [0, 2*pi)
    double psi = 0.0;
};

/// External input: either a piecewise-constant sample train or a list of
/// impulsive kicks (time, state increment).
class ControlSignal {
  public:
    enum class Kind { Zero, PiecewiseConstant, Impulses };

    ControlSignal() = default;
    static ControlSignal zero(int dim);
    static ControlSignal piecewise_constant(std::vector<double> times,
                                            std::vector<State> values);
    static ControlSignal impulses(std::vector<double> times, std::vector<State> kicks);

    Kind kind() const { return kind_; }
    int dimension() const { return dim_; }
    std::size_t size() const { return times_.size(); }
    double time(std::size_t i) const { return times_[i]; }
    const State& value(std::size_t i) const { return values_[i]; }

    /// Piecewise-constant evaluation (zero before the first sample, last
    /// value held afterwards). Zero for impulse signals.
    State eval(double t) const;

  private:
    Kind kind_ = Kind::Zero;
    int dim_ = 0;
    std::vector<double> times_;
    std::vector<State> values_;
};

/// (theta, psi) trajectory samples; theta is stored unwrapped internally
/// and wrapped on access.
struct ReducedTrajectory {
    std::vector<double> times;
    std::vector<double> theta_unwrapped;
    std::vector<double> psi;

    ReducedState at_index(std::size_t i) const {
        return {wrap_angle(theta_unwrapped[i]), psi[i]};
    }
    ReducedState back() const { return at_index(times.size() - 1); }
};

/// Integrate the augmented phase reduction
///   theta' = omega + Z(theta) . u(t),  psi' = k psi + I(theta) . u(t)
/// with response curves interpolated by periodic cubic splines; impulses
/// act as jumps dtheta = Z(theta).delta, dpsi = I(theta).delta.
ReducedTrajectory simulate_reduced(const ResponseCurve& Z, const ResponseCurve& I,
                                   double k, double omega, const ControlSignal& u,
                                   ReducedState init, double t0, double t1,
                                   const IntegratorConfig& cfg);

/// Full-model trajectory split at input discontinuities; impulses are
/// state jumps x -> x + delta.
struct PiecewiseTrajectory {
    std::vector<Trajectory> segments;

    State eval(double t) const;
    const State& back() const { return segments.back().back(); }
    double t_end() const { return segments.back().t_end(); }
};

PiecewiseTrajectory simulate_full_perturbed(const VectorFieldSpec& field,
                                            const ControlSignal& u, const State& x0,
                                            double t0, double t1,
                                            const IntegratorConfig& cfg);

/// Reduced-vs-full first-order error sweep: the base impulse is rescaled
/// to each magnitude, the reduced jump Z(theta).delta / I(theta).delta is
/// compared against the brute-force oracles.
struct ReductionErrorRow {
    double magnitude = 0.0;
    double dtheta_reduced = 0.0, dtheta_measured = 0.0;
    double dpsi_reduced = 0.0, dpsi_measured = 0.0;
    bool psi_available = true;
};

struct ReductionErrorReport {
    std::vector<ReductionErrorRow> rows;
    double max_theta_error = 0.0;
    double max_psi_error = 0.0;
    /// log-log slope of the phase error vs magnitude (first-order
    /// reduction makes it superlinear, ~2).
    double theta_error_exponent = 0.0;
};

ReductionErrorReport compare_reductions(const VectorFieldSpec& field,
                                        const PeriodicOrbit& orbit,
                                        const ResponseCurve& Z, const ResponseCurve& I,
                                        const FloquetData& floq, const ControlSignal& u,
                                        const std::vector<double>& magnitudes,
                                        const IntegratorConfig& cfg);

}  // namespace phasered
