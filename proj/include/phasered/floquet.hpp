#pragma once

#include "phasered/orbit.hpp"

namespace phasered {

enum class FloquetMethod { Divergence, Monodromy };

/// Nontrivial Floquet exponent/multiplier of a planar orbit plus the unit
/// isochron-tangent eigenvector at theta = 0.
struct FloquetData {
    double k = 0.0;       // exponent, 1/time
    double lambda = 0.0;  // multiplier e^{kT}
    State v;              // unit eigenvector, sign: first nonzero component > 0
    FloquetMethod method = FloquetMethod::Divergence;
    /// Set when the return-map displacements fell below double-precision
    /// resolution (strongly stable orbits); k then comes from the
    /// divergence quadrature and lambda = e^{kT}.
    bool monodromy_underflow = false;
};

/// Mean of a 2*pi-periodic function by the periodic trapezoid rule with
/// grid doubling until the value moves by less than rel_change.
/// Throws SolverError when doubling does not settle.
double periodic_mean(const std::function<double(double)>& f, int n_start,
                     double rel_change = 1e-6, int max_doublings = 14);

/// k = (1/T) * integral of div F over one period (planar orbits).
double floquet_divergence(const VectorFieldSpec& field, const PeriodicOrbit& orbit);

/// Linearized return map restricted to the isochron: launch a ladder of
/// displacements along the direction orthogonal to the PRC at theta = 0,
/// record first returns, and fit the contraction slope.
FloquetData monodromy_poincare(const VectorFieldSpec& field, const PeriodicOrbit& orbit,
                               const State& prc_at_zero, const IntegratorConfig& cfg);

/// Period means (a, b) of f_x and g_y for a declared fast-slow field, so
/// that k = a/mu + b. Throws SolverError when a >= 0 (no stable orbit in
/// the relaxation limit).
std::pair<double, double> relaxation_exponent_decomposition(const VectorFieldSpec& field,
                                                            const PeriodicOrbit& orbit);

}  // namespace phasered
