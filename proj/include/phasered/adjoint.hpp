#pragma once

#include "phasered/floquet.hpp"
#include "phasered/orbit.hpp"

namespace phasered {

enum class CurveKind { PRC, IRC };

enum class IrcNormalization {
    EigenvectorUnit,  // I(0) . v = 1
    MaxAbs,           // max |component| = 1 (spike-like relaxation IRCs)
};

/// Phase-indexed response curve on an equispaced theta grid (N+1 rows,
/// theta = 0 .. 2*pi inclusive; the last row is the integrated end of the
/// period, so |row N - row 0| is the periodicity closure).
enum class AdjointMethod {
    BackwardIteration,   // PRC default
    PeriodMapEigen,      // IRC default
    PlanarQuadrature,    // stable fallback for extreme contraction
};

struct ResponseCurve {
    CurveKind kind = CurveKind::PRC;
    int grid_n = 0;
    std::vector<double> thetas;
    std::vector<State> values;
    AdjointMethod method = AdjointMethod::BackwardIteration;

    // normalization record
    double omega = 0.0;  // PRC: Z(0) . F(gamma(0)) = omega
    State v;             // IRC: normalization vector
    IrcNormalization normalization = IrcNormalization::EigenvectorUnit;
    double k = 0.0;      // IRC: exponent of the solved system

    double curve_scale = 0.0;        // max |component| over the grid
    double closure_residual = 0.0;   // sup |value(2pi) - value(0)|
    /// PRC: per-period sup-norm contraction factors of the backward solve
    /// (the transient decays at the nontrivial multiplier rate).
    std::vector<double> contraction_factors;

    /// Piecewise-linear evaluation (exact on grid points).
    State at(double theta) const;
};

struct PrcOptions {
    int grid_n = 1000;
    double period_diff_tol = 1e-9;  // relative sup-norm change between periods
    int max_periods = 100;
};

/// PRC by backward integration of the adjoint equation until periodic,
/// rescaled once so Z(0) . F(gamma(0)) = omega.
ResponseCurve compute_prc(const VectorFieldSpec& field, const PeriodicOrbit& orbit,
                          const IntegratorConfig& cfg, const PrcOptions& opts = {});

struct IrcOptions {
    int grid_n = 1000;
    double defect_tol = 1e-6;  // |eig - 1| requirement on the period map
    IrcNormalization normalization = IrcNormalization::EigenvectorUnit;
    int max_refinements = 6;
};

/// IRC as the periodic solution of dw/dt = (k I - DF^T) w: eigenvector of
/// the period map with eigenvalue nearest 1 (power-polished; k receives a
/// log(m)/T correction when the measured multiplier m is off 1, bounded by
/// a consistency guard). Scaled so I(0) . v = 1, or by max-abs for
/// spike-like curves.
ResponseCurve compute_irc(const VectorFieldSpec& field, const PeriodicOrbit& orbit,
                          double k, const State& v, const IntegratorConfig& cfg,
                          const IrcOptions& opts = {});

/// Brute-force asymptotic phase shift of the perturbation delta applied at
/// phase theta: integrate perturbed and unperturbed trajectories for at
/// least 20/|k| time units and compare section-crossing times.
double phase_shift_oracle(const VectorFieldSpec& field, const PeriodicOrbit& orbit,
                          double theta, const State& delta, double k,
                          const IntegratorConfig& cfg);

/// Brute-force isostable shift: evaluate psi at gamma(theta) + delta from
/// its first return to the anchor isochron, minus the same functional at
/// gamma(theta). Throws OracleUnavailable when the multiplier underflowed.
double isostable_shift_oracle(const VectorFieldSpec& field, const PeriodicOrbit& orbit,
                              const FloquetData& floq, double theta, const State& delta,
                              const IntegratorConfig& cfg);

}  // namespace phasered
