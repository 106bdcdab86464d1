#pragma once

#include <vector>

#include "phasered/adjoint.hpp"
#include "phasered/models.hpp"
#include "phasered/orbit.hpp"

namespace phasered {

/// Homoclinic box study: residence fractions and in-box exponential fits
/// of the IRC components against the saddle eigenvalues.
struct BoxFitReport {
    double delta = 0.0;
    /// Fraction of the period between box entry (y = Delta falling) and the
    /// next y = Delta rising crossing: the time spent below the box's top
    /// edge.
    double fraction = 0.0;
    /// Fraction with both coordinates inside [0, Delta] (the trajectory
    /// leaves through the x = Delta side first).
    double fraction_strict = 0.0;
    double t_exit_x = 0.0, t_exit_y = 0.0;
    double irc_y_rate = 0.0;  // 1/time, fitted on log|I_y|
    double irc_x_rate = 0.0;  // 1/time, fitted on the decreasing stretch of |I_x|
    double lambda_u_target = 0.0, lambda_s_target = 0.0;
    double y_rate_rel_err = 0.0, x_rate_rel_err = 0.0;
};

/// Requires the orbit anchored at the box entry (y = Delta falling crossing
/// with x in [0, Delta]). Throws SolverError when the box is never entered.
BoxFitReport homoclinic_box_analysis(const VectorFieldSpec& field,
                                     const PeriodicOrbit& orbit,
                                     const ResponseCurve& irc, double delta,
                                     double lambda_s, double lambda_u);

struct SpikeCrossing {
    double theta = 0.0;
    bool rising = false;  // rising crossings carry the IRC spikes
};

struct SpikeMuRecord {
    double mu = 0.0;
    double period = 0.0;
    double k = 0.0;
    double a = 0.0, b = 0.0;  // period means of f_x and g_y
    std::vector<SpikeCrossing> crossings;
    std::vector<double> spike_thetas;  // rising crossings only
    double mass_fraction = 0.0;        // windowed L1 mass of |I_x|+|I_y|
    ResponseCurve irc;                 // max-abs normalized curve for this mu
};

struct SpikeReport {
    double window = 0.3;  // rad
    std::vector<SpikeMuRecord> records;
};

/// Van der Pol relaxation sweep: per mu, locate the zeros of f_x - a on
/// the orbit (anchored at the maximum-x point) and measure how much of the
/// normalized IRC mass sits inside windows around them.
SpikeReport relaxation_spike_analysis(const std::vector<double>& mu_values,
                                      double window = 0.3, int grid_n = 2000);

/// Numerical-vs-analytic comparison for a full-phase catalog entry, aligned
/// by the common phase shift (and an isostable sign factor) minimizing the
/// sup-norm mismatch.
struct CatalogReport {
    ModelId model = ModelId::HopfNF;
    double shift = 0.0;
    double irc_sign = 1.0;
    double prc_sup_rel_err = 0.0;
    double irc_sup_rel_err = 0.0;
    double k_numeric = 0.0;
    double k_analytic = 0.0;
    double k_rel_err = 0.0;
    double k_monodromy = 0.0;
    bool monodromy_underflow = false;
    double period = 0.0;
};

CatalogReport catalog_crossvalidation(ModelId id,
                                      std::map<std::string, double> params = {},
                                      const LambdaOmegaFuncs& lw = {}, int grid_n = 1000);

}  // namespace phasered
