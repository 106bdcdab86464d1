#pragma once

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "phasered/odecore.hpp"

namespace phasered {

enum class ModelId {
    LambdaOmega,
    HopfNF,
    BautinNF,
    Sniper,
    HomoclinicSandstede,
    VanDerPol,
};

std::string model_name(ModelId id);
ModelId model_from_name(const std::string& name);

/// Radial/angular callbacks for the lambda-omega family
/// r' = G(r), phi' = H(r). Defaults reproduce the Hopf normal form with
/// a = 1, b = 1, c = -1, d = 0.
struct LambdaOmegaFuncs {
    std::function<double(double)> G = [](double r) { return r - r * r * r; };
    std::function<double(double)> dG = [](double r) { return 1.0 - 3.0 * r * r; };
    std::function<double(double)> H = [](double) { return 1.0; };
    std::function<double(double)> dH = [](double) { return 0.0; };
    double r_po = 1.0;  // radius of the stable periodic orbit
};

/// Documented defaults: Hopf a=1,b=1,c=-1,d=0; Bautin a=-0.5,b=1,c=2,d=0,
/// f=-1,g=0; SNIPER rho=1,eta=sqrt(2); Sandstede mu=1e-13,a=-1,b=2;
/// van der Pol mu=0.1.
std::map<std::string, double> model_default_params(ModelId id);

/// Runnable Cartesian vector field with analytic Jacobian and divergence.
/// Throws ConfigError when the parameters violate the model's stability
/// preconditions.
VectorFieldSpec model_field(ModelId id, std::map<std::string, double> params = {},
                            const LambdaOmegaFuncs& lw = {});

/// Integrator settings that resolve the model at the given parameters
/// (tight tolerances for the near-homoclinic model, step cap ~mu/10 for
/// stiff van der Pol).
IntegratorConfig model_default_integrator(ModelId id,
                                          const std::map<std::string, double>& params);

/// A state in the basin of the stable orbit, used to seed the shooting.
State model_default_guess(ModelId id, const std::map<std::string, double>& params);

enum class ReductionValidity { FullPhase, BoxOnly, SpikeOnly };

/// Closed-form phase/isostable response curves for one catalog entry.
struct AnalyticReduction {
    ReductionValidity validity = ReductionValidity::FullPhase;
    std::function<std::array<double, 2>(double)> prc;
    std::function<std::array<double, 2>(double)> irc;
    double k = 0.0;  // -inf for the relaxation row
    /// Spike representation for the relaxation row: (theta_i, weight).
    std::vector<std::pair<double, double>> spikes;
    /// Angular frequency implied by the model parameters.
    double omega = 0.0;
};

/// Free amplitudes of the box-only homoclinic row (the dynamics outside
/// the box are not modeled, so they stay inputs).
struct HomoclinicAmplitudes {
    double irc_x0 = 1.0;
    double prc_x0 = 1.0;
    double prc_y0 = 0.0;
};

AnalyticReduction analytic_reduction(ModelId id,
                                     std::map<std::string, double> params = {},
                                     const LambdaOmegaFuncs& lw = {},
                                     const HomoclinicAmplitudes& amp = {});

/// k = lambda_s + lambda_u for an orbit hugging a planar saddle.
/// Requires lambda_u > 0 > lambda_s and |lambda_s| > lambda_u; when the
/// margin |lambda_s| - lambda_u is below 1e-3*lambda_u the optional flag
/// reports a weakly stable regime (still a valid value).
double homoclinic_analytic_k(double lambda_s, double lambda_u,
                             bool* weakly_stable = nullptr);

/// Time to traverse the saddle box from entry distance eps to exit at
/// Delta: log(Delta/eps)/lambda_u.
double box_transit_time(double delta, double eps, double lambda_u);

}  // namespace phasered
