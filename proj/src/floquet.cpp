#include "phasered/floquet.hpp"

#include <algorithm>
#include <cmath>

namespace phasered {

double periodic_mean(const std::function<double(double)>& f, int n_start,
                     double rel_change, int max_doublings) {
    int n = std::max(n_start, 16);
    double sum = 0.0;
    for (int j = 0; j < n; ++j) sum += f(kTwoPi * (double)j / (double)n);
    double mean = sum / n;
    for (int d = 0; d < max_doublings; ++d) {
        double mid = 0.0;
        for (int j = 0; j < n; ++j) mid += f(kTwoPi * ((double)j + 0.5) / (double)n);
        const double refined = 0.5 * (mean + mid / n);
        const double change = std::abs(refined - mean);
        n *= 2;
        mean = refined;
        if (change <= rel_change * std::max(std::abs(refined), 1e-300)) return mean;
    }
    throw SolverError("periodic_mean: quadrature not converged");
}

double floquet_divergence(const VectorFieldSpec& field, const PeriodicOrbit& orbit) {
    if (field.dimension != 2)
        throw SolverError("floquet_divergence: planar fields only");
    auto f = [&](double theta) {
        const State x = orbit.at_theta(theta);
        return divergence_at(field, x);
    };
    return periodic_mean(f, (int)orbit.sample_count());
}

FloquetData monodromy_poincare(const VectorFieldSpec& field, const PeriodicOrbit& orbit,
                               const State& prc_at_zero, const IntegratorConfig& cfg) {
    if (field.dimension != 2)
        throw SolverError("monodromy_poincare: planar systems only");
    const State& x0 = orbit.anchor();
    const double T = orbit.period();
    const double scale = orbit.state_scale();

    // Isochron direction: unit vector orthogonal to the PRC at the anchor,
    // sign fixed so the first nonzero component is positive.
    const double zn = std::hypot(prc_at_zero[0], prc_at_zero[1]);
    if (!(zn > 0.0)) throw SolverError("monodromy_poincare: zero PRC value");
    State u = {-prc_at_zero[1] / zn, prc_at_zero[0] / zn};
    const double lead = (std::abs(u[0]) > 1e-14) ? u[0] : u[1];
    if (lead < 0.0) {
        u[0] = -u[0];
        u[1] = -u[1];
    }

    // Small multipliers squeeze the return displacement toward the
    // integration noise floor, so the probe integrations run tight.
    IntegratorConfig icfg = cfg;
    icfg.mode = StepMode::Adaptive;
    icfg.rel_tol = std::min(cfg.rel_tol, 1e-13);
    icfg.abs_tol = std::min(cfg.abs_tol, 1e-14);

    auto underflow_result = [&]() {
        FloquetData out;
        out.k = floquet_divergence(field, orbit);
        out.lambda = std::exp(out.k * T);
        out.v = u;
        out.method = FloquetMethod::Divergence;
        out.monodromy_underflow = true;
        return out;
    };

    // Ladder of displacements along the isochron, both signs. The return
    // lands on the section displaced along the flow, so the isochron
    // coordinate of the return is the u-component of the oblique (u, F)
    // decomposition, not a plain projection.
    const State f_anchor = field.eval(x0);
    const double uf_cross = u[0] * f_anchor[1] - u[1] * f_anchor[0];
    if (!(std::abs(uf_cross) > 0.0))
        throw SolverError("monodromy_poincare: isochron direction parallel to the flow");
    std::vector<double> d, s;
    for (int j = 0; j < 4; ++j) {
        const double mag = scale * 1e-8 * std::pow(10.0, j);  // 1e-8 .. 1e-5
        for (double sign : {1.0, -1.0}) {
            State xi = x0;
            xi[0] += sign * mag * u[0];
            xi[1] += sign * mag * u[1];
            EventCrossing ret;
            try {
                // Skip the departure neighborhood so a just-below-section
                // launch does not count as an immediate return; probes that
                // escape or wander (near-homoclinic basins are razor thin)
                // mean the return map cannot be resolved at all.
                ret = first_return(field, x0, xi, icfg, T, 0.5 * T, 3.0 * T);
            } catch (const SolverError&) {
                return underflow_result();
            }
            const double rx = ret.state[0] - x0[0], ry = ret.state[1] - x0[1];
            d.push_back(sign * mag);
            s.push_back((rx * f_anchor[1] - ry * f_anchor[0]) / uf_cross);
        }
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        num += d[i] * s[i];
        den += d[i] * d[i];
    }
    const double lambda_fit = num / den;

    // Residual-based noise level of the slope; a multiplier statistically
    // indistinguishable from zero means the displacements underflowed.
    double ss = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double r = s[i] - lambda_fit * d[i];
        ss += r * r;
    }
    const double sigma_slope = std::sqrt(ss / (double)(d.size() - 1)) / std::sqrt(den);
    if (!(lambda_fit > std::max(10.0 * sigma_slope, 1e-12))) return underflow_result();

    // Nonlinearity guard on the best-resolved rungs: the top-magnitude
    // probes of either sign must agree with the fitted slope.
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (std::abs(d[i]) < 0.05 * scale * 1e-5) continue;
        const double ratio = s[i] / d[i];
        if (std::abs(ratio - lambda_fit) >
            0.25 * std::abs(lambda_fit) + 10.0 * sigma_slope)
            throw SolverError(
                "monodromy_poincare: returns nonmonotone in the displacement ladder; "
                "reduce the probe size");
    }
    if (!(lambda_fit > 0.0 && lambda_fit < 1.0))
        throw SolverError("monodromy_poincare: multiplier outside (0,1)");

    FloquetData out;
    out.lambda = lambda_fit;
    out.k = std::log(lambda_fit) / T;
    out.v = u;
    out.method = FloquetMethod::Monodromy;
    return out;
}

std::pair<double, double> relaxation_exponent_decomposition(const VectorFieldSpec& field,
                                                            const PeriodicOrbit& orbit) {
    if (!field.fast_slow)
        throw SolverError(
            "relaxation_exponent_decomposition: field has no fast-slow declaration");
    const auto& fs = *field.fast_slow;
    auto mean_of = [&](const std::function<double(double, double)>& fn) {
        return periodic_mean(
            [&](double theta) {
                const State x = orbit.at_theta(theta);
                return fn(x[0], x[1]);
            },
            (int)orbit.sample_count());
    };
    const double a = mean_of(fs.f_x);
    const double b = mean_of(fs.g_y);
    if (!(a < 0.0))
        throw SolverError(
            "relaxation_exponent_decomposition: a >= 0, orbit not stable in the "
            "relaxation limit");
    return {a, b};
}

}  // namespace phasered
