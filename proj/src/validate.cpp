#include "phasered/validate.hpp"

#include <algorithm>
#include <cmath>

#include "phasered/floquet.hpp"

namespace phasered {

namespace {

/// Least-squares slope of log|values[comp]| against time over grid indices
/// [j0, j1] (skipping exact zeros).
double log_slope(const ResponseCurve& curve, int comp, int j0, int j1, double omega) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (int j = j0; j <= j1; ++j) {
        const double val = std::abs(curve.values[j][comp]);
        if (!(val > 0.0)) continue;
        const double t = curve.thetas[j] / omega;
        const double L = std::log(val);
        sx += t;
        sy += L;
        sxx += t * t;
        sxy += t * L;
        ++m;
    }
    if (m < 4) throw SolverError("box fit: too few usable samples");
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace

BoxFitReport homoclinic_box_analysis(const VectorFieldSpec& field,
                                     const PeriodicOrbit& orbit,
                                     const ResponseCurve& irc, double delta,
                                     double lambda_s, double lambda_u) {
    const double T = orbit.period();
    const double omega = orbit.omega();
    const State& anchor = orbit.anchor();
    if (std::abs(anchor[1] - delta) > 1e-6 * std::max(1.0, delta) || anchor[0] < 0.0 ||
        anchor[0] > delta)
        throw SolverError(
            "homoclinic_box_analysis: orbit must be anchored at the box entry "
            "(y = Delta falling, x in [0, Delta])");

    BoxFitReport rep;
    rep.delta = delta;
    rep.lambda_s_target = lambda_s;
    rep.lambda_u_target = lambda_u;

    // Exit through the x = Delta side (strict two-coordinate membership ends
    // here) and the later y = Delta rising crossing (residence below the
    // box's top edge; the trajectory lingers at x > Delta while y catches up).
    EventCrossing ex = locate_event(
        orbit.cycle(), [delta](std::span<const double> x) { return x[0] - delta; },
        CrossingDirection::Rising);
    EventCrossing ey = locate_event(
        orbit.cycle(), [delta](std::span<const double> x) { return x[1] - delta; },
        CrossingDirection::Rising);
    rep.t_exit_x = ex.time;
    rep.t_exit_y = ey.time;
    rep.fraction_strict = ex.time / T;
    rep.fraction = ey.time / T;
    if (!(ex.time > 0.0) || !(ey.time > ex.time))
        throw SolverError("homoclinic_box_analysis: box never entered (Delta too small?)");

    // In-box fits exclude the first and last 2% of the in-box phase range.
    const int N = irc.grid_n;
    const int j_exit = std::min(N, (int)std::floor(ex.time / T * N));
    const int j0 = std::max(1, (int)std::llround(0.02 * j_exit));
    const int j1 = std::min(j_exit - 1, (int)std::llround(0.98 * j_exit));
    if (j1 - j0 < 8) throw SolverError("homoclinic_box_analysis: box window too small");

    rep.irc_y_rate = log_slope(irc, 1, j0, j1, omega);

    // |I_x| decays at the stable rate only until nonlinear coupling to the
    // growing component takes over; fit its decreasing stretch.
    int jmin = j0;
    for (int j = j0; j <= j1; ++j)
        if (std::abs(irc.values[j][0]) < std::abs(irc.values[jmin][0])) jmin = j;
    const int jx1 = std::max(j0 + 8, (int)std::llround(0.98 * jmin));
    rep.irc_x_rate = log_slope(irc, 0, j0, std::min(jx1, j1), omega);

    rep.y_rate_rel_err = std::abs(rep.irc_y_rate - lambda_u) / std::abs(lambda_u);
    rep.x_rate_rel_err = std::abs(rep.irc_x_rate - lambda_s) / std::abs(lambda_s);
    return rep;
}

SpikeReport relaxation_spike_analysis(const std::vector<double>& mu_values,
                                      double window, int grid_n) {
    SpikeReport rep;
    rep.window = window;
    for (double mu : mu_values) {
        const std::map<std::string, double> params{{"mu", mu}};
        auto field = model_field(ModelId::VanDerPol, params);
        auto cfg = model_default_integrator(ModelId::VanDerPol, params);
        auto orbit0 =
            find_periodic_orbit(field, model_default_guess(ModelId::VanDerPol, params), cfg);
        // Anchor at the orbit's maximum-x point (F_x falling through zero).
        auto orbit = set_phase_anchor(
            field, orbit0,
            [&field](std::span<const double> x) {
                State f(2);
                field.rhs(x, f);
                return f[0];
            },
            cfg, CrossingDirection::Falling, nullptr, grid_n);

        SpikeMuRecord rec;
        rec.mu = mu;
        rec.period = orbit.period();
        rec.k = floquet_divergence(field, orbit);
        auto [a, b] = relaxation_exponent_decomposition(field, orbit);
        rec.a = a;
        rec.b = b;

        // Zeros of f_x - a on the orbit, refined by bisection on the dense
        // orbit evaluator.
        const auto& fs = *field.fast_slow;
        auto fxa = [&](double theta) {
            const State s = orbit.at_theta(theta);
            return fs.f_x(s[0], s[1]) - a;
        };
        const int M = 4096;
        double prev = fxa(0.0);
        for (int j = 1; j <= M; ++j) {
            const double th = kTwoPi * (double)j / (double)M;
            const double cur = fxa(th);
            if (prev == 0.0 || prev * cur < 0.0) {
                double lo = kTwoPi * (double)(j - 1) / (double)M, hi = th;
                double flo = prev;
                for (int it = 0; it < 100; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double fm = fxa(mid);
                    if ((fm < 0.0) == (flo < 0.0)) {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                SpikeCrossing c;
                c.theta = 0.5 * (lo + hi);
                c.rising = cur > prev;
                rec.crossings.push_back(c);
                if (c.rising) rec.spike_thetas.push_back(c.theta);
            }
            prev = cur;
        }

        // Windowed L1 mass of the max-abs normalized IRC around every
        // crossing (the falling-side windows sit in exponentially small
        // valleys and contribute nothing).
        PrcOptions popts;
        popts.grid_n = grid_n;
        auto Z = compute_prc(field, orbit, cfg, popts);
        auto fl = monodromy_poincare(field, orbit, Z.values[0], cfg);
        IrcOptions iopts;
        iopts.grid_n = grid_n;
        iopts.normalization = IrcNormalization::MaxAbs;
        auto irc = compute_irc(field, orbit, rec.k, fl.v, cfg, iopts);

        double total = 0.0, inside = 0.0;
        for (int j = 0; j < irc.grid_n; ++j) {
            const double m = std::abs(irc.values[j][0]) + std::abs(irc.values[j][1]);
            total += m;
            bool inwin = false;
            for (const auto& c : rec.crossings) {
                if (std::abs(std::remainder(irc.thetas[j] - c.theta, kTwoPi)) <=
                    0.5 * window) {
                    inwin = true;
                    break;
                }
            }
            if (inwin) inside += m;
        }
        rec.mass_fraction = (total > 0.0) ? inside / total : 0.0;
        rec.irc = std::move(irc);
        rep.records.push_back(std::move(rec));
    }
    return rep;
}

namespace {

double curve_sup_err(const ResponseCurve& num,
                     const std::function<std::array<double, 2>(double)>& ana,
                     double shift, double sign, double ana_scale) {
    double err = 0.0;
    for (int j = 0; j < num.grid_n; ++j) {
        const auto a = ana(num.thetas[j] - shift);
        err = std::max(err, std::abs(num.values[j][0] - sign * a[0]));
        err = std::max(err, std::abs(num.values[j][1] - sign * a[1]));
    }
    return err / ana_scale;
}

}  // namespace

CatalogReport catalog_crossvalidation(ModelId id, std::map<std::string, double> params,
                                      const LambdaOmegaFuncs& lw, int grid_n) {
    auto field = model_field(id, params, lw);
    auto cfg = model_default_integrator(id, field.params);
    auto red = analytic_reduction(id, params, lw);
    if (red.validity != ReductionValidity::FullPhase)
        throw ConfigError("catalog_crossvalidation: full-phase catalog entries only");

    auto orbit0 = find_periodic_orbit(field, model_default_guess(id, field.params), cfg);
    // theta = 0 at the positive-x crossing.
    auto orbit = set_phase_anchor(
        field, orbit0, [](std::span<const double> x) { return x[1]; }, cfg,
        CrossingDirection::Any, [](std::span<const double> x) { return x[0] > 0.0; },
        grid_n);

    PrcOptions popts;
    popts.grid_n = grid_n;
    auto Z = compute_prc(field, orbit, cfg, popts);
    const double k_div = floquet_divergence(field, orbit);
    auto fl = monodromy_poincare(field, orbit, Z.values[0], cfg);
    IrcOptions iopts;
    iopts.grid_n = grid_n;
    auto I = compute_irc(field, orbit, k_div, fl.v, cfg, iopts);

    double zscale = 0.0, iscale = 0.0;
    for (int j = 0; j < grid_n; ++j) {
        const double th = kTwoPi * (double)j / (double)grid_n;
        const auto za = red.prc(th);
        const auto ia = red.irc(th);
        zscale = std::max({zscale, std::abs(za[0]), std::abs(za[1])});
        iscale = std::max({iscale, std::abs(ia[0]), std::abs(ia[1])});
    }

    // Common-shift alignment with an isostable sign factor: the computed
    // IRC follows the first-positive eigenvector convention, which for the
    // polar rows is the negative of the catalog's implicit choice; both
    // signs of psi are equally valid coordinates.
    auto objective = [&](double s, double sign) {
        return std::max(curve_sup_err(Z, red.prc, s, 1.0, zscale),
                        curve_sup_err(I, red.irc, s, sign, iscale));
    };
    double best_s = 0.0, best_sign = 1.0, best = 1e300;
    for (int j = 0; j < grid_n; ++j) {
        const double s = kTwoPi * (double)j / (double)grid_n;
        for (double sign : {1.0, -1.0}) {
            const double e = objective(s, sign);
            if (e < best) {
                best = e;
                best_s = s;
                best_sign = sign;
            }
        }
    }
    // golden-section refinement around the best grid shift
    {
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double a = best_s - kTwoPi / grid_n, b = best_s + kTwoPi / grid_n;
        double c = b - gr * (b - a), d = a + gr * (b - a);
        for (int it = 0; it < 60; ++it) {
            if (objective(c, best_sign) < objective(d, best_sign)) b = d;
            else a = c;
            c = b - gr * (b - a);
            d = a + gr * (b - a);
        }
        best_s = 0.5 * (a + b);
        best = objective(best_s, best_sign);
    }

    CatalogReport rep;
    rep.model = id;
    rep.shift = best_s;
    rep.irc_sign = best_sign;
    rep.prc_sup_rel_err = curve_sup_err(Z, red.prc, best_s, 1.0, zscale);
    rep.irc_sup_rel_err = curve_sup_err(I, red.irc, best_s, best_sign, iscale);
    rep.k_numeric = k_div;
    rep.k_analytic = red.k;
    rep.k_rel_err = std::abs(k_div - red.k) / std::abs(red.k);
    rep.k_monodromy = fl.k;
    rep.monodromy_underflow = fl.monodromy_underflow;
    rep.period = orbit.period();
    if (rep.prc_sup_rel_err > 0.10 || rep.irc_sup_rel_err > 0.10)
        throw ValidationError(
            "catalog_crossvalidation: alignment residual above 10% on " +
            model_name(id) + " (solver bug, not a convention mismatch)");
    return rep;
}

}  // namespace phasered
