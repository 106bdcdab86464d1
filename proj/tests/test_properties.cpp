// Property-style tests: invariants checked over generated parameter draws
// (fixed-seed hand-rolled generators).

#include <doctest.h>

#include <cmath>
#include <random>

#include "phasered/adjoint.hpp"
#include "phasered/models.hpp"
#include "phasered/spline.hpp"
#include "phasered/validate.hpp"

using namespace phasered;

namespace {

struct Rig {
    VectorFieldSpec field;
    IntegratorConfig cfg;
    PeriodicOrbit orbit;
};

Rig build(ModelId id, std::map<std::string, double> params) {
    Rig r;
    r.field = model_field(id, params);
    r.cfg = model_default_integrator(id, r.field.params);
    auto orbit0 = find_periodic_orbit(r.field, model_default_guess(id, params), r.cfg);
    r.orbit = set_phase_anchor(r.field, orbit0,
                               [](std::span<const double> x) { return x[1]; }, r.cfg,
                               CrossingDirection::Any,
                               [](std::span<const double> x) { return x[0] > 0.0; });
    return r;
}

}  // namespace

TEST_CASE("property: reduction invariants over random Hopf parameters") {
    std::mt19937 rng(987654321);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int draw = 0; draw < 6; ++draw) {
        const double a = 0.5 + 1.5 * U(rng);
        const double c = -0.5 - 1.5 * U(rng);
        const double b = 0.5 + U(rng);
        const double d = -1.0 + 2.0 * U(rng);
        CAPTURE(a);
        CAPTURE(b);
        CAPTURE(c);
        CAPTURE(d);
        Rig r = build(ModelId::HopfNF, {{"a", a}, {"b", b}, {"c", c}, {"d", d}});

        // omega and k against the closed forms
        const double rpo2 = -a / c;
        CHECK(std::abs(r.orbit.omega() - (b + d * rpo2)) < 1e-6 * r.orbit.omega());
        const double k = floquet_divergence(r.field, r.orbit);
        CHECK(std::abs(k + 2.0 * a) < 1e-6 * 2.0 * a);

        auto Z = compute_prc(r.field, r.orbit, r.cfg);
        auto fl = monodromy_poincare(r.field, r.orbit, Z.values[0], r.cfg);
        auto I = compute_irc(r.field, r.orbit, k, fl.v, r.cfg);
        const double omega = r.orbit.omega();
        for (int j = 0; j <= Z.grid_n; j += 41) {
            const State g = r.orbit.cycle().eval(
                std::min(Z.thetas[j] / omega, r.orbit.period()));
            const State f = r.field.eval(g);
            CHECK(std::abs(dot(Z.values[j], f) - omega) < 1e-6 * omega);
            CHECK(std::abs(dot(I.values[j], f)) <
                  1e-6 * std::max(norm(I.values[j]) * norm(f), 1e-300));
        }
        CHECK(Z.closure_residual < 1e-6 * Z.curve_scale);
        CHECK(I.closure_residual < 1e-6 * I.curve_scale);
    }
}

TEST_CASE("property: SNIPER omega and exponent over random parameters") {
    std::mt19937 rng(24601);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int draw = 0; draw < 4; ++draw) {
        const double rho = 0.5 + 1.5 * U(rng);
        const double eta = 1.15 + 1.5 * U(rng);
        CAPTURE(rho);
        CAPTURE(eta);
        Rig r = build(ModelId::Sniper, {{"rho", rho}, {"eta", eta}});
        CHECK(std::abs(r.orbit.omega() - std::sqrt(eta * eta - 1.0)) <
              1e-6 * r.orbit.omega());
        CHECK(std::abs(norm(r.orbit.anchor()) - std::sqrt(rho)) < 1e-7);
        const double k = floquet_divergence(r.field, r.orbit);
        CHECK(std::abs(k + 2.0 * rho) < 1e-6 * 2.0 * rho);
    }
}

TEST_CASE("property: homoclinic exponent formula over random saddle eigenvalues") {
    std::mt19937 rng(777);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int draw = 0; draw < 50; ++draw) {
        const double lu = 0.1 + 3.0 * U(rng);
        const double ls = -lu * (1.0 + 1e-3 + 3.0 * U(rng));
        CHECK(homoclinic_analytic_k(ls, lu) == ls + lu);
        // transit time inverts exactly
        const double delta = 0.01 + U(rng);
        const double eps = delta * std::exp(-(0.5 + 30.0 * U(rng)));
        const double tau = box_transit_time(delta, eps, lu);
        CHECK(std::abs(delta * std::exp(-lu * tau) - eps) < 1e-12 * delta);
    }
}

TEST_CASE("property: catalog cross-validation over random full Bautin rows") {
    // nonzero d and g exercise the amplitude-dependent rotation terms of
    // the analytic row
    std::mt19937 rng(5150);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int checked = 0;
    for (int draw = 0; draw < 8 && checked < 3; ++draw) {
        std::map<std::string, double> params{
            {"a", -0.3 - 0.4 * U(rng)}, {"b", 0.8 + 0.4 * U(rng)},
            {"c", 1.5 + U(rng)},        {"d", -0.4 + 0.8 * U(rng)},
            {"f", -0.8 - 0.4 * U(rng)}, {"g", -0.2 + 0.4 * U(rng)}};
        CAPTURE(params["d"]);
        CAPTURE(params["g"]);
        try {
            model_field(ModelId::BautinNF, params);
        } catch (const ConfigError&) {
            continue;  // the radial quintic has no stable root for this draw
        }
        auto rep = catalog_crossvalidation(ModelId::BautinNF, params);
        CHECK(rep.prc_sup_rel_err < 1e-3);
        CHECK(rep.irc_sup_rel_err < 1e-3);
        CHECK(rep.k_rel_err < 1e-6);
        ++checked;
    }
    CHECK(checked == 3);
}

TEST_CASE("property: catalog cross-validation of a custom lambda-omega system") {
    LambdaOmegaFuncs lw;
    lw.G = [](double r) { return r - r * r * r * r * r; };   // zero at r = 1
    lw.dG = [](double r) { return 1.0 - 5.0 * r * r * r * r; };
    lw.H = [](double r) { return 1.5 + 0.4 * (r * r - 1.0); };
    lw.dH = [](double r) { return 0.8 * r; };
    lw.r_po = 1.0;
    auto rep = catalog_crossvalidation(ModelId::LambdaOmega, {}, lw);
    CHECK(rep.prc_sup_rel_err < 1e-3);
    CHECK(rep.irc_sup_rel_err < 1e-3);
    CHECK(std::abs(rep.k_numeric - (-4.0)) < 1e-6 * 4.0);  // G'(1) = -4
}

TEST_CASE("property: periodic spline interpolates nodes exactly and smoothly") {
    std::mt19937 rng(1234);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int trial = 0; trial < 8; ++trial) {
        const int n = 16 + 8 * trial;
        std::vector<double> vals(n);
        for (double& v : vals) v = U(rng);
        PeriodicCubicSpline sp(vals);
        for (int j = 0; j < n; ++j) {
            CHECK(std::abs(sp.eval(kTwoPi * j / n) - vals[j]) < 1e-12);
        }
        // periodic continuation
        CHECK(std::abs(sp.eval(0.0) - sp.eval(kTwoPi)) < 1e-12);
        CHECK(std::abs(sp.eval(1.0) - sp.eval(1.0 + kTwoPi)) < 1e-12);
    }
    // a smooth function is reproduced between nodes at fourth order
    std::vector<double> smooth(64);
    for (int j = 0; j < 64; ++j) smooth[j] = std::sin(kTwoPi * j / 64.0);
    PeriodicCubicSpline sp(smooth);
    double worst = 0.0;
    for (int j = 0; j < 640; ++j) {
        const double th = kTwoPi * j / 640.0;
        worst = std::max(worst, std::abs(sp.eval(th) - std::sin(th)));
    }
    CHECK(worst < 1e-6);
}
