#include "phasered/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace phasered {

namespace {

double get(const std::map<std::string, double>& p, const std::string& key) {
    auto it = p.find(key);
    if (it == p.end()) throw ConfigError("model: missing parameter " + key);
    return it->second;
}

std::map<std::string, double> merge_params(ModelId id,
                                           std::map<std::string, double> user) {
    auto merged = model_default_params(id);
    for (const auto& [key, value] : user) {
        auto it = merged.find(key);
        if (it == merged.end())
            throw ConfigError("model " + model_name(id) + ": unknown parameter " + key);
        it->second = value;
    }
    return merged;
}

// Stable root of a + c*s + f*s^2 = 0 (s = r_po^2) for the Bautin radial
// equation; stability means G'(r_po) = a + 3cs + 5fs^2 < 0.
double bautin_rpo_squared(double a, double c, double f) {
    std::vector<double> roots;
    if (std::abs(f) < 1e-300) {
        if (std::abs(c) > 1e-300) roots.push_back(-a / c);
    } else {
        const double disc = c * c - 4.0 * a * f;
        if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            roots.push_back((-c + sq) / (2.0 * f));
            roots.push_back((-c - sq) / (2.0 * f));
        }
    }
    for (double s : roots) {
        if (s > 0.0 && a + 3.0 * c * s + 5.0 * f * s * s < 0.0) return s;
    }
    throw ConfigError("bautin: no stable periodic radius for these parameters");
}

}  // namespace

std::string model_name(ModelId id) {
    switch (id) {
        case ModelId::LambdaOmega: return "lambda_omega";
        case ModelId::HopfNF: return "hopf";
        case ModelId::BautinNF: return "bautin";
        case ModelId::Sniper: return "sniper";
        case ModelId::HomoclinicSandstede: return "sandstede";
        case ModelId::VanDerPol: return "vdp";
    }
    return "unknown";
}

ModelId model_from_name(const std::string& name) {
    if (name == "lambda_omega" || name == "lambda-omega") return ModelId::LambdaOmega;
    if (name == "hopf") return ModelId::HopfNF;
    if (name == "bautin") return ModelId::BautinNF;
    if (name == "sniper" || name == "snic") return ModelId::Sniper;
    if (name == "sandstede" || name == "homoclinic") return ModelId::HomoclinicSandstede;
    if (name == "vdp" || name == "van_der_pol") return ModelId::VanDerPol;
    throw ConfigError("unknown model: " + name);
}

std::map<std::string, double> model_default_params(ModelId id) {
    switch (id) {
        case ModelId::LambdaOmega: return {};
        case ModelId::HopfNF: return {{"a", 1.0}, {"b", 1.0}, {"c", -1.0}, {"d", 0.0}};
        case ModelId::BautinNF:
            return {{"a", -0.5}, {"b", 1.0}, {"c", 2.0}, {"d", 0.0}, {"f", -1.0}, {"g", 0.0}};
        case ModelId::Sniper: return {{"rho", 1.0}, {"eta", std::sqrt(2.0)}};
        case ModelId::HomoclinicSandstede:
            return {{"mu", 1e-13}, {"a", -1.0}, {"b", 2.0}};
        case ModelId::VanDerPol: return {{"mu", 0.1}};
    }
    return {};
}

VectorFieldSpec model_field(ModelId id, std::map<std::string, double> params,
                            const LambdaOmegaFuncs& lw) {
    const auto p = merge_params(id, std::move(params));
    VectorFieldSpec field;
    field.dimension = 2;
    field.params = p;

    switch (id) {
        case ModelId::LambdaOmega: {
            const double rpo = lw.r_po;
            if (!(rpo > 0.0)) throw ConfigError("lambda_omega: r_po must be > 0");
            if (std::abs(lw.G(rpo)) > 1e-10 * std::max(1.0, rpo))
                throw ConfigError("lambda_omega: G(r_po) != 0");
            if (!(lw.dG(rpo) < 0.0))
                throw ConfigError("lambda_omega: orbit not stable (G'(r_po) >= 0)");
            auto G = lw.G, dG = lw.dG, H = lw.H, dH = lw.dH;
            field.rhs = [G, H](std::span<const double> x, std::span<double> out) {
                const double r = std::max(std::hypot(x[0], x[1]), 1e-150);
                const double u = G(r) / r, h = H(r);
                out[0] = u * x[0] - h * x[1];
                out[1] = u * x[1] + h * x[0];
            };
            field.jacobian = [G, dG, H, dH](std::span<const double> x, std::span<double> j) {
                const double r = std::max(std::hypot(x[0], x[1]), 1e-150);
                const double u = G(r) / r, gp = dG(r), h = H(r), hp = dH(r);
                const double w = (gp - u) / (r * r);
                j[0] = u + x[0] * x[0] * w - x[0] * x[1] * hp / r;
                j[1] = x[0] * x[1] * w - h - x[1] * x[1] * hp / r;
                j[2] = x[0] * x[1] * w + h + x[0] * x[0] * hp / r;
                j[3] = u + x[1] * x[1] * w + x[0] * x[1] * hp / r;
            };
            field.divergence = [G, dG](std::span<const double> x) {
                const double r = std::max(std::hypot(x[0], x[1]), 1e-150);
                return G(r) / r + dG(r);
            };
            break;
        }
        case ModelId::HopfNF: {
            const double a = get(p, "a"), b = get(p, "b"), c = get(p, "c"), d = get(p, "d");
            if (!(a > 0.0 && c < 0.0))
                throw ConfigError("hopf: requires a > 0 and c < 0 for a stable orbit");
            field.rhs = [a, b, c, d](std::span<const double> x, std::span<double> out) {
                const double r2 = x[0] * x[0] + x[1] * x[1];
                const double u = a + c * r2, v = b + d * r2;
                out[0] = u * x[0] - v * x[1];
                out[1] = u * x[1] + v * x[0];
            };
            field.jacobian = [a, b, c, d](std::span<const double> x, std::span<double> j) {
                const double r2 = x[0] * x[0] + x[1] * x[1];
                const double u = a + c * r2, v = b + d * r2;
                j[0] = u + 2.0 * x[0] * (c * x[0] - d * x[1]);
                j[1] = 2.0 * x[1] * (c * x[0] - d * x[1]) - v;
                j[2] = 2.0 * x[0] * (c * x[1] + d * x[0]) + v;
                j[3] = u + 2.0 * x[1] * (c * x[1] + d * x[0]);
            };
            field.divergence = [a, c](std::span<const double> x) {
                return 2.0 * a + 4.0 * c * (x[0] * x[0] + x[1] * x[1]);
            };
            break;
        }
        case ModelId::BautinNF: {
            const double a = get(p, "a"), b = get(p, "b"), c = get(p, "c");
            const double d = get(p, "d"), f = get(p, "f"), g = get(p, "g");
            bautin_rpo_squared(a, c, f);  // validates stability
            field.rhs = [a, b, c, d, f, g](std::span<const double> x, std::span<double> out) {
                const double r2 = x[0] * x[0] + x[1] * x[1];
                const double u = a + c * r2 + f * r2 * r2;
                const double v = b + d * r2 + g * r2 * r2;
                out[0] = u * x[0] - v * x[1];
                out[1] = u * x[1] + v * x[0];
            };
            field.jacobian = [a, b, c, d, f, g](std::span<const double> x, std::span<double> j) {
                const double r2 = x[0] * x[0] + x[1] * x[1];
                const double u = a + c * r2 + f * r2 * r2;
                const double v = b + d * r2 + g * r2 * r2;
                const double du = c + 2.0 * f * r2, dv = d + 2.0 * g * r2;
                j[0] = u + 2.0 * x[0] * (du * x[0] - dv * x[1]);
                j[1] = 2.0 * x[1] * (du * x[0] - dv * x[1]) - v;
                j[2] = 2.0 * x[0] * (du * x[1] + dv * x[0]) + v;
                j[3] = u + 2.0 * x[1] * (du * x[1] + dv * x[0]);
            };
            field.divergence = [a, c, f](std::span<const double> x) {
                const double r2 = x[0] * x[0] + x[1] * x[1];
                return 2.0 * a + 4.0 * c * r2 + 6.0 * f * r2 * r2;
            };
            break;
        }
        case ModelId::Sniper: {
            const double rho = get(p, "rho"), eta = get(p, "eta");
            if (!(eta > 1.0 && rho > 0.0))
                throw ConfigError("sniper: requires eta > 1 and rho > 0");
            field.rhs = [rho, eta](std::span<const double> x, std::span<double> out) {
                const double r = std::max(std::hypot(x[0], x[1]), 1e-150);
                const double u = rho - r * r, h = eta - x[1] / r;
                out[0] = u * x[0] - h * x[1];
                out[1] = u * x[1] + h * x[0];
            };
            field.jacobian = [rho, eta](std::span<const double> x, std::span<double> j) {
                const double r = std::max(std::hypot(x[0], x[1]), 1e-150);
                const double r3 = r * r * r;
                const double u = rho - r * r, h = eta - x[1] / r;
                j[0] = u - 2.0 * x[0] * x[0] - x[0] * x[1] * x[1] / r3;
                j[1] = -2.0 * x[0] * x[1] - h + x[0] * x[0] * x[1] / r3;
                j[2] = -2.0 * x[0] * x[1] + h + x[0] * x[0] * x[1] / r3;
                j[3] = u - 2.0 * x[1] * x[1] - x[0] * x[0] * x[0] / r3;
            };
            field.divergence = [rho](std::span<const double> x) {
                const double r = std::max(std::hypot(x[0], x[1]), 1e-150);
                return 2.0 * rho - 4.0 * r * r - x[0] / r;
            };
            break;
        }
        case ModelId::HomoclinicSandstede: {
            const double mu = get(p, "mu"), a = get(p, "a"), b = get(p, "b");
            if (!(mu > 0.0 && a < 0.0 && b > 0.0 && std::abs(b) > std::abs(a)))
                throw ConfigError("sandstede: requires mu > 0, a < 0 < b, |b| > |a|");
            const double P = a / 4.0 + 3.0 * b / 8.0;
            const double Q = -a / 4.0 + 3.0 * b / 8.0;
            const double R = 3.0 * a / 8.0;
            field.rhs = [mu, a, b, P, Q, R](std::span<const double> x, std::span<double> out) {
                const double s = x[0] + x[1], q = s * s, w = x[0] * x[0] - x[1] * x[1];
                out[0] = (a + b - 0.5 * mu) * x[0] - 0.5 * mu * x[1] - P * q - R * w;
                out[1] = 0.5 * mu * x[0] + (a - b + 0.5 * mu) * x[1] + Q * q + R * w;
            };
            field.rhs_ld = [mu, a, b, P, Q, R](std::span<const long double> x,
                                               std::span<long double> out) {
                const long double mL = mu, aL = a, bL = b, PL = P, QL = Q, RL = R;
                const long double s = x[0] + x[1], q = s * s,
                                  w = x[0] * x[0] - x[1] * x[1];
                out[0] = (aL + bL - 0.5L * mL) * x[0] - 0.5L * mL * x[1] - PL * q - RL * w;
                out[1] = 0.5L * mL * x[0] + (aL - bL + 0.5L * mL) * x[1] + QL * q + RL * w;
            };
            field.jacobian = [mu, a, b, P, Q, R](std::span<const double> x, std::span<double> j) {
                const double s = x[0] + x[1];
                j[0] = (a + b - 0.5 * mu) - 2.0 * P * s - 2.0 * R * x[0];
                j[1] = -0.5 * mu - 2.0 * P * s + 2.0 * R * x[1];
                j[2] = 0.5 * mu + 2.0 * Q * s + 2.0 * R * x[0];
                j[3] = (a - b + 0.5 * mu) + 2.0 * Q * s - 2.0 * R * x[1];
            };
            field.divergence = [a](std::span<const double> x) {
                return 2.0 * a - (7.0 * a / 4.0) * (x[0] + x[1]);
            };
            break;
        }
        case ModelId::VanDerPol: {
            const double mu = get(p, "mu");
            if (!(mu > 0.0 && mu < 1.0))
                throw ConfigError("vdp: requires 0 < mu << 1");
            field.rhs = [mu](std::span<const double> x, std::span<double> out) {
                out[0] = (-x[1] + x[0] - x[0] * x[0] * x[0] / 3.0) / mu;
                out[1] = x[0];
            };
            field.jacobian = [mu](std::span<const double> x, std::span<double> j) {
                j[0] = (1.0 - x[0] * x[0]) / mu;
                j[1] = -1.0 / mu;
                j[2] = 1.0;
                j[3] = 0.0;
            };
            field.divergence = [mu](std::span<const double> x) {
                return (1.0 - x[0] * x[0]) / mu;
            };
            VectorFieldSpec::FastSlowForm fs;
            fs.mu = mu;
            fs.f = [](double x, double y) { return -y + x - x * x * x / 3.0; };
            fs.g = [](double x, double) { return x; };
            fs.f_x = [](double x, double) { return 1.0 - x * x; };
            fs.f_y = [](double, double) { return -1.0; };
            fs.g_x = [](double, double) { return 1.0; };
            fs.g_y = [](double, double) { return 0.0; };
            field.fast_slow = fs;
            break;
        }
    }
    return field;
}

IntegratorConfig model_default_integrator(ModelId id,
                                          const std::map<std::string, double>& params) {
    IntegratorConfig cfg;
    cfg.mode = StepMode::Adaptive;
    switch (id) {
        case ModelId::HomoclinicSandstede:
            // The orbit passes within ~1e-14 of the saddle; component-wise
            // error weights with a tiny absolute floor keep it resolved, and
            // the extended-precision core keeps loop roundoff below the
            // reinjection distance.
            cfg.rel_tol = 1e-15;
            cfg.abs_tol = 1e-30;
            cfg.extended = true;
            break;
        case ModelId::VanDerPol: {
            cfg.rel_tol = 1e-11;
            cfg.abs_tol = 1e-14;
            auto it = params.find("mu");
            const double mu = (it != params.end()) ? it->second : 0.1;
            cfg.max_step = mu / 10.0;
            break;
        }
        default:
            cfg.rel_tol = 1e-12;
            cfg.abs_tol = 1e-14;
            break;
    }
    return cfg;
}

State model_default_guess(ModelId id, const std::map<std::string, double>& params) {
    const auto p = merge_params(id, params);
    switch (id) {
        case ModelId::LambdaOmega: return {1.05, 0.0};
        case ModelId::HopfNF: {
            const double rpo = std::sqrt(-get(p, "a") / get(p, "c"));
            return {0.5 * rpo, 0.0};
        }
        case ModelId::BautinNF: {
            const double rpo = std::sqrt(bautin_rpo_squared(get(p, "a"), get(p, "c"), get(p, "f")));
            return {1.05 * rpo, 0.0};
        }
        case ModelId::Sniper: return {1.05 * std::sqrt(get(p, "rho")), 0.0};
        case ModelId::HomoclinicSandstede: return {0.5, 0.25};
        case ModelId::VanDerPol: return {2.0, 0.0};
    }
    return {1.0, 0.0};
}

namespace {

// Time from the landing point x = 2 down the right slow branch of the
// relaxation-limit van der Pol cycle: t(x) = ln(x/2) - x^2/2 + 2.
double vdp_branch_time(double x) { return std::log(x / 2.0) - 0.5 * x * x + 2.0; }

// Invert t(x) on the right branch x in (1, 2] by bisection.
double vdp_branch_x(double t) {
    double lo = 1.0, hi = 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (vdp_branch_time(mid) > t) lo = mid;  // t increases as x decreases
        else hi = mid;
        if (hi - lo < 1e-15) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

AnalyticReduction analytic_reduction(ModelId id, std::map<std::string, double> params,
                                     const LambdaOmegaFuncs& lw,
                                     const HomoclinicAmplitudes& amp) {
    const auto p = merge_params(id, std::move(params));
    AnalyticReduction red;

    // Polar rows share the same structure: PRC with a radial/tangential mix
    // fixed by H'(r_po)/G'(r_po), sinusoidal IRC with amplitude
    // -sqrt(1 + r_po^2 H'^2/G'^2), and k = G'(r_po).
    auto polar_row = [&red](double rpo, double gp, double hp, double omega) {
        const double ratio = hp / gp;
        red.validity = ReductionValidity::FullPhase;
        red.k = gp;
        red.omega = omega;
        red.prc = [ratio, rpo](double th) -> std::array<double, 2> {
            return {-ratio * std::cos(th) - std::sin(th) / rpo,
                    -ratio * std::sin(th) + std::cos(th) / rpo};
        };
        const double ampl = -std::sqrt(1.0 + rpo * rpo * ratio * ratio);
        red.irc = [ampl](double th) -> std::array<double, 2> {
            return {ampl * std::cos(th), ampl * std::sin(th)};
        };
    };

    switch (id) {
        case ModelId::LambdaOmega: {
            const double rpo = lw.r_po;
            polar_row(rpo, lw.dG(rpo), lw.dH(rpo), lw.H(rpo));
            break;
        }
        case ModelId::HopfNF: {
            const double a = get(p, "a"), b = get(p, "b"), c = get(p, "c"), d = get(p, "d");
            if (!(a > 0.0 && c < 0.0)) throw ConfigError("hopf: requires a > 0, c < 0");
            const double rpo2 = -a / c;
            // G = ar + cr^3: G' = a + 3c r^2 = -2a on the orbit; H' = 2 d r.
            polar_row(std::sqrt(rpo2), -2.0 * a, 2.0 * d * std::sqrt(rpo2), b + d * rpo2);
            break;
        }
        case ModelId::BautinNF: {
            const double a = get(p, "a"), b = get(p, "b"), c = get(p, "c");
            const double d = get(p, "d"), f = get(p, "f"), g = get(p, "g");
            const double s = bautin_rpo_squared(a, c, f);
            const double rpo = std::sqrt(s);
            const double gp = a + 3.0 * c * s + 5.0 * f * s * s;
            const double hp = 2.0 * d * rpo + 4.0 * g * rpo * s;
            polar_row(rpo, gp, hp, b + d * s + g * s * s);
            break;
        }
        case ModelId::Sniper: {
            const double rho = get(p, "rho"), eta = get(p, "eta");
            if (!(eta > 1.0 && rho > 0.0)) throw ConfigError("sniper: requires eta > 1, rho > 0");
            const double q = std::sqrt(eta * eta - 1.0);
            red.validity = ReductionValidity::FullPhase;
            red.k = -2.0 * rho;
            red.omega = q;
            const double sr = std::sqrt(rho);
            red.prc = [q, eta, sr](double th) -> std::array<double, 2> {
                return {(std::cos(th) + q * std::sin(th) - 1.0) / (sr * q),
                        (std::sin(th) - q * std::cos(th)) / (sr * eta)};
            };
            red.irc = [q, eta](double th) -> std::array<double, 2> {
                const double den = q * std::sin(th) + std::cos(th) - eta * eta;
                return {(q * std::sin(th) - q * q * std::cos(th)) / den,
                        eta * (1.0 - q * std::sin(th) - std::cos(th)) / den};
            };
            break;
        }
        case ModelId::HomoclinicSandstede: {
            const double a = get(p, "a"), b = get(p, "b");
            const double lu = a + b, ls = a - b;
            bool weak = false;
            red.k = homoclinic_analytic_k(ls, lu, &weak);
            const double T = p.count("T") ? p.at("T") : 31.7689;
            const double omega = kTwoPi / T;
            red.omega = omega;
            red.validity = ReductionValidity::BoxOnly;
            const double zx0 = amp.prc_x0, zy0 = amp.prc_y0, ix0 = amp.irc_x0;
            red.prc = [zx0, zy0, lu, ls, omega](double th) -> std::array<double, 2> {
                return {zx0 * std::exp(-lu * th / omega), zy0 * std::exp(-ls * th / omega)};
            };
            red.irc = [ix0, lu, ls, omega](double th) -> std::array<double, 2> {
                return {ix0 * std::exp(ls * th / omega), std::exp(lu * th / omega)};
            };
            break;
        }
        case ModelId::VanDerPol: {
            // Relaxation limit mu -> 0: period and the mean of f_x along the
            // slow branches follow from dt = (1 - x^2)/x dx on the cubic
            // nullcline; the IRC collapses onto the phases where f_x equals
            // its period mean.
            const double T = 3.0 - 2.0 * std::log(2.0);
            const double omega = kTwoPi / T;
            const double a_mean = (-1.5 - 2.0 * std::log(2.0)) / T;
            const double x_spike = std::sqrt(1.0 - a_mean);
            const double t1 = vdp_branch_time(x_spike);
            const double th1 = omega * t1;
            red.validity = ReductionValidity::SpikeOnly;
            red.k = -std::numeric_limits<double>::infinity();
            red.omega = omega;
            red.spikes = {{th1, 1.0}, {wrap_angle(th1 + kTwoPi / 2.0), 1.0}};
            red.irc = [](double) -> std::array<double, 2> { return {0.0, 0.0}; };
            const double half = omega * (T / 2.0);
            red.prc = [omega, half](double th) -> std::array<double, 2> {
                th = wrap_angle(th);
                const bool left = th >= half;
                const double t = (left ? th - half : th) / omega;
                const double x = (left ? -1.0 : 1.0) * vdp_branch_x(t);
                const double fx = 1.0 - x * x;
                // Z = -omega*g_x/(f_x*g) xhat + omega/g yhat with g = x, g_x = 1
                return {-omega / (fx * x), omega / x};
            };
            break;
        }
    }
    return red;
}

double homoclinic_analytic_k(double lambda_s, double lambda_u, bool* weakly_stable) {
    if (!(lambda_u > 0.0 && lambda_s < 0.0))
        throw ConfigError("homoclinic_analytic_k: requires lambda_u > 0 > lambda_s");
    if (!(std::abs(lambda_s) > lambda_u))
        throw ConfigError("homoclinic_analytic_k: stability needs |lambda_s| > lambda_u");
    if (weakly_stable)
        *weakly_stable = (std::abs(lambda_s) - lambda_u) <= 1e-3 * lambda_u;
    return lambda_s + lambda_u;
}

double box_transit_time(double delta, double eps, double lambda_u) {
    if (!(eps > 0.0 && eps < delta))
        throw ConfigError("box_transit_time: requires 0 < eps < Delta");
    if (!(lambda_u > 0.0)) throw ConfigError("box_transit_time: requires lambda_u > 0");
    return std::log(delta / eps) / lambda_u;
}

}  // namespace phasered
