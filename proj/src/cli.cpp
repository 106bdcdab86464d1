#include "phasered/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "phasered/csvio.hpp"
#include "phasered/floquet.hpp"
#include "phasered/reduce.hpp"
#include "phasered/svgplot.hpp"
#include "phasered/validate.hpp"

namespace phasered {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

const std::vector<std::string> kGlobalKeys = {
    "command",  "model",    "out",       "grid_n",      "rel_tol",
    "abs_tol",  "max_step", "extended",  "mode",        "step",
    "control",  "sweep_values", "t_span", "theta0",     "psi0",
    "delta",    "window",   "closure_tol",
};

bool is_global_key(const std::string& k) {
    return std::find(kGlobalKeys.begin(), kGlobalKeys.end(), k) != kGlobalKeys.end();
}

}  // namespace

const std::vector<std::string>& RunConfig::global_keys() { return kGlobalKeys; }

RunConfig RunConfig::parse(const std::string& text, Provenance prov) {
    RunConfig cfg;
    cfg.merge_text(text, prov);
    return cfg;
}

void RunConfig::merge_text(const std::string& text, Provenance prov) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected `key = value`");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": empty key or value");
        set(key, value, prov);
    }
}

void RunConfig::merge_file(const std::string& text) { merge_text(text, Provenance::File); }

void RunConfig::set_flag(const std::string& key, const std::string& value) {
    set(key, value, Provenance::Flag);
}

void RunConfig::set(const std::string& key, const std::string& value, Provenance prov) {
    // flags override file values; file values override defaults
    auto it = prov_.find(key);
    if (it != prov_.end() && (int)it->second > (int)prov) return;
    values_[key] = value;
    prov_[key] = prov;
    resolved_ = false;
}

void RunConfig::resolve() {
    auto it = values_.find("model");
    if (it == values_.end()) throw ConfigError("missing required model id");
    const ModelId id = model_from_name(it->second);

    const auto params = model_default_params(id);
    for (const auto& [k, v] : values_) {
        if (is_global_key(k) || params.count(k)) continue;
        throw ConfigError("unknown key: " + k);
    }
    for (const auto& [k, v] : params)
        if (!values_.count(k)) set(k, format_g17(v), Provenance::Default);

    std::map<std::string, double> pvals;
    for (const auto& [k, v] : params) pvals[k] = get_double(k);
    const IntegratorConfig icfg = model_default_integrator(id, pvals);

    auto set_default = [&](const std::string& k, const std::string& v) {
        if (!values_.count(k)) set(k, v, Provenance::Default);
    };
    set_default("command", "orbit");
    set_default("out", "out");
    set_default("grid_n", id == ModelId::HomoclinicSandstede ? "4000" : "1000");
    set_default("rel_tol", format_g17(icfg.rel_tol));
    set_default("abs_tol", format_g17(icfg.abs_tol));
    set_default("max_step", format_g17(icfg.max_step));
    set_default("extended", icfg.extended ? "1" : "0");
    set_default("mode", "adaptive");
    set_default("step", "0.001");
    set_default("control", "");
    set_default("sweep_values", "");
    set_default("t_span", "10");
    set_default("theta0", "0");
    set_default("psi0", "0");
    set_default("delta", "0.0201");
    set_default("window", "0.3");
    set_default("closure_tol", id == ModelId::HomoclinicSandstede ? "1e-6" : "1e-10");
    resolved_ = true;
}

bool RunConfig::has(const std::string& key) const {
    auto it = values_.find(key);
    return it != values_.end() && !it->second.empty();
}

const std::string& RunConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("config key not set: " + key);
    return it->second;
}

double RunConfig::get_double(const std::string& key) const {
    const std::string& v = get(key);
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": expected a number, got `" + v + "`");
    }
}

int RunConfig::get_int(const std::string& key) const {
    const double d = get_double(key);
    if (d != std::floor(d))
        throw ConfigError("config key " + key + ": expected an integer");
    return (int)d;
}

RunConfig::Provenance RunConfig::provenance(const std::string& key) const {
    auto it = prov_.find(key);
    return it == prov_.end() ? Provenance::Default : it->second;
}

ModelId RunConfig::model() const { return model_from_name(get("model")); }

std::map<std::string, double> RunConfig::model_params() const {
    std::map<std::string, double> out;
    for (const auto& [k, v] : model_default_params(model())) out[k] = get_double(k);
    return out;
}

std::string RunConfig::serialize() const {
    std::ostringstream out;
    for (const auto& [k, v] : values_) {
        if (v.empty()) continue;
        out << k << " = " << v << "\n";
    }
    return out.str();
}

namespace {

const char* prov_name(RunConfig::Provenance p) {
    switch (p) {
        case RunConfig::Provenance::Default: return "default";
        case RunConfig::Provenance::File: return "file";
        case RunConfig::Provenance::Flag: return "flag";
    }
    return "?";
}

struct Pipeline {
    ModelId id;
    VectorFieldSpec field;
    IntegratorConfig icfg;
    PeriodicOrbit orbit;
    int grid_n = 1000;
};

IntegratorConfig integrator_from(const RunConfig& cfg) {
    IntegratorConfig icfg;
    icfg.mode = cfg.get("mode") == "fixed" ? StepMode::FixedStep : StepMode::Adaptive;
    if (cfg.get("mode") != "fixed" && cfg.get("mode") != "adaptive")
        throw ConfigError("mode must be `adaptive` or `fixed`");
    icfg.step = cfg.get_double("step");
    icfg.rel_tol = cfg.get_double("rel_tol");
    icfg.abs_tol = cfg.get_double("abs_tol");
    icfg.max_step = cfg.get_double("max_step");
    icfg.extended = cfg.get_int("extended") != 0;
    icfg.validate();
    return icfg;
}

Pipeline build_pipeline(const RunConfig& cfg) {
    Pipeline p;
    p.id = cfg.model();
    const auto params = cfg.model_params();
    p.field = model_field(p.id, params);
    p.icfg = integrator_from(cfg);
    p.grid_n = cfg.get_int("grid_n");

    OrbitOptions opts;
    opts.closure_tol = cfg.get_double("closure_tol");
    opts.n_samples = p.grid_n;
    auto orbit0 =
        find_periodic_orbit(p.field, model_default_guess(p.id, params), p.icfg, opts);

    switch (p.id) {
        case ModelId::HomoclinicSandstede: {
            const double delta = cfg.get_double("delta");
            p.orbit = set_phase_anchor(
                p.field, orbit0,
                [delta](std::span<const double> x) { return x[1] - delta; }, p.icfg,
                CrossingDirection::Falling,
                [delta](std::span<const double> x) { return x[0] < delta; }, p.grid_n);
            break;
        }
        case ModelId::VanDerPol: {
            const VectorFieldSpec& f = p.field;
            p.orbit = set_phase_anchor(
                p.field, orbit0,
                [&f](std::span<const double> x) {
                    State d(2);
                    f.rhs(x, d);
                    return d[0];
                },
                p.icfg, CrossingDirection::Falling, nullptr, p.grid_n);
            break;
        }
        default:
            p.orbit = set_phase_anchor(
                p.field, orbit0, [](std::span<const double> x) { return x[1]; }, p.icfg,
                CrossingDirection::Any,
                [](std::span<const double> x) { return x[0] > 0.0; }, p.grid_n);
            break;
    }
    return p;
}

using Manifest = std::vector<std::pair<std::string, std::string>>;

void manifest_config(const RunConfig& cfg, Manifest& m) {
    for (const auto& [k, v] : cfg.entries()) {
        if (v.empty()) continue;
        m.emplace_back(k, v);
        m.emplace_back("provenance." + k, prov_name(cfg.provenance(k)));
    }
}

void manifest_orbit(const Pipeline& p, Manifest& m) {
    m.emplace_back("T", format_g17(p.orbit.period()));
    m.emplace_back("omega", format_g17(p.orbit.omega()));
    m.emplace_back("closure_residual", format_g17(p.orbit.closure_residual()));
    m.emplace_back("anchor_x", format_g17(p.orbit.anchor()[0]));
    m.emplace_back("anchor_y", format_g17(p.orbit.anchor()[1]));
    m.emplace_back("N", std::to_string(p.grid_n));
}

const char* method_name(AdjointMethod m) {
    switch (m) {
        case AdjointMethod::BackwardIteration: return "backward_iteration";
        case AdjointMethod::PeriodMapEigen: return "period_map_eigen";
        case AdjointMethod::PlanarQuadrature: return "planar_quadrature";
    }
    return "?";
}

std::vector<State> orbit_rows(const Pipeline& p) {
    std::vector<State> rows;
    rows.reserve(p.grid_n + 1);
    for (int j = 0; j < p.grid_n; ++j)
        rows.push_back(p.orbit.at_theta(kTwoPi * (double)j / (double)p.grid_n));
    rows.push_back(p.orbit.cycle().back());
    return rows;
}

std::vector<double> grid_thetas(int n) {
    std::vector<double> t(n + 1);
    for (int j = 0; j <= n; ++j) t[j] = kTwoPi * (double)j / (double)n;
    return t;
}

void write_curve_artifacts(const std::string& dir, const std::string& stem,
                           const ResponseCurve& curve, const std::string& title) {
    write_curve_csv(dir + "/" + stem + ".csv", curve.thetas, curve.values);
    std::vector<std::vector<double>> cols(curve.values.front().size());
    for (std::size_t c = 0; c < cols.size(); ++c) {
        cols[c].resize(curve.values.size());
        for (std::size_t j = 0; j < curve.values.size(); ++j)
            cols[c][j] = curve.values[j][c];
    }
    std::vector<std::string> labels;
    for (std::size_t c = 0; c < cols.size(); ++c)
        labels.push_back("c" + std::to_string(c + 1));
    write_svg_plot(dir + "/" + stem + ".svg", title, "theta", curve.thetas, cols, labels);
}

void write_orbit_artifacts(const std::string& dir, const Pipeline& p) {
    const auto thetas = grid_thetas(p.grid_n);
    const auto rows = orbit_rows(p);
    write_curve_csv(dir + "/orbit.csv", thetas, rows);
    std::vector<std::vector<double>> cols(2, std::vector<double>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j) {
        cols[0][j] = rows[j][0];
        cols[1][j] = rows[j][1];
    }
    write_svg_plot(dir + "/orbit.svg", "periodic orbit (" + model_name(p.id) + ")",
                   "theta", thetas, cols, {"x", "y"});
}

IrcNormalization irc_norm_for(ModelId id) {
    // Spike-like relaxation IRCs are normalized by the max absolute value;
    // the near-homoclinic anchor makes the unit normalization
    // ill-conditioned (the isochron tangent is nearly parallel to the
    // flow there), so the box study also uses max-abs.
    if (id == ModelId::VanDerPol || id == ModelId::HomoclinicSandstede)
        return IrcNormalization::MaxAbs;
    return IrcNormalization::EigenvectorUnit;
}

struct AdjointBundle {
    ResponseCurve Z, I;
    double k_div = 0.0;
    FloquetData fl;
};

AdjointBundle compute_adjoints(const Pipeline& p) {
    AdjointBundle b;
    PrcOptions popts;
    popts.grid_n = p.grid_n;
    b.Z = compute_prc(p.field, p.orbit, p.icfg, popts);
    b.k_div = floquet_divergence(p.field, p.orbit);
    b.fl = monodromy_poincare(p.field, p.orbit, b.Z.values[0], p.icfg);
    IrcOptions iopts;
    iopts.grid_n = p.grid_n;
    iopts.normalization = irc_norm_for(p.id);
    b.I = compute_irc(p.field, p.orbit, b.k_div, b.fl.v, p.icfg, iopts);
    return b;
}

void manifest_adjoints(const AdjointBundle& b, Manifest& m) {
    m.emplace_back("k", format_g17(b.k_div));
    m.emplace_back("k_divergence", format_g17(b.k_div));
    m.emplace_back("k_monodromy", format_g17(b.fl.k));
    m.emplace_back("lambda", format_g17(b.fl.lambda));
    m.emplace_back("monodromy_underflow", b.fl.monodromy_underflow ? "1" : "0");
    m.emplace_back("v_x", format_g17(b.fl.v[0]));
    m.emplace_back("v_y", format_g17(b.fl.v[1]));
    m.emplace_back("prc_method", method_name(b.Z.method));
    m.emplace_back("irc_method", method_name(b.I.method));
    m.emplace_back("irc_normalization",
                   b.I.normalization == IrcNormalization::MaxAbs ? "max_abs"
                                                                 : "eigenvector_unit");
    m.emplace_back("irc_k", format_g17(b.I.k));
    m.emplace_back("prc_closure", format_g17(b.Z.closure_residual / b.Z.curve_scale));
    m.emplace_back("irc_closure", format_g17(b.I.closure_residual / b.I.curve_scale));
}

int cmd_validate(const RunConfig& cfg, const std::string& dir, Manifest& m);

int dispatch(const RunConfig& cfg, const std::string& dir) {
    const std::string command = cfg.get("command");
    Manifest m;
    m.emplace_back("command", command);
    manifest_config(cfg, m);

    if (command == "sweep") {
        if (cfg.model() != ModelId::VanDerPol)
            throw ConfigError("sweep: only the van der Pol mu sweep is defined");
        std::vector<double> mus;
        std::stringstream ss(cfg.get("sweep_values"));
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (!trim(tok).empty()) mus.push_back(std::stod(trim(tok)));
        }
        if (mus.empty()) throw ConfigError("sweep: sweep_values is empty");
        auto rep = relaxation_spike_analysis(mus, cfg.get_double("window"),
                                             cfg.get_int("grid_n"));
        std::vector<double> col_mu;
        std::vector<std::vector<double>> cols(7);
        std::ofstream summary(dir + "/sweep_summary.csv");
        summary << "mu,T,k,a,b,theta1,theta2,mass_fraction\n";
        for (const auto& rec : rep.records) {
            const double th1 = rec.spike_thetas.size() > 0 ? rec.spike_thetas[0] : 0.0;
            const double th2 = rec.spike_thetas.size() > 1 ? rec.spike_thetas[1] : 0.0;
            summary << format_g17(rec.mu) << "," << format_g17(rec.period) << ","
                    << format_g17(rec.k) << "," << format_g17(rec.a) << ","
                    << format_g17(rec.b) << "," << format_g17(th1) << ","
                    << format_g17(th2) << "," << format_g17(rec.mass_fraction) << "\n";
            // per-mu artifacts in disjoint subdirectories
            std::ostringstream sub;
            sub << dir << "/mu_" << rec.mu;
            std::filesystem::create_directories(sub.str());
            write_curve_artifacts(sub.str(), "irc", rec.irc,
                                  "IRC (vdp, mu=" + format_g17(rec.mu) + ")");
            Manifest mm;
            mm.emplace_back("mu", format_g17(rec.mu));
            mm.emplace_back("T", format_g17(rec.period));
            mm.emplace_back("k", format_g17(rec.k));
            mm.emplace_back("a", format_g17(rec.a));
            mm.emplace_back("b", format_g17(rec.b));
            mm.emplace_back("mass_fraction", format_g17(rec.mass_fraction));
            for (std::size_t i = 0; i < rec.spike_thetas.size(); ++i)
                mm.emplace_back("theta" + std::to_string(i + 1),
                                format_g17(rec.spike_thetas[i]));
            write_manifest(sub.str() + "/manifest.txt", mm);
        }
        m.emplace_back("sweep_count", std::to_string(rep.records.size()));
        write_manifest(dir + "/manifest.txt", m);
        return 0;
    }

    if (command == "validate") return cmd_validate(cfg, dir, m);

    Pipeline p = build_pipeline(cfg);
    manifest_orbit(p, m);
    write_orbit_artifacts(dir, p);

    if (command == "orbit") {
        write_manifest(dir + "/manifest.txt", m);
        return 0;
    }
    if (command == "prc") {
        PrcOptions popts;
        popts.grid_n = p.grid_n;
        auto Z = compute_prc(p.field, p.orbit, p.icfg, popts);
        m.emplace_back("prc_method", method_name(Z.method));
        m.emplace_back("prc_closure", format_g17(Z.closure_residual / Z.curve_scale));
        write_curve_artifacts(dir, "prc", Z, "PRC (" + model_name(p.id) + ")");
        write_manifest(dir + "/manifest.txt", m);
        return 0;
    }
    if (command == "floquet") {
        AdjointBundle b = compute_adjoints(p);
        manifest_adjoints(b, m);
        write_curve_artifacts(dir, "prc", b.Z, "PRC (" + model_name(p.id) + ")");
        write_manifest(dir + "/manifest.txt", m);
        return 0;
    }
    if (command == "irc") {
        AdjointBundle b = compute_adjoints(p);
        manifest_adjoints(b, m);
        write_curve_artifacts(dir, "prc", b.Z, "PRC (" + model_name(p.id) + ")");
        write_curve_artifacts(dir, "irc", b.I, "IRC (" + model_name(p.id) + ")");
        write_manifest(dir + "/manifest.txt", m);
        return 0;
    }
    if (command == "reduce-sim") {
        AdjointBundle b = compute_adjoints(p);
        manifest_adjoints(b, m);
        ControlSignal u = cfg.has("control")
                              ? read_control_csv(cfg.get("control"), 2)
                              : ControlSignal::zero(2);
        const double t1 = cfg.get_double("t_span");
        ReducedState init{cfg.get_double("theta0"), cfg.get_double("psi0")};
        IntegratorConfig rcfg = p.icfg;
        rcfg.extended = false;
        rcfg.rel_tol = std::max(rcfg.rel_tol, 1e-12);
        auto traj = simulate_reduced(b.Z, b.I, b.k_div, p.orbit.omega(), u, init, 0.0,
                                     t1, rcfg);
        // report impulse jumps (same-time sample pairs)
        int jumps = 0;
        for (std::size_t i = 1; i < traj.times.size(); ++i) {
            if (traj.times[i] == traj.times[i - 1]) {
                ++jumps;
                m.emplace_back("jump" + std::to_string(jumps) + "_t",
                               format_g17(traj.times[i]));
                m.emplace_back(
                    "jump" + std::to_string(jumps) + "_dtheta",
                    format_g17(traj.theta_unwrapped[i] - traj.theta_unwrapped[i - 1]));
                m.emplace_back("jump" + std::to_string(jumps) + "_dpsi",
                               format_g17(traj.psi[i] - traj.psi[i - 1]));
            }
        }
        std::vector<std::vector<double>> cols(2);
        cols[0].resize(traj.times.size());
        cols[1] = traj.psi;
        for (std::size_t i = 0; i < traj.times.size(); ++i)
            cols[0][i] = wrap_angle(traj.theta_unwrapped[i]);
        write_timeseries_csv(dir + "/reduced.csv", "t,theta,psi", traj.times, cols);
        write_svg_plot(dir + "/reduced.svg", "reduced model (" + model_name(p.id) + ")",
                       "t", traj.times, cols, {"theta", "psi"});
        write_manifest(dir + "/manifest.txt", m);
        return 0;
    }
    throw ConfigError("unknown command: " + command);
}

int cmd_validate(const RunConfig& cfg, const std::string& dir, Manifest& m) {
    const ModelId id = cfg.model();
    bool pass = true;
    auto check = [&](const std::string& name, bool ok, const std::string& detail) {
        m.emplace_back("check." + name, (ok ? "pass" : "FAIL") + std::string(" (") +
                                            detail + ")");
        pass = pass && ok;
    };

    if (id == ModelId::HopfNF || id == ModelId::BautinNF || id == ModelId::Sniper ||
        id == ModelId::LambdaOmega) {
        auto rep = catalog_crossvalidation(id, cfg.model_params(), {}, cfg.get_int("grid_n"));
        m.emplace_back("shift", format_g17(rep.shift));
        m.emplace_back("irc_sign", format_g17(rep.irc_sign));
        m.emplace_back("prc_sup_rel_err", format_g17(rep.prc_sup_rel_err));
        m.emplace_back("irc_sup_rel_err", format_g17(rep.irc_sup_rel_err));
        m.emplace_back("k", format_g17(rep.k_numeric));
        m.emplace_back("k_analytic", format_g17(rep.k_analytic));
        m.emplace_back("T", format_g17(rep.period));
        check("prc_sup", rep.prc_sup_rel_err < 1e-3, format_g17(rep.prc_sup_rel_err));
        check("irc_sup", rep.irc_sup_rel_err < 1e-3, format_g17(rep.irc_sup_rel_err));
        check("k", rep.k_rel_err < 1e-6, format_g17(rep.k_rel_err));
    } else if (id == ModelId::HomoclinicSandstede) {
        Pipeline p = build_pipeline(cfg);
        manifest_orbit(p, m);
        AdjointBundle b = compute_adjoints(p);
        manifest_adjoints(b, m);
        write_orbit_artifacts(dir, p);
        write_curve_artifacts(dir, "prc", b.Z, "PRC (sandstede)");
        write_curve_artifacts(dir, "irc", b.I, "IRC (sandstede)");
        const auto params = cfg.model_params();
        const double ls = params.at("a") - params.at("b");
        const double lu = params.at("a") + params.at("b");
        auto box = homoclinic_box_analysis(p.field, p.orbit, b.I,
                                           cfg.get_double("delta"), ls, lu);
        m.emplace_back("box_fraction", format_g17(box.fraction));
        m.emplace_back("box_fraction_strict", format_g17(box.fraction_strict));
        m.emplace_back("irc_y_rate", format_g17(box.irc_y_rate));
        m.emplace_back("irc_x_rate", format_g17(box.irc_x_rate));
        check("T", std::abs(p.orbit.period() - 31.7689) < 0.05,
              format_g17(p.orbit.period()));
        check("k", std::abs(b.k_div - (-1.7579)) < 0.01, format_g17(b.k_div));
        check("eigenvector", std::abs(b.fl.v[0]) < 0.01 && b.fl.v[1] > 0.99,
              format_g17(b.fl.v[0]));
        check("box_fraction", std::abs(box.fraction - 0.865) < 0.01,
              format_g17(box.fraction));
        check("irc_y_rate", box.y_rate_rel_err < 0.05, format_g17(box.irc_y_rate));
        check("irc_x_rate", box.x_rate_rel_err < 0.10, format_g17(box.irc_x_rate));
    } else {  // van der Pol
        Pipeline p = build_pipeline(cfg);
        manifest_orbit(p, m);
        AdjointBundle b = compute_adjoints(p);
        manifest_adjoints(b, m);
        write_orbit_artifacts(dir, p);
        write_curve_artifacts(dir, "prc", b.Z, "PRC (vdp)");
        write_curve_artifacts(dir, "irc", b.I, "IRC (vdp)");
        auto rep = relaxation_spike_analysis({cfg.get_double("mu")},
                                             cfg.get_double("window"),
                                             cfg.get_int("grid_n"));
        const auto& rec = rep.records.front();
        m.emplace_back("a", format_g17(rec.a));
        m.emplace_back("b", format_g17(rec.b));
        m.emplace_back("mass_fraction", format_g17(rec.mass_fraction));
        for (std::size_t i = 0; i < rec.spike_thetas.size(); ++i)
            m.emplace_back("theta" + std::to_string(i + 1),
                           format_g17(rec.spike_thetas[i]));
        check("spike_pair", rec.spike_thetas.size() == 2,
              std::to_string(rec.spike_thetas.size()));
        if (rec.spike_thetas.size() == 2) {
            const double sep = rec.spike_thetas[1] - rec.spike_thetas[0];
            check("spike_separation_pi", std::abs(sep - kTwoPi / 2.0) < 0.02,
                  format_g17(sep));
        }
        check("a_negative", rec.a < 0.0, format_g17(rec.a));
    }
    write_manifest(dir + "/manifest.txt", m);
    if (!pass) throw ValidationError("validation thresholds not met (see manifest)");
    return 0;
}

}  // namespace

int run(RunConfig config, std::string* error_line) {
    try {
        config.resolve();
    } catch (const ConfigError& e) {
        if (error_line) *error_line = std::string("error: config: ") + e.what();
        return 2;
    }
    try {
        const std::string dir = config.get("out");
        std::filesystem::create_directories(dir);
        return dispatch(config, dir);
    } catch (const ConfigError& e) {
        if (error_line) *error_line = std::string("error: config: ") + e.what();
        return 2;
    } catch (const ValidationError& e) {
        if (error_line) *error_line = std::string("error: validation: ") + e.what();
        return 4;
    } catch (const std::exception& e) {
        if (error_line) *error_line = std::string("error: solver: ") + e.what();
        return 3;
    }
}

}  // namespace phasered
