#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "phasered/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{
        "phasered: standard and augmented phase reduction (PRC, IRC, Floquet "
        "exponents) for planar limit-cycle oscillators"};
    app.require_subcommand(1);

    std::string config_path, model, out;
    std::vector<std::string> sets;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "config file (key = value lines)");
        sub->add_option("--model", model, "model id (hopf, bautin, sniper, lambda_omega, sandstede, vdp)");
        sub->add_option("--out", out, "output directory");
        sub->add_option("--set", sets, "override any config key: --set key=value")
            ->take_all();
    };
    for (const char* name : {"orbit", "prc", "irc", "floquet", "reduce-sim",
                             "validate", "sweep"})
        add_common(app.add_subcommand(name));

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    phasered::RunConfig cfg;
    try {
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) {
                std::cerr << "error: config: cannot read " << config_path << "\n";
                return 2;
            }
            std::stringstream ss;
            ss << in.rdbuf();
            cfg.merge_file(ss.str());
        }
        cfg.set_flag("command", command);
        if (!model.empty()) cfg.set_flag("model", model);
        if (!out.empty()) cfg.set_flag("out", out);
        for (const auto& kv : sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) {
                std::cerr << "error: config: --set expects key=value, got `" << kv
                          << "`\n";
                return 2;
            }
            cfg.set_flag(kv.substr(0, eq), kv.substr(eq + 1));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return 2;
    }

    std::string error_line;
    const int rc = phasered::run(std::move(cfg), &error_line);
    if (rc != 0) std::cerr << error_line << "\n";
    return rc;
}
