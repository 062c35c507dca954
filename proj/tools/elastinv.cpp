#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "elastinv/commands.hpp"

using namespace elastinv;

int main(int argc, char** argv) {
    CLI::App app{"Elastic-wave forward simulation and level-set shape inversion"};
    app.require_subcommand(1);

    std::string config_path, out_dir, delta_path;
    double threshold = 0.05;
    unsigned seed = 0;
    bool seed_given = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "INI configuration file")->required()->check(CLI::ExistingFile);
        cmd->add_option("--out", out_dir, "output directory (overrides output.dir)");
    };
    auto* forward = app.add_subcommand("forward", "simulate the initial layout and record the top boundary");
    auto* synth = app.add_subcommand("synthesize", "simulate the target layout and write delta.csv");
    auto* invert = app.add_subcommand("invert", "reconstruct the inclusion from boundary data");
    auto* gradcheck = app.add_subcommand("gradcheck", "compare the gradient with central differences");
    auto* profile = app.add_subcommand("profile", "cost along the descent direction");
    for (auto* cmd : {forward, synth, invert, gradcheck, profile}) add_common(cmd);
    for (auto* cmd : {invert, profile})
        cmd->add_option("--delta", delta_path, "boundary data CSV")->required()->check(CLI::ExistingFile);
    gradcheck->add_option("--threshold", threshold, "largest accepted relative error")->capture_default_str();
    gradcheck->add_option("--seed", seed, "seed of the random directions (overrides run.seed)")
        ->each([&](const std::string&) { seed_given = true; });

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = load_config(config_path);
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (seed_given) cfg.seed = seed;

        if (*forward) return cmd_forward(cfg);
        if (*synth) return cmd_synthesize(cfg);
        if (*invert) return cmd_invert(cfg, delta_path);
        if (*gradcheck) return cmd_gradcheck(cfg, threshold);
        if (*profile) return cmd_profile(cfg, delta_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "elastinv: %s\n", e.what());
        return exit_error;
    }
    return exit_error;
}
