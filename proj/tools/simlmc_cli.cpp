#include <CLI11.hpp>
#include <iostream>

#include "simlmc/commands.hpp"
#include "simlmc/log.hpp"

int main(int argc, char** argv) {
    using namespace simlmc;
    CLI::App app{"Multilevel Monte Carlo mean and variance of plate displacements under random anisotropic material"};
    app.require_subcommand(1);

    commands::CommandOptions opt;
    bool verbose = false;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "experiment config (INI)")->check(CLI::ExistingFile);
        sub->add_option("--seed", opt.seed, "master seed (overrides mlmc.seed)");
        sub->add_option("--out", opt.out, "output directory (overrides output.dir)");
        sub->add_option("--threads", opt.threads, "sampling threads (overrides mlmc.threads)")
            ->check(CLI::PositiveNumber);
        sub->add_flag("-v,--verbose", verbose, "log adaptive iterations");
    };

    auto* screen = app.add_subcommand("screen", "screening run: per-level statistics and fitted rates");
    common(screen);
    screen->add_option("--synthetic", opt.synthetic, "JSON file with rates to inject instead of sampling");
    auto* run = app.add_subcommand("run", "adaptive MLMC and MC runs for every target");
    common(run);
    auto* mc = app.add_subcommand("mc", "adaptive single-level MC on the finest level");
    common(mc);
    auto* validate = app.add_subcommand("validate", "fast invariant checks");
    common(validate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? commands::exit_code::ok : commands::exit_code::usage;
    }
    if (verbose) log::set_level(log::Level::info);

    if (screen->parsed()) return commands::cmd_screen(opt, std::cerr);
    if (run->parsed()) return commands::cmd_run(opt, std::cerr);
    if (mc->parsed()) return commands::cmd_mc(opt, std::cerr);
    return commands::cmd_validate(opt, std::cout);
}
