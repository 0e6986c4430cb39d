#include "pialab/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Policy-improvement and gradient-iteration experiments for a controlled diffusion"};
    pialab::RunOptions options;
    std::uint64_t seed = 0;
    app.add_option("--config", options.config, "Experiment config file")->required();
    app.add_option("--out", options.out, "Output directory")->required();
    auto* seed_opt = app.add_option("--seed", seed, "Seed overriding the config");
    app.add_flag("--quiet", options.quiet, "Suppress progress messages");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return pialab::kExitConfig;
    }
    if (seed_opt->count() > 0) {
        options.seed = seed;
    }
    return pialab::run(options, std::cout, std::cerr);
}
