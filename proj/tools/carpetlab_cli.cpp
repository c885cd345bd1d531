#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "carpetlab/experiment.hpp"

int main(int argc, char** argv) {
    carpetlab::ExperimentConfig cfg;
    CLI::App app{"Heat-kernel and stochastic-completeness experiments on generalized Sierpinski carpets"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML file with run options; command-line flags take precedence");

    CLI::App* run = app.add_subcommand("run", "Run one experiment (or all) and write <out>/<name>.{json,csv,gp}");
    std::string names;
    for (const auto& n : carpetlab::experiment_names()) names += (names.empty() ? "" : ", ") + n;
    run->add_option("--experiment", cfg.experiment, "One of: " + names)->required();
    run->add_option("--dim", cfg.dim, "Carpet dimension (2 or 3); default depends on the experiment");
    run->add_option("--gen", cfg.generations, "Carpet generation; default depends on the experiment");
    run->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    run->add_option("--p", cfg.p, "Time-change exponents, comma separated")->delimiter(',');
    run->add_option("--radii", cfg.radii, "Radii grid, comma separated")->delimiter(',');
    run->add_option("--times", cfg.times, "Time grid, comma separated")->delimiter(',');
    run->add_option("--walk-dimension", cfg.walk_dimension, "Use this d_w instead of the fitted reference value");
    run->add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
    run->add_option("--threads", cfg.threads, "Worker threads")->capture_default_str();
    run->add_option("--budget-cells", cfg.budget_cells, "Largest graph allowed, in cells")->capture_default_str();
    run->configurable(true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    return carpetlab::run(cfg, std::cout);
}
