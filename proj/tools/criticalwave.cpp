#include "criticalwave/app/run.hpp"
#include "criticalwave/app/suite.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    using namespace criticalwave::app;
    CLI::App app{"Radial mass-critical NLS toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(version_info()["criticalwave"]));

    std::string config_file;
    auto* run = app.add_subcommand("run", "Run one scenario from a JSON config");
    run->add_option("config", config_file, "Config file")->required();

    std::string suite = "fast";
    std::uint64_t seed = 1;
    std::string output;
    auto* verify = app.add_subcommand("verify", "Run the acceptance suite");
    verify->add_option("--suite", suite, "fast or full")->check(CLI::IsMember({"fast", "full"}));
    verify->add_option("--seed", seed, "Random seed");
    verify->add_option("--output", output, "Output directory (default verify_<suite>_seed<N>)");

    std::string run_dir;
    auto* plot = app.add_subcommand("plot", "Regenerate SVG plots for a run directory");
    plot->add_option("run-dir", run_dir, "Run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config_error;
    }

    if (*run)
        return run_command(config_file, std::cout, std::cerr);
    if (*plot)
        return plot_command(run_dir, std::cout, std::cerr);
    if (output.empty())
        output = "verify_" + suite + "_seed" + std::to_string(seed);
    return verify_command(parse_suite_kind(suite), seed, output, std::cout, std::cerr);
}
