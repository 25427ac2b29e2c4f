#pragma once

#include "criticalwave/app/assertion.hpp"
#include "criticalwave/app/config.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace criticalwave::app {

enum ExitStatus
{
    exit_ok = 0,
    exit_assertion_failure = 1,
    exit_config_error = 2,
    exit_guard_event = 3
};

struct RunOutcome
{
    std::vector<Assertion> assertions;
    /// Reported values without a pass/fail limit.
    std::vector<std::pair<std::string, double>> measurements;
    bool guard_event = false;
    std::string guard_reason;

    int exit_status() const;
};

/// Runs one scenario and writes its data files into `dir` (which must
/// exist). Plots and manifest.json are written by run_command.
RunOutcome run_scenario(const ScenarioConfig& config, const std::filesystem::path& dir);

/// `criticalwave run <config>`: returns the process exit status.
int run_command(const std::filesystem::path& config_file, std::ostream& out, std::ostream& err);

/// `criticalwave plot <run-dir>`: regenerates the SVG plots from the data
/// files of a run directory.
int plot_command(const std::filesystem::path& dir, std::ostream& out, std::ostream& err);

/// Writes every plot the data in `dir` supports; returns the files written.
std::vector<std::filesystem::path> write_plots(const std::filesystem::path& dir);

/// Program and library versions for manifests.
nlohmann::ordered_json version_info();

/// Worker threads allowed: hardware concurrency, capped by the
/// CRITICALWAVE_THREADS environment variable when it holds a positive integer.
int thread_limit();

nlohmann::ordered_json to_json(const std::vector<Assertion>& checks);

} // namespace criticalwave::app
