#pragma once

#include "criticalwave/radial_grid.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace criticalwave::app {

/// Invalid or unreadable scenario configuration (exit status 2).
class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

enum class Scenario
{
    ground_state,
    soliton,
    pseudoconformal,
    custom_gaussian,
    gn_check,
    virial_scan,
    inout_check,
    kernel_scan,
    gronwall_fuzz,
    dispersive_check
};

std::string to_string(Scenario s);
const std::vector<std::string>& scenario_names();

inline constexpr int kSchemaVersion = 1;

/// Flat scenario configuration. Every field has a scenario-dependent
/// default; keys that do not apply to the chosen scenario are rejected.
struct ScenarioConfig
{
    int schema_version = kSchemaVersion;
    Scenario scenario = Scenario::ground_state;
    int dimension = 3;
    int mu = -1;
    GridScheme grid = GridScheme::sine;
    int n = 1024;
    double r_max = 30.0;
    std::uint64_t seed = 1;
    std::filesystem::path output;

    // time stepping
    double t0 = 0.0;
    double t1 = 1.0;
    double dt = 0.0;
    int record_stride = 0; ///< 0: about 200 records over the run
    int snapshot_stride = 0; ///< 0: about 10 snapshots over the run
    double gradient_cap = 100.0;
    double tail_cap = 1e-6;
    double boundary_cap = 1e-8;
    double eta = 0.01;
    /// 0 disables the virial monitor; infinity selects psi = 1.
    double virial_radius = 0.0;

    // scenario parameters
    double tol = 1e-8;
    double amplitude = 1.0;
    double width = 1.0;
    int trials = 0;
    double mass_fraction = 0.9;
    std::vector<double> probe_N;
    std::vector<double> times;
    double kernel_N = 1.0;
    int sign = 1;
    double x = 5.0;
    double t_min = 0.01, t_max = 10.0;
    int t_count = 13;
    double y_min = 1.0, y_max = 40.0;
    int y_count = 40;
    double ratio = 0.0; ///< 0: random Gronwall instance from the seed
    int K = 6;
    double sigma = 0.5;
    int length = 100;
    double envelope = 10.0;

    /// Resolved configuration (defaults filled in) as a flat JSON object,
    /// restricted to the keys that apply to the scenario.
    nlohmann::ordered_json echo() const;
};

/// Parses and validates a configuration. `source` names the input in
/// error messages. Throws ConfigError naming the line (for syntax errors)
/// or the offending key.
ScenarioConfig parse_config(const std::string& text, const std::string& source = "config");
ScenarioConfig load_config(const std::filesystem::path& file);

/// Keys accepted for a scenario, in echo order.
std::vector<std::string> config_keys(Scenario s);

} // namespace criticalwave::app
