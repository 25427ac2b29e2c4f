#pragma once

#include "criticalwave/app/config.hpp"
#include "criticalwave/evolution.hpp"
#include "criticalwave/radial_field.hpp"

#include <filesystem>
#include <random>
#include <vector>

namespace criticalwave::app {

double rel_l2(const RadialField& a, const RadialField& b);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

std::vector<double> log_space(double a, double b, int count);
std::vector<double> lin_space(double a, double b, int count);

RadialField gaussian(const GridPtr& grid, double amplitude = 1.0, double width = 1.0);

/// Four Gaussian envelopes (widths 0.8..2) times slow carriers cos(k r),
/// k < 2, with random complex amplitudes: smooth and essentially band-limited.
RadialField random_band_limited(const GridPtr& grid, std::mt19937_64& rng);

/// One to three nonnegative Gaussian shells, symmetrized in r.
RadialField random_nonnegative_profile(const GridPtr& grid, std::mt19937_64& rng);

/// (2|t|)^{d/2} (1 + 4t^2)^{-d/4}: the dispersive ratio of e^{-r^2/2}.
double gaussian_dispersive_ratio(double t, int dimension);

/// Simulation settings for a timed scenario; zero strides become roughly
/// 200 records and 10 snapshots over the run.
SimulationConfig simulation_config(const ScenarioConfig& c, const RadialGrid& grid);

/// Number of steps evolve takes for this config.
long step_count(const SimulationConfig& c, const RadialGrid& grid);

/// concentration.csv: R,mass_within,fraction on a uniform radius mesh.
void write_concentration(const RadialField& u, const std::filesystem::path& file, int points = 200);

/// Fitted N(t) exponent against |t - t_ref| over the records (t != t_ref).
double frequency_exponent(const Trajectory& traj, double t_ref);

} // namespace criticalwave::app
