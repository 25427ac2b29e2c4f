#pragma once

#include "criticalwave/diagnostics.hpp"
#include "criticalwave/radial_field.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace criticalwave {

struct SimulationConfig
{
    EquationParams params;
    /// Time step; 0 selects the default pi / (2 k_max^2). The step is shrunk
    /// so that an integer number of steps spans [t0, t1].
    double dt = 0.0;
    double t0 = 0.0;
    double t1 = 1.0;
    /// Steps between diagnostic records and between snapshots (0 = none).
    int record_stride = 1;
    int snapshot_stride = 0;
    /// Blowup guard: gradient norm above gradient_cap times its initial
    /// value, or spectral mass above 0.9 of the resolved band above
    /// tail_cap times the mass.
    double gradient_cap = 100.0;
    double tail_cap = 1e-6;
    /// Resolution guard: mass in the outer 5% of the box above boundary_cap.
    double boundary_cap = 1e-8;
    /// Tail fraction for N(t).
    double eta = 0.01;
    /// Virial monitor radius; 0 disables it, infinity uses psi = 1.
    double virial_radius = 0.0;

    void validate(const RadialGrid& grid) const;
};

/// pi / (2 k_max^2).
double default_time_step(const RadialGrid& grid);

struct DiagnosticRecord
{
    double t = 0.0;
    double mass = 0.0;
    double energy = 0.0;
    double grad_norm = 0.0;
    double N_t = 0.0;
    double C_eta = 0.0;
    /// int |u|^{2(d+2)/d} dx dt since the previous record.
    double spacetime_increment = 0.0;
};

struct Snapshot
{
    double t = 0.0;
    RadialField field;
};

enum class Termination
{
    completed,
    blowup_guard,
    resolution_guard
};

std::string to_string(Termination termination);

struct Trajectory
{
    EquationParams params;
    GridPtr grid;
    double dt = 0.0;
    long steps = 0;
    std::vector<DiagnosticRecord> records;
    std::vector<VirialRecord> virial;
    std::vector<Snapshot> snapshots;
    Termination termination = Termination::completed;
    std::optional<double> blowup_time;
    std::string guard_reason;
    /// max |M(t) - M(t0)| / M(t0) over the records.
    double mass_drift = 0.0;
    /// max |E(t) - E(t0)| / max(|E(t0)|, kinetic energy at t0).
    double energy_drift = 0.0;

    std::vector<double> times() const;
    /// Snapshot at time t (within 1e-9 of the step size); nullptr if absent.
    const Snapshot* snapshot_at(double t) const;
};

/// mu |f|^{4/d} f.
RadialField nonlinearity(const RadialField& f, const EquationParams& params);

/// One Strang step: half free flow, exact nonlinear phase, half free flow.
RadialField step(const RadialField& u, double dt, const EquationParams& params);

/// Runs the split-step scheme over [t0, t1]. Guard events end the run and
/// are recorded in the trajectory; invalid configurations throw
/// invalid_argument.
Trajectory evolve(const RadialField& u0, const SimulationConfig& config);

/// ||u(t1) - e^{i(t1-t0)Lap} u(t0) + i int_{t0}^{t1} e^{i(t1-s)Lap} F(u(s)) ds||_2
/// with composite Simpson quadrature over the snapshots in [t0, t1]
/// (a 3/8 panel closes an odd count). Throws invalid_argument when a
/// snapshot is missing or fewer than three are available.
double duhamel_residual(const Trajectory& traj, double t0, double t1);

/// Writes manifest.json, diagnostics.csv, and (if any) snapshots/ with
/// little-endian complex64 arrays and snapshots/index.json. `config_echo`
/// is an already serialized JSON object.
void write_trajectory(const Trajectory& traj, const std::filesystem::path& dir, const std::string& config_echo);

/// Reads one complex64 snapshot file written by write_trajectory.
std::vector<std::complex<float>> read_snapshot(const std::filesystem::path& file);

} // namespace criticalwave
