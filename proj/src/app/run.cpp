#include "criticalwave/app/run.hpp"

#include "criticalwave/app/svg_chart.hpp"
#include "criticalwave/app/workloads.hpp"
#include "criticalwave/diagnostics.hpp"
#include "criticalwave/ground_state.hpp"
#include "criticalwave/inout.hpp"
#include "criticalwave/radial_spectral.hpp"
#include "criticalwave/random_fields.hpp"
#include "criticalwave/seqbound.hpp"
#include "criticalwave/text_format.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>
#include <fftw3.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#ifndef CRITICALWAVE_VERSION
#define CRITICALWAVE_VERSION "0.0.0"
#endif

namespace criticalwave::app {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& file)
{
    std::ofstream out(file, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + file.string());
    return out;
}

GridPtr configured_grid(const ScenarioConfig& c) { return make_grid(c.dimension, c.r_max, c.n, c.grid); }

GroundStateProfile configured_ground_state(const ScenarioConfig& c)
{
    return solve_ground_state(c.dimension, c.tol, configured_grid(c));
}

// Shared part of the timed scenarios: evolve, store, and check conservation.
Trajectory run_evolution(const ScenarioConfig& c, const RadialField& u0, const fs::path& dir, RunOutcome& outcome)
{
    const SimulationConfig sim = simulation_config(c, *u0.grid);
    const Trajectory traj = evolve(u0, sim);
    write_trajectory(traj, dir, c.echo().dump());
    if (!traj.virial.empty()) {
        auto out = open_out(dir / "virial.csv");
        write_virial_scan(out, traj.virial);
    }
    if (!traj.snapshots.empty())
        write_concentration(traj.snapshots.back().field, dir / "concentration.csv");

    outcome.measurements.emplace_back("steps", static_cast<double>(traj.steps));
    outcome.measurements.emplace_back("dt", traj.dt);
    outcome.measurements.emplace_back("mass_drift", traj.mass_drift);
    outcome.measurements.emplace_back("energy_drift", traj.energy_drift);
    if (traj.termination != Termination::completed) {
        outcome.guard_event = true;
        outcome.guard_reason = to_string(traj.termination) + ": " + traj.guard_reason;
        if (traj.blowup_time)
            outcome.measurements.emplace_back("blowup_time_estimate", *traj.blowup_time);
        return traj;
    }
    outcome.assertions.push_back(Assertion::at_most("mass_drift", traj.mass_drift, 1e-10));
    // the time quadrature needs closely spaced snapshots
    const bool resolved = traj.snapshots.size() >= 3 &&
                          traj.snapshots[1].t - traj.snapshots[0].t <= 5e-3 * (1 + 1e-9);
    try {
        if (resolved)
            outcome.measurements.emplace_back("duhamel_residual",
                                              duhamel_residual(traj, traj.snapshots.front().t, traj.snapshots.back().t));
    } catch (const std::invalid_argument&) {
        // unevenly spaced snapshots
    }
    return traj;
}

void scenario_ground_state(const ScenarioConfig& c, const fs::path& dir, RunOutcome& o)
{
    const auto Q = configured_ground_state(c);
    write_profile(Q, dir / "profile");
    write_concentration(Q.field(), dir / "concentration.csv");
    o.measurements.emplace_back("Q0", Q.q0());
    o.measurements.emplace_back("mass", Q.mass());
    o.assertions.push_back(Assertion::at_most("ode_residual", Q.ode_residual_sup(), 1e-8));
    o.assertions.push_back(Assertion::at_most("energy_over_grad_norm_sq", std::abs(Q.energy()) / Q.grad_norm_sq(), 1e-6));
    o.assertions.push_back(Assertion::at_most("weinstein_relative_gap",
                                              std::abs(Q.weinstein_value() / weinstein_bound(Q) - 1.0), 1e-6));
    if (c.dimension == 1) {
        double worst = 0.0;
        const auto r = Q.grid()->r_nodes();
        for (int i = 0; i < Q.grid()->size(); ++i)
            worst = std::max(worst, std::abs(Q.field().values[i].real() - std::pow(3.0, 0.25) / std::sqrt(std::cosh(2 * r[i]))));
        o.assertions.push_back(Assertion::at_most("closed_form_sup_error", worst, 1e-8));
    }
}

void scenario_soliton(const ScenarioConfig& c, const fs::path& dir, RunOutcome& o)
{
    const auto Q = configured_ground_state(c);
    const auto traj = run_evolution(c, Q.field(), dir, o);
    if (o.guard_event)
        return;
    double sup = 0.0;
    for (const auto& s : traj.snapshots) {
        const auto exact = soliton_solution(Q, s.t - c.t0);
        for (int i = 0; i < s.field.size(); ++i)
            sup = std::max(sup, std::abs(s.field[i] - exact[i]));
    }
    o.assertions.push_back(Assertion::at_most("soliton_sup_error", sup, 1e-6));
    o.assertions.push_back(Assertion::at_most("energy_drift", traj.energy_drift, 1e-6));
    const double cell = Q.grid()->k_nodes()[1] - Q.grid()->k_nodes()[0];
    double spread = 0.0;
    for (const auto& r : traj.records)
        spread = std::max(spread, std::abs(r.N_t - traj.records.front().N_t));
    o.assertions.push_back(Assertion::at_most("frequency_scale_spread_in_cells", spread / cell, 1.0));
    const auto st = spacetime_norm(traj, c.t0, c.t1);
    o.measurements.emplace_back("spacetime_norm", st.value);
    o.measurements.emplace_back("spacetime_over_frequency_integral", st.ratio);
}

void scenario_pseudoconformal(const ScenarioConfig& c, const fs::path& dir, RunOutcome& o)
{
    const auto Q = configured_ground_state(c);
    const auto u0 = Complex(c.amplitude) * pseudoconformal_solution(Q, c.t0);
    o.measurements.emplace_back("initial_mass_over_ground_state_mass", mass(u0) / Q.mass());
    const auto traj = run_evolution(c, u0, dir, o);
    if (o.guard_event)
        return;
    if (c.t1 < 0.0) {
        o.measurements.emplace_back("frequency_scale_exponent", frequency_exponent(traj, 0.0));
        const auto& last = traj.snapshots.back().field;
        o.measurements.emplace_back("concentrated_fraction", mass_concentration(last, std::min(std::pow(-c.t1, 0.25), c.r_max)) / Q.mass());
        if (c.amplitude == 1.0)
            o.assertions.push_back(Assertion::at_most("relative_l2_error_vs_formula", rel_l2(last, pseudoconformal_solution(Q, c.t1)), 1e-4));
    }
}

void scenario_custom_gaussian(const ScenarioConfig& c, const fs::path& dir, RunOutcome& o)
{
    const auto grid = configured_grid(c);
    const auto traj = run_evolution(c, gaussian(grid, c.amplitude, c.width), dir, o);
    if (!o.guard_event)
        o.assertions.push_back(Assertion::at_most("energy_drift", traj.energy_drift, 1e-6));
}

void scenario_virial_scan(const ScenarioConfig& c, const fs::path& dir, RunOutcome& o)
{
    if (!(c.virial_radius > 0.0))
        throw ConfigError("key \"virial_radius\" must be positive or \"inf\" for scenario \"virial_scan\"");
    const auto grid = configured_grid(c);
    const auto traj = run_evolution(c, gaussian(grid, c.amplitude, c.width), dir, o);
    if (o.guard_event)
        return;
    const bool unit = std::isinf(c.virial_radius);
    double worst = 0.0, bound_ratio = 0.0;
    int compared = 0;
    for (std::size_t i = 0; i < traj.virial.size(); ++i) {
        const auto& v = traj.virial[i];
        if (!unit)
            bound_ratio = std::max(bound_ratio, std::abs(v.M_R) / (2 * v.R * std::sqrt(traj.records[i].mass) * traj.records[i].grad_norm));
        if (std::isnan(v.dM_dt_numeric))
            continue;
        ++compared;
        worst = std::max(worst, std::abs(v.dM_dt_numeric - v.term_sum()) / std::abs(v.dM_dt_numeric));
    }
    o.assertions.push_back(Assertion::at_least("virial_samples_compared", compared, 1));
    o.assertions.push_back(Assertion::at_most(unit ? "dMdt_vs_8E_relative" : "dMdt_vs_term_sum_relative", worst, unit ? 1e-4 : 1e-3));
    if (!unit)
        o.assertions.push_back(Assertion::at_most("virial_bound_ratio", bound_ratio, 1.0));
}

void scenario_gn_check(const ScenarioConfig& c, const fs::path& dir, RunOutcome& o)
{
    const auto Q = configured_ground_state(c);
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> log_eps(std::log(1e-3), std::log(1e-1));
    const double jq = weinstein_functional(Q.field());
    const auto focusing = EquationParams::make(-1, c.dimension);
    auto out = open_out(dir / "gn_check.csv");
    out << "trial,epsilon,weinstein_ratio,energy_below_threshold\n";
    double worst_ratio = 0.0, min_energy = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < c.trials; ++trial) {
        const auto h = random_smooth_field(Q.grid(), rng, {.max_width = 2.0, .center_fraction = 0.1});
        const double eps = std::exp(log_eps(rng));
        const double ratio = weinstein_functional(Q.field() + Complex(eps * std::sqrt(Q.mass() / mass(h))) * h) / jq;
        const double e = energy(with_mass(random_smooth_field(Q.grid(), rng), c.mass_fraction * Q.mass()), focusing);
        worst_ratio = std::max(worst_ratio, ratio);
        min_energy = std::min(min_energy, e);
        out << trial << ',' << fmt17(eps) << ',' << fmt17(ratio) << ',' << fmt17(e) << '\n';
    }
    o.assertions.push_back(Assertion::at_most("max_weinstein_ratio", worst_ratio, 1.0 + 1e-9));
    o.assertions.push_back(Assertion::above("min_energy_below_threshold", min_energy, 0.0));
}

void scenario_inout_check(const ScenarioConfig& c, const fs::path& dir, RunOutcome& o)
{
    const auto grid = configured_grid(c);
    std::mt19937_64 rng(c.seed);
    double worst_identity = 0.0, worst_pv = 0.0;
    {
        auto out = open_out(dir / "inout_check.csv");
        out << "trial,identity_error,pv_error,pv_quadrature_error\n";
        for (int trial = 0; trial < c.trials; ++trial) {
            const auto f = random_band_limited(grid, rng);
            const auto plus = p_plus_spectral(f);
            const double id = rel_l2(plus + p_minus_spectral(f), f);
            const auto pv = p_plus_pv_estimate(f);
            const double pv_err = rel_l2(pv.value, plus);
            worst_identity = std::max(worst_identity, id);
            worst_pv = std::max(worst_pv, pv_err);
            out << trial << ',' << fmt17(id) << ',' << fmt17(pv_err) << ',' << fmt17(pv.max_error) << '\n';
        }
    }
    o.assertions.push_back(Assertion::at_most("identity_relative_error", worst_identity, 1e-8));
    o.assertions.push_back(Assertion::at_most("pv_vs_spectral_relative_error", worst_pv, 1e-6));

    auto out = open_out(dir / "exterior_probe.csv");
    out << "N,inner_radius,constant\n";
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double N : c.probe_N) {
        const auto probe = exterior_bound_probe(N, c.trials, c.seed);
        lo = std::min(lo, probe.constant);
        hi = std::max(hi, probe.constant);
        out << fmt17(N) << ',' << fmt17(probe.inner_radius) << ',' << fmt17(probe.constant) << '\n';
    }
    o.assertions.push_back(Assertion::below("exterior_constant_spread", hi / lo, 2.0));
}

void scenario_kernel_scan(const ScenarioConfig& c, const fs::path& dir, RunOutcome& o)
{
    std::vector<InOutKernelSample> samples;
    for (double t : log_space(c.t_min, c.t_max, c.t_count))
        for (double y : lin_space(c.y_min, c.y_max, c.y_count))
            samples.push_back(inout_kernel(c.kernel_N, t, c.x, y, c.sign, c.dimension));
    auto out = open_out(dir / "kernel_scan.csv");
    write_kernel_scan(out, samples);

    const auto& s = samples.front();
    const Complex scaled = std::pow(s.N, c.dimension) * inout_kernel(1.0, s.N * s.N * s.t, s.N * s.x_mag, s.N * s.y_mag, c.sign, c.dimension).value;
    o.assertions.push_back(Assertion::at_most("scaling_identity_relative_error", std::abs(scaled - s.value) / std::abs(scaled), 1e-8));
    const Complex mirrored = inout_kernel(s.N, s.t, s.x_mag, s.y_mag, -c.sign, c.dimension).value;
    o.assertions.push_back(Assertion::at_most("conjugation_error", std::abs(mirrored - std::conj(s.value)), 0.0));
}

void scenario_gronwall_fuzz(const ScenarioConfig& c, const fs::path& dir, RunOutcome& o)
{
    GronwallProblem p;
    if (c.ratio == 0.0) {
        std::mt19937_64 rng(c.seed);
        p = random_gronwall_problem(rng, c.length);
    } else {
        p.ratio = c.ratio;
        p.K = c.K;
        p.sigma = c.sigma;
        for (int k = 0; k < c.length; ++k)
            p.b.push_back(std::pow(2.0, -c.sigma * k));
    }
    FuzzOptions opts;
    opts.seed = c.seed;
    opts.envelope = c.envelope;
    const auto report = gronwall_fuzz(p, c.trials, opts);
    open_out(dir / "fuzz.json") << report.to_json() << '\n';

    const auto exact = gronwall_exact(p);
    const auto bound = gronwall_bound(p);
    const auto decay = decay_estimate(p);
    auto out = open_out(dir / "sequences.csv");
    out << "k,b,exact,bound,decay_envelope\n";
    for (std::size_t k = 0; k < p.b.size(); ++k)
        out << k << ',' << fmt17(p.b[k]) << ',' << fmt17(exact[k]) << ',' << fmt17(bound[k]) << ','
            << fmt17(decay.output_constant * std::pow(2.0, -p.sigma * static_cast<double>(k))) << '\n';

    o.measurements.emplace_back("ratio", p.ratio);
    o.measurements.emplace_back("K", p.K);
    o.measurements.emplace_back("sigma", p.sigma);
    o.measurements.emplace_back("contraction", decay.contraction);
    o.assertions.push_back(Assertion::at_most("failures", static_cast<double>(report.failures.size()), 0.0));
    o.assertions.push_back(Assertion::at_most("max_ratio_exact_over_bound", report.max_ratio_exact_over_bound, c.envelope));
}

void scenario_dispersive_check(const ScenarioConfig& c, const fs::path& dir, RunOutcome& o)
{
    const auto grid = configured_grid(c);
    std::mt19937_64 rng(c.seed);
    auto out = open_out(dir / "dispersive.csv");
    out << "profile,t,ratio\n";
    double worst = 0.0, closed_form = 0.0;
    const auto g = gaussian(grid);
    for (double t : c.times) {
        const double r = dispersive_check(g, t);
        worst = std::max(worst, r);
        closed_form = std::max(closed_form, std::abs(r / gaussian_dispersive_ratio(t, c.dimension) - 1.0));
        out << 0 << ',' << fmt17(t) << ',' << fmt17(r) << '\n';
    }
    for (int trial = 1; trial <= c.trials; ++trial) {
        const auto f = random_nonnegative_profile(grid, rng);
        for (double t : c.times) {
            const double r = dispersive_check(f, t);
            worst = std::max(worst, r);
            out << trial << ',' << fmt17(t) << ',' << fmt17(r) << '\n';
        }
    }
    o.assertions.push_back(Assertion::at_most("max_ratio", worst, 1.0 + 1e-6));
    o.assertions.push_back(Assertion::at_most("gaussian_closed_form_relative_error", closed_form, 1e-6));
}

// ---- plotting -------------------------------------------------------------

struct Table
{
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    const std::vector<double>* column(const std::string& name) const
    {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name)
                return &columns[i];
        return nullptr;
    }
};

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream s(line);
    std::string cell;
    while (std::getline(s, cell, ','))
        out.push_back(cell);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

Table read_table(const fs::path& file)
{
    std::ifstream in(file);
    if (!in)
        throw std::runtime_error("cannot open " + file.string());
    Table t;
    std::string line;
    std::getline(in, line);
    t.header = split_csv(line);
    t.columns.resize(t.header.size());
    while (std::getline(in, line)) {
        const auto cells = split_csv(line);
        for (std::size_t i = 0; i < t.header.size(); ++i) {
            double v = std::numeric_limits<double>::quiet_NaN();
            if (i < cells.size() && !cells[i].empty()) {
                char* end = nullptr;
                v = std::strtod(cells[i].c_str(), &end);
                if (end == cells[i].c_str())
                    v = std::numeric_limits<double>::quiet_NaN();
            }
            t.columns[i].push_back(v);
        }
    }
    return t;
}

const std::vector<double>& need(const Table& t, const std::string& name, const fs::path& file)
{
    const auto* c = t.column(name);
    if (!c)
        throw std::runtime_error(file.string() + ": missing column " + name);
    return *c;
}

std::string label_number(const std::string& prefix, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%.4g", prefix.c_str(), v);
    return buf;
}

void plot_profiles(const fs::path& dir, std::vector<fs::path>& written)
{
    const auto index_file = dir / "snapshots" / "index.json";
    std::ifstream in(index_file);
    const auto index = Json::parse(in);
    const auto& g = index["grid"];
    const auto grid = make_grid(g["dimension"].get<int>(), g["r_max"].get<double>(), g["n"].get<int>(),
                                parse_grid_scheme(g["scheme"].get<std::string>()));
    const auto& snaps = index["snapshots"];
    const std::size_t count = snaps.size();
    const std::size_t shown = std::min<std::size_t>(count, 6);
    Chart chart{"|u(t, r)| snapshots", "r", "|u|", false, false, {}};
    double peak = 0.0, extent = 0.0;
    std::vector<std::vector<double>> mags;
    for (std::size_t j = 0; j < shown; ++j) {
        const std::size_t i = shown == 1 ? 0 : j * (count - 1) / (shown - 1);
        const auto values = read_snapshot(dir / "snapshots" / snaps[i]["file"].get<std::string>());
        std::vector<double> m;
        for (const auto& v : values)
            m.push_back(std::abs(std::complex<double>(v)));
        peak = std::max(peak, *std::ranges::max_element(m));
        mags.push_back(std::move(m));
        chart.series.push_back({label_number("t = ", snaps[i]["t"].get<double>()), {}, {}});
    }
    for (const auto& m : mags)
        for (std::size_t k = 0; k < m.size(); ++k)
            if (m[k] > 1e-3 * peak)
                extent = std::max(extent, grid->r_nodes()[k]);
    extent = std::min(grid->r_max(), 1.2 * extent + 1e-12);
    for (std::size_t j = 0; j < mags.size(); ++j)
        for (std::size_t k = 0; k < mags[j].size(); ++k)
            if (grid->r_nodes()[k] <= extent) {
                chart.series[j].x.push_back(grid->r_nodes()[k]);
                chart.series[j].y.push_back(mags[j][k]);
            }
    chart.write(dir / "profiles.svg");
    written.push_back(dir / "profiles.svg");
}

void plot_frequency_scale(const fs::path& dir, std::vector<fs::path>& written)
{
    const auto file = dir / "diagnostics.csv";
    const auto t = read_table(file);
    const auto& ts = need(t, "t", file);
    const auto& ns = need(t, "N_t", file);
    const bool before_zero = !ts.empty() && ts.back() < 0.0;
    Series s{before_zero ? "N(t) against |t|" : "N(t)", {}, {}};
    for (std::size_t i = 0; i < ts.size(); ++i) {
        s.x.push_back(before_zero ? -ts[i] : ts[i]);
        s.y.push_back(ns[i]);
    }
    Chart chart{"frequency scale N(t)", before_zero ? "|t|" : "t", "N(t)", true, true, {s}};
    chart.write(dir / "frequency_scale.svg");
    written.push_back(dir / "frequency_scale.svg");
}

void plot_virial(const fs::path& dir, std::vector<fs::path>& written)
{
    const auto file = dir / "virial.csv";
    const auto t = read_table(file);
    Chart chart{"virial terms", "t", "value", false, false, {}};
    const auto& ts = need(t, "t", file);
    for (const char* name : {"M_R", "dMdt", "term8E", "M2", "M3", "M4"})
        chart.series.push_back({name, ts, need(t, name, file)});
    chart.write(dir / "virial.svg");
    written.push_back(dir / "virial.svg");
}

void plot_concentration(const fs::path& dir, std::vector<fs::path>& written)
{
    const auto file = dir / "concentration.csv";
    const auto t = read_table(file);
    Chart chart{"mass concentration", "R", "fraction of the mass in |x| <= R", false, false,
                {{"final state", need(t, "R", file), need(t, "fraction", file)}}};
    chart.write(dir / "concentration.svg");
    written.push_back(dir / "concentration.svg");
}

void plot_ground_state(const fs::path& dir, std::vector<fs::path>& written)
{
    const auto file = dir / "profile.csv";
    const auto t = read_table(file);
    Chart chart{"ground state", "r", "Q(r)", false, false, {{"Q", need(t, "r", file), need(t, "Q", file)}}};
    chart.write(dir / "ground_state.svg");
    written.push_back(dir / "ground_state.svg");
}

void plot_kernel_scan(const fs::path& dir, std::vector<fs::path>& written)
{
    const auto file = dir / "kernel_scan.csv";
    const auto t = read_table(file);
    const auto& ts = need(t, "t", file);
    const auto& ys = need(t, "y", file);
    const auto& re = need(t, "re", file);
    const auto& im = need(t, "im", file);
    std::vector<double> distinct;
    for (double v : ts)
        if (distinct.empty() || distinct.back() != v)
            distinct.push_back(v);
    const std::size_t shown = std::min<std::size_t>(distinct.size(), 6);
    Chart chart{"in/out kernel magnitude", "|y|", "|K|", false, true, {}};
    for (std::size_t j = 0; j < shown; ++j) {
        const double tv = distinct[shown == 1 ? 0 : j * (distinct.size() - 1) / (shown - 1)];
        Series s{label_number("t = ", tv), {}, {}};
        for (std::size_t i = 0; i < ts.size(); ++i)
            if (ts[i] == tv) {
                s.x.push_back(ys[i]);
                s.y.push_back(std::hypot(re[i], im[i]));
            }
        chart.series.push_back(std::move(s));
    }
    chart.write(dir / "kernel_scan.svg");
    written.push_back(dir / "kernel_scan.svg");
}

void plot_gronwall(const fs::path& dir, std::vector<fs::path>& written)
{
    const auto file = dir / "sequences.csv";
    const auto t = read_table(file);
    const auto& k = need(t, "k", file);
    Chart chart{"Gronwall recursion", "k", "value", false, true, {}};
    for (const char* name : {"b", "exact", "bound", "decay_envelope"})
        chart.series.push_back({name, k, need(t, name, file)});
    chart.write(dir / "gronwall.svg");
    written.push_back(dir / "gronwall.svg");
}

void plot_dispersive(const fs::path& dir, std::vector<fs::path>& written)
{
    const auto file = dir / "dispersive.csv";
    const auto t = read_table(file);
    const auto& profile = need(t, "profile", file);
    const auto& ts = need(t, "t", file);
    const auto& ratio = need(t, "ratio", file);
    Series gauss{"Gaussian", {}, {}};
    std::vector<std::pair<double, double>> worst; // (|t|, max ratio over random profiles)
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (profile[i] == 0.0) {
            gauss.x.push_back(std::abs(ts[i]));
            gauss.y.push_back(ratio[i]);
            continue;
        }
        auto it = std::ranges::find_if(worst, [&](const auto& p) { return p.first == std::abs(ts[i]); });
        if (it == worst.end())
            worst.emplace_back(std::abs(ts[i]), ratio[i]);
        else
            it->second = std::max(it->second, ratio[i]);
    }
    std::ranges::sort(worst);
    Series rnd{"max over random profiles", {}, {}};
    for (const auto& [x, y] : worst) {
        rnd.x.push_back(x);
        rnd.y.push_back(y);
    }
    Chart chart{"dispersive ratio", "|t|", "ratio", true, false, {gauss, rnd}};
    chart.write(dir / "dispersive.svg");
    written.push_back(dir / "dispersive.svg");
}

std::string iso_time_utc()
{
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void prepare_output_dir(const fs::path& dir)
{
    if (fs::exists(dir)) {
        if (!fs::is_directory(dir))
            throw ConfigError("output \"" + dir.string() + "\" exists and is not a directory");
        if (!fs::is_empty(dir)) {
            if (!fs::exists(dir / "manifest.json"))
                throw ConfigError("output directory \"" + dir.string() + "\" is not empty and holds no previous run");
            for (const auto& entry : fs::directory_iterator(dir))
                fs::remove_all(entry.path());
        }
    }
    fs::create_directories(dir);
}

} // namespace

int RunOutcome::exit_status() const
{
    if (guard_event)
        return exit_guard_event;
    return all_passed(assertions) ? exit_ok : exit_assertion_failure;
}

Json to_json(const std::vector<Assertion>& checks)
{
    Json a = Json::array();
    for (const auto& c : checks)
        a.push_back({{"name", c.name}, {"value", c.value}, {"op", c.op_symbol()}, {"limit", c.limit}, {"passed", c.passed}});
    return a;
}

RunOutcome run_scenario(const ScenarioConfig& c, const fs::path& dir)
{
    RunOutcome o;
    switch (c.scenario) {
    case Scenario::ground_state:
        scenario_ground_state(c, dir, o);
        break;
    case Scenario::soliton:
        scenario_soliton(c, dir, o);
        break;
    case Scenario::pseudoconformal:
        scenario_pseudoconformal(c, dir, o);
        break;
    case Scenario::custom_gaussian:
        scenario_custom_gaussian(c, dir, o);
        break;
    case Scenario::gn_check:
        scenario_gn_check(c, dir, o);
        break;
    case Scenario::virial_scan:
        scenario_virial_scan(c, dir, o);
        break;
    case Scenario::inout_check:
        scenario_inout_check(c, dir, o);
        break;
    case Scenario::kernel_scan:
        scenario_kernel_scan(c, dir, o);
        break;
    case Scenario::gronwall_fuzz:
        scenario_gronwall_fuzz(c, dir, o);
        break;
    case Scenario::dispersive_check:
        scenario_dispersive_check(c, dir, o);
        break;
    }
    return o;
}

std::vector<fs::path> write_plots(const fs::path& dir)
{
    std::vector<fs::path> written;
    if (fs::exists(dir / "snapshots" / "index.json"))
        plot_profiles(dir, written);
    if (fs::exists(dir / "diagnostics.csv"))
        plot_frequency_scale(dir, written);
    if (fs::exists(dir / "virial.csv"))
        plot_virial(dir, written);
    if (fs::exists(dir / "concentration.csv"))
        plot_concentration(dir, written);
    if (fs::exists(dir / "profile.csv"))
        plot_ground_state(dir, written);
    if (fs::exists(dir / "kernel_scan.csv"))
        plot_kernel_scan(dir, written);
    if (fs::exists(dir / "sequences.csv"))
        plot_gronwall(dir, written);
    if (fs::exists(dir / "dispersive.csv"))
        plot_dispersive(dir, written);
    return written;
}

Json version_info()
{
    Json v;
    v["criticalwave"] = CRITICALWAVE_VERSION;
    v["fftw"] = std::string(fftw_version);
    v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                 std::to_string(EIGEN_MINOR_VERSION);
    v["boost"] = std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000) + "." +
                 std::to_string(BOOST_VERSION % 100);
    v["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                         std::to_string(NLOHMANN_JSON_VERSION_PATCH);
    v["compiler"] = __VERSION__;
    return v;
}

int thread_limit()
{
    int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("CRITICALWAVE_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && cap > 0)
            n = static_cast<int>(std::min<long>(n, cap));
    }
    return n;
}

int run_command(const fs::path& config_file, std::ostream& out, std::ostream& err)
{
    ScenarioConfig config;
    try {
        config = load_config(config_file);
        prepare_output_dir(config.output);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config_error;
    }

    const auto started = std::chrono::steady_clock::now();
    const std::string started_at = iso_time_utc();
    RunOutcome outcome;
    std::string failure;
    bool config_failure = false;
    try {
        outcome = run_scenario(config, config.output);
    } catch (const ConfigError& e) {
        failure = e.what();
        config_failure = true;
    } catch (const std::invalid_argument& e) {
        failure = e.what();
        config_failure = true;
    } catch (const std::domain_error& e) {
        // data that the configured grid cannot hold
        failure = e.what();
        config_failure = true;
    } catch (const std::exception& e) {
        failure = e.what();
        outcome.assertions.push_back(Assertion::holds("scenario_completed", false));
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    Json manifest;
    if (fs::exists(config.output / "manifest.json")) {
        std::ifstream in(config.output / "manifest.json");
        manifest = Json::parse(in);
    }
    manifest["config"] = config.echo();
    manifest["versions"] = version_info();
    manifest["started_at"] = started_at;
    manifest["wall_time_seconds"] = wall;
    manifest["assertions"] = to_json(outcome.assertions);
    Json measured = Json::object();
    for (const auto& [name, value] : outcome.measurements)
        measured[name] = value;
    manifest["measurements"] = measured;
    if (outcome.guard_event)
        manifest["guard_event"] = outcome.guard_reason;
    if (!failure.empty())
        manifest["error"] = failure;
    const int status = config_failure ? static_cast<int>(exit_config_error) : outcome.exit_status();
    manifest["exit_status"] = status;
    std::ofstream(config.output / "manifest.json", std::ios::binary) << manifest.dump(2) << '\n';

    try {
        write_plots(config.output);
    } catch (const std::exception& e) {
        err << "plot error: " << e.what() << '\n';
    }

    out << to_string(config.scenario) << " -> " << config.output.string() << '\n';
    for (const auto& [name, value] : outcome.measurements)
        out << "  " << name << " = " << fmt17(value) << '\n';
    for (const auto& a : outcome.assertions)
        out << (a.passed ? "  PASS " : "  FAIL ") << a.summary() << '\n';
    if (outcome.guard_event)
        out << "  GUARD " << outcome.guard_reason << '\n';
    if (!failure.empty())
        err << (config_failure ? "config error: " : "error: ") << failure << '\n';
    return status;
}

int plot_command(const fs::path& dir, std::ostream& out, std::ostream& err)
{
    if (!fs::is_directory(dir)) {
        err << "config error: " << dir.string() << " is not a directory\n";
        return exit_config_error;
    }
    try {
        const auto files = write_plots(dir);
        if (files.empty())
            out << "no plottable data in " << dir.string() << '\n';
        for (const auto& f : files)
            out << f.string() << '\n';
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_assertion_failure;
    }
    return exit_ok;
}

} // namespace criticalwave::app
