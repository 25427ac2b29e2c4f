#include "criticalwave/app/suite.hpp"

#include "criticalwave/app/run.hpp"
#include "criticalwave/app/workloads.hpp"
#include "criticalwave/diagnostics.hpp"
#include "criticalwave/evolution.hpp"
#include "criticalwave/ground_state.hpp"
#include "criticalwave/inout.hpp"
#include "criticalwave/littlewood_paley.hpp"
#include "criticalwave/radial_spectral.hpp"
#include "criticalwave/random_fields.hpp"
#include "criticalwave/seqbound.hpp"
#include "criticalwave/text_format.hpp"

#include <nlohmann/json.hpp>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

namespace criticalwave::app {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Context
{
    SuiteKind kind;
    std::uint64_t seed;
    int id;
    fs::path dir;
    std::vector<Assertion> checks;

    bool full() const { return kind == SuiteKind::full; }
    int count(int fast, int full_count) const { return full() ? full_count : fast; }

    std::mt19937_64 rng(int stream = 0) const
    {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(stream)};
        return std::mt19937_64(seq);
    }

    std::ofstream csv(const std::string& name, const std::string& header) const
    {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot write " + (dir / name).string());
        out << header << '\n';
        return out;
    }

    void at_most(std::string name, double v, double limit) { checks.push_back(Assertion::at_most(std::move(name), v, limit)); }
    void below(std::string name, double v, double limit) { checks.push_back(Assertion::below(std::move(name), v, limit)); }
    void above(std::string name, double v, double limit) { checks.push_back(Assertion::above(std::move(name), v, limit)); }
    void holds(std::string name, bool c) { checks.push_back(Assertion::holds(std::move(name), c)); }
};

std::string row(std::initializer_list<std::string> cells)
{
    std::string s;
    for (const auto& c : cells)
        s += (s.empty() ? "" : ",") + c;
    return s;
}

std::string f17(double v) { return fmt17(v); }

// ---- 1: transforms --------------------------------------------------------

void transform_fidelity(Context& c)
{
    // fields that have decayed well inside r_max = 20
    const RandomFieldOptions kCompact{.max_width = 2.0, .center_fraction = 0.1};
    auto out = c.csv("transform.csv", "check,dimension,scheme,case,value");
    auto rng = c.rng();
    double round_trip = 0.0;
    for (int d = 1; d <= 5; ++d) {
        const auto g = make_grid(d, 20.0, 512, GridScheme::dense);
        for (int trial = 0; trial < 3; ++trial) {
            const auto f = random_smooth_field(g, rng, kCompact);
            const double e = rel_l2(hankel_inverse(hankel_forward(f)), f);
            round_trip = std::max(round_trip, e);
            out << row({"round_trip", std::to_string(d), "dense", std::to_string(trial), f17(e)}) << '\n';
        }
    }
    const auto sine = make_grid(3, 20.0, 512, GridScheme::sine);
    for (int trial = 0; trial < 3; ++trial) {
        const auto f = random_smooth_field(sine, rng, kCompact);
        const double e = rel_l2(hankel_inverse(hankel_forward(f)), f);
        round_trip = std::max(round_trip, e);
        out << row({"round_trip", "3", "sine", std::to_string(trial), f17(e)}) << '\n';
    }
    c.at_most("round_trip_relative_l2", round_trip, 1e-10);

    double duality = 0.0;
    const auto self_dual = [&](const GridPtr& g) {
        const auto F = hankel_forward(gaussian(g));
        SpectralField G(g);
        double e = 0.0;
        for (int m = 0; m < g->size(); ++m) {
            const double k = g->k_nodes()[m];
            G.values[m] = std::exp(-k * k / 2);
            e = std::max(e, std::abs(F.values[m] - G.values[m]));
        }
        const auto back = hankel_inverse(G);
        const auto want = gaussian(g);
        for (int j = 0; j < g->size(); ++j)
            e = std::max(e, std::abs(back.values[j] - want.values[j]));
        duality = std::max(duality, e);
        out << row({"gaussian_self_duality", std::to_string(g->dimension()), to_string(g->scheme()), "0", f17(e)}) << '\n';
    };
    for (int d = 1; d <= 6; ++d)
        self_dual(make_grid(d, 20.0, 512, GridScheme::dense));
    self_dual(sine);
    c.at_most("gaussian_self_duality_sup", duality, 1e-8);

    const auto dense = make_grid(3, 20.0, 512, GridScheme::dense);
    double agreement = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        auto a = rng;
        const auto fd = random_smooth_field(dense, a, kCompact);
        const auto fs = random_smooth_field(sine, rng, kCompact);
        const auto Fs = hankel_forward(fs);
        double err = 0.0, peak = 0.0;
        for (int m = 0; m < sine->size(); m += 7) {
            err = std::max(err, std::abs(dense->forward_at(fd.values, sine->k_nodes()[m]) - Fs.values[m]));
            peak = std::max(peak, std::abs(Fs.values[m]));
        }
        agreement = std::max(agreement, err / peak);
        out << row({"dense_vs_sine", "3", "both", std::to_string(trial), f17(err / peak)}) << '\n';
    }
    c.at_most("dense_vs_sine_relative", agreement, 1e-8);
}

// ---- 2, 3: in/out projections ---------------------------------------------

void inout_identity(Context& c)
{
    const auto g = make_grid(3, 30.0, 512, GridScheme::sine);
    auto rng = c.rng();
    auto out = c.csv("identity.csv", "trial,relative_l2_defect");
    double worst = 0.0;
    const int fields = c.count(10, 50);
    for (int trial = 0; trial < fields; ++trial) {
        const auto f = random_band_limited(g, rng);
        const double e = rel_l2(p_plus_spectral(f) + p_minus_spectral(f), f);
        worst = std::max(worst, e);
        out << trial << ',' << f17(e) << '\n';
    }
    c.checks.push_back(Assertion::at_least("fields", fields, c.full() ? 50 : 10));
    c.at_most("identity_defect_relative_l2", worst, 1e-8);
}

void pv_and_exterior(Context& c)
{
    const auto g = make_grid(3, 30.0, 512, GridScheme::sine);
    auto rng = c.rng();
    {
        auto out = c.csv("pv_vs_spectral.csv", "trial,relative_l2,pv_quadrature_error");
        double worst = 0.0;
        for (int trial = 0; trial < c.count(10, 50); ++trial) {
            const auto f = random_band_limited(g, rng);
            const auto pv = p_plus_pv_estimate(f);
            const double e = rel_l2(pv.value, p_plus_spectral(f));
            worst = std::max(worst, e);
            out << trial << ',' << f17(e) << ',' << f17(pv.max_error) << '\n';
        }
        c.at_most("pv_vs_spectral_relative_l2", worst, 1e-6);
    }
    auto out = c.csv("exterior_probe.csv", "N,inner_radius,constant");
    double lo = kInf, hi = 0.0;
    for (double N : {1.0, 4.0, 16.0, 64.0}) {
        const auto probe = exterior_bound_probe(N, c.count(10, 20), c.seed);
        lo = std::min(lo, probe.constant);
        hi = std::max(hi, probe.constant);
        out << f17(N) << ',' << f17(probe.inner_radius) << ',' << f17(probe.constant) << '\n';
    }
    c.below("exterior_constant_max_over_min", hi / lo, 2.0);
}

// ---- 4: kernel exponents --------------------------------------------------

// least squares for log|K| = c0 + a log t + b log(xy)
std::array<double, 3> fit_plane(const std::vector<std::array<double, 3>>& rows, const std::vector<double>& rhs)
{
    double A[3][3] = {}, b[3] = {};
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (int p = 0; p < 3; ++p) {
            b[p] += rows[i][p] * rhs[i];
            for (int q = 0; q < 3; ++q)
                A[p][q] += rows[i][p] * rows[i][q];
        }
    for (int p = 0; p < 3; ++p)
        for (int q = p + 1; q < 3; ++q) {
            const double m = A[q][p] / A[p][p];
            for (int k = 0; k < 3; ++k)
                A[q][k] -= m * A[p][k];
            b[q] -= m * b[p];
        }
    std::array<double, 3> sol{};
    for (int p = 2; p >= 0; --p) {
        double s = b[p];
        for (int q = p + 1; q < 3; ++q)
            s -= A[p][q] * sol[q];
        sol[p] = s / A[p][p];
    }
    return sol;
}

void kernel_exponents(Context& c)
{
    auto out = c.csv("exponents.csv", "kernel,dimension,N,quantity,fitted,expected");
    double worst_lp = 0.0;
    const std::vector<int> lp_dims = c.full() ? std::vector<int>{1, 2, 3, 4, 5} : std::vector<int>{1, 3};
    const std::vector<double> Ns = c.full() ? std::vector<double>{1.0, 4.0} : std::vector<double>{1.0};
    for (int d : lp_dims)
        for (double N : Ns) {
            std::vector<double> ts, mags;
            for (double t : log_space(100.0 / (N * N), 1000.0 / (N * N), 9)) {
                ts.push_back(t);
                mags.push_back(std::abs(pn_kernel(N, t, 1.6 * N * t, 0.0, d)));
            }
            const double slope = loglog_slope(ts, mags);
            worst_lp = std::max(worst_lp, std::abs(slope + 0.5 * d));
            out << row({"littlewood_paley", std::to_string(d), f17(N), "t", f17(slope), f17(-0.5 * d)}) << '\n';
        }
    c.at_most("littlewood_paley_t_exponent_deviation", worst_lp, 0.1);

    double worst_t = 0.0, worst_r = 0.0;
    const std::vector<int> io_dims = c.full() ? std::vector<int>{2, 3, 4} : std::vector<int>{3};
    for (int d : io_dims)
        for (double N : Ns) {
            std::vector<std::array<double, 3>> rows;
            std::vector<double> rhs;
            for (double t : log_space(100.0, 1000.0, 5))
                for (double x : log_space(10.0, 100.0, 5)) {
                    const double tt = t / (N * N), xx = x / N, yy = xx + 1.6 * N * tt;
                    const auto s = inout_kernel(N, tt, xx, yy, +1, d);
                    if (s.regime != KernelRegime::stationary)
                        throw std::logic_error("kernel sample outside the stationary regime");
                    rows.push_back({1.0, std::log(tt), std::log(xx * yy)});
                    rhs.push_back(std::log(std::abs(s.value)));
                }
            const auto sol = fit_plane(rows, rhs);
            worst_t = std::max(worst_t, std::abs(sol[1] + 0.5));
            worst_r = std::max(worst_r, std::abs(sol[2] + 0.5 * (d - 1)));
            out << row({"inout", std::to_string(d), f17(N), "t", f17(sol[1]), f17(-0.5)}) << '\n';
            out << row({"inout", std::to_string(d), f17(N), "radius", f17(sol[2]), f17(-0.5 * (d - 1))}) << '\n';
        }
    c.at_most("inout_t_exponent_deviation", worst_t, 0.1);
    c.at_most("inout_radius_exponent_deviation", worst_r, 0.1);

    auto scaling = c.csv("scaling.csv", "kernel,dimension,N,t,x,y,relative_error");
    double worst_scaling = 0.0;
    const auto record = [&](const char* kernel, int d, double N, double t, double x, double y, Complex lhs, Complex rhs) {
        const double e = std::abs(lhs - rhs) / std::abs(rhs);
        worst_scaling = std::max(worst_scaling, e);
        scaling << row({kernel, std::to_string(d), f17(N), f17(t), f17(x), f17(y), f17(e)}) << '\n';
    };
    const std::vector<double> scale_Ns = c.full() ? std::vector<double>{0.5, 4.0, 16.0} : std::vector<double>{4.0};
    for (int d = 1; d <= 4; ++d)
        for (double N : scale_Ns)
            for (auto [t, x, y] : {std::tuple{0.01, 0.3, 0.9}, std::tuple{0.2, 2.0, 0.1}, std::tuple{-0.05, 1.0, 1.0}}) {
                record("littlewood_paley", d, N, t, x, y, pn_kernel(N, t, x, y, d),
                       std::pow(N, d) * pn_kernel(1.0, N * N * t, N * x, N * y, d));
                record("littlewood_paley_radial", d, N, t, x, y, pn_radial_kernel(N, t, x, y, d),
                       std::pow(N, d) * pn_radial_kernel(1.0, N * N * t, N * x, N * y, d));
                if (d >= 2 && N * x >= 0.1)
                    record("inout", d, N, t, x, y, inout_kernel(N, t, x, y, +1, d).value,
                           std::pow(N, d) * inout_kernel(1.0, N * N * t, N * x, N * y, +1, d).value);
            }
    c.at_most("scaling_identity_relative", worst_scaling, 1e-8);
}

// ---- 5, 6: ground state ---------------------------------------------------

void ground_state(Context& c)
{
    auto out = c.csv("ground_state.csv", "dimension,Q0,mass,energy_over_grad_norm_sq,ode_residual,ode_residual_fd,weinstein_gap");
    double residual = 0.0, energy_ratio = 0.0, weinstein_gap = 0.0;
    for (int d = 1; d <= (c.full() ? 6 : 3); ++d) {
        const auto Q = solve_ground_state(d);
        const double fd = ode_residual_fd(Q, std::min(20.0, Q.match_radius() + 8.0));
        const double e = std::abs(Q.energy()) / Q.grad_norm_sq();
        const double gap = std::abs(Q.weinstein_value() / weinstein_bound(Q) - 1.0);
        residual = std::max({residual, Q.ode_residual_sup(), fd});
        energy_ratio = std::max(energy_ratio, e);
        weinstein_gap = std::max(weinstein_gap, gap);
        out << row({std::to_string(d), f17(Q.q0()), f17(Q.mass()), f17(e), f17(Q.ode_residual_sup()), f17(fd), f17(gap)}) << '\n';

        if (d == 1) {
            std::vector<double> probe;
            for (int i = 0; i < 240; ++i)
                probe.push_back(0.173 * i);
            const auto q = Q.evaluate(probe);
            double worst = 0.0;
            for (std::size_t i = 0; i < probe.size(); ++i)
                worst = std::max(worst, std::abs(q[i] - std::pow(3.0, 0.25) / std::sqrt(std::cosh(2 * probe[i]))));
            const auto r = Q.grid()->r_nodes();
            for (int i = 0; i < Q.grid()->size(); ++i)
                worst = std::max(worst, std::abs(Q.field().values[i].real() - std::pow(3.0, 0.25) / std::sqrt(std::cosh(2 * r[i]))));
            c.at_most("d1_closed_form_sup_error", worst, 1e-8);
        }
        if (d == 3) {
            // self-convergence: loosen the step tolerance and change the grid
            const auto coarse = solve_ground_state(3, 1e-8, nullptr, ShootingOptions{1e-12});
            std::vector<double> probe;
            for (int i = 0; i <= 400; ++i)
                probe.push_back(0.05 * i);
            const auto a = Q.evaluate(probe), b = coarse.evaluate(probe);
            double sup = 0.0;
            for (std::size_t i = 0; i < probe.size(); ++i)
                sup = std::max(sup, std::abs(a[i] - b[i]));
            const auto dense = solve_ground_state(3, 1e-8, make_grid(3, 30.0, 512, GridScheme::dense));
            const double mass_gap = std::abs(dense.mass() / Q.mass() - 1.0);
            c.at_most("d3_self_convergence_sup", std::max(sup, mass_gap), 1e-6);

            auto rng = c.rng();
            std::uniform_real_distribution<double> log_eps(std::log(1e-3), std::log(1e-1));
            const double jq = weinstein_functional(Q.field());
            auto w = c.csv("weinstein_perturbations.csv", "trial,epsilon,ratio_to_ground_state");
            double worst = 0.0;
            const int trials = c.count(25, 100);
            for (int trial = 0; trial < trials; ++trial) {
                const auto h = random_smooth_field(Q.grid(), rng, {.max_width = 2.0, .center_fraction = 0.1});
                const double eps = std::exp(log_eps(rng));
                const double ratio = weinstein_functional(Q.field() + Complex(eps * std::sqrt(Q.mass() / mass(h))) * h) / jq;
                worst = std::max(worst, ratio);
                w << trial << ',' << f17(eps) << ',' << f17(ratio) << '\n';
            }
            c.checks.push_back(Assertion::at_least("weinstein_perturbations", trials, c.full() ? 100 : 25));
            c.at_most("weinstein_max_ratio", worst, 1.0 + 1e-9);
        }
    }
    c.at_most("ode_residual", residual, 1e-8);
    c.at_most("energy_over_grad_norm_sq", energy_ratio, 1e-6);
    c.at_most("weinstein_value_vs_sharp_constant", weinstein_gap, 1e-6);
}

void energy_positivity(Context& c)
{
    const auto Q = solve_ground_state(3);
    const auto focusing = EquationParams::make(-1, 3);
    auto rng = c.rng();
    auto out = c.csv("energy_positivity.csv", "trial,mass,energy,kinetic");
    double min_ratio = kInf;
    const int fields = c.count(50, 200);
    for (int trial = 0; trial < fields; ++trial) {
        const auto f = with_mass(random_smooth_field(Q.grid(), rng), 0.9 * Q.mass());
        const double e = energy(f, focusing);
        const double kinetic = 0.5 * grad_norm_sq(f);
        min_ratio = std::min(min_ratio, e / kinetic);
        out << trial << ',' << f17(mass(f)) << ',' << f17(e) << ',' << f17(kinetic) << '\n';
    }
    c.checks.push_back(Assertion::at_least("fields", fields, c.full() ? 200 : 50));
    c.above("min_energy_over_kinetic", min_ratio, 0.0);
}

// ---- 7, 8: dynamics -------------------------------------------------------

SimulationConfig sim(int mu, double t0, double t1, double dt, int record_stride, int snapshot_stride)
{
    SimulationConfig s;
    s.params = EquationParams::make(mu, 3);
    s.t0 = t0;
    s.t1 = t1;
    s.dt = dt;
    s.record_stride = record_stride;
    s.snapshot_stride = snapshot_stride;
    return s;
}

std::string echo(const std::string& what, const SimulationConfig& s)
{
    return Json{{"run", what}, {"t0", s.t0}, {"t1", s.t1}, {"dt", s.dt}, {"record_stride", s.record_stride},
                {"snapshot_stride", s.snapshot_stride}}
        .dump();
}

void dynamics(Context& c)
{
    const auto Q = solve_ground_state(3);
    double mass_drift = 0.0, energy_drift = 0.0;

    const double t_soliton = c.full() ? 1.0 : 0.25;
    const auto s1 = sim(-1, 0.0, t_soliton, 5e-5, 500, 1000);
    const auto soliton = evolve(Q.field(), s1);
    write_trajectory(soliton, c.dir / "soliton", echo("soliton", s1));
    c.holds("soliton_completed", soliton.termination == Termination::completed);
    double sup = 0.0;
    for (const auto& s : soliton.snapshots) {
        const auto exact = soliton_solution(Q, s.t);
        for (int i = 0; i < s.field.size(); ++i)
            sup = std::max(sup, std::abs(s.field[i] - exact[i]));
    }
    c.at_most("soliton_sup_error", sup, 1e-6);
    mass_drift = std::max(mass_drift, soliton.mass_drift);
    energy_drift = std::max(energy_drift, soliton.energy_drift);

    const double t_end = c.full() ? -0.25 : -0.5;
    // the full interval approaches the collapse; the default step leaves the energy drift near 5e-5
    const auto s2 = sim(-1, -1.0, t_end, c.full() ? 1.25e-5 : 0.0, 500, 1 << 30);
    const auto pc = evolve(pseudoconformal_solution(Q, -1.0), s2);
    write_trajectory(pc, c.dir / "pseudoconformal", echo("pseudoconformal", s2));
    c.holds("pseudoconformal_completed", pc.termination == Termination::completed);
    c.at_most("pseudoconformal_relative_l2", rel_l2(pc.snapshots.back().field, pseudoconformal_solution(Q, t_end)), 1e-4);
    mass_drift = std::max(mass_drift, pc.mass_drift);
    energy_drift = std::max(energy_drift, pc.energy_drift);

    const double t_duhamel = c.full() ? 0.5 : 0.25;
    const auto s3 = sim(-1, 0.0, t_duhamel, 1.25e-4, 1 << 30, 40);
    const auto resolved = evolve(Q.field(), s3);
    const double residual = duhamel_residual(resolved, 0.0, t_duhamel);
    c.at_most("duhamel_residual", residual, 1e-5);
    mass_drift = std::max(mass_drift, resolved.mass_drift);

    c.at_most("mass_drift", mass_drift, 1e-10);
    c.at_most("energy_drift", energy_drift, 1e-6);
    auto out = c.csv("dynamics.csv", "quantity,value");
    out << "soliton_sup_error," << f17(sup) << "\nduhamel_residual," << f17(residual) << "\nmass_drift," << f17(mass_drift)
        << "\nenergy_drift," << f17(energy_drift) << '\n';
}

void blowup(Context& c)
{
    const auto fine = make_grid(3, 30.0, 4096, GridScheme::sine);
    const auto Q = solve_ground_state(3, 1e-8, fine);
    auto out = c.csv("pseudoconformal_family.csv", "t,N_t,window_radius,concentrated_fraction");
    std::vector<double> times, scales, fractions;
    for (double t : {-1.0, -0.5, -0.25, -0.125, -0.0625}) {
        const auto v = pseudoconformal_solution(Q, t);
        const double N = frequency_scale(v).N_of_t;
        const double fraction = mass_concentration(v, std::pow(-t, 0.25)) / Q.mass();
        times.push_back(-t);
        scales.push_back(N);
        fractions.push_back(fraction);
        out << row({f17(t), f17(N), f17(std::pow(-t, 0.25)), f17(fraction)}) << '\n';
    }
    bool increasing = true;
    for (std::size_t i = 1; i < fractions.size(); ++i)
        increasing = increasing && fractions[i] >= fractions[i - 1];
    c.holds("concentration_increases_toward_blowup", increasing);
    c.at_most("final_concentration_gap", std::abs(fractions.back() - 1.0), 0.01);
    c.at_most("frequency_exponent_deviation", std::abs(loglog_slope(times, scales) + 1.0), 0.1);

    const auto Q3 = solve_ground_state(3);
    const auto s = sim(-1, 0.0, 1.0, 0.0, 200, 1 << 30);
    const auto traj = evolve(Q3.field(), s);
    write_trajectory(traj, c.dir / "soliton", echo("soliton", s));
    const double cell = Q3.grid()->k_nodes()[1] - Q3.grid()->k_nodes()[0];
    double spread = 0.0;
    for (const auto& r : traj.records)
        spread = std::max(spread, std::abs(r.N_t - traj.records.front().N_t));
    c.at_most("soliton_frequency_spread_in_cells", spread / cell, 1.0);
}

// ---- 9: virial -------------------------------------------------------------

void virial_identity(Context& c)
{
    const auto g = make_grid(3, 30.0, 1024, GridScheme::sine);
    const auto u0 = gaussian(g);
    const std::vector<double> radii = c.full() ? std::vector<double>{kInf, 1.0, 2.0} : std::vector<double>{kInf, 2.0};
    double unit_gap = 0.0, truncated_gap = 0.0, bound = 0.0;
    for (double R : radii) {
        auto s = sim(1, 0.0, c.full() ? 1.0 : 0.5, 1e-4, 100, 0);
        s.virial_radius = R;
        const auto traj = evolve(u0, s);
        if (traj.termination != Termination::completed)
            throw std::runtime_error("virial run stopped by a guard");
        const std::string name = std::isinf(R) ? "virial_unit.csv" : "virial_R" + std::to_string(static_cast<int>(R)) + ".csv";
        std::ofstream out(c.dir / name, std::ios::binary);
        write_virial_scan(out, traj.virial);
        int compared = 0;
        for (std::size_t i = 0; i < traj.virial.size(); ++i) {
            const auto& v = traj.virial[i];
            if (std::isfinite(R))
                bound = std::max(bound, std::abs(v.M_R) / (2 * R * std::sqrt(traj.records[i].mass) * traj.records[i].grad_norm));
            if (std::isnan(v.dM_dt_numeric))
                continue;
            ++compared;
            const double gap = std::abs(v.dM_dt_numeric - v.term_sum()) / std::abs(v.dM_dt_numeric);
            (std::isinf(R) ? unit_gap : truncated_gap) = std::max(std::isinf(R) ? unit_gap : truncated_gap, gap);
        }
        if (compared < 10)
            throw std::runtime_error("too few virial samples");
    }
    c.at_most("unit_cutoff_dMdt_vs_8E_relative", unit_gap, 1e-4);
    c.at_most("truncated_dMdt_vs_term_sum_relative", truncated_gap, 1e-3);
    c.at_most("virial_bound_ratio", bound, 1.0);
}

// ---- 10: dispersive ---------------------------------------------------------

void dispersive(Context& c)
{
    const auto mid = make_grid(3, 200.0, 8192, GridScheme::sine);
    const auto far = make_grid(3, 2400.0, 8192, GridScheme::sine);
    auto out = c.csv("dispersive.csv", "profile,t,ratio");
    double worst = 0.0, closed = 0.0, at_100 = 0.0;
    for (double t : {0.1, 1.0, 10.0, 100.0}) {
        const double r = dispersive_check(gaussian(t > 10.0 ? far : mid), t);
        worst = std::max(worst, r);
        closed = std::max(closed, std::abs(r / gaussian_dispersive_ratio(t, 3) - 1.0));
        if (t == 100.0)
            at_100 = r;
        out << 0 << ',' << f17(t) << ',' << f17(r) << '\n';
    }
    const auto wide = make_grid(3, 400.0, 8192, GridScheme::sine);
    auto rng = c.rng();
    const int profiles = c.count(20, 100);
    for (int trial = 1; trial <= profiles; ++trial) {
        const auto f = random_nonnegative_profile(wide, rng);
        for (double t : {0.1, 1.0, 10.0}) {
            const double r = dispersive_check(f, t);
            worst = std::max(worst, r);
            out << trial << ',' << f17(t) << ',' << f17(r) << '\n';
        }
    }
    c.at_most("max_dispersive_ratio", worst, 1.0 + 1e-6);
    c.at_most("gaussian_ratio_gap_at_t100", std::abs(at_100 - 1.0), 0.01);
    c.at_most("gaussian_closed_form_relative", closed, 1e-6);
}

// ---- 11: Gronwall ---------------------------------------------------------

void gronwall(Context& c)
{
    auto rng = c.rng();
    auto out = c.csv("instances.csv", "instance,ratio,K,sigma,length,max_exact_over_bound,contraction,max_decay_ratio");
    double worst = 0.0, worst_decay = 0.0;
    int decay_cases = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto p = random_gronwall_problem(rng);
        const auto x = gronwall_exact(p);
        const auto B = gronwall_bound(p);
        double ratio = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k)
            if (B[k] > 0.0)
                ratio = std::max(ratio, x[k] / B[k]);
        const auto e = decay_estimate(p);
        double decay = std::numeric_limits<double>::quiet_NaN();
        if (e.hypothesis_met) {
            ++decay_cases;
            decay = 0.0;
            for (std::size_t k = 0; k < x.size(); ++k)
                decay = std::max(decay, x[k] * std::pow(2.0, p.sigma * static_cast<double>(k)) / e.output_constant);
            worst_decay = std::max(worst_decay, decay);
        }
        worst = std::max(worst, ratio);
        out << row({std::to_string(i), f17(p.ratio), std::to_string(p.K), f17(p.sigma), std::to_string(p.b.size()), f17(ratio),
                    f17(e.contraction), std::isnan(decay) ? "" : f17(decay)})
            << '\n';
    }
    c.at_most("max_exact_over_bound", worst, 10.0);
    c.checks.push_back(Assertion::at_least("instances_meeting_decay_hypothesis", decay_cases, 1));
    c.at_most("max_decay_ratio_over_constant", worst_decay, 1.0 + 1e-12);

    const auto p = random_gronwall_problem(rng);
    FuzzOptions opts;
    opts.seed = c.seed;
    const auto report = gronwall_fuzz(p, 1000, opts);
    std::ofstream(c.dir / "fuzz.json", std::ios::binary) << report.to_json() << '\n';
    c.at_most("fuzz_failures", static_cast<double>(report.failures.size()), 0.0);
    c.at_most("fuzz_max_exact_over_bound", report.max_ratio_exact_over_bound, 10.0);
    c.holds("fuzz_decay_claim_not_violated", report.decay_claim != "violated");
}

// ---- 12: spacetime norm ---------------------------------------------------

void spacetime(Context& c)
{
    const auto g = make_grid(3, 30.0, 512, GridScheme::sine);
    const auto Q = solve_ground_state(3, 1e-8, g);
    const double t1 = c.full() ? 4.0 : 2.0;
    const auto s = sim(-1, 0.0, t1, 1e-4, 250, 0);
    const auto traj = evolve(Q.field(), s);
    write_trajectory(traj, c.dir / "soliton", echo("soliton", s));
    c.holds("completed", traj.termination == Termination::completed);
    const double per_unit_time = lp_integral(Q.field(), 10.0 / 3.0);
    auto out = c.csv("spacetime.csv", "a,b,value,expected,frequency_integral,ratio");
    double value_gap = 0.0, ratio_spread = 0.0, first_ratio = 0.0;
    for (double length : {t1 / 4, t1 / 2, t1}) {
        const auto rep = spacetime_norm(traj, 0.0, length);
        const double want = length * per_unit_time;
        value_gap = std::max(value_gap, std::abs(rep.value / want - 1.0));
        if (first_ratio == 0.0)
            first_ratio = rep.ratio;
        ratio_spread = std::max(ratio_spread, std::abs(rep.ratio / first_ratio - 1.0));
        out << row({"0", f17(length), f17(rep.value), f17(want), f17(rep.frequency_integral), f17(rep.ratio)}) << '\n';
    }
    c.at_most("value_relative_gap", value_gap, 1e-6);
    c.at_most("ratio_spread", ratio_spread, 0.05);
}

struct CriterionSpec
{
    int id;
    const char* slug;
    const char* title;
    std::function<void(Context&)> run;
};

const std::vector<CriterionSpec>& criteria()
{
    static const std::vector<CriterionSpec> list{
        {1, "transform", "transform fidelity", transform_fidelity},
        {2, "inout_identity", "in/out identity", inout_identity},
        {3, "pv_exterior", "PV cross-check and exterior bound", pv_and_exterior},
        {4, "kernel_exponents", "kernel exponents and scaling", kernel_exponents},
        {5, "ground_state", "ground state", ground_state},
        {6, "energy_positivity", "energy positivity below threshold", energy_positivity},
        {7, "dynamics", "dynamics", dynamics},
        {8, "blowup", "blowup phenomenology", blowup},
        {9, "virial", "virial identity", virial_identity},
        {10, "dispersive", "dispersive sharp constant", dispersive},
        {11, "gronwall", "Gronwall bound", gronwall},
        {12, "spacetime", "spacetime norm accounting", spacetime},
    };
    return list;
}

std::string criterion_dir(const CriterionSpec& s)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "c%02d_%s", s.id, s.slug);
    return buf;
}

// Criteria 1-12 into `root`, in parallel; `emit` sees results in id order.
std::vector<CriterionResult> run_criteria(SuiteKind kind, std::uint64_t seed, const fs::path& root, int threads,
                                          const std::function<void(const CriterionResult&)>& emit)
{
    const auto& specs = criteria();
    std::vector<CriterionResult> results(specs.size());
    std::vector<bool> done(specs.size(), false);
    std::mutex m;
    std::condition_variable cv;
    std::atomic<std::size_t> next{0};

    const auto worker = [&] {
        for (std::size_t i = next++; i < specs.size(); i = next++) {
            const auto& spec = specs[i];
            Context ctx{kind, seed, spec.id, root / criterion_dir(spec), {}};
            CriterionResult r;
            r.id = spec.id;
            r.title = spec.title;
            const auto t0 = std::chrono::steady_clock::now();
            try {
                fs::create_directories(ctx.dir);
                spec.run(ctx);
            } catch (const std::exception& e) {
                r.error = e.what();
            }
            r.checks = std::move(ctx.checks);
            r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::lock_guard lock(m);
            results[i] = std::move(r);
            done[i] = true;
            cv.notify_all();
        }
    };
    std::vector<std::thread> pool;
    const int n = std::clamp(threads, 1, static_cast<int>(specs.size()));
    for (int k = 0; k < n; ++k)
        pool.emplace_back(worker);
    for (std::size_t i = 0; i < specs.size(); ++i) {
        std::unique_lock lock(m);
        cv.wait(lock, [&] { return done[i]; });
        lock.unlock();
        if (emit)
            emit(results[i]);
    }
    for (auto& t : pool)
        t.join();
    return results;
}

fs::path scratch_dir(const std::string& tag)
{
    static std::atomic<int> counter{0};
    return fs::temp_directory_path() /
           ("criticalwave-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
}

std::vector<std::string> relative_files(const fs::path& root, const std::vector<std::string>& skip)
{
    std::vector<std::string> out;
    if (!fs::exists(root))
        return out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file())
            continue;
        const auto rel = fs::relative(e.path(), root);
        if (std::ranges::find(skip, rel.begin()->string()) != skip.end())
            continue;
        out.push_back(rel.generic_string());
    }
    std::ranges::sort(out);
    return out;
}

std::string slurp(const fs::path& file)
{
    std::ifstream in(file, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Json result_json(const CriterionResult& r)
{
    Json j;
    j["id"] = r.id;
    j["title"] = r.title;
    j["passed"] = r.passed();
    j["seconds"] = r.seconds;
    j["checks"] = to_json(r.checks);
    if (!r.error.empty())
        j["error"] = r.error;
    return j;
}

} // namespace

SuiteKind parse_suite_kind(const std::string& name)
{
    if (name == "fast")
        return SuiteKind::fast;
    if (name == "full")
        return SuiteKind::full;
    throw std::invalid_argument("unknown suite \"" + name + "\" (expected fast or full)");
}

std::string to_string(SuiteKind kind) { return kind == SuiteKind::fast ? "fast" : "full"; }

std::string CriterionResult::line() const
{
    char head[96];
    std::snprintf(head, sizeof head, "%s C%02d %s (%.1f s): ", passed() ? "PASS" : "FAIL", id, title.c_str(), seconds);
    std::string s = head;
    for (std::size_t i = 0; i < checks.size(); ++i)
        s += (i ? "; " : "") + std::string(checks[i].passed ? "" : "[fail] ") + checks[i].summary();
    if (!error.empty())
        s += (checks.empty() ? "" : "; ") + std::string("error: ") + error;
    return s;
}

bool SuiteReport::passed() const
{
    return criteria.size() == kCriterionCount && std::ranges::all_of(criteria, [](const CriterionResult& c) { return c.passed(); });
}

std::vector<std::string> tree_differences(const fs::path& a, const fs::path& b, const std::vector<std::string>& skip)
{
    const auto fa = relative_files(a, skip), fb = relative_files(b, skip);
    std::vector<std::string> diff;
    std::ranges::set_symmetric_difference(fa, fb, std::back_inserter(diff));
    std::vector<std::string> common;
    std::ranges::set_intersection(fa, fb, std::back_inserter(common));
    for (const auto& f : common)
        if (slurp(a / f) != slurp(b / f))
            diff.push_back(f);
    std::ranges::sort(diff);
    return diff;
}

SuiteReport run_suite(const SuiteOptions& options, std::ostream& log)
{
    const auto started = std::chrono::steady_clock::now();
    SuiteReport report;
    report.kind = options.kind;
    report.seed = options.seed;
    fs::create_directories(options.output);
    std::mutex log_mutex;
    report.criteria = run_criteria(options.kind, options.seed, options.output, options.threads, [&](const CriterionResult& r) {
        std::lock_guard lock(log_mutex);
        log << r.line() << std::endl;
    });

    if (options.determinism_check) {
        CriterionResult r;
        r.id = 13;
        r.title = "determinism and time budget";
        const auto t0 = std::chrono::steady_clock::now();
        try {
            std::vector<std::string> skip{"report.json", "manifest.json", "c13_determinism"};
            fs::path first, second;
            std::vector<fs::path> cleanup;
            if (options.kind == SuiteKind::fast) {
                first = options.output;
            } else {
                first = scratch_dir("fast-a");
                cleanup.push_back(first);
                run_criteria(SuiteKind::fast, options.seed, first, options.threads, nullptr);
            }
            second = scratch_dir("fast-b");
            cleanup.push_back(second);
            run_criteria(SuiteKind::fast, options.seed, second, options.threads, nullptr);
            const auto diff = tree_differences(first, second, skip);
            const auto files = relative_files(first, skip);
            const fs::path dir = options.output / "c13_determinism";
            fs::create_directories(dir);
            std::ofstream out(dir / "compared_files.csv", std::ios::binary);
            out << "file,bytes,identical\n";
            for (const auto& f : files)
                out << f << ',' << fs::file_size(first / f) << ',' << (std::ranges::find(diff, f) == diff.end() ? 1 : 0) << '\n';
            for (const auto& p : cleanup)
                fs::remove_all(p);
            r.checks.push_back(Assertion::at_least("fast_rerun_files_compared", static_cast<double>(files.size()), 1.0));
            r.checks.push_back(Assertion::at_most("fast_rerun_differing_files", static_cast<double>(diff.size()), 0.0));
        } catch (const std::exception& e) {
            r.error = e.what();
        }
        const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        r.checks.push_back(Assertion::at_most(options.kind == SuiteKind::fast ? "fast_suite_seconds" : "full_suite_seconds", total,
                                              options.kind == SuiteKind::fast ? 120.0 : 1800.0));
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        log << r.line() << std::endl;
        report.criteria.push_back(std::move(r));
    }
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    Json j;
    j["suite"] = to_string(options.kind);
    j["seed"] = options.seed;
    j["passed"] = report.passed();
    j["criteria"] = Json::array();
    for (const auto& r : report.criteria)
        j["criteria"].push_back(result_json(r));
    std::ofstream(options.output / "report.json", std::ios::binary) << j.dump(2) << '\n';
    return report;
}

int verify_command(SuiteKind kind, std::uint64_t seed, const fs::path& output, std::ostream& out, std::ostream& err)
{
    SuiteOptions options;
    options.kind = kind;
    options.seed = seed;
    options.output = output;
    options.threads = thread_limit();
    SuiteReport report;
    const std::string started_at = [] {
        const std::time_t tt = std::time(nullptr);
        std::tm tm{};
        gmtime_r(&tt, &tm);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
        return std::string(buf);
    }();
    try {
        if (fs::exists(output) && !fs::is_empty(output)) {
            if (!fs::exists(output / "report.json")) {
                err << "config error: output directory \"" << output.string() << "\" is not empty and holds no previous suite\n";
                return exit_config_error;
            }
            for (const auto& e : fs::directory_iterator(output))
                fs::remove_all(e.path());
        }
        out << "verify --suite " << to_string(kind) << " --seed " << seed << " (" << options.threads << " thread"
            << (options.threads == 1 ? "" : "s") << ") -> " << output.string() << '\n';
        report = run_suite(options, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_assertion_failure;
    }

    Json manifest;
    manifest["command"] = "verify";
    manifest["suite"] = to_string(kind);
    manifest["seed"] = seed;
    manifest["threads"] = options.threads;
    manifest["versions"] = version_info();
    manifest["started_at"] = started_at;
    manifest["wall_time_seconds"] = report.seconds;
    manifest["assertions"] = Json::array();
    for (const auto& r : report.criteria)
        for (const auto& c : to_json(r.checks)) {
            auto entry = c;
            entry["criterion"] = r.id;
            manifest["assertions"].push_back(entry);
        }
    manifest["passed"] = report.passed();
    std::ofstream(output / "manifest.json", std::ios::binary) << manifest.dump(2) << '\n';

    int passed = 0;
    for (const auto& r : report.criteria)
        passed += r.passed() ? 1 : 0;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d/%zu criteria passed in %.1f s\n", passed, report.criteria.size(), report.seconds);
    out << buf;
    return report.passed() ? exit_ok : exit_assertion_failure;
}

} // namespace criticalwave::app
