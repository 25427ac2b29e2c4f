#include "doctest.h"

#include "criticalwave/diagnostics.hpp"
#include "criticalwave/evolution.hpp"
#include "criticalwave/ground_state.hpp"
#include "criticalwave/radial_spectral.hpp"
#include "criticalwave/random_fields.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace criticalwave;

namespace {

constexpr double kPi = std::numbers::pi;

const GroundStateProfile& ground_state_3d()
{
    static const GroundStateProfile q = solve_ground_state(3);
    return q;
}

RadialField gaussian(const GridPtr& g, double amplitude = 1.0, double width = 1.0)
{
    return RadialField::from_function(g, [=](double r) { return Complex(amplitude * std::exp(-r * r / (2 * width * width)), 0.0); });
}

// least-squares slope of log y against log x
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

TEST_CASE("frequency scale: tails, eta range and monotonicity")
{
    const auto g = make_grid(3, 30, 1024, GridScheme::sine);
    std::mt19937_64 rng(11);
    RandomFieldOptions opts;
    opts.center_fraction = 0.1;
    for (int trial = 0; trial < 10; ++trial) {
        const auto u = random_smooth_field(g, rng, opts);
        double previous = std::numeric_limits<double>::infinity();
        for (double eta : {0.001, 0.01, 0.05, 0.2, 0.5}) {
            const auto rec = frequency_scale(u, eta);
            CHECK(rec.N_of_t > 0.0);
            CHECK(rec.C_of_eta >= 1.0);
            CHECK(rec.spectral_tail_mass <= eta);
            CHECK(rec.spatial_tail_mass <= eta + 1e-12);
            CHECK(rec.N_of_t <= previous);
            previous = rec.N_of_t;
        }
    }
    const auto u = gaussian(g);
    CHECK_THROWS_AS(frequency_scale(u, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(frequency_scale(u, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(frequency_scale(RadialField(g), 0.01), std::invalid_argument);
}

TEST_CASE("frequency scale follows rescaling")
{
    const auto g = make_grid(3, 40, 2048, GridScheme::sine);
    const double cell = g->k_nodes()[1] - g->k_nodes()[0];
    const auto u = gaussian(g, 1.0, 1.5);
    const double n0 = frequency_scale(u).N_of_t;
    for (double lambda : {0.5, 0.7, 1.3, 2.0}) {
        const double n = frequency_scale(rescale(u, lambda)).N_of_t;
        CHECK_MESSAGE(std::abs(n - n0 / lambda) <= cell, "lambda " << lambda << ": " << n << " vs " << n0 / lambda);
    }
}

TEST_CASE("soliton has a constant frequency scale")
{
    const auto& Q = ground_state_3d();
    SimulationConfig c;
    c.params = EquationParams::make(-1, 3);
    c.t1 = 1.0;
    c.record_stride = 200;
    const auto traj = evolve(Q.field(), c);
    const double cell = Q.grid()->k_nodes()[1] - Q.grid()->k_nodes()[0];
    for (const auto& r : traj.records)
        CHECK(std::abs(r.N_t - traj.records.front().N_t) <= cell);
    CHECK(compactness_modulus(traj) >= 1.0);
}

TEST_CASE("pseudoconformal family: N(t) ~ 1/|t| and mass concentration")
{
    const auto fine = make_grid(3, 30, 4096, GridScheme::sine);
    const auto Q = solve_ground_state(3, 1e-8, fine);
    std::vector<double> times, scales;
    double last_fraction = 0.0;
    for (double t : {-1.0, -0.5, -0.25, -0.125, -0.0625}) {
        const auto v = pseudoconformal_solution(Q, t);
        times.push_back(-t);
        scales.push_back(frequency_scale(v).N_of_t);
        last_fraction = mass_concentration(v, std::pow(-t, 0.25)) / Q.mass();
    }
    const double slope = loglog_slope(times, scales);
    MESSAGE("N(t) slope " << slope << ", concentrated fraction " << last_fraction);
    CHECK(slope == doctest::Approx(-1.0).epsilon(0.1));
    CHECK(std::abs(last_fraction - 1.0) <= 0.01);
}

TEST_CASE("mass concentration")
{
    const auto g = make_grid(3, 30, 1024, GridScheme::sine);
    std::mt19937_64 rng(5);
    RandomFieldOptions opts;
    opts.center_fraction = 0.1;
    const auto u = random_smooth_field(g, rng, opts);
    CHECK(mass_concentration(u, g->r_max()) == doctest::Approx(mass(u)).epsilon(1e-14));
    CHECK(mass_concentration(u, 0.0) == 0.0);
    CHECK(mass_concentration(u, 1e-3) < 1e-6 * mass(u));
    double previous = 0.0;
    for (double R = 0.25; R < 30.0; R += 0.5) {
        const double m = mass_concentration(u, R);
        CHECK(m >= previous - 1e-12 * mass(u));
        previous = m;
    }
    // Gaussian: closed-form incomplete gamma for d = 3
    const auto G = gaussian(g);
    for (double R : {0.5, 1.0, 2.0, 4.0}) {
        const double want = 4 * kPi * (std::sqrt(kPi) / 4 * std::erf(R) - R / 2 * std::exp(-R * R));
        CHECK(mass_concentration(G, R) == doctest::Approx(want).epsilon(1e-10));
    }
    CHECK_THROWS_AS(mass_concentration(u, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(mass_concentration(u, 31.0), std::invalid_argument);
}

TEST_CASE("spacetime norm of the soliton")
{
    const auto g = make_grid(3, 30, 512, GridScheme::sine);
    const auto Q = solve_ground_state(3, 1e-8, g);
    SimulationConfig c;
    c.params = EquationParams::make(-1, 3);
    c.t1 = 4.0;
    c.dt = 1e-4;
    c.record_stride = 250;
    const auto traj = evolve(Q.field(), c);
    REQUIRE(traj.termination == Termination::completed);
    const double per_unit_time = lp_integral(Q.field(), 10.0 / 3.0);

    std::vector<double> ratios;
    for (double length : {1.0, 2.0, 4.0}) {
        const auto rep = spacetime_norm(traj, 0.0, length);
        CHECK(rep.value == doctest::Approx(length * per_unit_time).epsilon(1e-6));
        ratios.push_back(rep.ratio);
    }
    for (double r : ratios)
        CHECK(std::abs(r / ratios.front() - 1.0) <= 0.05);

    // partial record intervals are prorated
    const auto part = spacetime_norm(traj, 0.3, 1.37);
    CHECK(part.value == doctest::Approx(1.07 * per_unit_time).epsilon(1e-6));

    const auto empty = spacetime_norm(traj, 1.5, 1.5);
    CHECK(empty.value == 0.0);
    CHECK(empty.frequency_integral == 0.0);
    CHECK_THROWS_AS(spacetime_norm(traj, -0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(spacetime_norm(traj, 1.0, 5.0), std::invalid_argument);
    CHECK_THROWS_AS(spacetime_norm(traj, 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("virial cutoff")
{
    const auto psi = VirialCutoff::smooth();
    CHECK(psi.value(0.0) == 1.0);
    CHECK(psi.value(1.0) == 1.0);
    CHECK(psi.value(2.0) == 0.0);
    CHECK(psi.value(3.0) == 0.0);
    CHECK(psi.value(1.5) == doctest::Approx(0.5));
    // derivatives against centred differences of the next lower order
    const double h = 1e-5;
    for (double x = 0.9; x < 2.1; x += 0.0371) {
        for (int k = 1; k <= 3; ++k) {
            const double fd = (psi.derivative(x + h, k - 1) - psi.derivative(x - h, k - 1)) / (2 * h);
            CHECK(psi.derivative(x, k) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
        }
    }
    // C^3 across the joints
    for (double joint : {1.0, 2.0})
        for (int k = 0; k <= 3; ++k)
            CHECK(std::abs(psi.derivative(joint - 1e-9, k) - psi.derivative(joint + 1e-9, k)) < 1e-5);
    const auto sup = psi.sup_norms();
    CHECK(sup[0] == 1.0);
    CHECK(sup[1] == doctest::Approx(35.0 / 16.0).epsilon(1e-6));
    CHECK(std::isfinite(sup[3]));
    CHECK_THROWS_AS(psi.derivative(1.5, 4), std::invalid_argument);

    const auto unit = VirialCutoff::unit();
    for (double x : {0.0, 1.5, 10.0}) {
        CHECK(unit.value(x) == 1.0);
        for (int k = 1; k <= 3; ++k)
            CHECK(unit.derivative(x, k) == 0.0);
    }
}

TEST_CASE("virial of the ground state vanishes")
{
    const auto& Q = ground_state_3d();
    const auto P = EquationParams::make(-1, 3);
    for (double R : {1.0, 2.0, 4.0}) {
        const auto v = virial_terms(Q.field(), R, VirialCutoff::smooth(), P);
        CHECK(std::abs(v.M_R) <= 1e-12);
        CHECK(std::abs(v.term_sum()) <= 1e-8);
        CHECK(virial(Q.field(), R, VirialCutoff::smooth()) == v.M_R);
    }
    const auto u = virial_terms(Q.field(), 1.0, VirialCutoff::unit(), P);
    CHECK(u.term_M2 == 0.0);
    CHECK(u.term_M3 == 0.0);
    CHECK(u.term_M4 == 0.0);
    CHECK(std::isinf(u.R));
    CHECK(std::abs(u.term_8E) <= 1e-8);
    CHECK_THROWS_AS(virial_terms(Q.field(), 0.0, VirialCutoff::smooth(), P), std::invalid_argument);
}

TEST_CASE("virial identity along a defocusing Gaussian run")
{
    const auto g = make_grid(3, 30, 1024, GridScheme::sine);
    const auto u0 = gaussian(g);
    for (double R : {std::numeric_limits<double>::infinity(), 1.0, 2.0}) {
        SimulationConfig c;
        c.params = EquationParams::make(1, 3);
        c.t1 = 1.0;
        c.dt = 1e-4;
        c.record_stride = 100;
        c.virial_radius = R;
        const auto traj = evolve(u0, c);
        REQUIRE(traj.virial.size() == traj.records.size());
        double worst = 0.0;
        int checked = 0;
        for (std::size_t i = 0; i < traj.virial.size(); ++i) {
            const auto& v = traj.virial[i];
            if (std::isfinite(R)) {
                CHECK(std::abs(v.M_R) <= 2 * R * std::sqrt(traj.records[i].mass) * traj.records[i].grad_norm);
            } else {
                CHECK(v.term_M2 == 0.0);
            }
            if (std::isnan(v.dM_dt_numeric))
                continue;
            ++checked;
            worst = std::max(worst, std::abs(v.dM_dt_numeric - v.term_sum()) / std::abs(v.dM_dt_numeric));
        }
        CHECK(checked == static_cast<int>(traj.virial.size()) - 4);
        MESSAGE("R " << R << " worst relative mismatch " << worst);
        CHECK(worst <= (std::isinf(R) ? 1e-4 : 1e-3));
    }
}

TEST_CASE("virial differentiation and scan output")
{
    std::vector<VirialRecord> recs(9);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        recs[i].t = 0.1 * i;
        recs[i].M_R = std::pow(recs[i].t, 3);
        recs[i].R = 2.0;
    }
    differentiate_virial(recs);
    CHECK(std::isnan(recs[0].dM_dt_numeric));
    CHECK(std::isnan(recs[8].dM_dt_numeric));
    CHECK(recs[4].dM_dt_numeric == doctest::Approx(3 * 0.16).epsilon(1e-12));

    std::ostringstream out;
    write_virial_scan(out, recs);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,R,M_R,dMdt,term8E,M2,M3,M4");
    std::getline(in, line);
    CHECK(line.find(",,") != std::string::npos); // NaN derivative left blank

    recs[3].t = 0.31;
    CHECK_THROWS_AS(differentiate_virial(recs), std::invalid_argument);
}

TEST_CASE("dispersive inequality: Gaussian closed form")
{
    const auto mid = make_grid(3, 200, 8192, GridScheme::sine);
    const auto far = make_grid(3, 2400, 8192, GridScheme::sine);
    for (double t : {0.1, 1.0, 10.0, 100.0}) {
        const auto& g = t > 10.0 ? far : mid;
        const double want = std::pow(2 * t, 1.5) * std::pow(1 + 4 * t * t, -0.75);
        const double got = dispersive_check(gaussian(g), t);
        CHECK_MESSAGE(got == doctest::Approx(want).epsilon(1e-6), "t " << t);
        CHECK(got <= 1.0 + 1e-6);
    }
    CHECK(std::abs(dispersive_check(gaussian(far), 100.0) - 1.0) <= 0.01);
    CHECK(dispersive_check(gaussian(mid), -1.0) == doctest::Approx(dispersive_check(gaussian(mid), 1.0)).epsilon(1e-12));
    CHECK_THROWS_AS(dispersive_check(gaussian(mid), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(dispersive_check(gaussian(mid), 1000.0), std::domain_error);
}

TEST_CASE("dispersive inequality: random nonnegative profiles")
{
    const auto g = make_grid(3, 400, 8192, GridScheme::sine);
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int terms = 1 + static_cast<int>(3 * unit(rng));
        std::vector<std::array<double, 3>> shells;
        for (int j = 0; j < terms; ++j)
            shells.push_back({unit(rng), 6 * unit(rng), 0.5 + 2.5 * unit(rng)});
        const auto f = RadialField::from_function(g, [&](double r) {
            double s = 0.0;
            for (const auto& [a, c, w] : shells)
                s += a * (std::exp(-0.5 * std::pow((r - c) / w, 2)) + std::exp(-0.5 * std::pow((r + c) / w, 2)));
            return Complex(s, 0.0);
        });
        for (double t : {0.1, 1.0, 10.0})
            worst = std::max(worst, dispersive_check(f, t));
    }
    MESSAGE("largest ratio " << worst);
    CHECK(worst <= 1.0 + 1e-6);
}

TEST_CASE("radial weighted kernel")
{
    // d = 1 and d = 3 reduce to one-dimensional Gaussian integrals with p = it
    const auto oracle = [](int d, double t, double x, double y) {
        const Complex p(0.0, t);
        const Complex half = 0.5 * std::sqrt(kPi / p) / kPi;
        const Complex minus = std::exp(-(x - y) * (x - y) / (4.0 * p));
        const Complex plus = std::exp(-(x + y) * (x + y) / (4.0 * p));
        const Complex K = d == 1 ? half * (minus + plus) : half * (minus - plus) / (x * y);
        return std::abs(K) * std::sqrt(std::abs(t)) * std::pow(x * y, 0.5 * (d - 1));
    };
    for (int d : {1, 3})
        for (double t : {0.1, 1.0, -2.0})
            for (double x : {0.3, 1.0, 4.0})
                for (double y : {0.5, 2.0, 7.0})
                    CHECK(radial_weighted_kernel(t, x, y, d) == doctest::Approx(oracle(d, t, x, y)).epsilon(1e-10));

    // bounded uniformly across a decade of t
    for (int d : {2, 3, 4, 5}) {
        std::vector<double> sups;
        for (double t : {0.1, 0.3, 1.0}) {
            double sup = 0.0;
            for (double x = 0.05; x < 20.0; x *= 1.1)
                for (double y = 0.05; y < 20.0; y *= 1.1)
                    sup = std::max(sup, radial_weighted_kernel(t, x, y, d));
            sups.push_back(sup);
        }
        const double lo = *std::min_element(sups.begin(), sups.end());
        const double hi = *std::max_element(sups.begin(), sups.end());
        CHECK(hi < 1.0);
        CHECK(hi / lo < 1.1);
    }
    CHECK_THROWS_AS(radial_weighted_kernel(0.0, 1.0, 1.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(radial_weighted_kernel(1.0, 0.0, 1.0, 3), std::invalid_argument);
}
