#include "criticalwave/app/workloads.hpp"

#include "criticalwave/diagnostics.hpp"
#include "criticalwave/radial_spectral.hpp"
#include "criticalwave/text_format.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <tuple>

namespace criticalwave::app {

double rel_l2(const RadialField& a, const RadialField& b) { return std::sqrt(mass(a - b) / mass(b)); }

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("loglog_slope: need at least two matching points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
        sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
    }
    return sxy / sxx;
}

std::vector<double> log_space(double a, double b, int count)
{
    std::vector<double> out;
    for (int i = 0; i < count; ++i)
        out.push_back(count == 1 ? a : a * std::pow(b / a, static_cast<double>(i) / (count - 1)));
    return out;
}

std::vector<double> lin_space(double a, double b, int count)
{
    std::vector<double> out;
    for (int i = 0; i < count; ++i)
        out.push_back(count == 1 ? a : a + (b - a) * i / (count - 1));
    return out;
}

RadialField gaussian(const GridPtr& grid, double amplitude, double width)
{
    return RadialField::from_function(grid, [=](double r) { return Complex(amplitude * std::exp(-r * r / (2 * width * width)), 0.0); });
}

RadialField random_band_limited(const GridPtr& grid, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> w(0.8, 2.0);
    std::uniform_real_distribution<double> carrier(0.0, 2.0);
    std::vector<std::tuple<Complex, double, double>> terms;
    for (int i = 0; i < 4; ++i) {
        // separate statements fix the draw order
        const double re = u(rng);
        const double im = u(rng);
        const double a = w(rng);
        const double k = carrier(rng);
        terms.emplace_back(Complex(re, im), a, k);
    }
    return RadialField::from_function(grid, [&](double r) {
        Complex s = 0.0;
        for (const auto& [c, a, k] : terms)
            s += c * std::exp(-r * r / (2 * a * a)) * std::cos(k * r);
        return s;
    });
}

RadialField random_nonnegative_profile(const GridPtr& grid, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int terms = 1 + static_cast<int>(3 * unit(rng));
    std::vector<std::array<double, 3>> shells;
    for (int j = 0; j < terms; ++j) {
        const double a = unit(rng);
        const double c = 6 * unit(rng);
        const double w = 0.5 + 2.5 * unit(rng);
        shells.push_back({a, c, w});
    }
    return RadialField::from_function(grid, [&](double r) {
        double s = 0.0;
        for (const auto& [a, c, w] : shells)
            s += a * (std::exp(-0.5 * std::pow((r - c) / w, 2)) + std::exp(-0.5 * std::pow((r + c) / w, 2)));
        return Complex(s, 0.0);
    });
}

double gaussian_dispersive_ratio(double t, int dimension)
{
    return std::pow(2 * std::abs(t), 0.5 * dimension) * std::pow(1 + 4 * t * t, -0.25 * dimension);
}

long step_count(const SimulationConfig& c, const RadialGrid& grid)
{
    const double dt = c.dt > 0.0 ? c.dt : default_time_step(grid);
    return std::max(1L, static_cast<long>(std::ceil((c.t1 - c.t0) / dt - 1e-9)));
}

SimulationConfig simulation_config(const ScenarioConfig& c, const RadialGrid& grid)
{
    SimulationConfig s;
    s.params = EquationParams::make(c.mu, c.dimension);
    s.dt = c.dt;
    s.t0 = c.t0;
    s.t1 = c.t1;
    s.gradient_cap = c.gradient_cap;
    s.tail_cap = c.tail_cap;
    s.boundary_cap = c.boundary_cap;
    s.eta = c.eta;
    s.virial_radius = c.virial_radius;
    const long steps = step_count(s, grid);
    s.record_stride = c.record_stride > 0 ? c.record_stride : static_cast<int>(std::max(1L, steps / 200));
    s.snapshot_stride = c.snapshot_stride > 0 ? c.snapshot_stride : static_cast<int>(std::max(1L, steps / 10));
    return s;
}

void write_concentration(const RadialField& u, const std::filesystem::path& file, int points)
{
    std::ofstream out(file, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + file.string());
    const double total = mass(u);
    out << "R,mass_within,fraction\n";
    for (double R : lin_space(0.0, u.grid->r_max(), points + 1)) {
        const double m = mass_concentration(u, R);
        out << fmt17(R) << ',' << fmt17(m) << ',' << fmt17(m / total) << '\n';
    }
}

double frequency_exponent(const Trajectory& traj, double t_ref)
{
    std::vector<double> x, y;
    for (const auto& r : traj.records)
        if (r.t != t_ref && r.N_t > 0.0) {
            x.push_back(std::abs(r.t - t_ref));
            y.push_back(r.N_t);
        }
    return loglog_slope(x, y);
}

} // namespace criticalwave::app
