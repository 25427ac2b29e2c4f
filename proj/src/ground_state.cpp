#include "criticalwave/ground_state.hpp"

#include "criticalwave/radial_spectral.hpp"
#include "criticalwave/text_format.hpp"

#include <boost/numeric/odeint.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace criticalwave {

namespace {

namespace odeint = boost::numeric::odeint;
using State = std::array<long double, 2>;
using Stepper = odeint::runge_kutta_fehlberg78<State, long double>;

constexpr long double kStartRadius = 1e-6L;
constexpr long double kFarRadius = 80.0L;

struct ShootingOde
{
    int d;
    long double power; // 4/d

    void operator()(const State& y, State& dy, long double r) const
    {
        const long double q = y[0];
        dy[0] = y[1];
        dy[1] = -(d - 1) / r * y[1] + q - std::pow(std::abs(q), power) * q;
    }

    State series(long double q0, long double r) const
    {
        const long double c = (q0 - std::pow(q0, 1 + power)) / (2 * d);
        return {q0 + c * r * r, 2 * c * r};
    }
};

// Adaptive stepping from the series start, stopping exactly at each target.
class Integrator
{
public:
    Integrator(const ShootingOde& ode, long double q0, double tol)
        : ode_(ode), stepper_(odeint::make_controlled<Stepper>(tol, tol)), y_(ode.series(q0, kStartRadius))
    {}
    Integrator(const ShootingOde& ode, const State& y, long double r, double tol)
        : ode_(ode), stepper_(odeint::make_controlled<Stepper>(tol, tol)), y_(y), r_(r)
    {}

    long double radius() const { return r_; }
    const State& state() const { return y_; }

    void advance_to(long double target)
    {
        while (r_ < target) {
            long double dt = std::min(dt_, target - r_);
            const bool clipped = dt < dt_;
            const long double saved = dt_;
            while (stepper_.try_step(ode_, y_, r_, dt) == odeint::fail)
                ;
            dt_ = clipped ? std::max(saved, dt) : dt;
            if (target - r_ < 1e-15L * target)
                r_ = target;
        }
    }

private:
    ShootingOde ode_;
    odeint::controlled_runge_kutta<Stepper> stepper_;
    State y_;
    long double r_ = kStartRadius;
    long double dt_ = 1e-3L;
};

// Knot spacing of the stored shooting trajectory. Bisection and the stored
// profile step through the same knots, so the rounding that feeds the
// unstable mode is identical in both.
constexpr long double kKnotSpacing = 1.0L / 64;

enum class Outcome
{
    undershoot, // stays positive (turns back up, or sits at the constant state)
    overshoot   // crosses zero
};

struct Shot
{
    Outcome outcome = Outcome::undershoot;
    std::vector<State> knots; // states at i * kKnotSpacing, i >= 1
};

Shot shoot(const ShootingOde& ode, long double q0, double tol, bool keep_knots)
{
    Integrator it(ode, q0, tol);
    Shot shot;
    for (int i = 1; i * kKnotSpacing < kFarRadius; ++i) {
        it.advance_to(i * kKnotSpacing);
        const auto& y = it.state();
        if (y[0] < 0) {
            shot.outcome = Outcome::overshoot;
            return shot;
        }
        if (y[1] > 0)
            return shot;
        if (keep_knots)
            shot.knots.push_back(y);
    }
    return shot;
}

double tail_shape(double nu, double r) { return std::pow(r, -nu) * std::cyl_bessel_k(std::abs(nu), r); }

} // namespace

GridPtr standard_grid(int dimension)
{
    if (dimension == 3)
        return make_grid(3, 30.0, 1024, GridScheme::sine);
    return make_grid(dimension, 30.0, 512, GridScheme::dense);
}

std::vector<double> GroundStateProfile::evaluate(std::span<const double> radii) const
{
    const ShootingOde ode{dimension_, 4.0L / dimension_};
    const double nu = 0.5 * (dimension_ - 2);
    std::vector<double> out(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const long double r = radii[i];
        if (!(r >= 0))
            throw std::invalid_argument("GroundStateProfile::evaluate: radii must be nonnegative");
        if (r > match_radius_) {
            out[i] = static_cast<double>(tail_amplitude_) * tail_shape(nu, radii[i]);
            continue;
        }
        const auto knot = static_cast<std::size_t>(std::floor(r / kKnotSpacing));
        if (knot == 0) {
            if (r <= kStartRadius) {
                out[i] = static_cast<double>(ode.series(q0_, r)[0]);
                continue;
            }
            Integrator it(ode, q0_, step_tolerance_);
            it.advance_to(r);
            out[i] = static_cast<double>(it.state()[0]);
            continue;
        }
        const State& y = knots_[knot - 1];
        if (r == knot * kKnotSpacing) {
            out[i] = static_cast<double>(y[0]);
            continue;
        }
        Integrator it(ode, y, knot * kKnotSpacing, step_tolerance_);
        it.advance_to(r);
        out[i] = static_cast<double>(it.state()[0]);
    }
    return out;
}

double GroundStateProfile::operator()(double r) const
{
    const double radii[1] = {r};
    return evaluate(radii)[0];
}

GroundStateProfile solve_ground_state(int dimension, double tol, GridPtr grid, const ShootingOptions& options)
{
    if (dimension < 1 || dimension > 6)
        throw std::invalid_argument("solve_ground_state: dimension must lie in [1, 6]");
    if (!(tol > 0.0) || tol >= 1e-2)
        throw std::invalid_argument("solve_ground_state: tol must lie in (0, 1e-2)");
    if (!grid)
        grid = standard_grid(dimension);
    if (grid->dimension() != dimension)
        throw std::invalid_argument("solve_ground_state: grid dimension mismatch");

    const ShootingOde ode{dimension, 4.0L / dimension};
    const double step_tol = options.step_tolerance;
    long double lo = options.q0_low;
    long double hi = options.q0_high > 0.0 ? options.q0_high : (dimension <= 3 ? 5.0 : 50.0);
    if (shoot(ode, lo, step_tol, false).outcome != Outcome::undershoot ||
        shoot(ode, hi, step_tol, false).outcome != Outcome::overshoot)
        throw std::runtime_error("solve_ground_state: initial bracket does not bracket Q(0)");

    for (int iter = 0; iter < 200; ++iter) {
        const long double mid = 0.5L * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        (shoot(ode, mid, step_tol, false).outcome == Outcome::undershoot ? lo : hi) = mid;
    }

    GroundStateProfile p;
    p.dimension_ = dimension;
    p.q0_ = lo;
    p.step_tolerance_ = step_tol;
    Shot shot = shoot(ode, lo, step_tol, true);
    const long double threshold = tol * lo;
    const auto below = std::find_if(shot.knots.begin(), shot.knots.end(), [&](const State& y) { return y[0] < threshold; });
    if (below == shot.knots.end())
        throw std::runtime_error("solve_ground_state: shooting loses precision before Q falls below tol * Q(0)");
    shot.knots.erase(below + 1, shot.knots.end());
    p.knots_ = std::move(shot.knots);
    p.match_radius_ = p.knots_.size() * kKnotSpacing;
    for (std::size_t i = 1; i < p.knots_.size(); ++i)
        if (!(p.knots_[i][0] < p.knots_[i - 1][0]))
            throw std::runtime_error("solve_ground_state: profile is not monotone");
    const double nu = 0.5 * (dimension - 2);
    p.tail_amplitude_ = p.knots_.back()[0] / tail_shape(nu, static_cast<double>(p.match_radius_));

    const auto values = p.evaluate(grid->r_nodes());
    if (std::abs(values.back()) > 1e-10 * p.q0())
        throw std::invalid_argument("solve_ground_state: grid too small for the ground-state tail");
    p.field_ = RadialField(grid);
    std::copy(values.begin(), values.end(), p.field_.values.begin());

    p.mass_ = mass(p.field_);
    p.grad_norm_sq_ = grad_norm_sq(p.field_);
    p.energy_ = energy(p.field_, EquationParams::make(-1, dimension));
    p.weinstein_value_ = weinstein_functional(p.field_);
    p.ode_residual_sup_ = ode_residual_fd(p, std::min(grid->r_max(), p.match_radius() + 8.0));
    return p;
}

double ode_residual_fd(const GroundStateProfile& profile, double r_end, double h)
{
    static constexpr double c1[] = {1.0 / 280, -4.0 / 105, 1.0 / 5, -4.0 / 5, 0.0, 4.0 / 5, -1.0 / 5, 4.0 / 105, -1.0 / 280};
    static constexpr double c2[] = {-1.0 / 560, 8.0 / 315, -1.0 / 5,  8.0 / 5,   -205.0 / 72,
                                    8.0 / 5,    -1.0 / 5,  8.0 / 315, -1.0 / 560};
    const int m = static_cast<int>(r_end / h);
    std::vector<double> mesh(m + 5);
    for (int i = 0; i < m + 5; ++i)
        mesh[i] = i * h;
    const auto q = profile.evaluate(mesh);
    const auto at = [&](int i) { return q[std::abs(i)]; };
    const int d = profile.dimension();
    const double p = 1.0 + 4.0 / d;
    double worst = 0.0;
    for (int i = 0; i <= m; ++i) {
        double d1 = 0.0, d2 = 0.0;
        for (int s = -4; s <= 4; ++s) {
            d1 += c1[s + 4] * at(i + s);
            d2 += c2[s + 4] * at(i + s);
        }
        d1 /= h;
        d2 /= h * h;
        const double lap = i == 0 ? d * d2 : d2 + (d - 1) / mesh[i] * d1;
        worst = std::max(worst, std::abs(lap - q[i] + std::pow(q[i], p)));
    }
    return worst;
}

double weinstein_functional(const RadialField& f)
{
    const int d = f.grid->dimension();
    const double m = mass(f);
    const double g = grad_norm_sq(f);
    if (!(m > 0.0) || !(g > 0.0))
        throw std::invalid_argument("weinstein_functional: zero field");
    return lp_integral(f, 2.0 + 4.0 / d) / (g * std::pow(m, 2.0 / d));
}

double weinstein_bound(const GroundStateProfile& profile)
{
    const int d = profile.dimension();
    return (d + 2.0) / d * std::pow(profile.mass(), -2.0 / d);
}

RadialField rescale(const RadialField& f, double lambda)
{
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("rescale: lambda must be positive");
    if (lambda == 1.0)
        return f;
    const auto& g = *f.grid;
    const auto r = g.r_nodes();
    std::vector<double> pulled(r.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        pulled[i] = r[i] / lambda;
    auto values = g.interpolate(f.values, pulled);
    const double amp = std::pow(lambda, -0.5 * g.dimension());
    for (auto& v : values)
        v *= amp;
    RadialField out(f.grid, std::move(values));
    const double m0 = mass(f);
    if (std::abs(mass(out) - m0) > 1e-8 * m0)
        throw std::domain_error(lambda > 1.0 ? "rescale: rescaled field leaves the grid (mass not preserved)"
                                             : "rescale: rescaled field is not resolved (mass not preserved)");
    if (spectral_tail_fraction(out, 0.8 * resolved_k_max(g)) > 1e-10)
        throw std::domain_error("rescale: rescaled field is not resolved by the grid");
    return out;
}

RadialField soliton_solution(const GroundStateProfile& profile, double t)
{
    return std::polar(1.0, t) * profile.field();
}

RadialField pseudoconformal_solution(const GroundStateProfile& profile, double t)
{
    return pseudoconformal_solution(profile, t, profile.grid());
}

RadialField pseudoconformal_solution(const GroundStateProfile& profile, double t, const GridPtr& grid)
{
    if (!(t < 0.0))
        throw std::invalid_argument("pseudoconformal_solution: t must be negative");
    if (grid->dimension() != profile.dimension())
        throw std::invalid_argument("pseudoconformal_solution: grid dimension mismatch");
    const double s = -t;
    // radius beyond which Q < 1e-13 Q(0), from the exponential tail
    const double extent = profile.match_radius() + std::log(profile(profile.match_radius()) / (1e-13 * profile.q0()));
    const double wavenumber = 0.5 * extent + 5.0 / s;
    if (s * extent > grid->r_max() || wavenumber > 0.5 * resolved_k_max(*grid) || grid->r_nodes()[0] > 0.25 * s)
        throw std::domain_error("pseudoconformal_solution: |t| outside the resolvable range of the grid");
    const auto r = grid->r_nodes();
    std::vector<double> scaled(r.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        scaled[i] = r[i] / s;
    const auto q = profile.evaluate(scaled);
    RadialField out(grid);
    const double amp = std::pow(s, -0.5 * profile.dimension());
    for (std::size_t i = 0; i < r.size(); ++i)
        out.values[i] = amp * std::polar(q[i], (r[i] * r[i] - 4.0) / (4.0 * t));
    return out;
}

void write_profile(const GroundStateProfile& profile, const std::filesystem::path& stem)
{
    auto csv_path = stem;
    csv_path += ".csv";
    std::ofstream csv(csv_path);
    if (!csv)
        throw std::runtime_error("write_profile: cannot open " + csv_path.string());
    csv << "r,Q\n";
    const auto r = profile.grid()->r_nodes();
    for (std::size_t i = 0; i < r.size(); ++i)
        csv << fmt17(r[i]) << ',' << fmt17(profile.field().values[i].real()) << '\n';

    nlohmann::ordered_json j;
    j["d"] = profile.dimension();
    j["mass"] = profile.mass();
    j["energy"] = profile.energy();
    j["weinstein_value"] = profile.weinstein_value();
    j["resolution"] = {{"scheme", to_string(profile.grid()->scheme())},
                       {"r_max", profile.grid()->r_max()},
                       {"n", profile.grid()->size()}};
    auto json_path = stem;
    json_path += ".json";
    std::ofstream js(json_path);
    if (!js)
        throw std::runtime_error("write_profile: cannot open " + json_path.string());
    js << j.dump(2) << '\n';
}

} // namespace criticalwave
