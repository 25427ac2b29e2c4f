#pragma once

#include "criticalwave/radial_field.hpp"

#include <array>
#include <filesystem>
#include <span>
#include <vector>

namespace criticalwave {

/// Grid used when no grid is given: sine grid for d = 3, dense otherwise,
/// r_max = 30.
GridPtr standard_grid(int dimension);

struct ShootingOptions
{
    /// Relative and absolute tolerance of the adaptive RKF78 steps.
    double step_tolerance = 1e-18;
    /// Bracket for Q(0); q0_high = 0 selects 5 for d <= 3 and 50 for d >= 4.
    double q0_low = 1.0;
    double q0_high = 0.0;
};

/// Positive radial solution of  Q'' + (d-1)/r Q' - Q + Q^{1+4/d} = 0.
///
/// The shooting trajectory is used up to `match_radius`, where Q has fallen
/// to tol * Q(0); beyond it Q continues as the decaying solution
/// A r^{-nu} K_nu(r) of the linearized equation.
class GroundStateProfile
{
public:
    int dimension() const { return dimension_; }
    double q0() const { return static_cast<double>(q0_); }
    double match_radius() const { return static_cast<double>(match_radius_); }

    /// Q at radii r >= 0 (any radii, not tied to the grid).
    std::vector<double> evaluate(std::span<const double> radii) const;
    double operator()(double r) const;

    /// Q sampled on the profile grid.
    const RadialField& field() const { return field_; }
    const GridPtr& grid() const { return field_.grid; }

    double mass() const { return mass_; }
    double energy() const { return energy_; }
    double grad_norm_sq() const { return grad_norm_sq_; }
    double weinstein_value() const { return weinstein_value_; }
    /// Sup of the ODE residual under finite-difference substitution.
    double ode_residual_sup() const { return ode_residual_sup_; }

private:
    friend GroundStateProfile solve_ground_state(int, double, GridPtr, const ShootingOptions&);

    int dimension_ = 0;
    long double q0_ = 0;
    long double match_radius_ = 0;
    long double tail_amplitude_ = 0;
    double step_tolerance_ = 0;
    std::vector<std::array<long double, 2>> knots_; // (Q, Q') on the shooting mesh
    RadialField field_;
    double mass_ = 0, energy_ = 0, grad_norm_sq_ = 0, weinstein_value_ = 0, ode_residual_sup_ = 0;
};

/// Shooting solve for Q. Throws invalid_argument for d outside [1, 6] or
/// tol <= 0, runtime_error when the bracket does not bracket, the profile is
/// not monotone, or the shooting cannot reach tol before losing precision.
GroundStateProfile solve_ground_state(int dimension, double tol = 1e-8, GridPtr grid = nullptr,
                                      const ShootingOptions& options = {});

/// Sup over a uniform mesh of |Q'' + (d-1)/r Q' - Q + Q^{1+4/d}|, derivatives
/// by eighth-order central differences of `profile` (even extension at 0).
double ode_residual_fd(const GroundStateProfile& profile, double r_end, double h = 1.0 / 64);

/// J(f) = ||f||_p^p / (||grad f||_2^2 ||f||_2^{4/d}) with p = 2(d+2)/d.
double weinstein_functional(const RadialField& f);

/// Sharp constant (d+2)/d * M(Q)^{-2/d}.
double weinstein_bound(const GroundStateProfile& profile);

/// u_lambda(x) = lambda^{-d/2} u(x/lambda) by grid interpolation. Throws
/// domain_error when the result leaves the grid or loses mass beyond 1e-8.
RadialField rescale(const RadialField& f, double lambda);

/// e^{it} Q on the profile grid.
RadialField soliton_solution(const GroundStateProfile& profile, double t);

/// |t|^{-d/2} exp(i(|x|^2 - 4)/(4t)) Q(x/t) for t < 0. Throws domain_error
/// when the profile does not fit in the box or is not resolved.
RadialField pseudoconformal_solution(const GroundStateProfile& profile, double t);
RadialField pseudoconformal_solution(const GroundStateProfile& profile, double t, const GridPtr& grid);

/// Writes <stem>.csv (r,Q) and <stem>.json.
void write_profile(const GroundStateProfile& profile, const std::filesystem::path& stem);

} // namespace criticalwave
