#pragma once

#include "criticalwave/radial_field.hpp"

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

namespace criticalwave {

struct Trajectory;

/// Frequency scale N and compactness constant C of one field for a given
/// tail fraction eta.
struct AlmostPeriodicityRecord
{
    double t = 0.0;
    double eta = 0.0;
    double N_of_t = 0.0;
    double C_of_eta = 0.0;
    /// Spectral mass above N and spatial mass beyond C / N, as fractions of the mass.
    double spectral_tail_mass = 0.0;
    double spatial_tail_mass = 0.0;
};

/// N = smallest grid frequency whose spectral tail above it holds at most
/// eta of the mass; C = max(1, N R) where R is the smallest grid radius with
/// at most eta of the mass outside. Throws invalid_argument for eta outside
/// (0, 1) or a zero field.
AlmostPeriodicityRecord frequency_scale(const RadialField& u, double eta = 0.01);

/// Largest C_of_eta over the records of a trajectory.
double compactness_modulus(const Trajectory& traj);

/// Mass inside the ball of radius R. Throws invalid_argument unless 0 <= R <= r_max.
double mass_concentration(const RadialField& u, double R);

/// Virial weight: psi = 1 on [0, 1], 0 beyond 2, with a degree-7 smoothstep
/// in between (C^3). `unit()` is psi identically 1.
class VirialCutoff
{
public:
    static VirialCutoff smooth() { return VirialCutoff(false); }
    static VirialCutoff unit() { return VirialCutoff(true); }

    bool is_unit() const { return unit_; }
    double value(double x) const;
    /// k-th derivative, k = 0..3.
    double derivative(double x, int k) const;
    /// sup |psi^(k)| for k = 0..3.
    std::array<double, 4> sup_norms() const;

private:
    explicit VirialCutoff(bool unit) : unit_(unit) {}
    bool unit_;
};

struct VirialRecord
{
    double t = 0.0;
    double R = 0.0;
    double M_R = 0.0;
    /// Time derivative of M_R from the trajectory (NaN where unavailable).
    double dM_dt_numeric = 0.0;
    double term_8E = 0.0;
    double term_M2 = 0.0;
    double term_M3 = 0.0;
    double term_M4 = 0.0;

    double term_sum() const { return term_8E + term_M2 + term_M3 + term_M4; }
};

/// M_R = 2 Im int psi(|x|/R) conj(u) x . grad u dx.
double virial(const RadialField& u, double R, const VirialCutoff& cutoff);

/// M_R with the predicted time derivative split into 8E and the three
/// cutoff corrections. Throws domain_error when u has no finite gradient.
VirialRecord virial_terms(const RadialField& u, double R, const VirialCutoff& cutoff, const EquationParams& params);

/// Fills dM_dt_numeric by fourth-order centred differences over uniformly
/// spaced records; the first and last two records get NaN.
void differentiate_virial(std::span<VirialRecord> records);

/// CSV with header t,R,M_R,dMdt,term8E,M2,M3,M4.
void write_virial_scan(std::ostream& out, std::span<const VirialRecord> records);

/// sup_r |e^{it Lap} f| (4 pi |t|)^{d/2} / ||f||_1, the sup taken over the
/// nodes and the origin; the sharp dispersive
/// inequality says this is at most 1. Throws invalid_argument for t = 0 and
/// domain_error when the evolved field reaches the edge of the grid.
double dispersive_check(const RadialField& f, double t);

/// |K_t(x, y)| |t|^{1/2} (|x||y|)^{(d-1)/2} for the kernel of e^{it Lap} on
/// radial functions, K_t(x, y) = int Lambda(kx) Lambda(ky) e^{-itk^2} k^{d-1} dk,
/// from Weber's closed form.
double radial_weighted_kernel(double t, double x, double y, int dimension);

struct SpacetimeReport
{
    double value = 0.0;              ///< int_J int |u|^{2(d+2)/d} dx dt
    double frequency_integral = 0.0; ///< int_J N(t)^2 dt
    double ratio = 0.0;
};

/// Spacetime norm over J = [a, b] from the per-record increments; partial
/// record intervals are prorated. Throws invalid_argument when J leaves the
/// trajectory span or a > b.
SpacetimeReport spacetime_norm(const Trajectory& traj, double a, double b);

} // namespace criticalwave
