#pragma once

#include "criticalwave/radial_field.hpp"
#include "criticalwave/special_functions.hpp"

#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace criticalwave {

/// Frequency cutoff K of the spectral in/out projections on this grid:
/// k_max for sine grids, k_max / 2 for dense grids (so the Gauss r-rule
/// resolves the band-limited kernel times the field).
double inout_cutoff(const RadialGrid& grid);

/// Outgoing projection  [P+ f](r) = 1/2 int_0^K (kr)^{-nu} H1_nu(kr) F(k) k^{d-1} dk
/// with F the radial transform of f, evaluated through the closed-form
/// (Lommel) k-integral of the Hankel-Bessel product against the grid
/// quadrature in rho. Requires d >= 2; fields should be band-limited below
/// inout_cutoff. p_minus uses H2, the conjugate kernel.
RadialField p_plus_spectral(const RadialField& f);
RadialField p_minus_spectral(const RadialField& f);

/// P+ f (sign = +1) or P- f (sign = -1) at arbitrary radii r >= r_1.
/// Radii below the first grid node are refused with std::domain_error.
std::vector<Complex> p_plus_at(const RadialField& f, std::span<const double> radii, int sign = +1);

/// PV int_0^L f(rho) rho^{d-1} / (r^2 - rho^2) d rho, with the pole handled by
/// symmetric pairing in s = rho^2 around s = r^2 and graded Gauss panels
/// elsewhere. `bandwidth` bounds the oscillation frequency of f.
IntegralEstimate pv_integral(const std::function<Complex(double)>& f, double r, int d, double support_end,
                             double bandwidth);

struct PvProjection
{
    RadialField value;
    double max_error = 0.0; ///< largest pointwise quadrature error estimate
};

/// [P+ f](r) = f(r)/2 + (i/pi) r^{2-d} PV int f(rho) rho^{d-1}/(r^2 - rho^2) d rho
/// on the grid nodes, with f interpolated between nodes and zero beyond r_max.
PvProjection p_plus_pv_estimate(const RadialField& f);
RadialField p_plus_pv(const RadialField& f);

/// || P+ f ||_{L^2(|x| >= inner_radius)} summed over grid nodes outside the radius.
double exterior_norm(const RadialField& p_plus_f, double inner_radius);

struct ExteriorProbe
{
    double N = 1.0;
    double inner_radius = 0.0;
    double constant = 0.0;     ///< max ratio over trials
    std::vector<double> ratios; ///< || P+ P_{>=N} f ||_{L^2(|x| >= 1/(100N))} for unit-mass f
};

/// Random unit-mass radial fields in d = 3 whose spectra are Gaussian bumps
/// at frequencies ~ N (the same seed gives the same shapes rescaled by N);
/// returns the largest exterior norm of P+ P_{>=N} f.
ExteriorProbe exterior_bound_probe(double N, int trials, std::uint64_t seed = 1);

enum class KernelRegime
{
    stationary,
    tail,
    short_time
};

std::string to_string(KernelRegime regime);

/// short_time when |t| <= N^{-2}; stationary when (|y| - |x|) / (2 N t) lies in
/// the support [1/2, 11/10] of psi (a stationary point of the phase exists);
/// tail otherwise.
KernelRegime classify_kernel_regime(double N, double t, double x_mag, double y_mag);

struct InOutKernelSample
{
    double N = 0.0;
    double t = 0.0;
    double x_mag = 0.0;
    double y_mag = 0.0;
    Complex value;
    KernelRegime regime = KernelRegime::tail;
    double error = 0.0;
};

/// Kernel of P+_N e^{-it Delta} (sign = +1) or P-_N e^{it Delta} (sign = -1):
///   1/2 (|x||y|)^{-nu} int H1_nu(k|x|) J_nu(k|y|) e^{itk^2} psi(k/N) k dk
/// and its complex conjugate. Requires N |x| >= 0.1.
InOutKernelSample inout_kernel(double N, double t, double x_mag, double y_mag, int sign, int d = 3);

/// CSV with header N,t,x,y,re,im,regime and 17 significant digits.
void write_kernel_scan(std::ostream& out, const std::vector<InOutKernelSample>& samples);

} // namespace criticalwave
