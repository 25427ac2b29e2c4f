#pragma once

#include "criticalwave/radial_field.hpp"
#include "criticalwave/special_functions.hpp"

#include <array>
#include <string>

namespace criticalwave {

/// Smooth radial cutoff phi with phi = 1 on [0, 1] and phi = 0 on [11/10, inf),
/// joined by the exponential smooth step with sharpness 1/20, and the
/// annular piece psi(rho) = phi(rho) - phi(2 rho).
struct DyadicBump
{
    static constexpr double inner = 1.0;
    static constexpr double outer = 1.1;
    static constexpr double sharpness = 1.0 / 20.0;

    static double phi(double rho);
    static double psi(double rho);
    /// {value, first, second, third derivative}
    static std::array<double, 4> phi_jet(double rho);
    static std::array<double, 4> psi_jet(double rho);
};

/// leq: phi(k/N), gt: 1 - phi(k/N), band: psi(k/N),
/// lt: phi(2k/N) (= P_{<= N/2}), geq: 1 - phi(2k/N) (= P_{> N/2}).
enum class ProjectionKind
{
    leq,
    gt,
    band,
    geq,
    lt
};

ProjectionKind parse_projection_kind(const std::string& name);

/// Multiplier value of the projection at frequency k.
double projection_symbol(ProjectionKind kind, double k, double N);

SpectralField project(const SpectralField& F, double N, ProjectionKind kind);
RadialField project(const RadialField& f, double N, ProjectionKind kind);

/// P_{N/2} + P_N + P_{2N}.
double fattened_symbol(double k, double N);
SpectralField fattened(const SpectralField& F, double N);
RadialField fattened(const RadialField& f, double N);

/// || |grad|^s P_N f ||_2 / (N^s ||P_N f||_2), evaluated on the spectrum.
double bernstein_ratio(const RadialField& f, double N, double s);

/// Convolution kernel K(z) of P_N e^{it Delta} on R^d at separation
/// z = |x - y| for two points on a common ray at distances x_mag, y_mag:
///   (2 pi)^{-d/2} int J_nu(kz)/(kz)^nu psi(k/N) e^{-itk^2} k^{d-1} dk.
/// Throws std::runtime_error (message carries the achieved error) when
/// the quadrature does not converge.
std::complex<double> pn_kernel(double N, double t, double x_mag, double y_mag, int d);
IntegralEstimate pn_kernel_estimate(double N, double t, double x_mag, double y_mag, int d);

/// Kernel of P_N e^{it Delta} restricted to radial functions, acting against
/// y^{d-1} dy:  int Lambda(kx) Lambda(ky) psi(k/N) e^{-itk^2} k^{d-1} dk.
std::complex<double> pn_radial_kernel(double N, double t, double x_mag, double y_mag, int d);

} // namespace criticalwave
