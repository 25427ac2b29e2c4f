#pragma once

#include "criticalwave/radial_field.hpp"

#include <functional>

namespace criticalwave {

/// Symmetric radial Fourier transform
///   F(k) = k^{(2-d)/2} int_0^inf J_{(d-2)/2}(k r) f(r) r^{d/2} dr,
/// the radial form of the unitary Fourier transform on R^d.
SpectralField hankel_forward(const RadialField& f);

/// Inverse of hankel_forward (same kernel with r and k exchanged).
RadialField hankel_inverse(const SpectralField& F);

/// e^{it Delta} f, applied as F(k) -> exp(-i t k^2) F(k).
RadialField free_propagate(const RadialField& f, double t);

/// Multiplies the spectrum of f by m(k).
RadialField apply_multiplier(const RadialField& f, const std::function<Complex(double)>& m);

/// |grad|^s f as the spectral multiplier k^s.
RadialField fractional_derivative(const RadialField& f, double s);

/// d/dr f computed spectrally.
RadialField radial_derivative(const RadialField& f);

/// Mass  M(f) = int_{R^d} |f|^2 dx.
double mass(const RadialField& f);

/// sigma_{d-1} sum |F|^2 k^{d-1} dk, which equals mass(f) by Plancherel.
double spectral_mass(const SpectralField& F);

/// ||f||_{L^p(R^d)} for p in [1, inf]; p = inf is the sampled maximum.
double lp_norm(const RadialField& f, double p);

/// int |f|^p dx without the outer root (the form used by the energy).
double lp_integral(const RadialField& f, double p);

/// ||grad f||_2^2 = sigma_{d-1} sum k^2 |F(k)|^2 k^{d-1} dk.
double grad_norm_sq(const RadialField& f);

/// E(f) = 1/2 ||grad f||_2^2 + mu d / (2(d+2)) ||f||_{2(d+2)/d}^{2(d+2)/d}.
double energy(const RadialField& f, const EquationParams& params);

/// Highest frequency the grid represents accurately: k_max for sine grids,
/// k_max / 2 for dense grids.
double resolved_k_max(const RadialGrid& grid);

/// Fraction of the spectral mass of f carried by frequencies above k_cut.
double spectral_tail_fraction(const RadialField& f, double k_cut);

/// sigma_{d-1} int_0^R |f|^2 r^{d-1} dr, integrated on Gauss nodes of the
/// grid interpolant. R >= r_max returns the full mass.
double mass_within(const RadialField& f, double radius);

} // namespace criticalwave
