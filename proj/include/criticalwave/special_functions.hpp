#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace criticalwave {

/// Bessel function of the first kind J_nu(z) for nu >= -1/2 and z >= 0.
///
/// Half-integer orders use the spherical-Bessel closed forms, other orders
/// use the ascending series for z <= 12 and the Hankel asymptotic
/// expansion beyond. Accuracy is about 1e-12 relative away from zeros of
/// J_nu and absolute near them.
double bessel_j(double nu, double z);

/// Bessel function of the second kind Y_nu(z), z > 0.
double bessel_y(double nu, double z);

/// H^{(1)}_nu(z) = J_nu(z) + i Y_nu(z). Throws std::domain_error for z <= 0.
std::complex<double> hankel_h1(double nu, double z);

/// H^{(2)}_nu(z) = conj(H^{(1)}_nu(z)) for real arguments.
std::complex<double> hankel_h2(double nu, double z);

/// z^{-nu} J_nu(z), the entire function behind the radial transform kernel.
/// Finite at z = 0 for every nu >= -1/2.
double bessel_j_scaled(double nu, double z);

/// Modified Bessel function K_nu(z) from its large-argument expansion.
/// Only valid for z >= 8 and |nu| <= 4; throws std::domain_error otherwise.
double bessel_k_large(double nu, double z);

struct QuadratureRule
{
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(int n);

/// Composite Gauss-Legendre rule on [a, b] with `panels` equal panels of
/// `order` points each.
QuadratureRule composite_gauss(double a, double b, int panels, int order);

/// Barycentric weights for interpolation on the nodes of an n-point
/// Gauss-Legendre rule (nodes in [-1, 1], weights from gauss_legendre).
std::vector<double> legendre_barycentric_weights(const QuadratureRule& rule);

struct IntegralEstimate
{
    std::complex<double> value;
    double error = 0.0;     ///< |difference| between the base and the refined rule
    double magnitude = 0.0; ///< integral of |f|, the cancellation scale
};

/// Integrates f over [breaks.front(), breaks.back()] by 24-point Gauss panels.
/// Each segment between consecutive breaks gets at least `min_panels`
/// panels and enough that no panel spans more than ~12 radians of a phase
/// whose local angular frequency is bounded by `frequency(x)` (assumed
/// monotone on each segment). The error is estimated by repeating with
/// doubled panel counts; the refined value is returned.
IntegralEstimate integrate_oscillatory(const std::function<std::complex<double>(double)>& f,
                                       std::span<const double> breaks,
                                       const std::function<double(double)>& frequency, int min_panels = 4);

} // namespace criticalwave
