#include "criticalwave/littlewood_paley.hpp"

#include "criticalwave/radial_spectral.hpp"

#include <boost/math/differentiation/autodiff.hpp>

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace criticalwave {

namespace {

namespace ad = boost::math::differentiation;
using Jet = ad::autodiff_fvar<double, 3>;

template <class T>
T phi_impl(const T& rho)
{
    using std::exp;
    const double width = DyadicBump::outer - DyadicBump::inner;
    const double a = DyadicBump::sharpness;
    const double x = static_cast<double>(rho) - DyadicBump::inner;
    if (x <= 0.0)
        return T(1.0);
    if (x >= width)
        return T(0.0);
    const T s = rho - DyadicBump::inner;
    const T e = a / (width - s) - a / s;
    if (static_cast<double>(e) <= 0.0)
        return 1.0 / (1.0 + exp(e));
    const T q = exp(-e);
    return q / (1.0 + q);
}

std::array<double, 4> jet_values(const Jet& j)
{
    return {j.derivative(0), j.derivative(1), j.derivative(2), j.derivative(3)};
}

void require_positive(double N, const char* what)
{
    if (!(N > 0.0) || !std::isfinite(N))
        throw std::invalid_argument(std::string(what) + ": N must be positive");
}

double kernel_scale(int d) { return std::pow(2.0 * std::numbers::pi, -0.5 * d); }

} // namespace

double DyadicBump::phi(double rho) { return phi_impl(rho); }

double DyadicBump::psi(double rho) { return phi_impl(rho) - phi_impl(2.0 * rho); }

std::array<double, 4> DyadicBump::phi_jet(double rho) { return jet_values(phi_impl(ad::make_fvar<double, 3>(rho))); }

std::array<double, 4> DyadicBump::psi_jet(double rho)
{
    const Jet x = ad::make_fvar<double, 3>(rho);
    return jet_values(phi_impl(x) - phi_impl(2.0 * x));
}

ProjectionKind parse_projection_kind(const std::string& name)
{
    if (name == "leq")
        return ProjectionKind::leq;
    if (name == "gt")
        return ProjectionKind::gt;
    if (name == "band")
        return ProjectionKind::band;
    if (name == "geq")
        return ProjectionKind::geq;
    if (name == "lt")
        return ProjectionKind::lt;
    throw std::invalid_argument("unknown projection kind '" + name + "'");
}

double projection_symbol(ProjectionKind kind, double k, double N)
{
    const double rho = k / N;
    switch (kind) {
    case ProjectionKind::leq:
        return DyadicBump::phi(rho);
    case ProjectionKind::gt:
        return 1.0 - DyadicBump::phi(rho);
    case ProjectionKind::band:
        return DyadicBump::psi(rho);
    case ProjectionKind::lt:
        return DyadicBump::phi(2.0 * rho);
    case ProjectionKind::geq:
        return 1.0 - DyadicBump::phi(2.0 * rho);
    }
    throw std::logic_error("projection_symbol: bad kind");
}

SpectralField project(const SpectralField& F, double N, ProjectionKind kind)
{
    require_positive(N, "project");
    SpectralField out = F;
    const auto k = F.grid->k_nodes();
    for (int m = 0; m < out.size(); ++m)
        out.values[m] *= projection_symbol(kind, k[m], N);
    return out;
}

RadialField project(const RadialField& f, double N, ProjectionKind kind)
{
    require_positive(N, "project");
    return hankel_inverse(project(hankel_forward(f), N, kind));
}

double fattened_symbol(double k, double N)
{
    return DyadicBump::psi(2.0 * k / N) + DyadicBump::psi(k / N) + DyadicBump::psi(0.5 * k / N);
}

SpectralField fattened(const SpectralField& F, double N)
{
    require_positive(N, "fattened");
    SpectralField out = F;
    const auto k = F.grid->k_nodes();
    for (int m = 0; m < out.size(); ++m)
        out.values[m] *= fattened_symbol(k[m], N);
    return out;
}

RadialField fattened(const RadialField& f, double N)
{
    require_positive(N, "fattened");
    return hankel_inverse(fattened(hankel_forward(f), N));
}

double bernstein_ratio(const RadialField& f, double N, double s)
{
    require_positive(N, "bernstein_ratio");
    const SpectralField P = project(hankel_forward(f), N, ProjectionKind::band);
    const auto k = f.grid->k_nodes();
    const auto w = f.grid->k_measure();
    double num = 0.0;
    double den = 0.0;
    for (int m = 0; m < P.size(); ++m) {
        const double a = std::norm(P.values[m]) * w[m];
        num += std::pow(k[m] / N, 2.0 * s) * a;
        den += a;
    }
    if (den == 0.0)
        throw std::domain_error("bernstein_ratio: projected field is zero");
    return std::sqrt(num / den);
}

IntegralEstimate pn_kernel_estimate(double N, double t, double x_mag, double y_mag, int d)
{
    require_positive(N, "pn_kernel");
    if (d < 1)
        throw std::invalid_argument("pn_kernel: dimension must be >= 1");
    const double z = std::abs(x_mag - y_mag);
    const double nu = 0.5 * (d - 2);
    const auto integrand = [&](double k) {
        return bessel_j_scaled(nu, k * z) * DyadicBump::psi(k / N) * std::pow(k, d - 1) * std::polar(1.0, -t * k * k);
    };
    const double breaks[] = {0.5 * N, 0.55 * N, N, 1.1 * N};
    IntegralEstimate est = integrate_oscillatory(
        integrand, breaks, [&](double k) { return 2.0 * std::abs(t) * k + z; }, 8);
    const double c = kernel_scale(d);
    est.value *= c;
    est.error *= c;
    est.magnitude *= c;
    return est;
}

std::complex<double> pn_kernel(double N, double t, double x_mag, double y_mag, int d)
{
    const IntegralEstimate est = pn_kernel_estimate(N, t, x_mag, y_mag, d);
    if (est.error > 1e-9 * est.magnitude + 1e-300) {
        std::ostringstream msg;
        msg.precision(3);
        msg << "pn_kernel: quadrature did not converge, achieved error " << est.error << " against scale "
            << est.magnitude;
        throw std::runtime_error(msg.str());
    }
    return est.value;
}

std::complex<double> pn_radial_kernel(double N, double t, double x_mag, double y_mag, int d)
{
    require_positive(N, "pn_radial_kernel");
    if (d < 1)
        throw std::invalid_argument("pn_radial_kernel: dimension must be >= 1");
    const double nu = 0.5 * (d - 2);
    const auto integrand = [&](double k) {
        return bessel_j_scaled(nu, k * x_mag) * bessel_j_scaled(nu, k * y_mag) * DyadicBump::psi(k / N) *
               std::pow(k, d - 1) * std::polar(1.0, -t * k * k);
    };
    const double breaks[] = {0.5 * N, 0.55 * N, N, 1.1 * N};
    const IntegralEstimate est = integrate_oscillatory(
        integrand, breaks, [&](double k) { return 2.0 * std::abs(t) * k + x_mag + y_mag; }, 8);
    if (est.error > 1e-9 * est.magnitude + 1e-300) {
        std::ostringstream msg;
        msg.precision(3);
        msg << "pn_radial_kernel: quadrature did not converge, achieved error " << est.error;
        throw std::runtime_error(msg.str());
    }
    return est.value;
}

} // namespace criticalwave
