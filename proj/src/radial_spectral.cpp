#include "criticalwave/radial_spectral.hpp"

#include "criticalwave/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace criticalwave {

SpectralField hankel_forward(const RadialField& f)
{
    if (!f.grid)
        throw std::invalid_argument("hankel_forward: field has no grid");
    SpectralField out(f.grid);
    f.grid->forward(f.values, out.values);
    return out;
}

RadialField hankel_inverse(const SpectralField& F)
{
    if (!F.grid)
        throw std::invalid_argument("hankel_inverse: field has no grid");
    RadialField out(F.grid);
    F.grid->inverse(F.values, out.values);
    return out;
}

RadialField free_propagate(const RadialField& f, double t)
{
    if (t == 0.0)
        return f;
    return apply_multiplier(f, [t](double k) { return std::polar(1.0, -t * k * k); });
}

RadialField apply_multiplier(const RadialField& f, const std::function<Complex(double)>& m)
{
    SpectralField F = hankel_forward(f);
    const auto k = f.grid->k_nodes();
    for (int i = 0; i < F.size(); ++i)
        F.values[i] *= m(k[i]);
    return hankel_inverse(F);
}

RadialField fractional_derivative(const RadialField& f, double s)
{
    return apply_multiplier(f, [s](double k) { return Complex(std::pow(k, s)); });
}

RadialField radial_derivative(const RadialField& f)
{
    const SpectralField F = hankel_forward(f);
    RadialField out(f.grid);
    f.grid->radial_derivative(F.values, out.values);
    return out;
}

double mass(const RadialField& f) { return lp_integral(f, 2.0); }

double spectral_mass(const SpectralField& F)
{
    const auto w = F.grid->k_measure();
    double sum = 0.0;
    for (int i = 0; i < F.size(); ++i)
        sum += std::norm(F.values[i]) * w[i];
    return F.grid->sphere_factor() * sum;
}

double lp_integral(const RadialField& f, double p)
{
    if (!(p >= 1.0) || std::isinf(p))
        throw std::invalid_argument("lp_integral: p must be finite and >= 1");
    const auto w = f.grid->r_measure();
    double sum = 0.0;
    for (int i = 0; i < f.size(); ++i) {
        const double a = std::abs(f.values[i]);
        sum += (p == 2.0 ? a * a : std::pow(a, p)) * w[i];
    }
    return f.grid->sphere_factor() * sum;
}

double lp_norm(const RadialField& f, double p)
{
    if (std::isinf(p) && p > 0) {
        double peak = 0.0;
        for (const auto& v : f.values)
            peak = std::max(peak, std::abs(v));
        return peak;
    }
    if (!(p >= 1.0))
        throw std::invalid_argument("lp_norm: p must lie in [1, inf]");
    return std::pow(lp_integral(f, p), 1.0 / p);
}

double grad_norm_sq(const RadialField& f)
{
    const SpectralField F = hankel_forward(f);
    const auto k = f.grid->k_nodes();
    const auto w = f.grid->k_measure();
    double sum = 0.0;
    for (int i = 0; i < F.size(); ++i)
        sum += k[i] * k[i] * std::norm(F.values[i]) * w[i];
    return f.grid->sphere_factor() * sum;
}

double energy(const RadialField& f, const EquationParams& params)
{
    const int d = f.grid->dimension();
    const double kinetic = 0.5 * grad_norm_sq(f);
    if (params.mu == 0)
        return kinetic;
    const double p = 2.0 * (d + 2.0) / d;
    return kinetic + params.mu * d / (2.0 * (d + 2.0)) * lp_integral(f, p);
}

double resolved_k_max(const RadialGrid& grid)
{
    return grid.scheme() == GridScheme::sine ? grid.k_max() : 0.5 * grid.k_max();
}

double spectral_tail_fraction(const RadialField& f, double k_cut)
{
    const SpectralField F = hankel_forward(f);
    const auto k = f.grid->k_nodes();
    const auto w = f.grid->k_measure();
    double tail = 0.0;
    double total = 0.0;
    for (int i = 0; i < F.size(); ++i) {
        const double m = std::norm(F.values[i]) * w[i];
        total += m;
        if (k[i] > k_cut)
            tail += m;
    }
    return total > 0.0 ? tail / total : 0.0;
}

double mass_within(const RadialField& f, double radius)
{
    if (!(radius >= 0.0))
        throw std::invalid_argument("mass_within: radius must be nonnegative");
    if (radius >= f.grid->r_max())
        return mass(f);
    if (radius == 0.0)
        return 0.0;
    // panel size matched to the grid spacing so the interpolant is resolved
    const double spacing = f.grid->r_max() / f.grid->size();
    const int panels = std::max(1, static_cast<int>(std::ceil(radius / (16.0 * spacing))));
    const QuadratureRule rule = composite_gauss(0.0, radius, panels, 32);
    const std::vector<Complex> values = f.grid->interpolate(f.values, rule.nodes);
    const int d = f.grid->dimension();
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
        sum += std::norm(values[i]) * std::pow(rule.nodes[i], d - 1.0) * rule.weights[i];
    return f.grid->sphere_factor() * sum;
}

} // namespace criticalwave
