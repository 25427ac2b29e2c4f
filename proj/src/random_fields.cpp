#include "criticalwave/random_fields.hpp"

#include "criticalwave/radial_spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace criticalwave {

RadialField random_smooth_field(const GridPtr& grid, std::mt19937_64& rng, const RandomFieldOptions& options)
{
    std::uniform_int_distribution<int> count(options.min_terms, options.max_terms);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    struct Term
    {
        Complex amplitude;
        double center, width, carrier;
    };
    std::vector<Term> terms(count(rng));
    for (auto& t : terms) {
        const double re = 2 * unit(rng) - 1;
        const double im = 2 * unit(rng) - 1;
        t.amplitude = options.complex_amplitudes ? Complex(re, im) : Complex(re);
        t.center = options.center_fraction * grid->r_max() * unit(rng);
        t.width = options.min_width + (options.max_width - options.min_width) * unit(rng);
        t.carrier = options.max_carrier * unit(rng);
    }
    auto f = RadialField::from_function(grid, [&](double r) {
        Complex s = 0.0;
        for (const auto& t : terms) {
            // even in r, so the field is smooth through the origin
            const double a = (r - t.center) / t.width;
            const double b = (r + t.center) / t.width;
            s += t.amplitude * (std::exp(-0.5 * a * a) + std::exp(-0.5 * b * b)) * std::cos(t.carrier * r);
        }
        return s;
    });
    require_decay(f, "random_smooth_field");
    return f;
}

RadialField with_mass(const RadialField& f, double target)
{
    const double m = mass(f);
    if (!(m > 0.0))
        throw std::invalid_argument("with_mass: zero field");
    return Complex(std::sqrt(target / m)) * f;
}

} // namespace criticalwave
