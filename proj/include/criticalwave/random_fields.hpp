#pragma once

#include "criticalwave/radial_field.hpp"

#include <random>

namespace criticalwave {

struct RandomFieldOptions
{
    int min_terms = 1;
    int max_terms = 4;
    /// Gaussian widths are drawn from [min_width, max_width].
    double min_width = 0.5;
    double max_width = 3.0;
    /// Centres are drawn from [0, center_fraction * r_max].
    double center_fraction = 0.2;
    /// Carrier wavenumbers cos(k r) are drawn from [0, max_carrier].
    double max_carrier = 2.0;
    bool complex_amplitudes = true;
};

/// Smooth radial field: a random sum of modulated Gaussian shells,
/// symmetrized in r. Draws a
/// fixed number of variates per term, so equal seeds give equal fields.
RadialField random_smooth_field(const GridPtr& grid, std::mt19937_64& rng, const RandomFieldOptions& options = {});

/// Multiplies f by a positive constant so that mass(f) = target.
RadialField with_mass(const RadialField& f, double target);

} // namespace criticalwave
