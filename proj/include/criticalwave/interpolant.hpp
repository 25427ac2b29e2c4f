#pragma once

#include "criticalwave/radial_field.hpp"

#include <vector>

namespace criticalwave {

/// Piecewise Chebyshev interpolant of a grid field on [0, r_max], for fast
/// repeated evaluation at arbitrary radii. Panels are sized so that each
/// spans about 8 radians of the field's bandwidth; values beyond r_max are
/// zero.
class ChebyshevInterpolant
{
public:
    ChebyshevInterpolant(const RadialField& f, double bandwidth);

    Complex operator()(double r) const;
    double support_end() const { return end_; }

private:
    static constexpr int kOrder = 24;
    double end_ = 0.0;
    double width_ = 0.0;
    int panels_ = 0;
    std::vector<double> nodes_; ///< reference nodes on [-1, 1]
    std::vector<double> weights_;
    std::vector<Complex> values_; ///< panels_ * kOrder samples
};

/// Largest frequency node at which the spectrum is still above
/// rel_tol * max|F| (at least the first node).
double spectral_bandwidth(const SpectralField& F, double rel_tol = 1e-15);

} // namespace criticalwave
