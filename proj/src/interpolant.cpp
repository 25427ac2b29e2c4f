#include "criticalwave/interpolant.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace criticalwave {

ChebyshevInterpolant::ChebyshevInterpolant(const RadialField& f, double bandwidth)
{
    if (!(bandwidth > 0.0))
        throw std::invalid_argument("ChebyshevInterpolant: bandwidth must be positive");
    const RadialGrid& g = *f.grid;
    end_ = g.r_max();
    panels_ = std::max(4, static_cast<int>(std::ceil(end_ * bandwidth / 8.0)));
    width_ = end_ / panels_;

    // Chebyshev points of the second kind with the standard barycentric weights.
    nodes_.resize(kOrder);
    weights_.resize(kOrder);
    for (int j = 0; j < kOrder; ++j) {
        nodes_[j] = -std::cos(std::numbers::pi * j / (kOrder - 1));
        weights_[j] = (j % 2 == 0 ? 1.0 : -1.0) * ((j == 0 || j == kOrder - 1) ? 0.5 : 1.0);
    }
    std::vector<double> radii(static_cast<std::size_t>(panels_) * kOrder);
    for (int p = 0; p < panels_; ++p)
        for (int j = 0; j < kOrder; ++j)
            radii[p * kOrder + j] = (p + 0.5 * (nodes_[j] + 1.0)) * width_;
    // the interpolant of the grid is continuous at r_max from below
    for (auto& r : radii)
        r = std::min(r, end_ * (1.0 - 1e-15));
    values_ = g.interpolate(f.values, radii);
}

Complex ChebyshevInterpolant::operator()(double r) const
{
    if (r < 0.0 || r >= end_)
        return Complex{};
    const int p = std::min(panels_ - 1, static_cast<int>(r / width_));
    const double x = 2.0 * (r - p * width_) / width_ - 1.0;
    const Complex* v = values_.data() + static_cast<std::size_t>(p) * kOrder;
    Complex num = 0.0;
    double den = 0.0;
    for (int j = 0; j < kOrder; ++j) {
        const double diff = x - nodes_[j];
        if (diff == 0.0)
            return v[j];
        const double c = weights_[j] / diff;
        num += c * v[j];
        den += c;
    }
    return num / den;
}

double spectral_bandwidth(const SpectralField& F, double rel_tol)
{
    const auto k = F.grid->k_nodes();
    double peak = 0.0;
    for (const auto& v : F.values)
        peak = std::max(peak, std::abs(v));
    int last = 0;
    for (int m = 0; m < F.size(); ++m)
        if (std::abs(F.values[m]) > rel_tol * peak)
            last = m;
    return k[last];
}

} // namespace criticalwave
