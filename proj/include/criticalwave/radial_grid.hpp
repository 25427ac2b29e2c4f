#pragma once

#include <complex>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace criticalwave {

using Complex = std::complex<double>;

enum class GridScheme
{
    dense, ///< composite Gauss-Legendre nodes in r and k, stored kernel matrices
    sine   ///< uniform nodes, d = 3 only, transform by a fast sine transform
};

GridScheme parse_grid_scheme(const std::string& name);
std::string to_string(GridScheme scheme);

namespace detail {
class TransformPlan;
}

/// Discretized half-line (0, r_max] for radial functions on R^d together
/// with its conjugate frequency grid.
///
/// r_weights / k_weights integrate against dr / dk; the radial measure
/// r^{d-1} and the sphere area are applied by the functionals. Grids are
/// immutable and shared between fields through GridPtr.
class RadialGrid
{
public:
    static std::shared_ptr<const RadialGrid> make(int dimension, double r_max, int n, GridScheme scheme);

    ~RadialGrid();
    RadialGrid(const RadialGrid&) = delete;
    RadialGrid& operator=(const RadialGrid&) = delete;

    int dimension() const { return dimension_; }
    int size() const { return static_cast<int>(r_nodes_.size()); }
    GridScheme scheme() const { return scheme_; }
    double r_max() const { return r_max_; }
    double k_max() const { return k_max_; }
    /// Bessel order (d-2)/2 of the radial transform kernel.
    double bessel_order() const { return 0.5 * (dimension_ - 2); }
    /// Surface area of the unit sphere S^{d-1}; equals 2 for d = 1.
    double sphere_factor() const { return sphere_factor_; }

    std::span<const double> r_nodes() const { return r_nodes_; }
    std::span<const double> r_weights() const { return r_weights_; }
    std::span<const double> k_nodes() const { return k_nodes_; }
    std::span<const double> k_weights() const { return k_weights_; }

    /// Weights for integrals against r^{d-1} dr (without the sphere factor).
    std::span<const double> r_measure() const { return r_measure_; }
    std::span<const double> k_measure() const { return k_measure_; }

    /// Physical samples -> spectral samples on k_nodes.
    void forward(std::span<const Complex> in, std::span<Complex> out) const;
    /// Spectral samples -> physical samples on r_nodes.
    void inverse(std::span<const Complex> in, std::span<Complex> out) const;

    /// Exactly unitary transform pair for time stepping. On sine grids these
    /// are forward/inverse. On dense grids they use the polar factor of the
    /// weighted quadrature kernel, which agrees with the quadrature on resolved
    /// data but keeps repeated round trips bounded (computed on first use).
    void stepping_forward(std::span<const Complex> in, std::span<Complex> out) const;
    void stepping_inverse(std::span<const Complex> in, std::span<Complex> out) const;

    /// d/dr of the inverse transform of `spectrum`, sampled on r_nodes.
    void radial_derivative(std::span<const Complex> spectrum, std::span<Complex> out) const;

    /// Evaluates the forward quadrature at an arbitrary frequency k >= 0.
    Complex forward_at(std::span<const Complex> values, double k) const;
    /// Evaluates the inverse quadrature at an arbitrary radius r >= 0.
    Complex inverse_at(std::span<const Complex> spectrum, double r) const;

    /// Physical-space interpolation of grid samples at arbitrary radii.
    /// Dense grids use barycentric interpolation on each Gauss panel, sine
    /// grids the band-limited sine series. Points beyond r_max give zero.
    std::vector<Complex> interpolate(std::span<const Complex> values, std::span<const double> radii) const;

    /// Number of Gauss panels (dense) or 1 (sine) and points per panel.
    int panel_count() const { return panel_count_; }
    int panel_order() const { return panel_order_; }

private:
    RadialGrid() = default;

    int dimension_ = 0;
    GridScheme scheme_ = GridScheme::dense;
    double r_max_ = 0.0;
    double k_max_ = 0.0;
    double sphere_factor_ = 0.0;
    int panel_count_ = 1;
    int panel_order_ = 0;
    std::vector<double> r_nodes_, r_weights_, k_nodes_, k_weights_;
    std::vector<double> r_measure_, k_measure_;
    std::vector<double> panel_barycentric_;
    std::unique_ptr<detail::TransformPlan> plan_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

GridPtr make_grid(int dimension, double r_max, int n, GridScheme scheme);

} // namespace criticalwave
