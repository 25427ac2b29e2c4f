#pragma once

#include "criticalwave/radial_grid.hpp"

#include <functional>
#include <vector>

namespace criticalwave {

/// Complex samples u(r_j) of a radial function on R^d.
struct RadialField
{
    GridPtr grid;
    std::vector<Complex> values;

    RadialField() = default;
    explicit RadialField(GridPtr g);
    RadialField(GridPtr g, std::vector<Complex> v);

    static RadialField from_function(GridPtr g, const std::function<Complex(double)>& f);

    int size() const { return static_cast<int>(values.size()); }
    Complex& operator[](std::size_t i) { return values[i]; }
    const Complex& operator[](std::size_t i) const { return values[i]; }

    RadialField& operator+=(const RadialField& other);
    RadialField& operator-=(const RadialField& other);
    RadialField& operator*=(Complex scale);
};

RadialField operator+(RadialField a, const RadialField& b);
RadialField operator-(RadialField a, const RadialField& b);
RadialField operator*(Complex scale, RadialField a);
RadialField conj(RadialField a);

/// Complex samples of the radial transform on the grid's frequency nodes.
struct SpectralField
{
    GridPtr grid;
    std::vector<Complex> values;

    SpectralField() = default;
    explicit SpectralField(GridPtr g);
    SpectralField(GridPtr g, std::vector<Complex> v);

    int size() const { return static_cast<int>(values.size()); }
    Complex& operator[](std::size_t i) { return values[i]; }
    const Complex& operator[](std::size_t i) const { return values[i]; }

    SpectralField& operator+=(const SpectralField& other);
    SpectralField& operator-=(const SpectralField& other);
    SpectralField& operator*=(Complex scale);
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(Complex scale, SpectralField a);

/// Sign of the nonlinearity: +1 defocusing, -1 focusing, 0 free.
struct EquationParams
{
    int mu = 1;
    int dimension = 3;

    static EquationParams make(int mu, int dimension);
    /// Power 4/d of the mass-critical nonlinearity.
    double power() const { return 4.0 / dimension; }
};

/// Throws std::invalid_argument unless both fields live on the same grid.
void require_same_grid(const GridPtr& a, const GridPtr& b, const char* what);

/// Throws std::domain_error when |f| at the outermost node exceeds
/// 1e-12 * max|f|, i.e. the field is not contained in the box.
void require_decay(const RadialField& f, const char* what);

} // namespace criticalwave
