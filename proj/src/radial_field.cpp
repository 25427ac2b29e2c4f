#include "criticalwave/radial_field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace criticalwave {

RadialField::RadialField(GridPtr g) : grid(std::move(g)), values(grid ? grid->size() : 0) {}

RadialField::RadialField(GridPtr g, std::vector<Complex> v) : grid(std::move(g)), values(std::move(v))
{
    if (!grid || static_cast<int>(values.size()) != grid->size())
        throw std::invalid_argument("RadialField: value count must equal grid size");
}

RadialField RadialField::from_function(GridPtr g, const std::function<Complex(double)>& f)
{
    RadialField out(g);
    const auto r = g->r_nodes();
    for (int j = 0; j < g->size(); ++j)
        out.values[j] = f(r[j]);
    return out;
}

RadialField& RadialField::operator+=(const RadialField& other)
{
    require_same_grid(grid, other.grid, "RadialField +=");
    for (std::size_t i = 0; i < values.size(); ++i)
        values[i] += other.values[i];
    return *this;
}

RadialField& RadialField::operator-=(const RadialField& other)
{
    require_same_grid(grid, other.grid, "RadialField -=");
    for (std::size_t i = 0; i < values.size(); ++i)
        values[i] -= other.values[i];
    return *this;
}

RadialField& RadialField::operator*=(Complex scale)
{
    for (auto& v : values)
        v *= scale;
    return *this;
}

RadialField operator+(RadialField a, const RadialField& b) { return a += b; }
RadialField operator-(RadialField a, const RadialField& b) { return a -= b; }
RadialField operator*(Complex scale, RadialField a) { return a *= scale; }

SpectralField& SpectralField::operator+=(const SpectralField& other)
{
    require_same_grid(grid, other.grid, "SpectralField +=");
    for (std::size_t i = 0; i < values.size(); ++i)
        values[i] += other.values[i];
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other)
{
    require_same_grid(grid, other.grid, "SpectralField -=");
    for (std::size_t i = 0; i < values.size(); ++i)
        values[i] -= other.values[i];
    return *this;
}

SpectralField& SpectralField::operator*=(Complex scale)
{
    for (auto& v : values)
        v *= scale;
    return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(Complex scale, SpectralField a) { return a *= scale; }

RadialField conj(RadialField a)
{
    for (auto& v : a.values)
        v = std::conj(v);
    return a;
}

SpectralField::SpectralField(GridPtr g) : grid(std::move(g)), values(grid ? grid->size() : 0) {}

SpectralField::SpectralField(GridPtr g, std::vector<Complex> v) : grid(std::move(g)), values(std::move(v))
{
    if (!grid || static_cast<int>(values.size()) != grid->size())
        throw std::invalid_argument("SpectralField: value count must equal grid size");
}

EquationParams EquationParams::make(int mu, int dimension)
{
    if (mu < -1 || mu > 1)
        throw std::invalid_argument("mu must be -1, 0 or +1");
    if (dimension < 1)
        throw std::invalid_argument("dimension must be >= 1");
    return EquationParams{mu, dimension};
}

void require_same_grid(const GridPtr& a, const GridPtr& b, const char* what)
{
    if (!a || !b || a.get() != b.get())
        throw std::invalid_argument(std::string(what) + ": fields live on different grids");
}

void require_decay(const RadialField& f, const char* what)
{
    double peak = 0.0;
    for (const auto& v : f.values)
        peak = std::max(peak, std::abs(v));
    const double edge = std::abs(f.values.back());
    if (edge > 1e-12 * peak)
        throw std::domain_error(std::string(what) + ": field does not decay at r_max (|f(r_max)| = " +
                                std::to_string(edge) + ")");
}

} // namespace criticalwave
