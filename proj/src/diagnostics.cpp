#include "criticalwave/diagnostics.hpp"

#include "criticalwave/evolution.hpp"
#include "criticalwave/radial_spectral.hpp"
#include "criticalwave/special_functions.hpp"
#include "criticalwave/text_format.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace criticalwave {

namespace {

// Index i of the smallest node such that the mass strictly beyond it is at
// most `allowed`, with the tail mass found.
std::pair<std::size_t, double> tail_cut(const std::vector<double>& masses, double allowed)
{
    double tail = 0.0;
    std::size_t i = masses.size() - 1;
    while (i > 0 && tail + masses[i] <= allowed) {
        tail += masses[i];
        --i;
    }
    return {i, tail};
}

} // namespace

AlmostPeriodicityRecord frequency_scale(const RadialField& u, double eta)
{
    if (!(eta > 0.0 && eta < 1.0))
        throw std::invalid_argument("frequency_scale: eta must lie in (0, 1)");
    const auto& g = *u.grid;
    const SpectralField F = hankel_forward(u);
    std::vector<double> spectral(F.size()), spatial(u.size());
    double spectral_total = 0.0, spatial_total = 0.0;
    for (int i = 0; i < F.size(); ++i) {
        spectral[i] = std::norm(F.values[i]) * g.k_measure()[i];
        spectral_total += spectral[i];
        spatial[i] = std::norm(u.values[i]) * g.r_measure()[i];
        spatial_total += spatial[i];
    }
    if (!(spectral_total > 0.0))
        throw std::invalid_argument("frequency_scale: zero field");

    AlmostPeriodicityRecord rec;
    rec.eta = eta;
    const auto [ki, ktail] = tail_cut(spectral, eta * spectral_total);
    rec.N_of_t = g.k_nodes()[ki];
    rec.spectral_tail_mass = ktail / spectral_total;
    const auto [ri, rtail] = tail_cut(spatial, eta * spatial_total);
    (void)rtail;
    rec.C_of_eta = std::max(1.0, rec.N_of_t * g.r_nodes()[ri]);
    // C / N reproduces r[ri] only up to rounding
    const double radius = rec.C_of_eta / rec.N_of_t * (1.0 + 1e-12);
    double beyond = 0.0;
    for (int i = 0; i < u.size(); ++i)
        if (g.r_nodes()[i] > radius)
            beyond += spatial[i];
    rec.spatial_tail_mass = beyond / spatial_total;
    return rec;
}

double compactness_modulus(const Trajectory& traj)
{
    double c = 0.0;
    for (const auto& r : traj.records)
        c = std::max(c, r.C_eta);
    return c;
}

double mass_concentration(const RadialField& u, double R)
{
    if (!(R >= 0.0) || R > u.grid->r_max())
        throw std::invalid_argument("mass_concentration: radius must lie in [0, r_max]");
    return mass_within(u, R);
}

double VirialCutoff::value(double x) const { return derivative(x, 0); }

double VirialCutoff::derivative(double x, int k) const
{
    if (k < 0 || k > 3)
        throw std::invalid_argument("VirialCutoff: derivative order must lie in [0, 3]");
    if (unit_)
        return k == 0 ? 1.0 : 0.0;
    if (x <= 1.0)
        return k == 0 ? 1.0 : 0.0;
    if (x >= 2.0)
        return 0.0;
    const double s = x - 1.0;
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
    switch (k) {
    case 0: return 1.0 - s4 * (35.0 - 84.0 * s + 70.0 * s2 - 20.0 * s3);
    case 1: return -140.0 * s3 * (1.0 - s) * (1.0 - s) * (1.0 - s);
    case 2: return -(420.0 * s2 - 1680.0 * s3 + 2100.0 * s4 - 840.0 * s4 * s);
    default: return -(840.0 * s - 5040.0 * s2 + 8400.0 * s3 - 4200.0 * s4);
    }
}

std::array<double, 4> VirialCutoff::sup_norms() const
{
    std::array<double, 4> sup{};
    for (int i = 0; i <= 20000; ++i) {
        const double x = 2.0 * i / 20000;
        for (int k = 0; k < 4; ++k)
            sup[k] = std::max(sup[k], std::abs(derivative(x, k)));
    }
    return sup;
}

double virial(const RadialField& u, double R, const VirialCutoff& cutoff)
{
    return virial_terms(u, R, cutoff, EquationParams::make(0, u.grid->dimension())).M_R;
}

namespace {

// Gauss rule on [a, b] with panels matched to the grid spacing.
QuadratureRule panel_rule(const RadialGrid& g, double a, double b)
{
    const double spacing = g.r_max() / g.size();
    const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / (8.0 * spacing))));
    return composite_gauss(a, b, panels, 24);
}

} // namespace

VirialRecord virial_terms(const RadialField& u, double R, const VirialCutoff& cutoff, const EquationParams& params)
{
    if (!cutoff.is_unit() && !(R > 0.0))
        throw std::invalid_argument("virial_terms: R must be positive");
    const auto& g = *u.grid;
    const int d = g.dimension();
    const double p = 2.0 + 4.0 / d;
    const double sigma = g.sphere_factor();
    const RadialField ur = radial_derivative(u);

    VirialRecord rec;
    rec.R = cutoff.is_unit() ? std::numeric_limits<double>::infinity() : R;
    rec.term_8E = 8.0 * energy(u, params);
    rec.dM_dt_numeric = std::numeric_limits<double>::quiet_NaN();

    if (cutoff.is_unit() || R >= g.r_max()) {
        const auto r = g.r_nodes();
        const auto w = g.r_measure();
        double m = 0.0;
        for (int i = 0; i < u.size(); ++i)
            m += 2.0 * r[i] * std::imag(std::conj(u.values[i]) * ur.values[i]) * w[i];
        rec.M_R = sigma * m;
    } else {
        // The cutoff is only piecewise polynomial, so the weighted integrals run
        // on Gauss panels broken at R and 2R. Beyond 2R the weights are
        // constant and the remainder is the full grid integral minus [0, 2R].
        const double outer = std::min(2.0 * R, g.r_max());
        QuadratureRule rule = panel_rule(g, 0.0, R);
        const QuadratureRule shell = panel_rule(g, R, outer);
        rule.nodes.insert(rule.nodes.end(), shell.nodes.begin(), shell.nodes.end());
        rule.weights.insert(rule.weights.end(), shell.weights.begin(), shell.weights.end());
        const auto uv = g.interpolate(u.values, rule.nodes);
        const auto urv = g.interpolate(ur.values, rule.nodes);

        double m = 0.0, m2 = 0.0, grad_in = 0.0, pot_in = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double r = rule.nodes[i];
            const double x = r / R;
            const double w = rule.weights[i] * std::pow(r, d - 1.0);
            const double psi = cutoff.derivative(x, 0);
            const double d1 = cutoff.derivative(x, 1);
            const double a2 = std::norm(uv[i]);
            m += 2.0 * psi * r * std::imag(std::conj(uv[i]) * urv[i]) * w;
            if (x > 1.0)
                m2 -= ((d * d - 1.0) / (R * r) * d1 + (2.0 * d + 1.0) / (R * R) * cutoff.derivative(x, 2)
                       + r / (R * R * R) * cutoff.derivative(x, 3))
                    * a2 * w;
            grad_in += (psi + x * d1) * std::norm(urv[i]) * w;
            pot_in += (d * psi + x * d1) * std::pow(a2, 0.5 * p) * w;
        }
        const double grad_total = grad_norm_sq(u) / sigma;
        const double pot_total = params.mu == 0 ? 0.0 : lp_integral(u, p) / sigma;
        rec.M_R = sigma * m;
        rec.term_M2 = sigma * m2;
        rec.term_M3 = 4.0 * sigma * (grad_in - grad_total);
        rec.term_M4 = params.mu == 0 ? 0.0 : 4.0 * params.mu / (d + 2.0) * sigma * (pot_in - d * pot_total);
    }
    if (!std::isfinite(rec.M_R) || !std::isfinite(rec.term_8E))
        throw std::domain_error("virial_terms: field has no finite gradient");
    return rec;
}

void differentiate_virial(std::span<VirialRecord> records)
{
    const std::size_t n = records.size();
    for (auto& r : records)
        r.dM_dt_numeric = std::numeric_limits<double>::quiet_NaN();
    if (n < 5)
        return;
    const double h = records[1].t - records[0].t;
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs(records[i].t - records[i - 1].t - h) > 1e-9 * std::abs(h))
            throw std::invalid_argument("differentiate_virial: records are not uniformly spaced");
    for (std::size_t i = 2; i + 2 < n; ++i)
        records[i].dM_dt_numeric =
            (records[i - 2].M_R - 8.0 * records[i - 1].M_R + 8.0 * records[i + 1].M_R - records[i + 2].M_R) / (12.0 * h);
}

void write_virial_scan(std::ostream& out, std::span<const VirialRecord> records)
{
    const auto num = [](double v) { return std::isnan(v) ? std::string() : fmt17(v); };
    out << "t,R,M_R,dMdt,term8E,M2,M3,M4\n";
    for (const auto& r : records)
        out << fmt17(r.t) << ',' << fmt17(r.R) << ',' << fmt17(r.M_R) << ',' << num(r.dM_dt_numeric) << ','
            << fmt17(r.term_8E) << ',' << fmt17(r.term_M2) << ',' << fmt17(r.term_M3) << ',' << fmt17(r.term_M4) << '\n';
}

double dispersive_check(const RadialField& f, double t)
{
    if (t == 0.0 || !std::isfinite(t))
        throw std::invalid_argument("dispersive_check: t must be nonzero and finite");
    SpectralField F = hankel_forward(f);
    const auto k = f.grid->k_nodes();
    for (int i = 0; i < F.size(); ++i)
        F.values[i] *= std::polar(1.0, -t * k[i] * k[i]);
    const RadialField u = hankel_inverse(F);
    // the origin is not a grid node, and radial profiles often peak there
    double peak = std::abs(f.grid->inverse_at(F.values, 0.0));
    double edge = 0.0;
    const auto r = u.grid->r_nodes();
    for (int i = 0; i < u.size(); ++i) {
        peak = std::max(peak, std::abs(u.values[i]));
        if (r[i] > 0.95 * u.grid->r_max())
            edge = std::max(edge, std::abs(u.values[i]));
    }
    if (edge > 1e-8 * peak)
        throw std::domain_error("dispersive_check: evolved field reaches the edge of the grid");
    const double l1 = lp_integral(f, 1.0);
    const int d = u.grid->dimension();
    return peak * std::pow(4.0 * std::numbers::pi * std::abs(t), 0.5 * d) / l1;
}

double radial_weighted_kernel(double t, double x, double y, int dimension)
{
    if (t == 0.0 || !(x > 0.0) || !(y > 0.0) || dimension < 1)
        throw std::invalid_argument("radial_weighted_kernel: need t != 0, x, y > 0, d >= 1");
    // |K| = (xy)^{-nu} |J_nu(xy / 2|t|)| / (2|t|)
    const double nu = 0.5 * (dimension - 2);
    const double z = x * y / (2.0 * std::abs(t));
    const double xy = x * y;
    return std::pow(xy, 0.5 * (dimension - 1) - nu) * std::abs(bessel_j(nu, z)) / (2.0 * std::sqrt(std::abs(t)));
}

SpacetimeReport spacetime_norm(const Trajectory& traj, double a, double b)
{
    const auto& rec = traj.records;
    if (rec.empty())
        throw std::invalid_argument("spacetime_norm: empty trajectory");
    const double slack = 1e-9 * std::max(1.0, std::abs(rec.back().t));
    if (a > b || a < rec.front().t - slack || b > rec.back().t + slack)
        throw std::invalid_argument("spacetime_norm: interval outside the trajectory span");
    SpacetimeReport out;
    for (std::size_t i = 1; i < rec.size(); ++i) {
        const double lo = rec[i - 1].t, hi = rec[i].t;
        const double alpha = std::max(lo, a), beta = std::min(hi, b);
        if (beta <= alpha)
            continue;
        const double width = hi - lo;
        out.value += rec[i].spacetime_increment * (beta - alpha) / width;
        const auto n2 = [&](double s) {
            const double th = (s - lo) / width;
            return (1 - th) * rec[i - 1].N_t * rec[i - 1].N_t + th * rec[i].N_t * rec[i].N_t;
        };
        out.frequency_integral += 0.5 * (beta - alpha) * (n2(alpha) + n2(beta));
    }
    out.ratio = out.frequency_integral > 0.0 ? out.value / out.frequency_integral : 0.0;
    return out;
}

} // namespace criticalwave
