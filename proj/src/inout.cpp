#include "criticalwave/inout.hpp"

#include "criticalwave/interpolant.hpp"
#include "criticalwave/littlewood_paley.hpp"
#include "criticalwave/radial_spectral.hpp"
#include "criticalwave/text_format.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace criticalwave {

namespace {

constexpr double kPi = std::numbers::pi;

void require_inout_dimension(const RadialGrid& g, const char* what)
{
    if (g.dimension() < 2)
        throw std::invalid_argument(std::string(what) + ": in/out projections need d >= 2");
}

// Input-side data of the band-limited H1 x J kernel: Bessel values at K rho_j
// and the quadrature weight rho^{d-1} w_j rho^{-nu}.
struct KernelColumns
{
    double K = 0.0;
    double nu = 0.0;
    std::vector<double> rho, jn, jn1, rho_nu, weight;
};

KernelColumns make_columns(const RadialGrid& g)
{
    KernelColumns c;
    c.K = inout_cutoff(g);
    c.nu = g.bessel_order();
    const auto r = g.r_nodes();
    const auto mu = g.r_measure();
    const int n = g.size();
    c.rho.assign(r.begin(), r.end());
    c.jn.resize(n);
    c.jn1.resize(n);
    c.rho_nu.resize(n);
    c.weight.resize(n);
    for (int j = 0; j < n; ++j) {
        c.jn[j] = bessel_j(c.nu, c.K * r[j]);
        c.jn1[j] = bessel_j(c.nu + 1, c.K * r[j]);
        c.rho_nu[j] = std::pow(r[j], c.nu);
        c.weight[j] = mu[j] / c.rho_nu[j];
    }
    return c;
}

// 1/2 r^{-nu} sum_j f_j weight_j [M_J(r, rho_j) + i sign M_Y(r, rho_j)], where
// M_Z(r, rho) = int_0^K k Z_nu(kr) J_nu(k rho) dk in closed form.
Complex apply_row(const KernelColumns& c, std::span<const Complex> f, double r, int sign)
{
    const double K = c.K;
    const double nu = c.nu;
    const double z = K * r;
    const double jr = bessel_j(nu, z);
    const double jr1 = bessel_j(nu + 1, z);
    const double yr = bessel_y(nu, z);
    const double yr1 = bessel_y(nu + 1, z);
    const double r_mnu = std::pow(r, -nu);
    const double origin_term = 2.0 / kPi * r_mnu;
    // diagonal limits rho -> r
    const double mj_diag = K * (z * (jr * jr + jr1 * jr1) - 2 * nu * jr * jr1) / (2 * r);
    const double my_diag = -(K * (nu * (yr1 * jr + yr * jr1) - z * (yr1 * jr1 + yr * jr)) + 2.0 / kPi * nu / r) / (2 * r);

    Complex acc_j = 0.0;
    Complex acc_y = 0.0;
    const std::size_t n = c.rho.size();
    for (std::size_t j = 0; j < n; ++j) {
        const double rho = c.rho[j];
        double mj;
        double my;
        if (K * std::abs(r - rho) < 1e-8) {
            mj = mj_diag;
            my = my_diag;
        } else {
            const double den = (r - rho) * (r + rho);
            mj = K * (r * jr1 * c.jn[j] - rho * jr * c.jn1[j]) / den;
            my = (K * (r * yr1 * c.jn[j] - rho * yr * c.jn1[j]) + origin_term * c.rho_nu[j]) / den;
        }
        const Complex fw = f[j] * c.weight[j];
        acc_j += fw * mj;
        acc_y += fw * my;
    }
    return 0.5 * r_mnu * (acc_j + Complex(0.0, sign) * acc_y);
}

RadialField apply_projection(const RadialField& f, int sign)
{
    require_inout_dimension(*f.grid, "p_plus_spectral");
    const KernelColumns c = make_columns(*f.grid);
    RadialField out(f.grid);
    const auto r = f.grid->r_nodes();
    for (int i = 0; i < f.size(); ++i)
        out.values[i] = apply_row(c, f.values, r[i], sign);
    return out;
}

// Break points approaching `pole_side` geometrically from `far_end`, with
// the first gap equal to `scale`.
std::vector<double> graded_breaks(double pole_side, double far_end, double scale)
{
    std::vector<double> b{pole_side};
    const double dir = far_end > pole_side ? 1.0 : -1.0;
    double gap = scale;
    double pos = pole_side;
    while (true) {
        pos += dir * gap;
        if ((far_end - pos) * dir <= gap) {
            b.push_back(far_end);
            break;
        }
        b.push_back(pos);
        gap *= 2.0;
    }
    if (dir < 0)
        std::reverse(b.begin(), b.end());
    return b;
}

void accumulate(IntegralEstimate& total, const IntegralEstimate& part)
{
    total.value += part.value;
    total.error += part.error;
    total.magnitude += part.magnitude;
}

} // namespace

double inout_cutoff(const RadialGrid& grid)
{
    return resolved_k_max(grid);
}

RadialField p_plus_spectral(const RadialField& f) { return apply_projection(f, +1); }

RadialField p_minus_spectral(const RadialField& f) { return apply_projection(f, -1); }

std::vector<Complex> p_plus_at(const RadialField& f, std::span<const double> radii, int sign)
{
    require_inout_dimension(*f.grid, "p_plus_at");
    if (sign != 1 && sign != -1)
        throw std::invalid_argument("p_plus_at: sign must be +1 or -1");
    const double r1 = f.grid->r_nodes()[0];
    for (double r : radii)
        if (!(r >= r1))
            throw std::domain_error("p_plus_at: radius below the first grid node (kernel singular at r = 0)");
    const KernelColumns c = make_columns(*f.grid);
    std::vector<Complex> out(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i)
        out[i] = apply_row(c, f.values, radii[i], sign);
    return out;
}

IntegralEstimate pv_integral(const std::function<Complex(double)>& f, double r, int d, double support_end,
                             double bandwidth)
{
    if (!(r > 0.0) || !(support_end > r))
        throw std::invalid_argument("pv_integral: need 0 < r < support_end");
    const double T = r * r;
    const double S = support_end * support_end;
    const double a = std::min(0.5 * T, S - T);
    const double half_power = 0.5 * (d - 2);
    const auto h = [&](double s) { return 0.5 * std::pow(s, half_power) * f(std::sqrt(s)); };

    IntegralEstimate total;
    // symmetric window around the pole in s
    {
        const auto paired = [&](double u) { return (h(T - u) - h(T + u)) / u; };
        const double breaks[] = {0.0, a};
        accumulate(total, integrate_oscillatory(
                              paired, breaks, [&](double u) { return bandwidth / (2.0 * std::sqrt(T - u)) + 1.0 / T; }, 2));
    }
    const auto regular = [&](double rho) { return f(rho) * std::pow(rho, d - 1.0) / (T - rho * rho); };
    const auto freq = [&](double rho) { return bandwidth + 2.0 * rho / std::abs(T - rho * rho); };
    const double lower_top = std::sqrt(T - a);
    const double upper_bottom = std::sqrt(T + a);
    {
        const auto b = graded_breaks(lower_top, 0.0, a / (2.0 * lower_top));
        accumulate(total, integrate_oscillatory(regular, b, freq, 2));
    }
    if (upper_bottom < support_end) {
        const auto b = graded_breaks(upper_bottom, support_end, a / (2.0 * upper_bottom));
        accumulate(total, integrate_oscillatory(regular, b, freq, 2));
    }
    return total;
}

PvProjection p_plus_pv_estimate(const RadialField& f)
{
    const RadialGrid& g = *f.grid;
    require_inout_dimension(g, "p_plus_pv");
    PvProjection out{RadialField(f.grid), 0.0};
    double peak = 0.0;
    for (const auto& v : f.values)
        peak = std::max(peak, std::abs(v));
    if (peak == 0.0)
        return out;
    const double bandwidth = std::max(spectral_bandwidth(hankel_forward(f)), 1.0 / g.r_max());
    const ChebyshevInterpolant interp(f, bandwidth);
    const auto fn = [&interp](double rho) { return interp(rho); };
    const int d = g.dimension();
    const auto r = g.r_nodes();
    for (int i = 0; i < f.size(); ++i) {
        const IntegralEstimate est = pv_integral(fn, r[i], d, g.r_max(), bandwidth);
        const double scale = std::pow(r[i], 2.0 - d) / kPi;
        out.value.values[i] = 0.5 * f.values[i] + Complex(0.0, scale) * est.value;
        out.max_error = std::max(out.max_error, scale * est.error);
    }
    return out;
}

RadialField p_plus_pv(const RadialField& f) { return p_plus_pv_estimate(f).value; }

double exterior_norm(const RadialField& p, double inner_radius)
{
    const auto r = p.grid->r_nodes();
    const auto mu = p.grid->r_measure();
    double sum = 0.0;
    for (int j = 0; j < p.size(); ++j)
        if (r[j] >= inner_radius)
            sum += std::norm(p.values[j]) * mu[j];
    return std::sqrt(p.grid->sphere_factor() * sum);
}

ExteriorProbe exterior_bound_probe(double N, int trials, std::uint64_t seed)
{
    if (!(N > 0.0))
        throw std::invalid_argument("exterior_bound_probe: N must be positive");
    if (trials < 10)
        throw std::invalid_argument("exterior_bound_probe: need at least 10 trials");
    // k_max ~ 689 covers the N = 64 spectra; N = 1 fields decay well inside r_max.
    const GridPtr grid = make_grid(3, 14.0, 3072, GridScheme::sine);
    ExteriorProbe probe;
    probe.N = N;
    probe.inner_radius = 0.01 / N;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    std::uniform_real_distribution<double> centre(1.5, 3.0);
    std::uniform_real_distribution<double> width(0.6, 0.85);
    for (int trial = 0; trial < trials; ++trial) {
        struct Bump
        {
            Complex c;
            double kappa, sigma;
        };
        std::vector<Bump> bumps;
        for (int j = 0; j < 3; ++j) {
            const double re = coeff(rng);
            const double im = coeff(rng);
            const double kappa = centre(rng);
            const double sigma = width(rng);
            bumps.push_back({Complex(re, im), kappa, sigma});
        }
        SpectralField F(grid);
        for (int m = 0; m < F.size(); ++m) {
            const double k = grid->k_nodes()[m] / N;
            for (const auto& b : bumps)
                F.values[m] += b.c * std::exp(-(k - b.kappa) * (k - b.kappa) / (2 * b.sigma * b.sigma));
        }
        RadialField f = hankel_inverse(F);
        f *= 1.0 / std::sqrt(mass(f));
        const RadialField p = p_plus_spectral(project(f, N, ProjectionKind::geq));
        probe.ratios.push_back(exterior_norm(p, probe.inner_radius));
    }
    probe.constant = *std::max_element(probe.ratios.begin(), probe.ratios.end());
    return probe;
}

std::string to_string(KernelRegime regime)
{
    switch (regime) {
    case KernelRegime::stationary:
        return "stationary";
    case KernelRegime::tail:
        return "tail";
    case KernelRegime::short_time:
        return "short_time";
    }
    return "unknown";
}

KernelRegime classify_kernel_regime(double N, double t, double x_mag, double y_mag)
{
    if (std::abs(t) * N * N <= 1.0)
        return KernelRegime::short_time;
    const double q = (y_mag - x_mag) / (2.0 * N * t);
    return (q >= 0.5 && q <= 1.1) ? KernelRegime::stationary : KernelRegime::tail;
}

InOutKernelSample inout_kernel(double N, double t, double x_mag, double y_mag, int sign, int d)
{
    if (!(N > 0.0))
        throw std::invalid_argument("inout_kernel: N must be positive");
    if (d < 2)
        throw std::invalid_argument("inout_kernel: in/out projections need d >= 2");
    if (sign != 1 && sign != -1)
        throw std::invalid_argument("inout_kernel: sign must be +1 or -1");
    if (!(N * x_mag >= 0.1))
        throw std::domain_error("inout_kernel: |x| must be at least 0.1/N");
    if (y_mag < 0.0)
        throw std::invalid_argument("inout_kernel: |y| must be nonnegative");
    const double nu = 0.5 * (d - 2);
    const double x_mnu = std::pow(x_mag, -nu);
    const auto integrand = [&](double k) {
        // (xy)^{-nu} J_nu(ky) = x^{-nu} k^nu Lambda(ky), finite at y = 0
        return 0.5 * x_mnu * std::pow(k, nu) * bessel_j_scaled(nu, k * y_mag) * hankel_h1(nu, k * x_mag) *
               DyadicBump::psi(k / N) * k * std::polar(1.0, t * k * k);
    };
    const double breaks[] = {0.5 * N, 0.55 * N, N, 1.1 * N};
    const IntegralEstimate est = integrate_oscillatory(
        integrand, breaks, [&](double k) { return 2.0 * std::abs(t) * k + x_mag + y_mag; }, 8);
    if (est.error > 1e-9 * est.magnitude + 1e-300) {
        std::ostringstream msg;
        msg.precision(3);
        msg << "inout_kernel: quadrature did not converge, achieved error " << est.error;
        throw std::runtime_error(msg.str());
    }
    InOutKernelSample s;
    s.N = N;
    s.t = t;
    s.x_mag = x_mag;
    s.y_mag = y_mag;
    s.value = sign > 0 ? est.value : std::conj(est.value);
    s.regime = classify_kernel_regime(N, t, x_mag, y_mag);
    s.error = est.error;
    return s;
}

void write_kernel_scan(std::ostream& out, const std::vector<InOutKernelSample>& samples)
{
    out << "N,t,x,y,re,im,regime\n";
    for (const auto& s : samples)
        out << fmt17(s.N) << ',' << fmt17(s.t) << ',' << fmt17(s.x_mag) << ',' << fmt17(s.y_mag) << ','
            << fmt17(s.value.real()) << ',' << fmt17(s.value.imag()) << ',' << to_string(s.regime) << '\n';
}

} // namespace criticalwave
