#include "doctest.h"

#include "criticalwave/littlewood_paley.hpp"
#include "criticalwave/radial_spectral.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace criticalwave;

namespace {

constexpr double kPi = std::numbers::pi;

double max_abs_diff(const std::vector<Complex>& a, const std::vector<Complex>& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double max_abs(const std::vector<Complex>& a)
{
    double m = 0.0;
    for (const auto& v : a)
        m = std::max(m, std::abs(v));
    return m;
}

// Field with broad random spectral content: sum of complex Gaussians of
// widths spread over a decade.
RadialField random_field(const GridPtr& g, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> logw(std::log(0.15), std::log(3.0));
    std::vector<std::pair<Complex, double>> terms;
    for (int i = 0; i < 5; ++i)
        terms.emplace_back(Complex(u(rng), u(rng)), std::exp(logw(rng)));
    return RadialField::from_function(g, [&](double r) {
        Complex s = 0.0;
        for (const auto& [c, w] : terms)
            s += c * std::exp(-r * r / (2 * w * w));
        return s;
    });
}

// Closed-form first derivative of the smooth step: phi' = -phi (1 - phi) e'(x).
double phi_prime_closed(double rho)
{
    const double x = rho - 1.0;
    if (x <= 0.0 || x >= 0.1)
        return 0.0;
    const double a = 1.0 / 20.0;
    const double p = DyadicBump::phi(rho);
    return -p * (1.0 - p) * (a / ((0.1 - x) * (0.1 - x)) + a / (x * x));
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= x.size();
    my /= y.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
        sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
    }
    return sxy / sxx;
}

} // namespace

TEST_CASE("bump profile: support, range, monotonicity")
{
    CHECK(DyadicBump::phi(0.0) == 1.0);
    CHECK(DyadicBump::phi(1.0) == 1.0);
    CHECK(DyadicBump::phi(1.1) == 0.0);
    CHECK(DyadicBump::phi(5.0) == 0.0);
    CHECK(DyadicBump::phi(1.05) == doctest::Approx(0.5).epsilon(1e-15));
    double prev = 1.0;
    for (double rho = 0.0; rho <= 1.2; rho += 1e-4) {
        const double p = DyadicBump::phi(rho);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        CHECK(p <= prev);
        prev = p;
        const double s = DyadicBump::psi(rho);
        if (rho < 0.5 || rho > 1.1)
            CHECK(s == 0.0);
    }
    CHECK(DyadicBump::psi(0.8) == 1.0);
}

TEST_CASE("bump derivatives agree with the closed form and finite differences")
{
    for (double rho : {0.3, 1.001, 1.02, 1.05, 1.08, 1.099, 1.3}) {
        const auto j = DyadicBump::phi_jet(rho);
        CHECK(j[0] == DyadicBump::phi(rho));
        CHECK(j[1] == doctest::Approx(phi_prime_closed(rho)).epsilon(1e-12).scale(1.0));
        // fourth-order central differences of the closed-form first derivative
        const double h = 1e-5;
        const double d2 = (-phi_prime_closed(rho + 2 * h) + 8 * phi_prime_closed(rho + h) - 8 * phi_prime_closed(rho - h) +
                           phi_prime_closed(rho - 2 * h)) /
                          (12 * h);
        CHECK(j[2] == doctest::Approx(d2).epsilon(1e-6).scale(std::max(1.0, std::abs(d2))));
        const double d3 = (phi_prime_closed(rho + h) - 2 * phi_prime_closed(rho) + phi_prime_closed(rho - h)) / (h * h);
        CHECK(j[3] == doctest::Approx(d3).epsilon(1e-4).scale(std::max(1.0, std::abs(d3))));
    }
    const auto s = DyadicBump::psi_jet(0.52);
    const auto a = DyadicBump::phi_jet(0.52);
    const auto b = DyadicBump::phi_jet(1.04);
    for (int i = 0; i < 4; ++i)
        CHECK(s[i] == doctest::Approx(a[i] - std::pow(2.0, i) * b[i]).epsilon(1e-13).scale(1.0));
}

TEST_CASE("projections partition and localize")
{
    std::mt19937_64 rng(3);
    const auto g = make_grid(3, 40.0, 1024, GridScheme::sine);
    for (int trial = 0; trial < 5; ++trial) {
        const auto f = random_field(g, rng);
        for (double N : {0.5, 1.0, 4.0, 3.3}) {
            const auto sum = project(f, N, ProjectionKind::leq) + project(f, N, ProjectionKind::gt);
            CHECK(max_abs_diff(sum.values, f.values) <= 1e-12 * max_abs(f.values));
            const auto sum2 = project(f, N, ProjectionKind::lt) + project(f, N, ProjectionKind::geq);
            CHECK(max_abs_diff(sum2.values, f.values) <= 1e-12 * max_abs(f.values));
            CHECK(mass(project(f, N, ProjectionKind::band)) <= mass(f));
            // lt at N is leq at N/2
            CHECK(max_abs_diff(project(f, N, ProjectionKind::lt).values, project(f, N / 2, ProjectionKind::leq).values) <=
                  1e-13 * max_abs(f.values));
        }
    }
    // spectrum supported in k <= N is left unchanged
    SpectralField F(g);
    for (int m = 0; m < F.size(); ++m) {
        const double k = g->k_nodes()[m];
        F.values[m] = k < 2.0 ? std::exp(-1.0 / (1.0 - (k / 2.0) * (k / 2.0))) : 0.0;
    }
    const auto f = hankel_inverse(F);
    CHECK(max_abs_diff(project(f, 2.0, ProjectionKind::leq).values, f.values) <= 1e-13 * max_abs(f.values));
    CHECK_THROWS_AS(project(f, 0.0, ProjectionKind::band), std::invalid_argument);
    CHECK_THROWS_AS(project(f, -1.0, ProjectionKind::leq), std::invalid_argument);
    CHECK(parse_projection_kind("geq") == ProjectionKind::geq);
    CHECK_THROWS(parse_projection_kind("above"));
}

TEST_CASE("telescoping dyadic sums")
{
    std::mt19937_64 rng(5);
    for (auto g : {make_grid(3, 40.0, 1024, GridScheme::sine), make_grid(2, 40.0, 512, GridScheme::dense)}) {
        const auto F = hankel_forward(random_field(g, rng));
        for (auto [M, N] : {std::pair{0.25, 8.0}, std::pair{1.0, 2.0}, std::pair{0.125, 16.0}}) {
            SpectralField sum(g);
            for (double Np = 2 * M; Np <= N * (1 + 1e-12); Np *= 2)
                sum += project(F, Np, ProjectionKind::band);
            const auto want = project(F, N, ProjectionKind::leq) - project(F, M, ProjectionKind::leq);
            CHECK(max_abs_diff(sum.values, want.values) <= 1e-12 * max_abs(F.values));
        }
    }
}

TEST_CASE("fattened projection")
{
    std::mt19937_64 rng(9);
    const auto g = make_grid(3, 40.0, 1024, GridScheme::sine);
    const auto f = random_field(g, rng);
    for (double N : {0.5, 2.0, 5.0}) {
        const auto lhs = project(fattened(f, N), N, ProjectionKind::band);
        const auto rhs = project(f, N, ProjectionKind::band);
        CHECK(max_abs_diff(lhs.values, rhs.values) <= 1e-12 * max_abs(f.values));
        const auto lhs2 = fattened(project(f, N, ProjectionKind::band), N);
        CHECK(max_abs_diff(lhs2.values, rhs.values) <= 1e-12 * max_abs(f.values));
    }
    // spectrum inside [N/2, 11N/10] is reproduced
    const double N = 4.0;
    SpectralField F(g);
    for (int m = 0; m < F.size(); ++m) {
        const double k = g->k_nodes()[m];
        const double x = (k - 0.5 * N) / (0.6 * N);
        F.values[m] = (x > 0 && x < 1) ? std::exp(-1.0 / (x * (1 - x))) : 0.0;
    }
    const auto band_limited = hankel_inverse(F);
    CHECK(max_abs_diff(fattened(band_limited, N).values, band_limited.values) <= 1e-13 * max_abs(band_limited.values));
    CHECK(max_abs(fattened(RadialField(g), 1.0).values) == 0.0);
    CHECK_THROWS_AS(fattened(f, 0.0), std::invalid_argument);
}

TEST_CASE("projections commute with the free propagator")
{
    std::mt19937_64 rng(13);
    const auto g = make_grid(3, 40.0, 1024, GridScheme::sine);
    const auto f = random_field(g, rng);
    for (auto kind : {ProjectionKind::leq, ProjectionKind::gt, ProjectionKind::band, ProjectionKind::lt, ProjectionKind::geq}) {
        for (double t : {0.1, 0.7}) {
            const auto a = project(free_propagate(f, t), 2.0, kind);
            const auto b = free_propagate(project(f, 2.0, kind), t);
            CHECK(max_abs_diff(a.values, b.values) <= 1e-12 * max_abs(f.values));
        }
    }
}

TEST_CASE("Bernstein ratio")
{
    std::mt19937_64 rng(17);
    const auto g = make_grid(3, 40.0, 1024, GridScheme::sine);
    std::uniform_real_distribution<double> sdist(0.0, 3.0);
    std::uniform_real_distribution<double> ndist(0.3, 8.0);
    for (int trial = 0; trial < 40; ++trial) {
        const auto f = random_field(g, rng);
        const double N = ndist(rng);
        const double s = sdist(rng);
        const double ratio = bernstein_ratio(f, N, s);
        CHECK(ratio >= std::pow(0.5, s) * (1 - 1e-14));
        CHECK(ratio <= std::pow(1.1, s) * (1 + 1e-14));
        CHECK(bernstein_ratio(f, N, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
        const double r2 = bernstein_ratio(f, N, 2.0);
        CHECK(r2 >= 0.25);
        CHECK(r2 <= 1.21);
    }
    // spectrum concentrated at k = N
    const double N = g->k_nodes()[76];
    SpectralField F(g);
    for (int m = 0; m < F.size(); ++m) {
        const double k = g->k_nodes()[m];
        F.values[m] = std::exp(-(k - N) * (k - N) / (2 * 0.01 * 0.01));
    }
    CHECK(bernstein_ratio(hankel_inverse(F), N, 1.0) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK_THROWS_AS(bernstein_ratio(RadialField(g), 1.0, 1.0), std::domain_error);
}

TEST_CASE("pn_kernel against independent quadrature")
{
    // d = 1: (1/pi) int cos(kz) psi(k/N) e^{-itk^2} dk
    // d = 3: (2 pi)^{-3/2} int sqrt(2/pi) sin(kz)/(kz) ... via std::cyl_bessel_j
    const auto rule = composite_gauss(0.0, 3.0, 600, 20);
    for (double t : {0.0, 0.3, 2.0}) {
        for (double z : {0.0, 0.7, 5.0}) {
            Complex one = 0.0;
            Complex three = 0.0;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                const double k = rule.nodes[i];
                const Complex common = DyadicBump::psi(k / 2.0) * std::polar(1.0, -t * k * k) * rule.weights[i];
                one += std::cos(k * z) * common;
                const double lam = z == 0.0 ? std::sqrt(2.0 / kPi) : std::cyl_bessel_j(0.5, k * z) / std::sqrt(k * z);
                three += lam * k * k * common;
            }
            one /= kPi;
            three *= std::pow(2 * kPi, -1.5);
            CHECK(std::abs(pn_kernel(2.0, t, 1.0 + z, 1.0, 1) - one) < 1e-11);
            CHECK(std::abs(pn_kernel(2.0, t, 1.0, 1.0 + z, 3) - three) < 1e-11);
        }
    }
    CHECK_THROWS_AS(pn_kernel(0.0, 1.0, 1.0, 1.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(pn_kernel(1.0, 1e12, 1.0, 2.0, 3), std::runtime_error);
}

TEST_CASE("pn_kernel scaling identity")
{
    for (int d : {1, 2, 3, 4}) {
        for (double N : {0.5, 4.0, 16.0}) {
            for (auto [t, x, y] : {std::tuple{0.01, 0.3, 0.9}, std::tuple{0.2, 2.0, 0.1}, std::tuple{-0.05, 1.0, 1.0}}) {
                const Complex lhs = pn_kernel(N, t, x, y, d);
                const Complex rhs = std::pow(N, d) * pn_kernel(1.0, N * N * t, N * x, N * y, d);
                CHECK(std::abs(lhs - rhs) <= 1e-8 * std::abs(rhs) + 1e-300);
                const Complex rl = pn_radial_kernel(N, t, x, y, d);
                const Complex rr = std::pow(N, d) * pn_radial_kernel(1.0, N * N * t, N * x, N * y, d);
                CHECK(std::abs(rl - rr) <= 1e-8 * std::abs(rr));
            }
        }
    }
}

TEST_CASE("pn_kernel stationary regime decays like |t|^{-d/2}")
{
    // Stationary point k = 0.8 N sits on the flat part of psi; from t ~ 100/N^2
    // on, the contribution of the cutoff edges is negligible against it.
    for (int d : {1, 2, 3, 4, 5}) {
        for (double N : {1.0, 4.0}) {
            std::vector<double> ts, mags;
            for (double t = 100.0 / (N * N); t <= 1000.0 / (N * N) * 1.0001; t *= std::pow(10.0, 0.125)) {
                ts.push_back(t);
                mags.push_back(std::abs(pn_kernel(N, t, 1.6 * N * t, 0.0, d)));
            }
            const double slope = fit_slope(ts, mags);
            CHECK_MESSAGE(std::abs(slope + 0.5 * d) <= 0.1, "d=" << d << " N=" << N << " slope=" << slope);
        }
    }
}

TEST_CASE("pn_kernel short-time decay steepens")
{
    // Envelope of |K| (max over [s, 1.25 s]) fitted over N|x-y| in [10, 100]
    // and [100, 1000]: the far slope is markedly steeper.
    const double N = 2.0;
    for (int d : {1, 3}) {
        for (double t : {0.0, 0.5 / (N * N)}) {
            std::vector<double> s_near, e_near, s_far, e_far;
            for (double s = 10.0; s <= 1000.0 * 1.0001; s *= std::pow(10.0, 1.0 / 16)) {
                double env = 0.0;
                for (int i = 0; i < 40; ++i)
                    env = std::max(env, std::abs(pn_kernel(N, t, s * (1 + 0.25 * i / 40.0) / N, 0.0, d)));
                if (s <= 100.0 * 1.0001) {
                    s_near.push_back(s);
                    e_near.push_back(env);
                }
                if (s >= 100.0 / 1.0001) {
                    s_far.push_back(s);
                    e_far.push_back(env);
                }
            }
            const double near = fit_slope(s_near, e_near);
            const double far = fit_slope(s_far, e_far);
            MESSAGE("d=" << d << " t=" << t << " slope [10,100] " << near << ", [100,1000] " << far);
            CHECK(far < near - 1.0);
            CHECK(far < -2.5);
            CHECK(e_far.back() < e_near.front() * std::pow(100.0, near));
        }
    }
}
