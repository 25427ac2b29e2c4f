#include "doctest.h"

#include "criticalwave/radial_spectral.hpp"
#include "criticalwave/special_functions.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace criticalwave;

namespace {

constexpr double kPi = std::numbers::pi;

double rel_l2(const RadialField& a, const RadialField& b) { return std::sqrt(mass(a - b) / mass(b)); }

double max_abs_diff(const std::vector<Complex>& a, const std::vector<Complex>& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

RadialField gaussian(const GridPtr& g, double width = 1.0)
{
    return RadialField::from_function(g, [width](double r) { return Complex(std::exp(-r * r / (2 * width * width))); });
}

// Smooth radial field with random complex Gaussian components.
RadialField random_smooth(const GridPtr& g, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> a(0.3, 2.0);
    std::vector<std::pair<Complex, double>> terms;
    for (int i = 0; i < 4; ++i)
        terms.emplace_back(Complex(u(rng), u(rng)), a(rng));
    return RadialField::from_function(g, [&](double r) {
        Complex s = 0.0;
        for (const auto& [c, alpha] : terms)
            s += c * (1.0 + alpha * r * r) * std::exp(-alpha * r * r);
        return s;
    });
}

} // namespace

TEST_CASE("make_grid: sine layout and preconditions")
{
    const auto g = make_grid(3, 20.0, 512, GridScheme::sine);
    CHECK(g->r_nodes()[0] == doctest::Approx(20.0 / 513).epsilon(1e-15));
    CHECK(g->k_nodes()[0] == doctest::Approx(kPi / 20).epsilon(1e-15));
    CHECK(g->k_max() == doctest::Approx(kPi * 512 / 20));
    CHECK(g->sphere_factor() == doctest::Approx(4 * kPi));

    CHECK_THROWS_AS(make_grid(0, 20.0, 64, GridScheme::dense), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(3, 20.0, 8, GridScheme::dense), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(2, 20.0, 64, GridScheme::sine), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(3, -1.0, 64, GridScheme::dense), std::invalid_argument);
}

TEST_CASE("grid quadrature reproduces the Gaussian moment integral")
{
    // int_0^inf e^{-r^2/2} r^{d-1} dr = 2^{d/2-1} Gamma(d/2)
    for (int d = 1; d <= 6; ++d) {
        const auto g = make_grid(d, 20.0, 256, GridScheme::dense);
        double sum = 0.0;
        for (int j = 0; j < g->size(); ++j)
            sum += std::exp(-0.5 * g->r_nodes()[j] * g->r_nodes()[j]) * g->r_measure()[j];
        const double want = std::pow(2.0, 0.5 * d - 1) * std::tgamma(0.5 * d);
        CHECK(std::abs(sum - want) / want < 1e-10);

        // nodes ascending, weights positive
        for (int j = 1; j < g->size(); ++j)
            CHECK(g->r_nodes()[j] > g->r_nodes()[j - 1]);
        CHECK(g->r_weights()[0] > 0.0);
    }
}

TEST_CASE("Gaussian is a fixed point of the transform")
{
    for (int d = 1; d <= 6; ++d) {
        const auto g = make_grid(d, 20.0, 256, GridScheme::dense);
        const auto F = hankel_forward(gaussian(g));
        double err = 0.0;
        for (int m = 0; m < g->size(); ++m) {
            const double k = g->k_nodes()[m];
            err = std::max(err, std::abs(F.values[m] - std::exp(-k * k / 2)));
        }
        CHECK_MESSAGE(err < 1e-8, "d=" << d << " err=" << err);

        SpectralField G(g);
        for (int m = 0; m < g->size(); ++m)
            G.values[m] = std::exp(-g->k_nodes()[m] * g->k_nodes()[m] / 2);
        CHECK(max_abs_diff(hankel_inverse(G).values, gaussian(g).values) < 1e-8);
    }
    const auto s = make_grid(3, 20.0, 512, GridScheme::sine);
    const auto F = hankel_forward(gaussian(s));
    double err = 0.0;
    for (int m = 0; m < s->size(); ++m)
        err = std::max(err, std::abs(F.values[m] - std::exp(-s->k_nodes()[m] * s->k_nodes()[m] / 2)));
    CHECK(err < 1e-8);
}

TEST_CASE("Gaussian transform oracle by adaptive quadrature of the Bessel integral")
{
    // Independent check of the closed form e^{-k^2/2} for d = 3 using the
    // standard library Bessel function and a fine Gauss rule.
    const auto rule = composite_gauss(0.0, 20.0, 200, 20);
    for (double k : {0.3, 1.0, 2.2, 4.0}) {
        double sum = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double r = rule.nodes[i];
            sum += std::cyl_bessel_j(0.5, k * r) * std::exp(-r * r / 2) * std::pow(r, 1.5) * rule.weights[i];
        }
        sum *= std::pow(k, -0.5);
        CHECK(sum == doctest::Approx(std::exp(-k * k / 2)).epsilon(1e-12));
    }
}

TEST_CASE("round trip and Plancherel")
{
    std::mt19937_64 rng(7);
    for (int d : {1, 2, 3, 4, 5}) {
        const auto g = make_grid(d, 20.0, 512, GridScheme::dense);
        for (int trial = 0; trial < 3; ++trial) {
            const auto f = random_smooth(g, rng);
            const auto F = hankel_forward(f);
            CHECK(rel_l2(hankel_inverse(F), f) < 1e-10);
            CHECK(std::abs(spectral_mass(F) - mass(f)) / mass(f) < 1e-8);
        }
    }
    const auto s = make_grid(3, 20.0, 512, GridScheme::sine);
    const auto f = random_smooth(s, rng);
    CHECK(rel_l2(hankel_inverse(hankel_forward(f)), f) < 1e-13);
    CHECK(std::abs(spectral_mass(hankel_forward(f)) - mass(f)) / mass(f) < 1e-12);

    const RadialField zero(s);
    CHECK(mass(hankel_inverse(hankel_forward(zero))) == 0.0);
}

TEST_CASE("dense and sine transforms agree for d = 3")
{
    std::mt19937_64 rng(11);
    const auto dense = make_grid(3, 20.0, 512, GridScheme::dense);
    const auto sine = make_grid(3, 20.0, 512, GridScheme::sine);
    for (int trial = 0; trial < 5; ++trial) {
        std::mt19937_64 a = rng;
        std::mt19937_64 b = rng;
        rng.discard(100);
        const auto fd = random_smooth(dense, a);
        const auto fs = random_smooth(sine, b);
        const auto Fs = hankel_forward(fs);
        double err = 0.0;
        double peak = 0.0;
        for (int m = 0; m < sine->size(); m += 7) {
            err = std::max(err, std::abs(dense->forward_at(fd.values, sine->k_nodes()[m]) - Fs.values[m]));
            peak = std::max(peak, std::abs(Fs.values[m]));
        }
        CHECK(err / peak < 1e-8);
    }
}

TEST_CASE("radial derivative of a Gaussian")
{
    for (auto g : {make_grid(3, 20.0, 512, GridScheme::sine), make_grid(4, 20.0, 256, GridScheme::dense),
                   make_grid(1, 20.0, 256, GridScheme::dense)}) {
        const auto df = radial_derivative(gaussian(g));
        double err = 0.0;
        for (int j = 0; j < g->size(); ++j) {
            const double r = g->r_nodes()[j];
            err = std::max(err, std::abs(df.values[j] + r * std::exp(-r * r / 2)));
        }
        CHECK(err < 1e-9);
    }
}

TEST_CASE("free_propagate: closed-form Gaussian evolution")
{
    // Oracle check of the closed form in d = 1 against direct quadrature of
    // the explicit convolution kernel (4 pi i t)^{-1/2} e^{i|x-y|^2/(4t)}.
    {
        const double t = 0.35;
        const auto rule = composite_gauss(-40.0, 40.0, 400, 24);
        const Complex pref = std::pow(Complex(0.0, 4 * kPi * t), -0.5);
        for (double x : {0.0, 0.7, 2.5}) {
            Complex sum = 0.0;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                const double y = rule.nodes[i];
                sum += std::exp(Complex(0.0, (x - y) * (x - y) / (4 * t))) * std::exp(-y * y / 2) * rule.weights[i];
            }
            const Complex a = Complex(1.0, 2 * t);
            const Complex closed = std::pow(a, -0.5) * std::exp(-x * x / (2.0 * a));
            CHECK(std::abs(pref * sum - closed) < 1e-10);
        }
    }
    // Dense grids resolve the k-integrand phase r - 2tk only for moderate t
    // in a single step; the sine grid is exact for band-limited data.
    for (auto g : {make_grid(3, 30.0, 1024, GridScheme::sine), make_grid(2, 30.0, 512, GridScheme::dense),
                   make_grid(4, 30.0, 512, GridScheme::dense)}) {
        const int d = g->dimension();
        const auto f = gaussian(g);
        const std::vector<double> times = g->scheme() == GridScheme::sine ? std::vector<double>{0.25, 1.0, 2.0}
                                                                           : std::vector<double>{0.25, 0.5, 1.0};
        for (double t : times) {
            const auto u = free_propagate(f, t);
            const Complex a(1.0, 2 * t);
            double err = 0.0;
            for (int j = 0; j < g->size(); ++j) {
                const double r = g->r_nodes()[j];
                err = std::max(err, std::abs(u.values[j] - std::pow(a, -0.5 * d) * std::exp(-r * r / (2.0 * a))));
            }
            CHECK_MESSAGE(err < 1e-8, "d=" << d << " t=" << t << " err=" << err);
            CHECK(std::abs(mass(u) - mass(f)) / mass(f) < 1e-12);
        }
        CHECK(free_propagate(f, 0.0).values == f.values);
        const auto st = free_propagate(free_propagate(f, 0.4), 0.6);
        CHECK(rel_l2(st, free_propagate(f, 1.0)) < 1e-10);
    }
}

TEST_CASE("functionals")
{
    // d = 1, Q(x) = 3^{1/4} sech^{1/2}(2x): M(Q) = sqrt(3) pi / 2 on the whole line.
    const auto g = make_grid(1, 30.0, 512, GridScheme::dense);
    const auto q = RadialField::from_function(g, [](double x) { return Complex(std::pow(3.0, 0.25) / std::sqrt(std::cosh(2 * x))); });
    CHECK(mass(q) == doctest::Approx(std::sqrt(3.0) * kPi / 2).epsilon(1e-12));
    CHECK(mass(q) == doctest::Approx(2.720699046351326).epsilon(1e-12));

    const RadialField zero(g);
    CHECK(energy(zero, EquationParams::make(-1, 1)) == 0.0);
    CHECK_THROWS(lp_norm(q, 0.5));

    // ||grad e^{-r^2/2}||^2 in d = 3 is (d/2) pi^{d/2}
    const auto s = make_grid(3, 20.0, 512, GridScheme::sine);
    CHECK(grad_norm_sq(gaussian(s)) == doctest::Approx(1.5 * std::pow(kPi, 1.5)).epsilon(1e-10));
    CHECK(lp_norm(gaussian(s), std::numeric_limits<double>::infinity()) == doctest::Approx(1.0).epsilon(1e-3)); // sampled maximum
    CHECK(lp_norm(gaussian(s), 1.0) == doctest::Approx(std::pow(2 * kPi, 1.5)).epsilon(1e-10));
    CHECK(mass_within(gaussian(s), 40.0) == doctest::Approx(mass(gaussian(s))));
    // mass inside radius 1: pi^{3/2} (erf(1) - 2 e^{-1}/sqrt(pi))
    CHECK(mass_within(gaussian(s), 1.0) ==
          doctest::Approx(std::pow(kPi, 1.5) * (std::erf(1.0) - 2 * std::exp(-1.0) / std::sqrt(kPi))).epsilon(1e-10));
    CHECK(mass_within(gaussian(s), 0.0) == 0.0);
}
