#include "doctest.h"

#include "criticalwave/inout.hpp"
#include "criticalwave/littlewood_paley.hpp"
#include "criticalwave/radial_spectral.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace criticalwave;

namespace {

constexpr double kPi = std::numbers::pi;

double rel_l2(const RadialField& a, const RadialField& b) { return std::sqrt(mass(a - b) / mass(b)); }

// Band-limited random field: Gaussian envelopes times a slow carrier.
RadialField random_band_limited(const GridPtr& g, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> w(0.8, 2.0);
    std::uniform_real_distribution<double> carrier(0.0, 2.0);
    std::vector<std::tuple<Complex, double, double>> terms;
    for (int i = 0; i < 4; ++i)
        terms.emplace_back(Complex(u(rng), u(rng)), w(rng), carrier(rng));
    return RadialField::from_function(g, [&](double r) {
        Complex s = 0.0;
        for (const auto& [c, a, k] : terms)
            s += c * std::exp(-r * r / (2 * a * a)) * std::cos(k * r);
        return s;
    });
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

TEST_CASE("P+ + P- is the identity on band-limited fields")
{
    std::mt19937_64 rng(21);
    for (auto g : {make_grid(3, 30.0, 512, GridScheme::sine), make_grid(2, 30.0, 512, GridScheme::dense),
                   make_grid(4, 30.0, 512, GridScheme::dense), make_grid(5, 30.0, 512, GridScheme::dense)}) {
        for (int trial = 0; trial < 5; ++trial) {
            const auto f = random_band_limited(g, rng);
            const double err = rel_l2(p_plus_spectral(f) + p_minus_spectral(f), f);
            CHECK_MESSAGE(err <= 1e-8, "d=" << g->dimension() << " err=" << err);
        }
    }
}

TEST_CASE("P- is the conjugate of P+")
{
    std::mt19937_64 rng(22);
    const auto g = make_grid(3, 30.0, 512, GridScheme::sine);
    const auto f = random_band_limited(g, rng);
    const auto lhs = p_minus_spectral(f);
    const auto rhs = conj(p_plus_spectral(conj(f)));
    CHECK(rel_l2(lhs, rhs) <= 1e-15);

    RadialField real_f = f;
    for (auto& v : real_f.values)
        v = v.real();
    CHECK(rel_l2(p_minus_spectral(real_f), conj(p_plus_spectral(real_f))) <= 1e-15);
}

TEST_CASE("P+ of a narrow-band standing wave is its outgoing half")
{
    // Oracle: 1/2 r^{-nu} int H1_nu(kr) F(k) k^{d/2} dk by direct quadrature
    // with the standard library Bessel functions.
    for (auto g : {make_grid(3, 40.0, 1024, GridScheme::sine), make_grid(2, 40.0, 1024, GridScheme::dense)}) {
        const int d = g->dimension();
        const double nu = 0.5 * (d - 2);
        const double k0 = 3.0;
        const double width = 0.2;
        const auto spectrum = [&](double k) { return std::exp(-(k - k0) * (k - k0) / (2 * width * width)); };
        SpectralField F(g);
        for (int m = 0; m < F.size(); ++m)
            F.values[m] = spectrum(g->k_nodes()[m]);
        const auto f = hankel_inverse(F);
        const auto P = p_plus_spectral(f);
        const auto rule = composite_gauss(std::max(1e-3, k0 - 12 * width), k0 + 12 * width, 200, 20);
        double prev_phase = 0.0;
        for (int i = 0; i < g->size(); i += 37) {
            const double r = g->r_nodes()[i];
            if (r < 0.5 || r > 12.0)
                continue;
            Complex want = 0.0;
            for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                const double k = rule.nodes[q];
                const Complex h(std::cyl_bessel_j(nu, k * r), std::cyl_neumann(nu, k * r));
                want += h * spectrum(k) * std::pow(k, 0.5 * d) * rule.weights[q];
            }
            want *= 0.5 * std::pow(r, -nu);
            CHECK_MESSAGE(std::abs(P.values[i] - want) <= 1e-9, "d=" << d << " r=" << r);
            // outgoing: phase increases with r at rate ~ k0
            if (r > 2.0) {
                const double phase = std::arg(P.values[i] * std::exp(Complex(0.0, -k0 * r)));
                if (prev_phase != 0.0)
                    CHECK(std::abs(std::remainder(phase - prev_phase, 2 * kPi)) < 0.5);
                prev_phase = phase;
            }
        }
    }
}

TEST_CASE("PV and spectral P+ agree")
{
    std::mt19937_64 rng(23);
    for (auto g : {make_grid(3, 30.0, 512, GridScheme::sine), make_grid(4, 30.0, 512, GridScheme::dense)}) {
        for (int trial = 0; trial < 6; ++trial) {
            const auto f = random_band_limited(g, rng);
            const auto pv = p_plus_pv_estimate(f);
            const double err = rel_l2(pv.value, p_plus_spectral(f));
            CHECK_MESSAGE(err <= 1e-6, "d=" << g->dimension() << " err=" << err);
            CHECK(pv.max_error < 1e-8);
        }
        const RadialField zero(g);
        CHECK(mass(p_plus_pv(zero)) == 0.0);
        CHECK(mass(p_plus_spectral(zero)) == 0.0);
    }
}

TEST_CASE("pv_integral against singularity subtraction")
{
    // f(rho) = bump(rho) / rho in d = 3, so the integrand is bump(rho) rho / (r^2 - rho^2).
    const auto bump = [](double rho) {
        const double x = (rho - 2.0) / 1.5;
        return std::abs(x) < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0;
    };
    const double L = 6.0;
    for (double r : {0.7, 1.3, 2.0, 2.9, 3.45, 5.0}) {
        // q(rho) = bump rho / (r + rho); PV int q/(r - rho) = int (q - q(r))/(r - rho) + q(r) log(r/(L - r))
        const auto q = [&](double rho) { return bump(rho) * rho / (r + rho); };
        const auto rule = composite_gauss(0.0, L, 600, 16);
        double regular = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double rho = rule.nodes[i];
            regular += (q(rho) - q(r)) / (r - rho) * rule.weights[i];
        }
        const double want = regular + q(r) * std::log(r / (L - r));
        const auto est = pv_integral([&](double rho) { return Complex(bump(rho) / rho); }, r, 3, L, 12.0);
        CHECK_MESSAGE(std::abs(est.value - want) <= 1e-8, "r=" << r << " got " << est.value << " want " << want);
        CHECK(est.error <= 1e-8);
    }
    CHECK_THROWS_AS(pv_integral([](double) { return Complex(1.0); }, 7.0, 3, 6.0, 1.0), std::invalid_argument);
}

TEST_CASE("p_plus_at matches grid values and refuses the origin")
{
    std::mt19937_64 rng(24);
    const auto g = make_grid(3, 30.0, 512, GridScheme::sine);
    const auto f = random_band_limited(g, rng);
    const auto P = p_plus_spectral(f);
    const std::vector<double> nodes{g->r_nodes()[0], g->r_nodes()[10], g->r_nodes()[200]};
    const auto at = p_plus_at(f, nodes);
    CHECK(std::abs(at[0] - P.values[0]) <= 1e-14 * std::abs(P.values[0]));
    CHECK(std::abs(at[1] - P.values[10]) <= 1e-14 * std::abs(P.values[10]));
    CHECK(std::abs(at[2] - P.values[200]) <= 1e-14 * std::abs(P.values[200]) + 1e-16);

    // between nodes, compare with the PV form evaluated at the same radius
    const double r = 0.5 * (g->r_nodes()[40] + g->r_nodes()[41]);
    const std::vector<double> mid{r};
    const Complex spectral = p_plus_at(f, mid)[0];
    const auto interp_value = g->interpolate(f.values, mid)[0];
    const double bw = 6.0;
    const auto est = pv_integral(
        [&](double rho) {
            const std::vector<double> at_rho{rho};
            return rho < g->r_max() ? g->interpolate(f.values, at_rho)[0] : Complex{};
        },
        r, 3, g->r_max(), bw);
    const Complex pv = 0.5 * interp_value + Complex(0.0, 1.0 / (kPi * r)) * est.value;
    CHECK(std::abs(spectral - pv) <= 1e-8 * std::abs(pv));

    const std::vector<double> below{0.5 * g->r_nodes()[0]};
    CHECK_THROWS_AS(p_plus_at(f, below), std::domain_error);
    CHECK_THROWS_AS(p_plus_spectral(RadialField(make_grid(1, 10.0, 64, GridScheme::dense))), std::invalid_argument);
}

TEST_CASE("exterior bound probe")
{
    const auto a = exterior_bound_probe(1.0, 10, 3);
    const auto b = exterior_bound_probe(16.0, 10, 3);
    CHECK(a.ratios.size() == 10);
    CHECK(a.inner_radius == doctest::Approx(0.01));
    CHECK(b.inner_radius == doctest::Approx(0.01 / 16));
    CHECK(a.constant > 0.1);
    CHECK(std::max(a.constant, b.constant) / std::min(a.constant, b.constant) < 2.0);
    CHECK_THROWS_AS(exterior_bound_probe(1.0, 5), std::invalid_argument);
}

TEST_CASE("P+ near the origin: growth for d = 4, convergence for d = 3")
{
    std::vector<double> cutoffs{1e-1, 1e-2, 1e-3, 1e-4};
    {
        const auto g = make_grid(4, 10.0, 1024, GridScheme::dense);
        REQUIRE(g->r_nodes()[0] < 1e-4);
        const auto f = RadialField::from_function(g, [](double r) { return Complex(std::exp(-r * r)); });
        const auto P = p_plus_spectral(f);
        double prev = 0.0;
        for (double c : cutoffs) {
            const double v = exterior_norm(P, c);
            CHECK(v > prev * 1.05);
            prev = v;
        }
    }
    {
        const auto g = make_grid(3, 10.0, 4096, GridScheme::sine);
        const auto f = RadialField::from_function(g, [](double r) { return Complex(std::exp(-r * r)); });
        const auto P = p_plus_spectral(f);
        const double coarse = exterior_norm(P, 1e-2);
        const double fine = exterior_norm(P, 1e-3);
        MESSAGE("d=3 exterior norms " << coarse << " " << fine << " (full space " << exterior_norm(P, 0.0) << ")");
        CHECK(fine >= coarse);
        CHECK(fine / coarse < 1.01);
    }
}

TEST_CASE("sanity: outgoing data moves outward under the free flow")
{
    // Not a theorem check: guards against swapping H1 and H2.
    const auto g = make_grid(3, 40.0, 1024, GridScheme::sine);
    const auto f = RadialField::from_function(g, [](double r) { return Complex(std::exp(-(r - 10) * (r - 10) / 2) * std::cos(3 * r)); });
    const auto out = p_plus_spectral(f);
    const auto in = p_minus_spectral(f);
    const auto radius90 = [](const RadialField& u) {
        const double total = mass(u);
        double lo = 0.0, hi = u.grid->r_max();
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            (mass_within(u, mid) < 0.9 * total ? lo : hi) = mid;
        }
        return hi;
    };
    double prev_out = 0.0;
    double first_in = 0.0;
    double last_in = 0.0;
    for (double t = 0.0; t <= 1.0 + 1e-12; t += 0.125) {
        const double r_out = radius90(free_propagate(out, t));
        CHECK(r_out >= prev_out);
        prev_out = r_out;
        const double r_in = radius90(free_propagate(in, t));
        if (t == 0.0)
            first_in = r_in;
        last_in = r_in;
    }
    CHECK(prev_out > radius90(out) + 4.0);
    CHECK(last_in < first_in - 4.0);
}

TEST_CASE("inout_kernel stationary exponents")
{
    for (int d : {2, 3, 4}) {
        for (double N : {1.0, 4.0}) {
            // columns 1, log t, log(xy); least squares by normal equations
            double A[3][3] = {};
            double b[3] = {};
            for (double t = 100.0; t <= 1000.0 * 1.001; t *= std::pow(10.0, 0.25)) {
                for (double x = 10.0; x <= 100.0 * 1.001; x *= std::pow(10.0, 0.25)) {
                    const double tt = t / (N * N);
                    const double xx = x / N;
                    const double yy = xx + 1.6 * N * tt;
                    const auto s = inout_kernel(N, tt, xx, yy, +1, d);
                    CHECK(s.regime == KernelRegime::stationary);
                    const double v[3] = {1.0, std::log(tt), std::log(xx * yy)};
                    for (int p = 0; p < 3; ++p) {
                        b[p] += v[p] * std::log(std::abs(s.value));
                        for (int q = 0; q < 3; ++q)
                            A[p][q] += v[p] * v[q];
                    }
                }
            }
            for (int p = 0; p < 3; ++p)
                for (int q = p + 1; q < 3; ++q) {
                    const double m = A[q][p] / A[p][p];
                    for (int c = 0; c < 3; ++c)
                        A[q][c] -= m * A[p][c];
                    b[q] -= m * b[p];
                }
            double sol[3];
            for (int p = 2; p >= 0; --p) {
                double s = b[p];
                for (int q = p + 1; q < 3; ++q)
                    s -= A[p][q] * sol[q];
                sol[p] = s / A[p][p];
            }
            CHECK_MESSAGE(std::abs(sol[1] + 0.5) <= 0.1, "d=" << d << " t exponent " << sol[1]);
            CHECK_MESSAGE(std::abs(sol[2] + 0.5 * (d - 1)) <= 0.1, "d=" << d << " radius exponent " << sol[2]);
        }
    }
}

TEST_CASE("inout_kernel scaling, conjugation and regimes")
{
    for (int d : {2, 3, 4}) {
        for (double N : {0.5, 8.0}) {
            for (auto [t, x, y] : {std::tuple{0.3, 1.0, 2.0}, std::tuple{2.0, 0.7, 5.0}, std::tuple{-0.1, 3.0, 0.0}}) {
                const Complex lhs = inout_kernel(N, t, x, y, +1, d).value;
                const Complex rhs = std::pow(N, d) * inout_kernel(1.0, N * N * t, N * x, N * y, +1, d).value;
                CHECK(std::abs(lhs - rhs) <= 1e-8 * std::abs(rhs));
                CHECK(inout_kernel(N, t, x, y, -1, d).value == std::conj(lhs));
            }
        }
    }
    CHECK(classify_kernel_regime(1.0, 0.5, 1.0, 2.0) == KernelRegime::short_time);
    CHECK(classify_kernel_regime(1.0, 10.0, 1.0, 17.0) == KernelRegime::stationary);
    CHECK(classify_kernel_regime(1.0, 10.0, 1.0, 40.0) == KernelRegime::tail);
    CHECK(classify_kernel_regime(1.0, -10.0, 1.0, 17.0) == KernelRegime::tail);
    CHECK_THROWS_AS(inout_kernel(1.0, 1.0, 0.01, 1.0, +1), std::domain_error);
    CHECK_THROWS_AS(inout_kernel(1.0, 1.0, 1.0, 1.0, +1, 1), std::invalid_argument);
}

TEST_CASE("inout_kernel short-time and tail decay")
{
    const double x = 5.0;
    for (double t : {0.0, 0.5}) {
        std::vector<double> s_near, e_near, s_far, e_far;
        for (double s = 10.0; s <= 1000.0 * 1.0001; s *= std::pow(10.0, 1.0 / 16)) {
            double env = 0.0;
            for (int i = 0; i < 40; ++i) {
                const double y = x + s * (1 + 0.25 * i / 40.0);
                env = std::max(env, std::abs(inout_kernel(1.0, t, x, y, +1, 3).value) * y);
            }
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
        MESSAGE("short time t=" << t << ": slope [10,100] " << near << ", [100,1000] " << far);
        CHECK(far < near - 1.0);
        CHECK(far < -2.0);
    }
    // tail: beyond the stationary window the kernel falls off fast in the offset
    const double t = 200.0;
    const double at_10 = std::abs(inout_kernel(1.0, t, x, x + 2.2 * t + 10.0, +1, 3).value);
    const double at_1000 = std::abs(inout_kernel(1.0, t, x, x + 2.2 * t + 1000.0, +1, 3).value);
    const double stationary = std::abs(inout_kernel(1.0, t, x, x + 1.6 * t, +1, 3).value);
    CHECK(at_10 < stationary);
    CHECK(at_1000 < 1e-3 * at_10);
}

TEST_CASE("kernel scan CSV")
{
    std::vector<InOutKernelSample> samples{inout_kernel(1.0, 0.5, 1.0, 2.0, +1), inout_kernel(2.0, 10.0, 1.0, 33.0, -1)};
    std::ostringstream out;
    write_kernel_scan(out, samples);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "N,t,x,y,re,im,regime");
    std::getline(in, line);
    CHECK(line.rfind("1,0.5,1,2,", 0) == 0);
    CHECK(line.substr(line.size() - 10) == "short_time");
    std::getline(in, line);
    CHECK(line.substr(line.size() - 10) == "stationary");
}
