#include "criticalwave/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace criticalwave {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSeriesLimit = 12.0;

bool is_integer(double nu) { return std::abs(nu - std::round(nu)) < 1e-14; }

bool is_half_integer(double nu)
{
    const double twice = 2.0 * nu;
    if (std::abs(twice - std::round(twice)) > 1e-14)
        return false;
    return (static_cast<long>(std::round(twice)) % 2) != 0;
}

// Ascending series, accumulated in extended precision.
long double j_series(long double nu, long double z)
{
    const long double x = z / 2.0L;
    long double term = std::pow(x, nu) / std::tgamma(nu + 1.0L);
    long double sum = term;
    for (int k = 1; k < 500; ++k) {
        term *= -x * x / (static_cast<long double>(k) * (k + nu));
        sum += term;
        if (std::abs(term) < 1e-22L * std::abs(sum) && k > 2)
            break;
    }
    return sum;
}

long double digamma_int(int m)
{
    long double s = -0.57721566490153286060651209008240243L;
    for (int j = 1; j < m; ++j)
        s += 1.0L / j;
    return s;
}

long double y_series_integer(int n, long double z)
{
    const long double x = z / 2.0L;
    const long double pi = std::numbers::pi_v<long double>;
    long double result = 2.0L / pi * j_series(n, z) * std::log(x);

    long double finite = 0.0L;
    for (int k = 0; k < n; ++k)
        finite += std::tgamma(static_cast<long double>(n - k)) / std::tgamma(static_cast<long double>(k + 1)) *
                  std::pow(x, static_cast<long double>(2 * k - n));
    result -= finite / pi;

    long double term = 1.0L / std::tgamma(static_cast<long double>(n + 1)); // (-x^2)^k / (k!(n+k)!)
    long double sum = 0.0L;
    for (int k = 0; k < 500; ++k) {
        if (k > 0)
            term *= -x * x / (static_cast<long double>(k) * (n + k));
        const long double contrib = (digamma_int(k + 1) + digamma_int(n + k + 1)) * term;
        sum += contrib;
        if (k > 2 && std::abs(contrib) < 1e-22L * std::abs(sum))
            break;
    }
    result -= std::pow(x, static_cast<long double>(n)) * sum / pi;
    return result;
}

struct JY
{
    double j;
    double y;
};

JY hankel_asymptotic(double nu, double z)
{
    const double mu = 4.0 * nu * nu;
    double p = 1.0;
    double q = 0.0;
    double term = 1.0;
    double previous = 1.0;
    for (int k = 1; k < 80; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= (mu - odd * odd) / (k * 8.0 * z);
        if (std::abs(term) > std::abs(previous) && k > 2)
            break;
        // t_k enters P with sign (-1)^{k/2} for even k and Q with (-1)^{(k-1)/2} for odd k.
        switch (k % 4) {
        case 1: q += term; break;
        case 2: p -= term; break;
        case 3: q -= term; break;
        default: p += term; break;
        }
        if (std::abs(term) < 1e-17)
            break;
        previous = term;
    }
    const double chi = z - (0.5 * nu + 0.25) * kPi;
    const double amp = std::sqrt(2.0 / (kPi * z));
    const double c = std::cos(chi);
    const double s = std::sin(chi);
    return {amp * (p * c - q * s), amp * (p * s + q * c)};
}

// J and Y for nu = m + 1/2 (m >= -1) by upward recurrence from the
// closed forms at orders -1/2 and 1/2.
JY half_integer_closed_form(double nu, double z)
{
    const double amp = std::sqrt(2.0 / (kPi * z));
    double j_lo = amp * std::cos(z); // J_{-1/2}
    double j_hi = amp * std::sin(z); // J_{1/2}
    double y_lo = amp * std::sin(z); // Y_{-1/2}
    double y_hi = -amp * std::cos(z); // Y_{1/2}
    if (nu < 0.0)
        return {j_lo, y_lo};
    for (double order = 0.5; order < nu - 0.25; order += 1.0) {
        const double j_next = 2.0 * order / z * j_hi - j_lo;
        const double y_next = 2.0 * order / z * y_hi - y_lo;
        j_lo = j_hi;
        j_hi = j_next;
        y_lo = y_hi;
        y_hi = y_next;
    }
    return {j_hi, y_hi};
}

void check_order(double nu)
{
    if (!(nu >= -0.5) || !std::isfinite(nu))
        throw std::domain_error("Bessel order must be >= -1/2");
}

} // namespace

double bessel_j(double nu, double z)
{
    check_order(nu);
    if (!(z >= 0.0))
        throw std::domain_error("bessel_j: argument must be nonnegative");
    if (z == 0.0) {
        if (nu == 0.0)
            return 1.0;
        if (nu > 0.0)
            return 0.0;
        return std::numeric_limits<double>::infinity();
    }
    if (is_half_integer(nu) && (nu < 1.0 || z > 2.0 * nu + 2.0))
        return half_integer_closed_form(nu, z).j;
    if (z <= kSeriesLimit)
        return static_cast<double>(j_series(nu, z));
    return hankel_asymptotic(nu, z).j;
}

double bessel_j_scaled(double nu, double z)
{
    check_order(nu);
    if (nu == 0.5)
        return z < 1e-4 ? std::sqrt(2.0 / kPi) * (1.0 - z * z / 6.0 + z * z * z * z / 120.0)
                        : std::sqrt(2.0 / kPi) * std::sin(z) / z;
    if (nu == -0.5)
        return std::sqrt(2.0 / kPi) * std::cos(z);
    if (z < 1e-8)
        return 1.0 / (std::pow(2.0, nu) * std::tgamma(nu + 1.0)) * (1.0 - z * z / (4.0 * (nu + 1.0)));
    return bessel_j(nu, z) * std::pow(z, -nu);
}

double bessel_y(double nu, double z)
{
    check_order(nu);
    if (!(z > 0.0))
        throw std::domain_error("bessel_y: argument must be positive");
    if (is_half_integer(nu))
        return half_integer_closed_form(nu, z).y;
    if (z > kSeriesLimit)
        return hankel_asymptotic(nu, z).y;
    if (is_integer(nu))
        return static_cast<double>(y_series_integer(static_cast<int>(std::round(nu)), z));
    const long double pi = std::numbers::pi_v<long double>;
    const long double jp = j_series(nu, z);
    const long double jm = j_series(-static_cast<long double>(nu), z);
    return static_cast<double>((jp * std::cos(nu * pi) - jm) / std::sin(nu * pi));
}

std::complex<double> hankel_h1(double nu, double z)
{
    if (!(z > 0.0))
        throw std::domain_error("hankel_h1: argument must be positive (singular at the origin)");
    if (nu < 0.0)
        throw std::domain_error("hankel_h1: order must be nonnegative");
    if (z > kSeriesLimit && !is_half_integer(nu)) {
        const JY jy = hankel_asymptotic(nu, z);
        return {jy.j, jy.y};
    }
    return {bessel_j(nu, z), bessel_y(nu, z)};
}

std::complex<double> hankel_h2(double nu, double z) { return std::conj(hankel_h1(nu, z)); }

double bessel_k_large(double nu, double z)
{
    if (z < 8.0 || std::abs(nu) > 4.0)
        throw std::domain_error("bessel_k_large: requires z >= 8 and |nu| <= 4");
    const double mu = 4.0 * nu * nu;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 60; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double next = term * (mu - odd * odd) / (k * 8.0 * z);
        if (std::abs(next) > std::abs(term))
            break;
        term = next;
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum))
            break;
    }
    return std::sqrt(kPi / (2.0 * z)) * std::exp(-z) * sum;
}

QuadratureRule gauss_legendre(int n)
{
    if (n < 1)
        throw std::invalid_argument("gauss_legendre: n must be positive");
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        long double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        long double dp = 0.0L;
        for (int iter = 0; iter < 100; ++iter) {
            long double p0 = 1.0L;
            long double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const long double p2 = ((2.0L * k - 1.0L) * x * p1 - (k - 1.0L) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1)
                p0 = 1.0L;
            dp = n * (x * p1 - p0) / (x * x - 1.0L);
            const long double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-19L)
                break;
        }
        // recompute derivative at the converged node
        long double p0 = 1.0L;
        long double p1 = x;
        for (int k = 2; k <= n; ++k) {
            const long double p2 = ((2.0L * k - 1.0L) * x * p1 - (k - 1.0L) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        if (n == 1)
            p0 = 1.0L;
        dp = n * (x * p1 - p0) / (x * x - 1.0L);
        const long double w = 2.0L / ((1.0L - x * x) * dp * dp);
        rule.nodes[i] = static_cast<double>(-x);
        rule.nodes[n - 1 - i] = static_cast<double>(x);
        rule.weights[i] = static_cast<double>(w);
        rule.weights[n - 1 - i] = static_cast<double>(w);
    }
    if (n % 2 == 1)
        rule.nodes[n / 2] = 0.0;
    return rule;
}

QuadratureRule composite_gauss(double a, double b, int panels, int order)
{
    if (panels < 1 || !(b > a))
        throw std::invalid_argument("composite_gauss: bad interval or panel count");
    const QuadratureRule base = gauss_legendre(order);
    QuadratureRule rule;
    rule.nodes.reserve(static_cast<std::size_t>(panels) * order);
    rule.weights.reserve(static_cast<std::size_t>(panels) * order);
    const double width = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * width;
        const double half = 0.5 * width;
        for (int i = 0; i < order; ++i) {
            rule.nodes.push_back(lo + half * (base.nodes[i] + 1.0));
            rule.weights.push_back(half * base.weights[i]);
        }
    }
    return rule;
}

std::vector<double> legendre_barycentric_weights(const QuadratureRule& rule)
{
    const std::size_t n = rule.nodes.size();
    std::vector<double> w(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double x = rule.nodes[j];
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        w[j] = sign * std::sqrt((1.0 - x * x) * rule.weights[j]);
    }
    return w;
}

namespace {

std::complex<double> gauss_sum(const std::function<std::complex<double>(double)>& f, double a, double b, int panels,
                               const QuadratureRule& base, double* magnitude)
{
    std::complex<double> sum = 0.0;
    double abs_sum = 0.0;
    const double width = (b - a) / panels;
    const double half = 0.5 * width;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * width;
        for (std::size_t i = 0; i < base.nodes.size(); ++i) {
            const std::complex<double> v = f(mid + half * base.nodes[i]);
            sum += half * base.weights[i] * v;
            abs_sum += half * base.weights[i] * std::abs(v);
        }
    }
    if (magnitude)
        *magnitude += abs_sum;
    return sum;
}

} // namespace

IntegralEstimate integrate_oscillatory(const std::function<std::complex<double>(double)>& f,
                                       std::span<const double> breaks,
                                       const std::function<double(double)>& frequency, int min_panels)
{
    if (breaks.size() < 2)
        throw std::invalid_argument("integrate_oscillatory: need at least two break points");
    static const QuadratureRule base = gauss_legendre(24);
    constexpr double kPhasePerPanel = 12.0;
    IntegralEstimate out;
    std::complex<double> coarse = 0.0;
    for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
        const double a = breaks[s];
        const double b = breaks[s + 1];
        if (!(b > a))
            throw std::invalid_argument("integrate_oscillatory: break points must increase");
        const double omega = std::max(std::abs(frequency(a)), std::abs(frequency(b)));
        const double phase_panels = std::ceil(omega * (b - a) / kPhasePerPanel);
        if (phase_panels > 1e7)
            throw std::runtime_error("integrate_oscillatory: integrand too oscillatory");
        const int panels = std::max(min_panels, static_cast<int>(phase_panels));
        coarse += gauss_sum(f, a, b, panels, base, nullptr);
        out.value += gauss_sum(f, a, b, 2 * panels, base, &out.magnitude);
    }
    out.error = std::abs(out.value - coarse);
    return out;
}

} // namespace criticalwave
