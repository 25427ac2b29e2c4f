#include "criticalwave/seqbound.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace criticalwave {

namespace {

// ratio (K-1)^{1/(K-1)}: per-step growth of the analytic bound.
double bound_rate(const GronwallProblem& p) { return p.ratio * std::pow(p.K - 1.0, 1.0 / (p.K - 1.0)); }

// x_k = slack_k (b_k + sum_{l <= k-K} ratio^{k-l} x_l)
template <class Slack>
std::vector<double> substitute(const GronwallProblem& p, Slack&& slack)
{
    const std::size_t n = p.b.size();
    std::vector<double> x(n);
    std::vector<double> powers(n + 1, 1.0);
    for (std::size_t m = 1; m <= n; ++m)
        powers[m] = powers[m - 1] * p.ratio;
    const std::size_t K = static_cast<std::size_t>(p.K);
    for (std::size_t k = 0; k < n; ++k) {
        double rhs = p.b[k];
        for (std::size_t l = 0; l + K <= k; ++l)
            rhs += powers[k - l] * x[l];
        x[k] = slack(k) * rhs;
    }
    return x;
}

} // namespace

void GronwallProblem::validate() const
{
    if (!(ratio > 0.0 && ratio < 1.0))
        throw std::invalid_argument("gronwall: ratio must lie in (0, 1)");
    if (K < 4)
        throw std::invalid_argument("gronwall: K must be at least 4");
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("gronwall: sigma must be finite and nonnegative");
    for (double v : b)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("gronwall: b must be finite and nonnegative");
}

std::vector<double> gronwall_bound(const GronwallProblem& p)
{
    p.validate();
    const std::size_t n = p.b.size();
    const double q = bound_rate(p);
    std::vector<double> out(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double sum = 0.0;
        double weight = 1.0;
        for (std::size_t m = 0; m <= k; ++m) {
            sum += weight * p.b[k - m];
            weight *= q;
        }
        out[k] = sum;
    }
    return out;
}

std::vector<double> gronwall_exact(const GronwallProblem& p)
{
    p.validate();
    return substitute(p, [](std::size_t) { return 1.0; });
}

DecayEstimate decay_estimate(const GronwallProblem& p)
{
    p.validate();
    DecayEstimate e;
    e.contraction = std::pow(2.0, p.sigma) * bound_rate(p);
    e.hypothesis_met = e.contraction < 1.0;
    for (std::size_t k = 0; k < p.b.size(); ++k)
        e.input_constant = std::max(e.input_constant, p.b[k] * std::pow(2.0, p.sigma * k));
    e.output_constant = e.hypothesis_met ? e.input_constant / (1.0 - e.contraction) : std::numeric_limits<double>::infinity();
    return e;
}

std::complex<double> gronwall_generating_function(double ratio, int K, std::complex<double> z)
{
    const std::complex<double> w = ratio * z;
    return (1.0 - w) / (1.0 - w - std::pow(w, K));
}

std::string FuzzReport::to_json() const
{
    nlohmann::ordered_json j;
    j["trials"] = trials;
    j["max_ratio_exact_over_bound"] = max_ratio_exact_over_bound;
    j["decay_claim"] = decay_claim;
    j["failures"] = nlohmann::ordered_json::array();
    for (const auto& f : failures)
        j["failures"].push_back({{"trial", f.trial}, {"kind", f.kind}, {"index", f.index}, {"value", f.value}, {"limit", f.limit}});
    return j.dump(2);
}

FuzzReport gronwall_fuzz(const GronwallProblem& p, int trials, const FuzzOptions& options)
{
    p.validate();
    if (trials < 0)
        throw std::invalid_argument("gronwall_fuzz: trials must be nonnegative");
    if (!(options.slack_low >= 0.0 && options.slack_low <= options.slack_high && options.slack_high <= 1.0))
        throw std::invalid_argument("gronwall_fuzz: need 0 <= slack_low <= slack_high <= 1");

    FuzzReport report;
    report.trials = trials;
    const auto exact = gronwall_exact(p);
    const auto bound = gronwall_bound(p);
    for (std::size_t k = 0; k < exact.size(); ++k)
        if (bound[k] > 0.0)
            report.max_ratio_exact_over_bound = std::max(report.max_ratio_exact_over_bound, exact[k] / bound[k]);

    const DecayEstimate decay = decay_estimate(p);
    report.decay_claim = decay.hypothesis_met ? "verified" : "hypothesis unmet";

    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> slack(options.slack_low, options.slack_high);
    for (int trial = 0; trial < trials; ++trial) {
        const auto x = substitute(p, [&](std::size_t) { return options.slack_low == options.slack_high ? options.slack_high : slack(rng); });
        for (std::size_t k = 0; k < x.size(); ++k) {
            // rounding is monotone, so domination holds exactly
            if (x[k] > exact[k])
                report.failures.push_back({trial, "domination", k, x[k], exact[k]});
            if (decay.hypothesis_met) {
                const double scaled = x[k] * std::pow(2.0, p.sigma * k);
                const double limit = options.envelope * decay.output_constant;
                if (scaled > limit) {
                    report.failures.push_back({trial, "decay", k, scaled, limit});
                    report.decay_claim = "violated";
                }
            }
        }
    }
    return report;
}

GronwallProblem random_gronwall_problem(std::mt19937_64& rng, int max_length)
{
    if (max_length < 1)
        throw std::invalid_argument("random_gronwall_problem: max_length must be positive");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    GronwallProblem p;
    p.ratio = 0.05 + 0.85 * unit(rng);
    p.K = 4 + static_cast<int>(std::min(8.0, 9.0 * unit(rng)));
    const int length = 1 + static_cast<int>(std::min(max_length - 1.0, max_length * unit(rng)));
    p.sigma = 2.0 * unit(rng);
    const double scale = std::exp(4.0 * unit(rng) - 2.0);
    p.b.resize(length);
    for (int k = 0; k < length; ++k)
        p.b[k] = scale * std::pow(2.0, -p.sigma * k) * unit(rng);
    return p;
}

} // namespace criticalwave
