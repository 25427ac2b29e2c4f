#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace criticalwave {

/// Sequences with 0 <= x_k <= b_k + sum_{l <= k-K} ratio^{k-l} x_l.
struct GronwallProblem
{
    double ratio = 0.5;
    int K = 4;
    std::vector<double> b;
    /// Decay exponent for the 2^{-k sigma} claim.
    double sigma = 0.0;

    /// Throws invalid_argument unless 0 < ratio < 1, K >= 4, b finite and
    /// nonnegative, sigma >= 0.
    void validate() const;
};

/// B_k = sum_{l <= k} ratio^{k-l} (K-1)^{(k-l)/(K-1)} b_l.
std::vector<double> gronwall_bound(const GronwallProblem& p);

/// Largest solution of the recursion, by forward substitution of
/// (1 - A) x = b with A_{kl} = ratio^{k-l} for k - l >= K.
std::vector<double> gronwall_exact(const GronwallProblem& p);

struct DecayEstimate
{
    /// 2^sigma ratio (K-1)^{1/(K-1)}; the claim needs this below 1.
    double contraction = 0.0;
    bool hypothesis_met = false;
    /// Smallest C with b_k <= C 2^{-k sigma}.
    double input_constant = 0.0;
    /// C' = C / (1 - contraction) with B_k <= C' 2^{-k sigma}; infinity when
    /// the hypothesis fails.
    double output_constant = 0.0;
};

DecayEstimate decay_estimate(const GronwallProblem& p);

/// (1 - ratio z) / (1 - ratio z - (ratio z)^K), the generating function of
/// the impulse response of the recursion.
std::complex<double> gronwall_generating_function(double ratio, int K, std::complex<double> z);

struct FuzzFailure
{
    int trial = 0;
    std::string kind; ///< "domination" or "decay"
    std::size_t index = 0;
    double value = 0.0;
    double limit = 0.0;
};

struct FuzzReport
{
    int trials = 0;
    /// max_k exact_k / bound_k over entries with a positive bound.
    double max_ratio_exact_over_bound = 0.0;
    /// "verified", "violated" or "hypothesis unmet".
    std::string decay_claim;
    std::vector<FuzzFailure> failures;

    /// {trials, max_ratio_exact_over_bound, decay_claim, failures: [...]}.
    std::string to_json() const;
};

struct FuzzOptions
{
    /// Each x_k is the recursion right-hand side times a slack drawn from
    /// [slack_low, slack_high]; slack 1 reproduces gronwall_exact.
    double slack_low = 0.0;
    double slack_high = 1.0;
    /// Envelope on the measured constant in the decay claim.
    double envelope = 10.0;
    std::uint64_t seed = 0;
};

/// Samples random sub-solutions of the recursion and checks that each is
/// dominated by gronwall_exact and, when the hypothesis holds, decays like
/// 2^{-k sigma} within envelope * C'. Failures are reported, not thrown.
FuzzReport gronwall_fuzz(const GronwallProblem& p, int trials, const FuzzOptions& options = {});

/// Random admissible problem: ratio in [0.05, 0.9], K in [4, 12], length in
/// [1, max_length], b_k = C 2^{-k sigma} u_k with u_k uniform in [0, 1].
GronwallProblem random_gronwall_problem(std::mt19937_64& rng, int max_length = 200);

} // namespace criticalwave
