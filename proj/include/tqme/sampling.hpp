#pragma once

#include <cstdint>
#include <utility>

#include "tqme/hom.hpp"
#include "tqme/random.hpp"

namespace tqme {

/// Counts of bunching vs anti-bunching coincidence events.
struct EventTally {
    std::uint64_t n_bunch = 0;
    std::uint64_t n_anti = 0;

    std::uint64_t total() const { return n_bunch + n_anti; }
};

/// Fidelity estimated from an event tally, with a Wilson confidence interval
/// mapped through the affine bunching->fidelity relation.
/// `d` follows the planner convention: 0 encodes the d -> infinity limit.
struct FidelityEstimate {
    double p_hat = 0.0;
    double f_gate_hat = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double confidence = 0.0;
    std::size_t d = 0;
    std::uint64_t shots = 0;
};

enum class PlanMethod : std::uint8_t { Analytic, Empirical };

/// Required event count for a target fidelity precision. d = 0 encodes the
/// infinite-dimension limit. `degenerate` marks the zero-variance inputs
/// P in {0,1}, for which a single event suffices.
struct SamplePlan {
    std::uint64_t n_required = 1;
    double p = 0.0;
    std::size_t d = 0;
    double epsilon = 0.0;
    double confidence = 0.0;
    PlanMethod method = PlanMethod::Analytic;
    bool degenerate = false;
};

/// Inverse standard-normal CDF.
double normal_quantile(double p);

/// Two-sided normal quantile for a confidence level in (0,1).
double two_sided_z(double confidence);

/// Wilson score interval for a proportion (works for fractional success
/// counts, which mitigation produces).
std::pair<double, double> wilson_interval(double p_hat, double n, double z);

/// Gate fidelity from a bunching probability; d = 0 gives the d -> infinity
/// limit 2P - 1.
double gate_fidelity_from_p(double p, std::size_t d);

/// n independent Bernoulli(P) events.
EventTally sample_events(double p, std::uint64_t n, RandomStream& rng);

/// n multinomial draws over detector pairs, classified into bunching vs
/// anti-bunching.
EventTally sample_from_distribution(const OutcomeDistribution& dist, std::uint64_t n,
                                    RandomStream& rng);

/// Point estimate plus Wilson CI, all mapped to the gate-fidelity scale and
/// clamped to the fidelity range reachable from unitary pairs.
FidelityEstimate estimate_fidelity(const EventTally& tally, std::size_t d, double confidence);

/// Same, from a proportion (used after readout unfolding where counts are
/// no longer integral).
FidelityEstimate estimate_from_proportion(double p_hat, std::uint64_t shots, std::size_t d,
                                          double confidence);

/// Closed-form planner: n = ceil(z^2 P(1-P) (2d/(d+1))^2 / eps^2), with the
/// dimension factor saturating at 4 as d -> infinity (d = 0).
SamplePlan required_samples_analytic(double p, std::size_t d, double epsilon, double confidence);

/// Fraction of `trials` simulated runs of n events whose fidelity estimate
/// lands within epsilon of the true value. Deterministic for a fixed stream:
/// trial t uses the child stream rng.derive(t), so the result is independent
/// of `threads`.
double coverage_check(std::uint64_t n, double p_true, std::size_t d, double epsilon,
                      std::uint64_t trials, const RandomStream& rng, unsigned threads = 1);

/// Smallest n whose coverage_check clears `confidence`: bracket by doubling
/// or halving around the analytic seed value, then binary search. Coverage
/// at each probe n uses the child stream rng.derive(n), so the outcome does
/// not depend on the probe order.
SamplePlan required_samples_empirical(double p, std::size_t d, double epsilon, double confidence,
                                      std::uint64_t trials, const RandomStream& rng,
                                      unsigned threads = 1);

} // namespace tqme
