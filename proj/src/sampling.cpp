#include "tqme/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include "tqme/errors.hpp"

namespace tqme {

namespace {

void require_confidence(double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw RangeError("confidence level must lie in (0,1)");
    }
}

double clamp_fidelity(double f, std::size_t d) {
    const double lo = d == 0 ? 0.0 : 1.0 / (static_cast<double>(d) + 1.0);
    return std::clamp(f, lo, 1.0);
}

double standard_normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

/// Count of successful trials, split across worker threads. Trial t always
/// uses rng.derive(t), so chunking does not affect the result.
std::uint64_t count_trials(std::uint64_t trials, unsigned threads, const RandomStream& rng,
                           bool (*trial_fn)(RandomStream, const void*), const void* ctx) {
    threads = std::max(1u, std::min(threads, 256u));
    if (threads == 1) {
        std::uint64_t hits = 0;
        for (std::uint64_t t = 0; t < trials; ++t) {
            hits += trial_fn(rng.derive(t), ctx) ? 1 : 0;
        }
        return hits;
    }
    std::vector<std::uint64_t> partial(threads, 0);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            std::uint64_t hits = 0;
            for (std::uint64_t t = w; t < trials; t += threads) {
                hits += trial_fn(rng.derive(t), ctx) ? 1 : 0;
            }
            partial[w] = hits;
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    std::uint64_t total = 0;
    for (auto h : partial) {
        total += h;
    }
    return total;
}

struct CoverageContext {
    std::uint64_t n;
    double p_true;
    std::size_t d;
    double epsilon;
    double f_true;
};

bool coverage_trial(RandomStream stream, const void* raw) {
    const auto& ctx = *static_cast<const CoverageContext*>(raw);
    std::uint64_t bunch = 0;
    for (std::uint64_t i = 0; i < ctx.n; ++i) {
        bunch += stream.next_double() < ctx.p_true ? 1 : 0;
    }
    const double p_hat = static_cast<double>(bunch) / static_cast<double>(ctx.n);
    return std::abs(gate_fidelity_from_p(p_hat, ctx.d) - ctx.f_true) <= ctx.epsilon;
}

} // namespace

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw RangeError("normal quantile requires p in (0,1)");
    }
    // Acklam's rational approximation, then Newton steps against erfc for
    // full double accuracy.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double inv_sqrt_2pi = 0.3989422804014327;
    for (int i = 0; i < 3; ++i) {
        const double err = standard_normal_cdf(x) - p;
        const double pdf = inv_sqrt_2pi * std::exp(-0.5 * x * x);
        if (pdf <= 0.0) {
            break;
        }
        x -= err / pdf;
    }
    return x;
}

double two_sided_z(double confidence) {
    require_confidence(confidence);
    return normal_quantile(0.5 * (1.0 + confidence));
}

std::pair<double, double> wilson_interval(double p_hat, double n, double z) {
    const double z_sq = z * z;
    const double denom = 1.0 + z_sq / n;
    const double center = (p_hat + z_sq / (2.0 * n)) / denom;
    const double half =
        z * std::sqrt(p_hat * (1.0 - p_hat) / n + z_sq / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double gate_fidelity_from_p(double p, std::size_t d) {
    if (d == 0) {
        return 2.0 * p - 1.0;
    }
    const double dd = static_cast<double>(d);
    return (dd * (2.0 * p - 1.0) + 1.0) / (dd + 1.0);
}

EventTally sample_events(double p, std::uint64_t n, RandomStream& rng) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw RangeError("bunching probability must lie in [0,1]");
    }
    if (n == 0) {
        throw RangeError("event count must be >= 1");
    }
    EventTally t;
    for (std::uint64_t i = 0; i < n; ++i) {
        if (rng.next_double() < p) {
            ++t.n_bunch;
        } else {
            ++t.n_anti;
        }
    }
    return t;
}

EventTally sample_from_distribution(const OutcomeDistribution& dist, std::uint64_t n,
                                    RandomStream& rng) {
    if (dist.entries.empty()) {
        throw ValidationError("empty outcome distribution");
    }
    std::vector<double> cumulative;
    cumulative.reserve(dist.entries.size());
    std::vector<bool> bunching;
    bunching.reserve(dist.entries.size());
    double acc = 0.0;
    for (const auto& e : dist.entries) {
        acc += e.probability;
        cumulative.push_back(acc);
        bunching.push_back(classify(ModeIndex::from_flat(e.mode_j, dist.module_dim),
                                    ModeIndex::from_flat(e.mode_k, dist.module_dim)) ==
                           EventClass::Bunching);
    }
    EventTally t;
    for (std::uint64_t i = 0; i < n; ++i) {
        const double u = rng.next_double() * acc;
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const std::size_t idx =
            std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                                  cumulative.size() - 1);
        if (bunching[idx]) {
            ++t.n_bunch;
        } else {
            ++t.n_anti;
        }
    }
    return t;
}

FidelityEstimate estimate_from_proportion(double p_hat, std::uint64_t shots, std::size_t d,
                                          double confidence) {
    if (shots == 0) {
        throw ValidationError("fidelity estimation requires at least one event");
    }
    require_confidence(confidence);
    const double z = two_sided_z(confidence);
    const auto [p_low, p_high] = wilson_interval(p_hat, static_cast<double>(shots), z);
    FidelityEstimate est;
    est.p_hat = p_hat;
    est.f_gate_hat = clamp_fidelity(gate_fidelity_from_p(p_hat, d), d);
    est.ci_low = clamp_fidelity(gate_fidelity_from_p(p_low, d), d);
    est.ci_high = clamp_fidelity(gate_fidelity_from_p(p_high, d), d);
    est.confidence = confidence;
    est.d = d;
    est.shots = shots;
    return est;
}

FidelityEstimate estimate_fidelity(const EventTally& tally, std::size_t d, double confidence) {
    if (tally.total() == 0) {
        throw ValidationError("fidelity estimation requires at least one event");
    }
    const double p_hat =
        static_cast<double>(tally.n_bunch) / static_cast<double>(tally.total());
    return estimate_from_proportion(p_hat, tally.total(), d, confidence);
}

SamplePlan required_samples_analytic(double p, std::size_t d, double epsilon,
                                     double confidence) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw RangeError("bunching probability must lie in [0,1]");
    }
    if (!(epsilon > 0.0)) {
        throw RangeError("fidelity precision must be positive");
    }
    require_confidence(confidence);
    SamplePlan plan;
    plan.p = p;
    plan.d = d;
    plan.epsilon = epsilon;
    plan.confidence = confidence;
    plan.method = PlanMethod::Analytic;
    if (p == 0.0 || p == 1.0) {
        // Zero variance: the estimate is exact after a single event.
        plan.n_required = 1;
        plan.degenerate = true;
        return plan;
    }
    const double z = two_sided_z(confidence);
    const double dd = static_cast<double>(d);
    const double dim_factor = d == 0 ? 4.0 : (2.0 * dd / (dd + 1.0)) * (2.0 * dd / (dd + 1.0));
    const double n = z * z * p * (1.0 - p) * dim_factor / (epsilon * epsilon);
    plan.n_required = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(n)));
    return plan;
}

double coverage_check(std::uint64_t n, double p_true, std::size_t d, double epsilon,
                      std::uint64_t trials, const RandomStream& rng, unsigned threads) {
    if (trials < 100) {
        throw RangeError("coverage_check needs at least 100 trials");
    }
    if (n == 0) {
        throw RangeError("event count must be >= 1");
    }
    if (!(p_true >= 0.0 && p_true <= 1.0)) {
        throw RangeError("bunching probability must lie in [0,1]");
    }
    CoverageContext ctx{n, p_true, d, epsilon, gate_fidelity_from_p(p_true, d)};
    const std::uint64_t hits = count_trials(trials, threads, rng, &coverage_trial, &ctx);
    return static_cast<double>(hits) / static_cast<double>(trials);
}

SamplePlan required_samples_empirical(double p, std::size_t d, double epsilon, double confidence,
                                      std::uint64_t trials, const RandomStream& rng,
                                      unsigned threads) {
    SamplePlan plan = required_samples_analytic(p, d, epsilon, confidence);
    plan.method = PlanMethod::Empirical;
    if (plan.degenerate) {
        return plan;
    }
    // Coverage at a probe n depends only on (seed, n), never on probe order.
    const auto covered = [&](std::uint64_t n) {
        return coverage_check(n, p, d, epsilon, trials, rng.derive(n), threads) >= confidence;
    };

    std::uint64_t lo = 0;
    std::uint64_t hi = 0;
    if (covered(plan.n_required)) {
        hi = plan.n_required;
        lo = hi / 2;
        while (lo >= 1 && covered(lo)) {
            hi = lo;
            lo /= 2;
        }
        if (lo == 0) {
            plan.n_required = hi;
            return plan;
        }
    } else {
        lo = plan.n_required;
        hi = plan.n_required * 2;
        int doublings = 0;
        while (!covered(hi)) {
            lo = hi;
            hi *= 2;
            if (++doublings > 24) {
                throw PlannerError("empirical planner could not bracket the target coverage");
            }
        }
    }
    while (hi - lo > 1) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        if (covered(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    plan.n_required = hi;
    return plan;
}

} // namespace tqme
