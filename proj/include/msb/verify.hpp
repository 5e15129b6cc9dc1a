#pragma once

// Self-check suite behind `msb verify`: exact cross-checks between the
// computation paths plus Monte Carlo agreement at 3 standard errors.
// Statistical checks are skipped below a minimum sample count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msb/generator.hpp"
#include "msb/moments.hpp"
#include "msb/posterior.hpp"
#include "msb/sampler.hpp"

namespace msb {

inline constexpr long long kMinVerifySamples = 1000;

struct CheckResult {
    std::string name;
    bool passed = false;
    bool skipped = false;
    bool statistical = false;
    double observed = 0.0;  // worst deviation seen
    double tolerance = 0.0;
    std::string note;
};

struct VerifyReport {
    std::vector<CheckResult> checks;

    bool all_passed() const {
        for (const CheckResult& c : checks)
            if (!c.skipped && !c.passed) return false;
        return true;
    }
    bool exact_failure() const {
        for (const CheckResult& c : checks)
            if (!c.skipped && !c.passed && !c.statistical) return true;
        return false;
    }
    bool statistical_failure() const {
        for (const CheckResult& c : checks)
            if (!c.skipped && !c.passed && c.statistical) return true;
        return false;
    }
};

namespace detail {

inline MomentQuery small_random_query(RngStream& rng, int d) {
    MomentQuery query;
    std::vector<int> categories(d);
    for (int i = 0; i < d; ++i) categories[i] = i;
    for (int i = d - 1; i > 0; --i)
        std::swap(categories[i], categories[rng.next_u64() % (i + 1)]);
    const int n_sets = 1 + static_cast<int>(rng.next_u64() % std::min(d, 3));
    std::size_t cursor = 0;
    for (int s = 0; s < n_sets; ++s) {
        query.sets.push_back({categories[cursor++]});
        query.exponents.push_back(1);
    }
    for (int extra = static_cast<int>(rng.next_u64() % 3); extra > 0; --extra)
        query.exponents[rng.next_u64() % query.exponents.size()] += 1;
    return query;
}

}  // namespace detail

inline VerifyReport run_verification(const Generator& gen, long long samples, std::uint64_t seed) {
    VerifyReport report;
    const int d = gen.dim();
    RngStream rng(seed);

    {
        CheckResult check{.name = "generator-invariants", .tolerance = kRowSumTolerance};
        double worst = 0.0;
        for (int i = 0; i < d; ++i) {
            double sum = 0.0;
            for (int j = 0; j < d; ++j) sum += gen.matrix(i, j);
            worst = std::max(worst, std::fabs(sum));
        }
        check.observed = worst;
        check.passed = worst <= check.tolerance && is_strongly_connected(gen.matrix);
        report.checks.push_back(check);
    }
    {
        CheckResult check{.name = "resolvent-stochasticity", .tolerance = kStochasticRowTolerance};
        double worst = 0.0;
        try {
            for (double j : {1.0, 2.0, 5.0, 10.0}) {
                const Matrix r = resolvent(gen.matrix, j);
                for (int i = 0; i < d; ++i) {
                    double sum = 0.0;
                    for (int c = 0; c < d; ++c) sum += r(i, c);
                    worst = std::max(worst, std::fabs(sum - 1.0));
                }
            }
            check.observed = worst;
            check.passed = worst <= check.tolerance;
        } catch (const numeric_error& e) {
            check.passed = false;
            check.note = e.what();
        }
        report.checks.push_back(check);
    }
    {
        CheckResult check{.name = "stationary-residual", .tolerance = kStationaryResidualTolerance};
        const Vector residual = vecmat(gen.mu, gen.matrix);
        double worst = 0.0;
        for (double v : residual) worst = std::max(worst, std::fabs(v));
        check.observed = worst;
        check.passed = worst <= check.tolerance;
        report.checks.push_back(check);
    }
    {
        CheckResult check{.name = "dp-vs-bruteforce", .tolerance = 1e-10};
        double worst = 0.0;
        for (int trial = 0; trial < 5; ++trial) {
            const MomentQuery query = detail::small_random_query(rng, d);
            const int x = static_cast<int>(rng.next_u64() % d);
            worst = std::max(worst, std::fabs(moment_conditional(gen, query, x) -
                                              moment_bruteforce(gen, query, x)));
            worst = std::max(worst,
                             std::fabs(moment_unconditional(gen, query) - moment_bruteforce(gen, query)));
        }
        check.observed = worst;
        check.passed = worst <= check.tolerance;
        report.checks.push_back(check);
    }
    {
        CheckResult check{.name = "theta-invariance", .tolerance = 1e-8};
        const MomentQuery query = detail::small_random_query(rng, d);
        const int x = static_cast<int>(rng.next_u64() % d);
        const double dp = moment_conditional(gen, query, x);
        double worst = 0.0;
        for (double factor : {1.0, 2.0, 10.0})
            worst = std::max(
                worst, std::fabs(moment_via_theta_recursion(gen, factor * gen.theta_g, query, x) - dp));
        check.observed = worst;
        check.passed = worst <= check.tolerance;
        report.checks.push_back(check);
    }
    {
        CheckResult check{.name = "dirichlet-reduction", .tolerance = 1e-10};
        Vector alpha(5);
        for (double& a : alpha) a = 0.3 + 2.0 * rng.next_double();
        double total = 0.0;
        for (double a : alpha) total += a;
        const Generator dirichlet = dirichlet_graph(alpha);
        CountVector counts{std::vector<long long>(5, 0)};
        for (int i = 0; i < 7; ++i) ++counts.counts[rng.next_u64() % 5];
        const Vector pmf = posterior_mean_pmf(dirichlet, counts);
        double worst = 0.0;
        for (int x = 0; x < 5; ++x) {
            const double expected =
                (alpha[x] + static_cast<double>(counts.counts[x])) / (total + 7.0);
            worst = std::max(worst, std::fabs(pmf[x] - expected));
        }
        check.observed = worst;
        check.passed = worst <= check.tolerance;
        report.checks.push_back(check);
    }
    {
        CheckResult check{.name = "pmf-normalization", .tolerance = 1e-10};
        CountVector counts{std::vector<long long>(d, 0)};
        for (int i = 0; i < 8; ++i) ++counts.counts[rng.next_u64() % std::min(d, 5)];
        const Vector pmf = posterior_mean_pmf(gen, counts);
        double sum = 0.0;
        for (double p : pmf) sum += p;
        check.observed = std::fabs(sum - 1.0);
        check.passed = check.observed <= check.tolerance;
        report.checks.push_back(check);
    }

    const bool run_statistics = samples >= kMinVerifySamples;
    {
        CheckResult check{.name = "mc-first-moment", .statistical = true, .tolerance = 3.0};
        if (!run_statistics) {
            check.skipped = true;
            check.note = "needs at least " + std::to_string(kMinVerifySamples) + " samples";
        } else {
            double worst = 0.0;
            for (int x = 0; x < d; ++x) {
                const auto estimate = mc_moment_estimate(gen, gen.theta_g, MomentQuery{{{x}}, {1}},
                                                         samples, 1e-12, rng.substream(1000 + x));
                const double se = std::max(estimate.standard_error, 1e-15);
                worst = std::max(worst, std::fabs(estimate.mean - gen.mu[x]) / se);
            }
            check.observed = worst;
            check.passed = worst <= check.tolerance;
            check.note = "standard errors";
        }
        report.checks.push_back(check);
    }
    {
        CheckResult check{.name = "mc-second-moment", .statistical = true, .tolerance = 3.0};
        if (!run_statistics) {
            check.skipped = true;
            check.note = "needs at least " + std::to_string(kMinVerifySamples) + " samples";
        } else {
            const Matrix r1 = resolvent(gen.matrix, 1.0);
            double worst = 0.0;
            for (int x = 0; x < d; ++x) {
                const auto estimate = mc_moment_estimate(gen, gen.theta_g, MomentQuery{{{x}}, {2}},
                                                         samples, 1e-12, rng.substream(2000 + x));
                const double se = std::max(estimate.standard_error, 1e-15);
                worst = std::max(worst, std::fabs(estimate.mean - gen.mu[x] * r1(x, x)) / se);
            }
            check.observed = worst;
            check.passed = worst <= check.tolerance;
            check.note = "standard errors";
        }
        report.checks.push_back(check);
    }
    {
        CheckResult check{.name = "support-coverage", .statistical = true, .tolerance = 0.0};
        if (!run_statistics) {
            check.skipped = true;
            check.note = "needs at least " + std::to_string(kMinVerifySamples) + " samples";
        } else if (d > 6) {
            check.skipped = true;
            check.note = "dimension too large for a meaningful ball probe";
        } else {
            const auto hits =
                support_coverage(gen, gen.theta_g, {gen.mu}, 0.25, samples, rng.substream(3000));
            check.observed = static_cast<double>(hits[0]);
            check.passed = hits[0] >= 1;
            check.note = "hits near the stationary vector";
        }
        report.checks.push_back(check);
    }
    return report;
}

}  // namespace msb
