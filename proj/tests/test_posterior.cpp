#include <doctest.h>

#include <cmath>
#include <vector>

#include "msb/posterior.hpp"
#include "test_helpers.hpp"

using msb::CountVector;
using msb::Generator;
using msb::MomentQuery;
using msb::Vector;

namespace {

// Polya-urn sequence probability for a Dirichlet(alpha) prior.
double polya_sequence_probability(const Vector& alpha, const std::vector<long long>& counts) {
    double total = 0.0;
    for (double a : alpha) total += a;
    long long n = 0;
    double log_p = 0.0;
    for (std::size_t x = 0; x < alpha.size(); ++x) {
        log_p += std::lgamma(alpha[x] + static_cast<double>(counts[x])) - std::lgamma(alpha[x]);
        n += counts[x];
    }
    log_p += std::lgamma(total) - std::lgamma(total + static_cast<double>(n));
    return std::exp(log_p);
}

}  // namespace

TEST_CASE("marginal likelihood basics") {
    const Generator g = msb::tridiagonal(4, 1.0);
    CHECK(msb::marginal_likelihood(g, CountVector{{0, 0, 0, 0}}) == 1.0);
    for (int x = 0; x < 4; ++x) {
        CountVector counts{{0, 0, 0, 0}};
        counts.counts[x] = 1;
        CHECK(msb::marginal_likelihood(g, counts) == doctest::Approx(g.mu[x]).epsilon(1e-12));
    }
}

TEST_CASE("dirichlet marginal likelihood equals the polya closed form") {
    const Vector alpha{0.5, 1.25, 2.0};
    const Generator g = msb::dirichlet_graph(alpha);
    msb::RngStream rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        CountVector counts{{0, 0, 0}};
        const long long n = 1 + static_cast<long long>(rng.next_u64() % 9);
        for (long long i = 0; i < n; ++i) ++counts.counts[rng.next_u64() % 3];
        const double expected = polya_sequence_probability(alpha, counts.counts);
        CHECK(msb::marginal_likelihood(g, counts) == doctest::Approx(expected).epsilon(1e-11));
    }
}

TEST_CASE("posterior moment with empty extra exponents is one") {
    const Generator g = msb::tridiagonal(3, 2.0);
    const CountVector counts{{1, 0, 2}};
    CHECK(msb::posterior_moment(g, counts, {0, 0, 0}) == 1.0);
    CHECK(msb::posterior_moment(g, counts, {0, 0, 0}, 1) == 1.0);
    // the aggregate form routes to the same computation
    const msb::PosteriorQuery query{counts, {0, 1, 0}, 1};
    CHECK(msb::posterior_moment(g, query) == msb::posterior_moment(g, counts, {0, 1, 0}, 1));
}

TEST_CASE("posterior moments are ratios of joint prior moments") {
    msb::RngStream rng(71);
    for (int trial = 0; trial < 10; ++trial) {
        const int d = 2 + static_cast<int>(rng.next_u64() % 3);
        const Generator g = msb::testing::random_generator(rng, d);
        CountVector counts{std::vector<long long>(d, 0)};
        std::vector<long long> extra(d, 0);
        for (int i = 0; i < 3; ++i) ++counts.counts[rng.next_u64() % d];
        for (int i = 0; i < 2; ++i) ++extra[rng.next_u64() % d];

        std::vector<long long> joint(counts.counts);
        for (int x = 0; x < d; ++x) joint[x] += extra[x];
        const double expected = msb::moment_bruteforce(g, msb::singleton_query(joint)) /
                                msb::moment_bruteforce(g, msb::singleton_query(counts.counts));
        CHECK(msb::posterior_moment(g, counts, extra) == doctest::Approx(expected).epsilon(1e-10));

        const int x = static_cast<int>(rng.next_u64() % d);
        const double expected_cond =
            msb::moment_bruteforce(g, msb::singleton_query(joint), x) /
            msb::moment_bruteforce(g, msb::singleton_query(counts.counts), x);
        CHECK(msb::posterior_moment(g, counts, extra, x) ==
              doctest::Approx(expected_cond).epsilon(1e-10));
    }
}

TEST_CASE("dirichlet posterior mean follows the conjugate update") {
    const Vector alpha{0.8, 1.1, 2.6, 0.5};
    const double total = 0.8 + 1.1 + 2.6 + 0.5;
    const Generator g = msb::dirichlet_graph(alpha);
    const CountVector counts{{2, 0, 3, 1}};
    const double n = 6.0;

    for (int x = 0; x < 4; ++x) {
        std::vector<long long> extra(4, 0);
        extra[x] = 1;
        const double expected = (alpha[x] + static_cast<double>(counts.counts[x])) / (total + n);
        CHECK(msb::posterior_moment(g, counts, extra) == doctest::Approx(expected).epsilon(1e-11));
    }
    const Vector pmf = msb::posterior_mean_pmf(g, counts);
    for (int x = 0; x < 4; ++x) {
        const double expected = (alpha[x] + static_cast<double>(counts.counts[x])) / (total + n);
        CHECK(std::fabs(pmf[x] - expected) <= 1e-10);
    }
}

TEST_CASE("posterior second moments dominate squared first moments") {
    msb::RngStream rng(23);
    for (int trial = 0; trial < 8; ++trial) {
        const int d = 2 + static_cast<int>(rng.next_u64() % 3);
        const Generator g = msb::testing::random_generator(rng, d);
        CountVector counts{std::vector<long long>(d, 0)};
        for (int i = 0; i < 4; ++i) ++counts.counts[rng.next_u64() % d];
        const int x = static_cast<int>(rng.next_u64() % d);
        std::vector<long long> one(d, 0), two(d, 0);
        one[x] = 1;
        two[x] = 2;
        const double first = msb::posterior_moment(g, counts, one);
        const double second = msb::posterior_moment(g, counts, two);
        CHECK(second + 1e-13 >= first * first);
    }
}

TEST_CASE("posterior mean pmf without data is the prior mean") {
    msb::RngStream rng(5);
    const Generator g = msb::testing::random_generator(rng, 7);
    const Vector pmf = msb::posterior_mean_pmf(g, CountVector{std::vector<long long>(7, 0)});
    CHECK(pmf == g.mu);
}

TEST_CASE("posterior mean pmf normalizes across families and counts") {
    msb::RngStream rng(1010);
    for (int trial = 0; trial < 12; ++trial) {
        const int d = 2 + static_cast<int>(rng.next_u64() % 9);
        const Generator g = msb::testing::random_generator(rng, d);
        CountVector counts{std::vector<long long>(d, 0)};
        const long long n = static_cast<long long>(rng.next_u64() % 20);
        for (long long i = 0; i < n; ++i) ++counts.counts[rng.next_u64() % std::min(d, 4)];
        const Vector pmf = msb::posterior_mean_pmf(g, counts);
        double sum = 0.0;
        for (double p : pmf) {
            CHECK(p > 0.0);
            CHECK(p < 1.0);
            sum += p;
        }
        CHECK(std::fabs(sum - 1.0) <= 1e-10);
    }
}

TEST_CASE("pmf entries agree with posterior first moments") {
    msb::RngStream rng(77);
    const Generator g = msb::testing::random_generator(rng, 5);
    const CountVector counts{{1, 0, 2, 0, 1}};
    const Vector pmf = msb::posterior_mean_pmf(g, counts);
    const Vector pmf_t1 = msb::posterior_mean_pmf_given_t1(g, counts, 2);
    for (int x = 0; x < 5; ++x) {
        std::vector<long long> extra(5, 0);
        extra[x] = 1;
        CHECK(pmf[x] == doctest::Approx(msb::posterior_moment(g, counts, extra)).epsilon(1e-12));
        CHECK(pmf_t1[x] ==
              doctest::Approx(msb::posterior_moment(g, counts, extra, 2)).epsilon(1e-12));
    }
}

TEST_CASE("pmf given the first chain state") {
    const Generator g = msb::tridiagonal(4, 1.5);

    SUBCASE("no data: rows of the first resolvent") {
        for (int x = 0; x < 4; ++x) {
            const Vector pmf = msb::posterior_mean_pmf_given_t1(
                g, CountVector{std::vector<long long>(4, 0)}, x);
            double sum = 0.0;
            for (int y = 0; y < 4; ++y) {
                CHECK(pmf[y] == doctest::Approx(msb::single_set_moment(g, {y}, 1, x)).epsilon(1e-12));
                sum += pmf[y];
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
    SUBCASE("with data: still a probability vector") {
        const CountVector counts{{0, 2, 1, 0}};
        for (int x = 0; x < 4; ++x) {
            const Vector pmf = msb::posterior_mean_pmf_given_t1(g, counts, x);
            double sum = 0.0;
            for (double p : pmf) sum += p;
            CHECK(std::fabs(sum - 1.0) <= 1e-10);
        }
    }
}

TEST_CASE("dirichlet pmf given T_1 absorbs one extra size-biased observation") {
    // for a constant-row kernel, conditioning on T_1 = x is equivalent to one
    // additional observation at x
    const Vector alpha{1.0, 2.0, 0.7};
    const double total = 3.7;
    const Generator g = msb::dirichlet_graph(alpha);
    const CountVector counts{{1, 2, 0}};
    const double n = 3.0;
    for (int x = 0; x < 3; ++x) {
        const Vector pmf = msb::posterior_mean_pmf_given_t1(g, counts, x);
        for (int y = 0; y < 3; ++y) {
            const double expected =
                (alpha[y] + static_cast<double>(counts.counts[y]) + (x == y ? 1.0 : 0.0)) /
                (total + n + 1.0);
            CHECK(pmf[y] == doctest::Approx(expected).epsilon(1e-10));
        }
    }
}

TEST_CASE("posterior pmf handles large totals through the scaled DP") {
    const Generator g = msb::tridiagonal(4, 2.0);
    const CountVector counts{{10, 20, 30, 40}};
    const Vector pmf = msb::posterior_mean_pmf(g, counts);
    double sum = 0.0;
    for (double p : pmf) sum += p;
    CHECK(std::fabs(sum - 1.0) <= 1e-10);
    // with 100 observations the posterior tracks the empirical frequencies
    for (int x = 0; x < 4; ++x)
        CHECK(std::fabs(pmf[x] - static_cast<double>(counts.counts[x]) / 100.0) < 0.1);
}

TEST_CASE("count validation") {
    const Generator g = msb::tridiagonal(3, 1.0);
    CHECK_THROWS_AS(msb::marginal_likelihood(g, CountVector{{1, 2}}), msb::validation_error);
    CHECK_THROWS_AS(msb::marginal_likelihood(g, CountVector{{1, -1, 0}}), msb::validation_error);
    CHECK_THROWS_AS(msb::posterior_mean_pmf_given_t1(g, CountVector{{0, 0, 0}}, 5),
                    msb::validation_error);
}
