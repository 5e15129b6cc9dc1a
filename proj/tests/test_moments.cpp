#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "msb/moments.hpp"
#include "test_helpers.hpp"

using msb::Generator;
using msb::Matrix;
using msb::MomentQuery;
using msb::Vector;

TEST_CASE("multinomial permutation counts") {
    CHECK(msb::count_distinct_permutations({2, 1}) == 3);
    CHECK(msb::count_distinct_permutations({1, 1, 1, 1}) == 24);

    // oracle for (3,2): enumerate the distinct arrangements of {0,0,0,1,1}
    std::vector<int> list{0, 0, 0, 1, 1};
    unsigned long long enumerated = 0;
    do {
        ++enumerated;
    } while (std::next_permutation(list.begin(), list.end()));
    CHECK(enumerated == 10);
    CHECK(msb::count_distinct_permutations({3, 2}) == enumerated);

    CHECK_THROWS_AS(msb::count_distinct_permutations({200, 200}), msb::numeric_error);
}

TEST_CASE("zero-total queries evaluate to one") {
    const Generator g = msb::tridiagonal(3, 1.0);
    const MomentQuery query{{{0}, {1, 2}}, {0, 0}};
    CHECK(msb::moment_conditional(g, query, 0) == 1.0);
    CHECK(msb::moment_unconditional(g, query) == 1.0);
    CHECK(msb::single_set_moment(g, {0, 1}, 0, 2) == 1.0);
}

TEST_CASE("two-state second moment matches the hand-computed resolvent product") {
    // R_1 = [[2/3,1/3],[1/3,2/3]], R_2 = [[3/4,1/4],[1/4,3/4]];
    // e_1^T R_2 D R_1 D 1 = (3/4)(2/3) = 1/2
    const Generator g = msb::validate_generator([] {
        Matrix m(2);
        m(0, 0) = -1.0;
        m(0, 1) = 1.0;
        m(1, 0) = 1.0;
        m(1, 1) = -1.0;
        return m;
    }());
    const MomentQuery query{{{0}}, {2}};
    CHECK(msb::moment_conditional(g, query, 0) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(msb::single_set_moment(g, {0}, 2, 0) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(msb::moment_bruteforce(g, query, 0) == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("first conditional moment is the resolvent diagonal") {
    const Generator g = msb::tridiagonal(5, 2.0);
    const Matrix r1 = msb::resolvent(g.matrix, 1.0);
    for (int x = 0; x < 5; ++x)
        CHECK(msb::single_set_moment(g, {x}, 1, x) == doctest::Approx(r1(x, x)).epsilon(1e-13));
}

TEST_CASE("single-set moments of the full space are one") {
    const Generator g = msb::wrapped_tridiagonal(4, 1.0);
    const std::vector<int> full{0, 1, 2, 3};
    for (long long k : {1LL, 3LL, 6LL})
        for (int x = 0; x < 4; ++x)
            CHECK(msb::single_set_moment(g, full, k, x) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("first and second unconditional moments match closed forms") {
    msb::RngStream rng(311);
    for (int trial = 0; trial < 12; ++trial) {
        const int d = 2 + static_cast<int>(rng.next_u64() % 6);
        const Generator g = msb::testing::random_generator(rng, d);
        const Matrix r1 = msb::resolvent(g.matrix, 1.0);
        for (int x = 0; x < d; ++x) {
            CHECK(msb::moment_unconditional(g, MomentQuery{{{x}}, {1}}) ==
                  doctest::Approx(g.mu[x]).epsilon(1e-12));
            CHECK(msb::moment_unconditional(g, MomentQuery{{{x}}, {2}}) ==
                  doctest::Approx(g.mu[x] * r1(x, x)).epsilon(1e-12));
        }
    }
}

TEST_CASE("dirichlet graph singleton moments match the beta closed form") {
    const Vector alpha{0.6, 1.7, 2.2};
    const double total = 0.6 + 1.7 + 2.2;
    const Generator g = msb::dirichlet_graph(alpha);
    for (int x = 0; x < 3; ++x) {
        const double expected = alpha[x] * (alpha[x] + 1.0) / (total * (total + 1.0));
        CHECK(msb::moment_unconditional(g, MomentQuery{{{x}}, {2}}) ==
              doctest::Approx(expected).epsilon(1e-12));
        double third = alpha[x] * (alpha[x] + 1.0) * (alpha[x] + 2.0) /
                       (total * (total + 1.0) * (total + 2.0));
        CHECK(msb::moment_unconditional(g, MomentQuery{{{x}}, {3}}) ==
              doctest::Approx(third).epsilon(1e-12));
    }
}

TEST_CASE("dynamic program agrees with the permutation sum") {
    msb::RngStream rng(1234);
    for (int trial = 0; trial < 40; ++trial) {
        const int d = 2 + static_cast<int>(rng.next_u64() % 5);
        const Generator g = msb::testing::random_generator(rng, d);
        const MomentQuery query = msb::testing::random_query(rng, d, 3, 7);
        const int x = static_cast<int>(rng.next_u64() % d);

        const double brute_cond = msb::moment_bruteforce(g, query, x);
        const double dp_cond = msb::moment_conditional(g, query, x);
        CHECK(std::fabs(dp_cond - brute_cond) <= 1e-10);

        const double brute_marg = msb::moment_bruteforce(g, query);
        const double dp_marg = msb::moment_unconditional(g, query);
        CHECK(std::fabs(dp_marg - brute_marg) <= 1e-10);

        CHECK(dp_cond >= 0.0);
        CHECK(dp_cond <= 1.0 + 1e-12);
        CHECK(dp_marg >= 0.0);
        CHECK(dp_marg <= 1.0 + 1e-12);
    }
}

TEST_CASE("brute force with a single exponent reduces to the single-set product") {
    const Generator g = msb::tridiagonal(4, 1.0);
    for (int x = 0; x < 4; ++x)
        CHECK(msb::moment_bruteforce(g, MomentQuery{{{1, 2}}, {1}}, x) ==
              doctest::Approx(msb::single_set_moment(g, {1, 2}, 1, x)).epsilon(1e-14));
}

TEST_CASE("brute force rejects permutation counts beyond the cap") {
    const Generator g = msb::tridiagonal(3, 1.0);
    const MomentQuery query{{{0}, {1}}, {12, 12}};  // C(24,12) > 2,000,000
    CHECK_THROWS_AS(msb::moment_bruteforce(g, query, 0, 2'000'000), msb::validation_error);
}

TEST_CASE("overlapping query sets are rejected") {
    const Generator g = msb::tridiagonal(3, 1.0);
    const MomentQuery query{{{0, 1}, {1}}, {1, 1}};
    CHECK_THROWS_AS(msb::moment_conditional(g, query, 0), msb::validation_error);
}

TEST_CASE("padding a query with zero exponents changes nothing") {
    const Generator g = msb::wrapped_tridiagonal(5, 2.0);
    const MomentQuery base{{{0}, {2, 3}}, {2, 1}};
    const MomentQuery padded{{{1}, {0}, {4}, {2, 3}}, {0, 2, 0, 1}};
    for (int x = 0; x < 5; ++x)
        CHECK(msb::moment_conditional(g, base, x) == msb::moment_conditional(g, padded, x));
    CHECK(msb::moment_unconditional(g, base) == msb::moment_unconditional(g, padded));
}

TEST_CASE("permuting query slots leaves moments unchanged") {
    const Generator g = msb::tridiagonal(6, 1.2);
    const MomentQuery query{{{0, 1}, {3}, {5}}, {2, 1, 2}};
    const MomentQuery permuted{{{5}, {0, 1}, {3}}, {2, 2, 1}};
    const double a = msb::moment_unconditional(g, query);
    const double b = msb::moment_unconditional(g, permuted);
    CHECK(std::fabs(a - b) <= 1e-14 * std::max(1.0, std::fabs(a)));
}

TEST_CASE("partition first moments sum to one") {
    msb::RngStream rng(99);
    const Generator g = msb::testing::random_generator(rng, 6);
    const std::vector<std::vector<int>> partition{{0, 1}, {2}, {3, 4, 5}};
    double sum = 0.0;
    for (const auto& cell : partition) sum += msb::moment_unconditional(g, MomentQuery{{cell}, {1}});
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("moments decrease in each exponent for proper subsets") {
    msb::RngStream rng(55);
    const Generator g = msb::testing::random_generator(rng, 5);
    for (long long k = 1; k <= 5; ++k) {
        const double lower = msb::moment_unconditional(g, MomentQuery{{{1, 2}}, {k + 1}});
        const double upper = msb::moment_unconditional(g, MomentQuery{{{1, 2}}, {k}});
        CHECK(lower <= upper + 1e-14);
    }
}

TEST_CASE("contingency product lumps to the dirichlet closed form") {
    // equal-weight complete factors: the marginal over one factor is
    // Dirichlet(w, w, w)
    const double w = 0.8;
    const Generator factor = msb::dirichlet_graph(Vector(3, w));
    const Generator g = msb::contingency_product({factor, factor});
    REQUIRE(g.dim() == 9);
    const double alpha0 = 3.0 * w;
    for (int s = 0; s < 3; ++s) {
        const std::vector<int> lump{3 * s, 3 * s + 1, 3 * s + 2};
        CHECK(msb::moment_unconditional(g, MomentQuery{{lump}, {1}}) ==
              doctest::Approx(1.0 / 3.0).epsilon(1e-12));
        CHECK(msb::moment_unconditional(g, MomentQuery{{lump}, {2}}) ==
              doctest::Approx(w * (w + 1.0) / (alpha0 * (alpha0 + 1.0))).epsilon(1e-12));
    }
    const MomentQuery cross{{{0, 1, 2}, {3, 4, 5}}, {1, 1}};
    CHECK(msb::moment_unconditional(g, cross) ==
          doctest::Approx(w * w / (alpha0 * (alpha0 + 1.0))).epsilon(1e-12));
}

TEST_CASE("theta recursion: base case and theta invariance") {
    const Generator g = msb::tridiagonal(4, 1.5);

    SUBCASE("zero exponents give the all-ones vector") {
        const Vector v = msb::theta_recursion_vector(g, g.theta_g, MomentQuery{{{0}}, {0}});
        for (double entry : v) CHECK(entry == 1.0);
    }
    SUBCASE("value is independent of theta and matches the DP") {
        const MomentQuery queries[] = {MomentQuery{{{1}}, {3}}, MomentQuery{{{0}, {2, 3}}, {2, 1}},
                                       MomentQuery{{{0}, {1}, {3}}, {2, 2, 2}}};
        for (const MomentQuery& query : queries) {
            for (int x = 0; x < 4; ++x) {
                const double dp = msb::moment_conditional(g, query, x);
                for (double theta : {g.theta_g, 2.0 * g.theta_g, 10.0 * g.theta_g}) {
                    const double rec = msb::moment_via_theta_recursion(g, theta, query, x);
                    CHECK(std::fabs(rec - dp) <= 1e-8);
                }
            }
        }
    }
    SUBCASE("single-set recursion agrees with the resolvent product") {
        for (long long k = 1; k <= 5; ++k) {
            const MomentQuery query{{{2}}, {k}};
            const double rec = msb::moment_via_theta_recursion(g, 2.0 * g.theta_g, query, 1);
            CHECK(std::fabs(rec - msb::single_set_moment(g, {2}, k, 1)) <= 1e-10);
        }
    }
    SUBCASE("theta below theta_G is rejected") {
        CHECK_THROWS_AS(msb::theta_recursion_vector(g, 0.5 * g.theta_g, MomentQuery{{{0}}, {1}}),
                        msb::validation_error);
    }
    SUBCASE("extreme log-gamma spreads raise the precision flag") {
        CHECK_THROWS_AS(msb::theta_recursion_vector(g, 1e6, MomentQuery{{{0}}, {80}}),
                        msb::numeric_error);
    }
}

TEST_CASE("resolvent cache serves cached matrices by index") {
    const Generator g = msb::tridiagonal(3, 1.0);
    msb::ResolventCache cache(g);
    cache.ensure(4);
    for (int j = 1; j <= 4; ++j) {
        const Matrix direct = msb::resolvent(g.matrix, j);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) CHECK(cache.at(j)(a, b) == direct(a, b));
    }
}
