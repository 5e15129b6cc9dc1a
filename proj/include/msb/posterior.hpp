#pragma once

// Posterior quantities of a Markovian stick-breaking prior given multinomial
// count data: marginal likelihood, posterior moments as ratios of prior
// joint moments, and the posterior-mean pmf
//
//   p(x | k) = [#S(k) / #S(k + e_x)] * mu^T U(k + e_x) / mu^T U(k)
//
// used for histogram smoothing.  Conditioning on the first chain state
// replaces mu^T by e_x^T.  All d numerators U(k + e_x) are produced by one
// level-synchronous DP over the union of the sub-multiset lattices of the
// vectors k + e_x, i.e. exponent vectors exceeding k in at most one
// coordinate, by at most one.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "msb/errors.hpp"
#include "msb/generator.hpp"
#include "msb/moments.hpp"
#include "msb/numerics.hpp"

namespace msb {

// Observed multinomial counts over the categories.
struct CountVector {
    std::vector<long long> counts;

    long long total() const {
        long long n = 0;
        for (long long k : counts) n += k;
        return n;
    }
};

// A posterior-moment request: exponents `extra` on top of the observed
// counts, optionally conditioning on the first chain state.
struct PosteriorQuery {
    CountVector counts;
    std::vector<long long> extra;
    std::optional<int> condition_t1;
};

inline void validate_counts(const CountVector& counts, int dim) {
    if (static_cast<int>(counts.counts.size()) != dim)
        throw validation_error("count vector dimension mismatch");
    for (long long k : counts.counts)
        if (k < 0) throw validation_error("counts must be nonnegative");
}

// Singleton-set query with one slot per category of positive count.
inline MomentQuery singleton_query(const std::vector<long long>& counts) {
    MomentQuery query;
    for (std::size_t x = 0; x < counts.size(); ++x) {
        if (counts[x] <= 0) continue;
        query.sets.push_back({static_cast<int>(x)});
        query.exponents.push_back(counts[x]);
    }
    return query;
}

// P(Y^n = y^n) = E[prod_x nu(x)^{k_x}]; depends on the data only through
// the counts.
inline double marginal_likelihood(const Generator& gen, const CountVector& counts) {
    validate_counts(counts, gen.dim());
    if (counts.total() == 0) return 1.0;
    return moment_unconditional(gen, singleton_query(counts.counts));
}

namespace detail {

inline double log_root_moment(ResolventCache& cache, const std::vector<long long>& counts,
                              const Vector& root) {
    const MomentQuery query = singleton_query(counts);
    if (query.total() == 0) return 0.0;
    const ScaledVector u = moment_u_vector(cache, query.sets, query.exponents);
    const double raw = dot(root, u.values);
    if (!(raw > 0.0)) throw numeric_error("joint moment vanished in posterior ratio");
    return std::log(raw) + static_cast<double>(u.exponent) * std::numbers::ln2 -
           log_count_distinct_permutations(query.exponents);
}

}  // namespace detail

// E[prod_w nu(w)^{l_w} | Y^n, (T_1 = x)]: the ratio of the joint prior
// moment at exponents k + l to the one at k, both rooted at mu (or e_x when
// conditioning on the first chain state).
inline double posterior_moment(const Generator& gen, const CountVector& counts,
                               const std::vector<long long>& extra,
                               std::optional<int> given_t1 = std::nullopt) {
    const int d = gen.dim();
    validate_counts(counts, d);
    if (static_cast<int>(extra.size()) != d) throw validation_error("extra exponent dimension mismatch");
    long long m = 0;
    for (long long l : extra) {
        if (l < 0) throw validation_error("extra exponents must be nonnegative");
        m += l;
    }
    if (given_t1 && (*given_t1 < 0 || *given_t1 >= d))
        throw validation_error("conditioning category out of range");
    if (m == 0) return 1.0;

    std::vector<long long> joint(counts.counts);
    for (int x = 0; x < d; ++x) joint[x] += extra[x];

    Vector root;
    if (given_t1) {
        root.assign(d, 0.0);
        root[*given_t1] = 1.0;
    } else {
        root = gen.mu;
    }
    ResolventCache cache(gen);
    const double log_numer = detail::log_root_moment(cache, joint, root);
    const double log_denom = detail::log_root_moment(cache, counts.counts, root);
    return std::exp(log_numer - log_denom);
}

inline double posterior_moment(const Generator& gen, const PosteriorQuery& query) {
    return posterior_moment(gen, query.counts, query.extra, query.condition_t1);
}

namespace detail {

// U(k) together with all one-step extensions U(k + e_x), computed in a
// single pass.  States are exponent vectors l with sum_i max(l_i - k_i, 0)
// <= 1, encoded as a sub-multiset of k (mixed radix over the support)
// plus an optional tag naming the coordinate that exceeds its count.
struct PosteriorU {
    Vector base;                     // U(k), rescaled
    long long base_exponent = 0;
    std::vector<Vector> extensions;  // U(k + e_x) per category, shared scale
    long long ext_exponent = 0;
};

inline PosteriorU posterior_u_vectors(ResolventCache& cache, const std::vector<long long>& counts) {
    const int d = cache.generator().dim();
    const long long n = [&] {
        long long t = 0;
        for (long long k : counts) t += k;
        return t;
    }();
    cache.ensure(n + 1);

    std::vector<int> support;
    std::vector<int> slot_of(d, -1);
    for (int x = 0; x < d; ++x) {
        if (counts[x] > 0) {
            slot_of[x] = static_cast<int>(support.size());
            support.push_back(x);
        }
    }
    const int slots = static_cast<int>(support.size());
    std::vector<std::uint64_t> stride(slots);
    std::uint64_t lattice = 1;
    for (int i = 0; i < slots; ++i) {
        stride[i] = lattice;
        if (__builtin_mul_overflow(lattice, static_cast<std::uint64_t>(counts[support[i]] + 1), &lattice))
            throw numeric_error("posterior lattice is too large");
    }
    std::uint64_t key_span = 0;
    if (__builtin_mul_overflow(lattice, static_cast<std::uint64_t>(d + 1), &key_span))
        throw numeric_error("posterior lattice is too large");
    const auto key = [&](std::uint64_t mcode, int tag) {
        return mcode * static_cast<std::uint64_t>(d + 1) + static_cast<std::uint64_t>(tag + 1);
    };
    const std::uint64_t full_code = lattice - 1;

    DpLevel level;
    level.slot(key(0, -1), d);
    std::fill(level.data.begin(), level.data.end(), 1.0);

    PosteriorU out;
    long long scale_exponent = 0;
    if (n == 0) {
        out.base.assign(d, 1.0);
        out.base_exponent = 0;
    }
    std::vector<long long> state(slots);
    Vector scratch(d);

    for (long long j = 1; j <= n + 1; ++j) {
        DpLevel next;
        for (std::size_t s = 0; s < level.codes.size(); ++s) {
            const std::uint64_t code = level.codes[s];
            const std::uint64_t mcode = code / static_cast<std::uint64_t>(d + 1);
            const int tag = static_cast<int>(code % static_cast<std::uint64_t>(d + 1)) - 1;
            std::uint64_t rem = mcode;
            for (int i = slots - 1; i >= 0; --i) {
                state[i] = static_cast<long long>(rem / stride[i]);
                rem %= stride[i];
            }
            const double* u = level.data.data() + s * d;
            for (int i = 0; i < slots; ++i) {
                if (state[i] >= counts[support[i]]) continue;
                const std::size_t slot = next.slot(key(mcode + stride[i], tag), d);
                next.data[slot * d + support[i]] += u[support[i]];
            }
            if (tag == -1) {
                // spend the single extra ball on any category whose regular
                // budget is already exhausted
                for (int x = 0; x < d; ++x) {
                    if (slot_of[x] >= 0 && state[slot_of[x]] < counts[x]) continue;
                    const std::size_t slot = next.slot(key(mcode, x), d);
                    next.data[slot * d + x] += u[x];
                }
            }
        }
        apply_resolvent_in_place(cache.at(j), next.data, d, scratch);
        scale_exponent += rescale_level(next.data);
        level = std::move(next);
        if (j == n) {
            const std::size_t s = level.index.at(key(full_code, -1));
            out.base.assign(level.data.begin() + s * d, level.data.begin() + (s + 1) * d);
            out.base_exponent = scale_exponent;
        }
    }

    out.extensions.resize(d);
    out.ext_exponent = scale_exponent;
    for (int x = 0; x < d; ++x) {
        const std::size_t s = level.index.at(key(full_code, x));
        out.extensions[x].assign(level.data.begin() + s * d, level.data.begin() + (s + 1) * d);
    }
    return out;
}

inline Vector posterior_pmf_from_root(const Generator& gen, const CountVector& counts,
                                      const Vector& root) {
    ResolventCache cache(gen);
    const PosteriorU u = detail::posterior_u_vectors(cache, counts.counts);
    const long long n = counts.total();
    const double denom_raw = dot(root, u.base);
    if (!(denom_raw > 0.0)) throw numeric_error("posterior denominator vanished");
    const double log_denom = std::log(denom_raw) + static_cast<double>(u.base_exponent) * std::numbers::ln2;
    Vector pmf(gen.dim(), 0.0);
    for (int x = 0; x < gen.dim(); ++x) {
        const double numer_raw = dot(root, u.extensions[x]);
        if (!(numer_raw > 0.0)) throw numeric_error("posterior numerator vanished");
        const double log_numer =
            std::log(numer_raw) + static_cast<double>(u.ext_exponent) * std::numbers::ln2;
        const double count_ratio =
            static_cast<double>(counts.counts[x] + 1) / static_cast<double>(n + 1);
        pmf[x] = count_ratio * std::exp(log_numer - log_denom);
    }
    return pmf;
}

}  // namespace detail

// Posterior mean of nu given the counts; the predictive distribution of the
// next observation.  With no data this is the prior mean mu.
inline Vector posterior_mean_pmf(const Generator& gen, const CountVector& counts) {
    validate_counts(counts, gen.dim());
    if (counts.total() == 0) return gen.mu;
    return detail::posterior_pmf_from_root(gen, counts, gen.mu);
}

// Posterior mean of nu given the counts and the first chain state; rooted
// at e_x instead of mu.
inline Vector posterior_mean_pmf_given_t1(const Generator& gen, const CountVector& counts, int x) {
    validate_counts(counts, gen.dim());
    if (x < 0 || x >= gen.dim()) throw validation_error("conditioning category out of range");
    Vector root(gen.dim(), 0.0);
    root[x] = 1.0;
    return detail::posterior_pmf_from_root(gen, counts, root);
}

}  // namespace msb
