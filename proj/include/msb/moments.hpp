#pragma once

// Exact prior moments of the Markovian stick-breaking measure.
//
// With R_j = (I - G/j)^{-1} and D(A) the diagonal indicator of a category
// set A, the conditional moment satisfies
//
//   E[ prod_j nu(A_j)^{k_j} | T_1 = x ] = e_x^T U(k) / #S(k),
//
// where S(k) is the set of distinct permutations of the exponent multiset
// and U is built by a level-synchronous dynamic program over sub-multisets
// l <= k:
//
//   U(0) = 1,    U(l) = R_{|l|} * sum_{i : l_i >= 1} D(A_i) U(l - e_i).
//
// Unconditional moments replace e_x^T by mu^T.  Three independent routes
// are provided so they can cross-check each other: the DP, a literal sum
// over distinct permutations, and a theta-parametrized recursion whose
// value must not depend on the choice of theta.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "msb/errors.hpp"
#include "msb/generator.hpp"
#include "msb/numerics.hpp"

namespace msb {

inline constexpr long long kDefaultBruteForceCap = 1'000'000;
inline constexpr double kLogGammaSpreadLimit = 700.0;

// Disjoint category sets with nonnegative integer exponents.  Zero
// exponents are permitted; they are removed before any computation.
struct MomentQuery {
    std::vector<std::vector<int>> sets;  // 0-based category indices
    std::vector<long long> exponents;

    long long total() const {
        long long t = 0;
        for (long long k : exponents) t += k;
        return t;
    }
};

inline void validate_query(const MomentQuery& query, int dim) {
    if (query.sets.size() != query.exponents.size())
        throw validation_error("query sets and exponents differ in length");
    std::vector<char> seen(dim, 0);
    for (const auto& set : query.sets) {
        for (int x : set) {
            if (x < 0 || x >= dim) throw validation_error("query category index out of range");
            if (seen[x]) throw validation_error("query sets must be pairwise disjoint");
            seen[x] = 1;
        }
    }
    for (long long k : query.exponents)
        if (k < 0) throw validation_error("query exponents must be nonnegative");
}

// Query with zero-exponent entries dropped; moments are unchanged.
inline MomentQuery reduce_query(const MomentQuery& query) {
    MomentQuery out;
    for (std::size_t i = 0; i < query.exponents.size(); ++i) {
        if (query.exponents[i] == 0) continue;
        out.sets.push_back(query.sets[i]);
        out.exponents.push_back(query.exponents[i]);
    }
    return out;
}

// #S(k) = (sum k_i)! / prod k_i!, exact; throws numeric_error when the
// result (or an intermediate product) exceeds 64 bits.
inline unsigned long long count_distinct_permutations(const std::vector<long long>& exponents) {
    unsigned long long result = 1;
    unsigned long long n = 0;
    for (long long k : exponents) {
        if (k < 0) throw validation_error("exponents must be nonnegative");
        for (long long i = 1; i <= k; ++i) {
            ++n;
            unsigned long long scaled = 0;
            if (__builtin_mul_overflow(result, n, &scaled))
                throw numeric_error("multinomial coefficient overflow");
            result = scaled / static_cast<unsigned long long>(i);
        }
    }
    return result;
}

inline double log_count_distinct_permutations(const std::vector<long long>& exponents) {
    long long total = 0;
    double log_denominator = 0.0;
    for (long long k : exponents) {
        total += k;
        log_denominator += std::lgamma(static_cast<double>(k) + 1.0);
    }
    return std::lgamma(static_cast<double>(total) + 1.0) - log_denominator;
}

// The family R_j = (I - G/j)^{-1} for j = 1..k_max, built once per
// generator and then read-only.
class ResolventCache {
public:
    explicit ResolventCache(const Generator& gen) : gen_(&gen) {}

    void ensure(long long k_max) {
        while (static_cast<long long>(resolvents_.size()) < k_max) {
            const long long j = static_cast<long long>(resolvents_.size()) + 1;
            resolvents_.push_back(resolvent(gen_->matrix, static_cast<double>(j)));
        }
    }

    const Matrix& at(long long j) const { return resolvents_[static_cast<std::size_t>(j - 1)]; }
    const Generator& generator() const { return *gen_; }

private:
    const Generator* gen_;
    std::vector<Matrix> resolvents_;
};

// Nonnegative vector with a separate power-of-two scale: value = values *
// 2^exponent.  Rescaling by powers of two is exact, so long DP runs lose no
// precision to the scaling itself.
struct ScaledVector {
    Vector values;
    long long exponent = 0;
};

namespace detail {

// One DP level: state code -> slot in a contiguous value buffer.
struct DpLevel {
    std::unordered_map<std::uint64_t, std::size_t> index;
    std::vector<std::uint64_t> codes;
    std::vector<double> data;  // codes.size() * dim values

    std::size_t slot(std::uint64_t code, int dim) {
        auto [it, fresh] = index.try_emplace(code, codes.size());
        if (fresh) {
            codes.push_back(code);
            data.resize(data.size() + dim, 0.0);
        }
        return it->second;
    }
};

// Divides every state of the level by a power of two chosen from the
// largest entry; returns the exponent removed.
inline long long rescale_level(std::vector<double>& data) {
    double max_value = 0.0;
    for (double v : data) max_value = std::max(max_value, v);
    if (max_value == 0.0) return 0;
    int exp2 = 0;
    std::frexp(max_value, &exp2);
    if (exp2 == 0) return 0;
    const double scale = std::ldexp(1.0, -exp2);
    for (double& v : data) v *= scale;
    return exp2;
}

inline void apply_resolvent_in_place(const Matrix& r, std::vector<double>& data, int dim,
                                     Vector& scratch) {
    const std::size_t states = data.size() / dim;
    for (std::size_t s = 0; s < states; ++s) {
        double* u = data.data() + s * dim;
        scratch.assign(dim, 0.0);
        for (int i = 0; i < dim; ++i) {
            const double* row = r.row(i);
            double acc = 0.0;
            for (int j = 0; j < dim; ++j) acc += row[j] * u[j];
            scratch[i] = acc;
        }
        std::copy(scratch.begin(), scratch.end(), u);
    }
}

}  // namespace detail

// U(k) for a reduced query, computed level by level.  Only levels j-1 and j
// are held at any time, so totals in the hundreds stay tractable.
inline ScaledVector moment_u_vector(ResolventCache& cache, const std::vector<std::vector<int>>& sets,
                                    const std::vector<long long>& exponents) {
    const int d = cache.generator().dim();
    const int slots = static_cast<int>(sets.size());
    long long total = 0;
    for (long long k : exponents) total += k;
    if (total == 0) return {Vector(d, 1.0), 0};
    cache.ensure(total);

    std::vector<std::uint64_t> stride(slots);
    std::uint64_t lattice = 1;
    for (int i = 0; i < slots; ++i) {
        stride[i] = lattice;
        if (__builtin_mul_overflow(lattice, static_cast<std::uint64_t>(exponents[i] + 1), &lattice))
            throw numeric_error("moment query lattice is too large");
    }

    detail::DpLevel level;
    level.slot(0, d);
    std::fill(level.data.begin(), level.data.end(), 1.0);
    long long scale_exponent = 0;
    std::vector<long long> state(slots);
    Vector scratch(d);

    for (long long j = 1; j <= total; ++j) {
        detail::DpLevel next;
        for (std::size_t s = 0; s < level.codes.size(); ++s) {
            std::uint64_t code = level.codes[s];
            std::uint64_t rem = code;
            for (int i = slots - 1; i >= 0; --i) {
                state[i] = static_cast<long long>(rem / stride[i]);
                rem %= stride[i];
            }
            const double* u = level.data.data() + s * d;
            for (int i = 0; i < slots; ++i) {
                if (state[i] >= exponents[i]) continue;
                const std::size_t slot = next.slot(code + stride[i], d);
                double* acc = next.data.data() + slot * d;
                for (int y : sets[i]) acc[y] += u[y];
            }
        }
        detail::apply_resolvent_in_place(cache.at(j), next.data, d, scratch);
        scale_exponent += detail::rescale_level(next.data);
        level = std::move(next);
    }

    ScaledVector out;
    out.values.assign(level.data.begin(), level.data.begin() + d);
    out.exponent = scale_exponent;
    return out;
}

// root^T U / #S(k), evaluated in log space so large totals neither overflow
// nor underflow.
inline double moment_from_u(const ScaledVector& u, const Vector& root,
                            const std::vector<long long>& exponents) {
    const double raw = dot(root, u.values);
    if (!(raw > 0.0)) return 0.0;
    const double log_value = std::log(raw) + static_cast<double>(u.exponent) * std::numbers::ln2 -
                             log_count_distinct_permutations(exponents);
    return std::exp(log_value);
}

inline double moment_conditional(ResolventCache& cache, const MomentQuery& query, int x) {
    const int d = cache.generator().dim();
    validate_query(query, d);
    if (x < 0 || x >= d) throw validation_error("conditioning category out of range");
    const MomentQuery reduced = reduce_query(query);
    if (reduced.total() == 0) return 1.0;
    const ScaledVector u = moment_u_vector(cache, reduced.sets, reduced.exponents);
    Vector root(d, 0.0);
    root[x] = 1.0;
    return moment_from_u(u, root, reduced.exponents);
}

inline double moment_unconditional(ResolventCache& cache, const MomentQuery& query) {
    validate_query(query, cache.generator().dim());
    const MomentQuery reduced = reduce_query(query);
    if (reduced.total() == 0) return 1.0;
    const ScaledVector u = moment_u_vector(cache, reduced.sets, reduced.exponents);
    return moment_from_u(u, cache.generator().mu, reduced.exponents);
}

inline double moment_conditional(const Generator& gen, const MomentQuery& query, int x) {
    ResolventCache cache(gen);
    return moment_conditional(cache, query, x);
}

inline double moment_unconditional(const Generator& gen, const MomentQuery& query) {
    ResolventCache cache(gen);
    return moment_unconditional(cache, query);
}

// E[nu(A)^k | T_1 = x] = e_x^T prod_{j=1}^k (R_j D(A)) 1, applied
// right-to-left; the k = 1 case is row x of R_1 masked to A.
inline double single_set_moment(const Generator& gen, const std::vector<int>& set, long long k, int x) {
    const int d = gen.dim();
    MomentQuery query{{set}, {std::max<long long>(k, 0)}};
    validate_query(query, d);
    if (x < 0 || x >= d) throw validation_error("conditioning category out of range");
    if (k < 0) throw validation_error("exponent must be nonnegative");
    if (k == 0) return 1.0;
    ResolventCache cache(gen);
    cache.ensure(k);
    std::vector<char> mask(d, 0);
    for (int y : set) mask[y] = 1;
    Vector w(d, 1.0);
    for (long long j = 1; j <= k; ++j) {
        for (int y = 0; y < d; ++y)
            if (!mask[y]) w[y] = 0.0;
        w = matvec(cache.at(j), w);
    }
    return w[x];
}

namespace detail {

struct KahanAccumulator {
    double sum = 0.0;
    double carry = 0.0;

    void add(double v) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

}  // namespace detail

// Literal enumeration of the theorem's sum over distinct permutations.
// Deliberately simple; serves as the independent oracle for the DP route.
inline double moment_bruteforce(const Generator& gen, const MomentQuery& query,
                                std::optional<int> given_t1 = std::nullopt,
                                long long cap = kDefaultBruteForceCap) {
    const int d = gen.dim();
    validate_query(query, d);
    if (given_t1 && (*given_t1 < 0 || *given_t1 >= d))
        throw validation_error("conditioning category out of range");
    const MomentQuery reduced = reduce_query(query);
    const long long total = reduced.total();
    if (total == 0) return 1.0;

    unsigned long long count = 0;
    try {
        count = count_distinct_permutations(reduced.exponents);
    } catch (const numeric_error&) {
        throw validation_error("permutation count exceeds the brute-force cap");
    }
    if (count > static_cast<unsigned long long>(cap))
        throw validation_error("permutation count exceeds the brute-force cap");

    std::vector<int> arrangement;
    arrangement.reserve(total);
    for (std::size_t i = 0; i < reduced.exponents.size(); ++i)
        arrangement.insert(arrangement.end(), reduced.exponents[i], static_cast<int>(i));

    ResolventCache cache(gen);
    cache.ensure(total);
    std::vector<std::vector<char>> masks(reduced.sets.size(), std::vector<char>(d, 0));
    for (std::size_t i = 0; i < reduced.sets.size(); ++i)
        for (int y : reduced.sets[i]) masks[i][y] = 1;

    Vector root(d, 0.0);
    if (given_t1)
        root[*given_t1] = 1.0;
    else
        root = gen.mu;

    detail::KahanAccumulator sum;
    Vector w(d);
    do {
        w.assign(d, 1.0);
        for (long long j = 0; j < total; ++j) {
            const std::vector<char>& mask = masks[arrangement[j]];
            for (int y = 0; y < d; ++y)
                if (!mask[y]) w[y] = 0.0;
            w = matvec(cache.at(j + 1), w);
        }
        sum.add(dot(root, w));
    } while (std::next_permutation(arrangement.begin(), arrangement.end()));
    return sum.value() / static_cast<double>(count);
}

// v(k, A) from the theta-parametrized recursion
//
//   v(k,A) = R_{|k|} sum_i [theta G(k_i+1) / (|k| G(theta+|k|))] D(A_i) Q
//            sum_{m=0}^{k_i-1} [G(theta+|k|-k_i+m) / G(m+1)] v(k+(m-k_i)e_i, A)
//
// with v(0,A) = 1, Q = I + G/theta, and G(.) the gamma function evaluated
// via log-gamma differences.  The result is a moment vector indexed by the
// conditioning category and must be independent of theta; it serves as a
// cross-check of the DP route.
inline Vector theta_recursion_vector(const Generator& gen, double theta, const MomentQuery& query) {
    const int d = gen.dim();
    validate_query(query, d);
    if (theta < gen.theta_g - kThetaSlack) throw validation_error("theta below theta_G");
    const MomentQuery reduced = reduce_query(query);
    const int slots = static_cast<int>(reduced.sets.size());
    const long long total = reduced.total();
    if (total == 0) return Vector(d, 1.0);

    const Matrix q = to_transition_kernel(gen, theta);
    ResolventCache cache(gen);
    cache.ensure(total);

    std::vector<std::uint64_t> stride(slots);
    std::uint64_t lattice = 1;
    for (int i = 0; i < slots; ++i) {
        stride[i] = lattice;
        if (__builtin_mul_overflow(lattice, static_cast<std::uint64_t>(reduced.exponents[i] + 1), &lattice))
            throw numeric_error("moment query lattice is too large");
    }

    // enumerate the full lattice ordered by level |l|
    std::vector<std::vector<std::uint64_t>> by_level(total + 1);
    for (std::uint64_t code = 0; code < lattice; ++code) {
        std::uint64_t rem = code;
        long long level = 0;
        for (int i = slots - 1; i >= 0; --i) {
            level += static_cast<long long>(rem / stride[i]);
            rem %= stride[i];
        }
        by_level[level].push_back(code);
    }

    std::unordered_map<std::uint64_t, Vector> memo;
    memo.emplace(0, Vector(d, 1.0));
    std::vector<long long> state(slots);

    for (long long level = 1; level <= total; ++level) {
        for (std::uint64_t code : by_level[level]) {
            std::uint64_t rem = code;
            for (int i = slots - 1; i >= 0; --i) {
                state[i] = static_cast<long long>(rem / stride[i]);
                rem %= stride[i];
            }
            const double k = static_cast<double>(level);
            const double log_outer_base = std::log(theta) - std::log(k) - std::lgamma(theta + k);
            Vector acc(d, 0.0);
            for (int i = 0; i < slots; ++i) {
                const long long ki = state[i];
                if (ki == 0) continue;
                Vector inner(d, 0.0);
                for (long long m = 0; m < ki; ++m) {
                    const double log_coef = log_outer_base + std::lgamma(static_cast<double>(ki) + 1.0) +
                                            std::lgamma(theta + k - static_cast<double>(ki - m)) -
                                            std::lgamma(static_cast<double>(m) + 1.0);
                    if (std::fabs(log_coef) > kLogGammaSpreadLimit)
                        throw numeric_error("log-gamma ratio spread exceeds the precision limit");
                    const double coef = std::exp(log_coef);
                    const Vector& prev = memo.at(code - static_cast<std::uint64_t>(ki - m) * stride[i]);
                    for (int y = 0; y < d; ++y) inner[y] += coef * prev[y];
                }
                const Vector pushed = matvec(q, inner);
                for (int y : reduced.sets[i]) acc[y] += pushed[y];
            }
            memo.emplace(code, matvec(cache.at(level), acc));
        }
    }
    return memo.at(lattice - 1);
}

inline double moment_via_theta_recursion(const Generator& gen, double theta, const MomentQuery& query,
                                         int x) {
    if (x < 0 || x >= gen.dim()) throw validation_error("conditioning category out of range");
    return theta_recursion_vector(gen, theta, query)[x];
}

inline double moment_via_theta_recursion_unconditional(const Generator& gen, double theta,
                                                       const MomentQuery& query) {
    return dot(gen.mu, theta_recursion_vector(gen, theta, query));
}

}  // namespace msb
