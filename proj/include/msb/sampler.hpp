#pragma once

// Monte Carlo machinery for Markovian stick-breaking measures: a
// deterministic xoshiro256++ stream, GEM stick-breaking weights, stationary
// chain paths, truncated measure draws, data generation, and moment
// estimators with standard errors for verifying the analytic engine.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "msb/errors.hpp"
#include "msb/generator.hpp"
#include "msb/moments.hpp"
#include "msb/numerics.hpp"

namespace msb {

inline constexpr double kDefaultTruncationEps = 1e-12;
inline constexpr long long kMaxStickDraws = 100'000'000;

// xoshiro256++ seeded through splitmix64.  Same seed, same sequence, on
// every platform.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform in [0, 1) with 53-bit resolution
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    std::uint64_t seed() const { return seed_; }

    // Independent stream for replicate `index`; reductions over replicates
    // do not depend on traversal order.
    RngStream substream(std::uint64_t index) const {
        std::uint64_t s = seed_ ^ (0x9E3779B97F4A7C15ULL * (index + 1));
        return RngStream(splitmix64(s));
    }

private:
    static std::uint64_t splitmix64(std::uint64_t& x) {
        x += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    std::array<std::uint64_t, 4> state_;
    std::uint64_t seed_;
};

struct GemSample {
    Vector weights;   // sums to 1 - residual
    double residual;  // mass beyond the truncation point, < eps
};

// GEM(theta) stick-breaking weights, truncated once the unallocated mass
// drops below eps.  Beta(1, theta) sticks are drawn by inverse CDF:
// X = 1 - U^{1/theta}.
inline GemSample sample_gem(double theta, double eps, RngStream& rng) {
    if (!(theta > 0.0)) throw validation_error("theta must be positive");
    if (!(eps > 0.0 && eps < 1.0)) throw validation_error("truncation eps must lie in (0,1)");
    GemSample out;
    double remaining = 1.0;
    while (remaining >= eps) {
        const double keep = std::pow(rng.next_double(), 1.0 / theta);  // 1 - X
        out.weights.push_back((1.0 - keep) * remaining);
        remaining *= keep;
        if (static_cast<long long>(out.weights.size()) > kMaxStickDraws)
            throw numeric_error("stick-breaking truncation did not converge");
    }
    out.residual = remaining;
    return out;
}

// Inverse-CDF draw from a probability row; the final index absorbs any
// rounding slack.
inline int draw_categorical(const double* weights, int dim, double u) {
    double cumulative = 0.0;
    for (int i = 0; i < dim; ++i) {
        cumulative += weights[i];
        if (u < cumulative) return i;
    }
    return dim - 1;
}

// Stationary, homogeneous chain path of the given length: T_1 from mu (or
// the forced start state), each subsequent state from the current row of Q.
inline std::vector<int> sample_chain(const Matrix& q, const Vector& mu, long long length,
                                     RngStream& rng, std::optional<int> start = std::nullopt) {
    std::vector<int> path;
    if (length <= 0) return path;
    path.reserve(length);
    const int d = q.dim();
    path.push_back(start ? *start : draw_categorical(mu.data(), d, rng.next_double()));
    for (long long j = 1; j < length; ++j)
        path.push_back(draw_categorical(q.row(path.back()), d, rng.next_double()));
    return path;
}

// Finite-atom approximation of nu = sum_j P_j delta_{T_j}.  The residual
// field records mass not carried by the atoms; sampling folds the tail into
// one extra atom, after which it is zero.
struct TruncatedMeasure {
    std::vector<std::pair<int, double>> atoms;  // (category, weight)
    double residual = 0.0;
    int first_state = 0;

    Vector weight_vector(int dim) const {
        Vector w(dim, 0.0);
        for (const auto& [category, weight] : atoms) w[category] += weight;
        return w;
    }
};

// One draw of the Markovian stick-breaking measure, truncated at eps.  The
// GEM weights are paired with a chain path of matching length and the
// residual mass is assigned to one extra atom at the next chain state,
// keeping the total mass exactly 1 (total-variation bias at most eps).
// Forcing the first chain state realizes conditioning on T_1.
inline TruncatedMeasure sample_msb(const Generator& gen, double theta, double eps, RngStream& rng,
                                   std::optional<int> first_state = std::nullopt) {
    if (theta < gen.theta_g - kThetaSlack) throw validation_error("theta below theta_G");
    if (first_state && (*first_state < 0 || *first_state >= gen.dim()))
        throw validation_error("first chain state out of range");
    const Matrix q = to_transition_kernel(gen, theta);
    const GemSample gem = sample_gem(theta, eps, rng);
    const long long sticks = static_cast<long long>(gem.weights.size());
    const std::vector<int> path = sample_chain(q, gen.mu, sticks + 1, rng, first_state);

    TruncatedMeasure measure;
    measure.first_state = path.front();
    measure.atoms.reserve(sticks + 1);
    for (long long j = 0; j < sticks; ++j)
        if (gem.weights[j] > 0.0) measure.atoms.emplace_back(path[j], gem.weights[j]);
    if (gem.residual > 0.0) measure.atoms.emplace_back(path[sticks], gem.residual);
    measure.residual = 0.0;
    return measure;
}

inline TruncatedMeasure sample_msb(const Generator& gen, RngStream& rng) {
    return sample_msb(gen, gen.theta_g, kDefaultTruncationEps, rng);
}

// n i.i.d. draws from the atom distribution of a truncated measure.
inline std::vector<int> sample_data(const TruncatedMeasure& measure, long long n, RngStream& rng) {
    if (n < 0) throw validation_error("data sample size must be nonnegative");
    std::vector<int> data;
    data.reserve(n);
    for (long long i = 0; i < n; ++i) {
        const double u = rng.next_double();
        double cumulative = 0.0;
        int category = measure.atoms.back().first;
        for (const auto& [cat, weight] : measure.atoms) {
            cumulative += weight;
            if (u < cumulative) {
                category = cat;
                break;
            }
        }
        data.push_back(category);
    }
    return data;
}

struct MomentEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
    long long samples = 0;
};

// Sample mean and standard error of prod_j nu(A_j)^{k_j} over N independent
// truncated draws.  Each replicate owns a substream derived from (seed,
// index) and the reduction uses compensated summation, so the result is
// independent of evaluation order.
inline MomentEstimate mc_moment_estimate(const Generator& gen, double theta, const MomentQuery& query,
                                         long long n_samples, double eps, const RngStream& rng,
                                         std::optional<int> given_t1 = std::nullopt) {
    const int d = gen.dim();
    validate_query(query, d);
    if (n_samples < 2) throw validation_error("moment estimation needs at least two samples");
    if (given_t1 && (*given_t1 < 0 || *given_t1 >= d))
        throw validation_error("conditioning category out of range");
    const MomentQuery reduced = reduce_query(query);
    if (reduced.total() == 0) return {1.0, 0.0, n_samples};

    std::vector<std::vector<char>> masks(reduced.sets.size(), std::vector<char>(d, 0));
    for (std::size_t i = 0; i < reduced.sets.size(); ++i)
        for (int y : reduced.sets[i]) masks[i][y] = 1;

    detail::KahanAccumulator sum;
    detail::KahanAccumulator sum_sq;
    for (long long i = 0; i < n_samples; ++i) {
        RngStream replicate = rng.substream(static_cast<std::uint64_t>(i));
        const TruncatedMeasure measure = sample_msb(gen, theta, eps, replicate, given_t1);
        double value = 1.0;
        for (std::size_t s = 0; s < reduced.sets.size(); ++s) {
            double mass = 0.0;
            for (const auto& [cat, weight] : measure.atoms)
                if (masks[s][cat]) mass += weight;
            for (long long k = 0; k < reduced.exponents[s]; ++k) value *= mass;
        }
        sum.add(value);
        sum_sq.add(value * value);
    }
    const double mean = sum.value() / static_cast<double>(n_samples);
    double variance = (sum_sq.value() - static_cast<double>(n_samples) * mean * mean) /
                      static_cast<double>(n_samples - 1);
    if (variance < 0.0) variance = 0.0;
    return {mean, std::sqrt(variance / static_cast<double>(n_samples)), n_samples};
}

// Counts of sampled measures landing within a sup-norm ball of each target
// point of the simplex; a direct probe of the full-support property.
inline std::vector<long long> support_coverage(const Generator& gen, double theta,
                                               const std::vector<Vector>& targets, double eps_ball,
                                               long long n_samples, const RngStream& rng) {
    const int d = gen.dim();
    if (!(eps_ball > 0.0)) throw validation_error("coverage ball radius must be positive");
    for (const Vector& t : targets)
        if (static_cast<int>(t.size()) != d) throw validation_error("coverage target dimension mismatch");
    std::vector<long long> hits(targets.size(), 0);
    for (long long i = 0; i < n_samples; ++i) {
        RngStream replicate = rng.substream(static_cast<std::uint64_t>(i));
        const Vector w = sample_msb(gen, theta, kDefaultTruncationEps, replicate).weight_vector(d);
        for (std::size_t t = 0; t < targets.size(); ++t) {
            double deviation = 0.0;
            for (int x = 0; x < d; ++x) deviation = std::max(deviation, std::fabs(w[x] - targets[t][x]));
            if (deviation <= eps_ball) ++hits[t];
        }
    }
    return hits;
}

}  // namespace msb
