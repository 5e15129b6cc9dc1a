#pragma once

// Generator-matrix families and validation.  A Generator bundles the rate
// matrix G with its stationary distribution mu and the diagonal bound
// theta_g = max_x |G_xx|, the smallest theta for which I + G/theta is a
// stochastic matrix.

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "msb/errors.hpp"
#include "msb/numerics.hpp"

namespace msb {

inline constexpr int kDefaultDimensionCap = 4096;
inline constexpr double kThetaSlack = 1e-12;

struct Generator {
    Matrix matrix;
    double theta_g = 0.0;
    Vector mu;
    std::vector<std::string> labels;  // optional category names, never used in numerics

    int dim() const { return matrix.dim(); }
};

// Checks every generator invariant (nonnegative off-diagonals, zero row
// sums, irreducibility) and fills in theta_g and mu.  A closed-form mu may
// be supplied by family constructors to skip the stationary solve; it is
// still verified against the balance equations.
inline Generator validate_generator(Matrix m, std::vector<std::string> labels = {},
                                    std::optional<Vector> known_mu = std::nullopt) {
    const int d = m.dim();
    if (d < 2) throw validation_error("generator dimension must be at least 2");
    if (!labels.empty() && static_cast<int>(labels.size()) != d)
        throw validation_error("label count does not match generator dimension");
    for (int i = 0; i < d; ++i) {
        double row_sum = 0.0;
        for (int j = 0; j < d; ++j) {
            const double v = m(i, j);
            if (!std::isfinite(v))
                throw validation_error("non-finite entry at (" + std::to_string(i + 1) + "," +
                                       std::to_string(j + 1) + ")");
            if (i != j && v < 0.0)
                throw validation_error("off-diagonal negative at (" + std::to_string(i + 1) + "," +
                                       std::to_string(j + 1) + ")");
            row_sum += v;
        }
        if (std::fabs(row_sum) > kRowSumTolerance)
            throw validation_error("row sum violation at row " + std::to_string(i + 1));
    }
    if (!is_strongly_connected(m)) throw validation_error("not irreducible");

    Generator gen;
    gen.theta_g = 0.0;
    for (int i = 0; i < d; ++i) gen.theta_g = std::max(gen.theta_g, std::fabs(m(i, i)));
    if (known_mu) {
        Vector mu = std::move(*known_mu);
        double sum = 0.0;
        for (double v : mu) {
            if (!(v > 0.0)) throw validation_error("stationary distribution entries must be positive");
            sum += v;
        }
        for (double& v : mu) v /= sum;
        const Vector residual = vecmat(mu, m);
        for (double v : residual)
            if (std::fabs(v) > kStationaryResidualTolerance)
                throw numeric_error("supplied stationary distribution fails the balance equations");
        gen.mu = std::move(mu);
    } else {
        gen.mu = stationary_distribution(m);
    }
    gen.matrix = std::move(m);
    gen.labels = std::move(labels);
    return gen;
}

// Complete directed graph with every edge into node j carrying weight
// alpha_j; the induced stick-breaking prior is the Dirichlet(alpha)
// distribution, with stationary vector alpha / sum(alpha).
inline Generator dirichlet_graph(const Vector& alpha, std::vector<std::string> labels = {}) {
    const int d = static_cast<int>(alpha.size());
    if (d < 2) throw validation_error("dirichlet graph needs at least two categories");
    double total = 0.0;
    for (double a : alpha) {
        if (!(a > 0.0) || !std::isfinite(a))
            throw validation_error("dirichlet graph weights must be positive and finite");
        total += a;
    }
    Matrix g(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = (i == j) ? alpha[j] - total : alpha[j];
    Vector mu(d);
    for (int j = 0; j < d; ++j) mu[j] = alpha[j] / total;
    return validate_generator(std::move(g), std::move(labels), std::move(mu));
}

// Path graph with weight w between adjacent categories; uniform stationary
// vector by symmetry.
inline Generator tridiagonal(int d, double w, std::vector<std::string> labels = {}) {
    if (d < 2) throw validation_error("tridiagonal generator needs dimension >= 2");
    if (!(w > 0.0) || !std::isfinite(w)) throw validation_error("tridiagonal weight must be positive");
    Matrix g(d);
    for (int i = 0; i + 1 < d; ++i) {
        g(i, i + 1) = w;
        g(i + 1, i) = w;
    }
    for (int i = 0; i < d; ++i) g(i, i) = (i == 0 || i == d - 1) ? -w : -2.0 * w;
    return validate_generator(std::move(g), std::move(labels), Vector(d, 1.0 / d));
}

// Cycle graph: tridiagonal plus the wrap-around edges between the first and
// last categories, so every diagonal entry is -2w.
inline Generator wrapped_tridiagonal(int d, double w, std::vector<std::string> labels = {}) {
    if (d < 3) throw validation_error("wrapped tridiagonal generator needs dimension >= 3");
    if (!(w > 0.0) || !std::isfinite(w)) throw validation_error("wrapped tridiagonal weight must be positive");
    Matrix g(d);
    for (int i = 0; i < d; ++i) {
        g(i, (i + 1) % d) = w;
        g(i, (i + d - 1) % d) = w;
        g(i, i) = -2.0 * w;
    }
    return validate_generator(std::move(g), std::move(labels), Vector(d, 1.0 / d));
}

// Entrywise conic combination (sum_i c_i G_i) / divisor.  Nonnegative
// off-diagonals and zero row sums are preserved; the divisor is explicit so
// combinations like (G1 + 2.5 G2)/3.5 reproduce exactly.
inline Generator average(const std::vector<std::pair<double, Generator>>& parts, double divisor,
                         std::vector<std::string> labels = {}) {
    if (parts.empty()) throw validation_error("average needs at least one part");
    if (!(divisor > 0.0) || !std::isfinite(divisor))
        throw validation_error("average divisor must be positive");
    const int d = parts.front().second.dim();
    Matrix g(d);
    for (const auto& [coef, part] : parts) {
        if (!(coef > 0.0) || !std::isfinite(coef))
            throw validation_error("average coefficients must be positive and finite");
        if (part.dim() != d) throw validation_error("average parts must share the same dimension");
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) g(i, j) += coef * part.matrix(i, j);
    }
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) /= divisor;
    return validate_generator(std::move(g), std::move(labels));
}

// Product space over the factor state spaces.  States x, y are adjacent
// when they differ in exactly one factor, inheriting that factor's rate;
// the stationary vector is the product of the factor stationary vectors.
inline Generator contingency_product(const std::vector<Generator>& factors,
                                     int dimension_cap = kDefaultDimensionCap,
                                     std::vector<std::string> labels = {}) {
    if (factors.size() < 2) throw validation_error("contingency product needs at least two factors");
    long long total = 1;
    for (const Generator& f : factors) {
        total *= f.dim();
        if (total > dimension_cap)
            throw validation_error("contingency product dimension exceeds cap of " +
                                   std::to_string(dimension_cap));
    }
    const int d = static_cast<int>(total);
    const int k = static_cast<int>(factors.size());
    // strides with the first factor most significant
    std::vector<int> stride(k);
    stride[k - 1] = 1;
    for (int j = k - 2; j >= 0; --j) stride[j] = stride[j + 1] * factors[j + 1].dim();

    Matrix g(d);
    Vector mu(d, 1.0);
    std::vector<int> coord(k);
    for (int x = 0; x < d; ++x) {
        int rem = x;
        double diag = 0.0;
        for (int j = 0; j < k; ++j) {
            coord[j] = rem / stride[j];
            rem %= stride[j];
            diag += factors[j].matrix(coord[j], coord[j]);
            mu[x] *= factors[j].mu[coord[j]];
        }
        for (int j = 0; j < k; ++j) {
            const int s = coord[j];
            for (int t = 0; t < factors[j].dim(); ++t) {
                if (t == s) continue;
                g(x, x + (t - s) * stride[j]) = factors[j].matrix(s, t);
            }
        }
        g(x, x) = diag;
    }
    return validate_generator(std::move(g), std::move(labels), std::move(mu));
}

// Q = I + G/theta, row-stochastic for theta >= theta_G.
inline Matrix to_transition_kernel(const Generator& gen, double theta) {
    if (theta < gen.theta_g - kThetaSlack)
        throw validation_error("theta below theta_G");
    const int d = gen.dim();
    Matrix q = Matrix::identity(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double v = q(i, j) + gen.matrix(i, j) / theta;
            if (v < 0.0) {
                if (v < -kNegativeClampTolerance)
                    throw numeric_error("transition kernel entry negative beyond tolerance");
                v = 0.0;
            }
            q(i, j) = v;
        }
    return q;
}

// Tagged constructor description for the supported generator families;
// average and contingency nest recursively.
struct GeneratorSpec {
    enum class Kind { Explicit, Dirichlet, Tridiagonal, Wrapped, Average, Contingency };

    Kind kind = Kind::Explicit;
    Matrix matrix;                                        // Explicit
    Vector alpha;                                         // Dirichlet
    int d = 0;                                            // Tridiagonal / Wrapped
    double w = 0.0;                                       // Tridiagonal / Wrapped
    double divisor = 1.0;                                 // Average
    std::vector<std::pair<double, GeneratorSpec>> parts;  // Average
    std::vector<GeneratorSpec> factors;                   // Contingency
    std::vector<std::string> labels;                      // optional, top level only
};

inline Generator build(const GeneratorSpec& spec, int dimension_cap = kDefaultDimensionCap) {
    switch (spec.kind) {
        case GeneratorSpec::Kind::Explicit:
            return validate_generator(spec.matrix, spec.labels);
        case GeneratorSpec::Kind::Dirichlet:
            return dirichlet_graph(spec.alpha, spec.labels);
        case GeneratorSpec::Kind::Tridiagonal:
            return tridiagonal(spec.d, spec.w, spec.labels);
        case GeneratorSpec::Kind::Wrapped:
            return wrapped_tridiagonal(spec.d, spec.w, spec.labels);
        case GeneratorSpec::Kind::Average: {
            std::vector<std::pair<double, Generator>> parts;
            parts.reserve(spec.parts.size());
            for (const auto& [coef, sub] : spec.parts) parts.emplace_back(coef, build(sub, dimension_cap));
            return average(parts, spec.divisor, spec.labels);
        }
        case GeneratorSpec::Kind::Contingency: {
            std::vector<Generator> factors;
            factors.reserve(spec.factors.size());
            for (const GeneratorSpec& sub : spec.factors) factors.push_back(build(sub, dimension_cap));
            return contingency_product(factors, dimension_cap, spec.labels);
        }
    }
    throw validation_error("unknown generator spec kind");
}

}  // namespace msb
