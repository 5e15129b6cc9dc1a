#pragma once

// Dense linear algebra sized for generator matrices on small finite state
// spaces (d up to a few hundred): LU factorization with partial pivoting,
// resolvents (I - G/j)^{-1}, stationary-distribution solves, and strong
// connectivity of the support graph.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "msb/errors.hpp"

namespace msb {

using Vector = std::vector<double>;

// Tolerances shared across the library.
inline constexpr double kRowSumTolerance = 1e-12;          // generator row sums
inline constexpr double kNegativeClampTolerance = 1e-12;   // rounding in stochastic matrices
inline constexpr double kStochasticRowTolerance = 1e-10;   // resolvent / kernel row sums
inline constexpr double kStationaryResidualTolerance = 1e-10;

class Matrix {
public:
    Matrix() = default;
    explicit Matrix(int dim, double fill = 0.0)
        : dim_(dim), a_(static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim), fill) {}

    static Matrix identity(int dim) {
        Matrix m(dim);
        for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }

    int dim() const { return dim_; }

    double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * dim_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * dim_ + j]; }

    const double* row(int i) const { return a_.data() + static_cast<std::size_t>(i) * dim_; }
    double* row(int i) { return a_.data() + static_cast<std::size_t>(i) * dim_; }

    bool operator==(const Matrix& other) const = default;

private:
    int dim_ = 0;
    std::vector<double> a_;
};

inline double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// y = M x
inline Vector matvec(const Matrix& m, const Vector& x) {
    const int n = m.dim();
    Vector y(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const double* r = m.row(i);
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += r[j] * x[j];
        y[i] = s;
    }
    return y;
}

// y^T = x^T M
inline Vector vecmat(const Vector& x, const Matrix& m) {
    const int n = m.dim();
    Vector y(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        const double* r = m.row(i);
        for (int j = 0; j < n; ++j) y[j] += xi * r[j];
    }
    return y;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    const int n = a.dim();
    Matrix c(n);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            const double v = a(i, k);
            if (v == 0.0) continue;
            const double* br = b.row(k);
            double* cr = c.row(i);
            for (int j = 0; j < n; ++j) cr[j] += v * br[j];
        }
    }
    return c;
}

inline Matrix transpose(const Matrix& m) {
    const int n = m.dim();
    Matrix t(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) t(j, i) = m(i, j);
    return t;
}

// LU factorization with partial pivoting; throws numeric_error on a
// singular system.
class LuDecomposition {
public:
    explicit LuDecomposition(Matrix a) : lu_(std::move(a)), perm_(lu_.dim()) {
        const int n = lu_.dim();
        std::iota(perm_.begin(), perm_.end(), 0);
        for (int col = 0; col < n; ++col) {
            int pivot = col;
            double best = std::fabs(lu_(col, col));
            for (int r = col + 1; r < n; ++r) {
                const double v = std::fabs(lu_(r, col));
                if (v > best) {
                    best = v;
                    pivot = r;
                }
            }
            if (best == 0.0) throw numeric_error("singular linear system");
            if (pivot != col) {
                for (int c = 0; c < n; ++c) std::swap(lu_(pivot, c), lu_(col, c));
                std::swap(perm_[pivot], perm_[col]);
            }
            const double diag = lu_(col, col);
            for (int r = col + 1; r < n; ++r) {
                const double f = lu_(r, col) / diag;
                lu_(r, col) = f;
                if (f == 0.0) continue;
                for (int c = col + 1; c < n; ++c) lu_(r, c) -= f * lu_(col, c);
            }
        }
    }

    Vector solve(const Vector& b) const {
        const int n = lu_.dim();
        Vector y(n);
        for (int i = 0; i < n; ++i) {
            double s = b[perm_[i]];
            for (int j = 0; j < i; ++j) s -= lu_(i, j) * y[j];
            y[i] = s;
        }
        for (int i = n - 1; i >= 0; --i) {
            double s = y[i];
            for (int j = i + 1; j < n; ++j) s -= lu_(i, j) * y[j];
            y[i] = s / lu_(i, i);
        }
        return y;
    }

    Matrix inverse() const {
        const int n = lu_.dim();
        Matrix inv(n);
        Vector e(n, 0.0);
        for (int c = 0; c < n; ++c) {
            e.assign(n, 0.0);
            e[c] = 1.0;
            const Vector x = solve(e);
            for (int r = 0; r < n; ++r) inv(r, c) = x[r];
        }
        return inv;
    }

private:
    Matrix lu_;
    std::vector<int> perm_;
};

// (I - G/j)^{-1} for a generator matrix G and j > 0.  Row-stochastic: the
// row sums of G vanish, so (I - G/j) maps the all-ones vector to itself,
// and strict diagonal dominance keeps the system well conditioned.  Tiny
// negative entries from rounding are clamped to zero.
inline Matrix resolvent(const Matrix& g, double j) {
    if (!(j > 0.0)) throw validation_error("resolvent index must be positive");
    const int n = g.dim();
    Matrix m = Matrix::identity(n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) m(r, c) -= g(r, c) / j;
    Matrix inv = LuDecomposition(std::move(m)).inverse();
    for (int r = 0; r < n; ++r) {
        double sum = 0.0;
        for (int c = 0; c < n; ++c) {
            double v = inv(r, c);
            if (v < 0.0) {
                if (v < -kNegativeClampTolerance)
                    throw numeric_error("resolvent entry at (" + std::to_string(r + 1) + "," +
                                        std::to_string(c + 1) + ") is negative beyond tolerance");
                inv(r, c) = 0.0;
                v = 0.0;
            }
            sum += v;
        }
        if (std::fabs(sum - 1.0) > kStochasticRowTolerance)
            throw numeric_error("resolvent row " + std::to_string(r + 1) + " sum deviates from 1");
    }
    return inv;
}

// Stationary distribution of an irreducible generator: mu^T G = 0 with
// sum(mu) = 1.  G has rank d-1, so one balance equation is replaced by the
// normalization constraint before solving.
inline Vector stationary_distribution(const Matrix& g) {
    const int n = g.dim();
    Matrix b = transpose(g);
    for (int c = 0; c < n; ++c) b(n - 1, c) = 1.0;
    Vector rhs(n, 0.0);
    rhs[n - 1] = 1.0;
    Vector mu = LuDecomposition(std::move(b)).solve(rhs);
    double sum = 0.0;
    for (double v : mu) {
        if (!(v > 0.0))
            throw numeric_error("stationary solve produced a non-positive entry; generator may not be irreducible");
        sum += v;
    }
    for (double& v : mu) v /= sum;
    const Vector residual = vecmat(mu, g);
    for (double v : residual)
        if (std::fabs(v) > kStationaryResidualTolerance)
            throw numeric_error("stationary distribution residual exceeds tolerance");
    return mu;
}

// Strong connectivity of the directed graph with an edge i -> j whenever
// G_ij > 0 (i != j): reachability of every node from node 0 in both the
// graph and its reverse.
inline bool is_strongly_connected(const Matrix& g) {
    const int n = g.dim();
    if (n == 0) return false;
    const auto reaches_all = [&](bool reversed) {
        std::vector<char> seen(n, 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        int count = 1;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int v = 0; v < n; ++v) {
                if (v == u || seen[v]) continue;
                const double w = reversed ? g(v, u) : g(u, v);
                if (w > 0.0) {
                    seen[v] = 1;
                    ++count;
                    stack.push_back(v);
                }
            }
        }
        return count == n;
    };
    return reaches_all(false) && reaches_all(true);
}

}  // namespace msb
