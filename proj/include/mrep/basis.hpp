#pragma once

// Constant and per-span matrices of the matrix-form B-spline pipeline.
//
// Conventions: row vectors of monomials [1 t ... t^p] multiply coefficient
// matrices from the left, so a column of a coefficient matrix holds the
// ascending power coefficients of one basis function.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mrep/core.hpp"
#include "mrep/matrix.hpp"

namespace mrep {

namespace detail {

inline constexpr int kPascalRows = 2 * kMaxDegree + 2;

inline const std::array<std::array<double, kPascalRows>, kPascalRows>& pascal() {
    static const auto table = [] {
        std::array<std::array<double, kPascalRows>, kPascalRows> t{};
        for (int n = 0; n < kPascalRows; ++n) {
            t[n][0] = 1.0;
            for (int k = 1; k <= n; ++k) t[n][k] = t[n - 1][k - 1] + (k < n ? t[n - 1][k] : 0.0);
        }
        return t;
    }();
    return table;
}

inline double ipow(double x, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

}  // namespace detail

/// Binomial coefficient C(n, k) from a precomputed Pascal triangle; 0 outside 0 <= k <= n.
inline double binomial(int n, int k) {
    if (n < 0 || k < 0 || k > n) return 0.0;
    if (n >= detail::kPascalRows) throw Error(ErrorCode::DomainError, "binomial row out of range");
    return detail::pascal()[n][k];
}

/// Power-basis coefficients of the p+1 basis functions N_{q-p..q, p} on span [t_q, t_{q+1}).
///
/// Runs the Cox-de Boor recursion on coefficient rows. Coefficients are expressed
/// in the shifted variable s = t - origin; origin = 0 gives plain global t.
template <int Dim>
Matrix basis_coefficient_matrix(const BSplineCurve<Dim>& curve, std::size_t q, double origin = 0.0) {
    const int p = curve.degree;
    const auto& t = curve.knots;
    if (q < static_cast<std::size_t>(p) || q + 2 + static_cast<std::size_t>(p) > t.size()) {
        throw Error(ErrorCode::DomainError, "span index " + std::to_string(q) + " outside the curve domain");
    }
    if (!(t[q] < t[q + 1])) throw Error(ErrorCode::DegenerateSpan, "span " + std::to_string(q) + " has zero length");

    const std::size_t first = q - static_cast<std::size_t>(p);
    const std::size_t n = static_cast<std::size_t>(p) + 1;
    auto tau = [&](std::size_t i) { return t[i] - origin; };

    // poly[j] holds N_{first+j, k}; coefficients ascending in s.
    std::vector<std::vector<double>> poly(n, std::vector<double>(n, 0.0));
    poly[p][0] = 1.0;
    for (int k = 1; k <= p; ++k) {
        std::vector<std::vector<double>> next(n, std::vector<double>(n, 0.0));
        for (std::size_t j = static_cast<std::size_t>(p - k); j <= static_cast<std::size_t>(p); ++j) {
            const std::size_t i = first + j;
            auto& out = next[j];
            const double d1 = tau(i + k) - tau(i);
            if (d1 > 0.0) {
                // (s - tau_i) / d1 * N_{i,k-1}
                const auto& left = poly[j];
                for (std::size_t e = 0; e + 1 < n; ++e) {
                    out[e + 1] += left[e] / d1;
                    out[e] -= tau(i) * left[e] / d1;
                }
            }
            const double d2 = tau(i + k + 1) - tau(i + 1);
            if (d2 > 0.0 && j + 1 < n) {
                // (tau_{i+k+1} - s) / d2 * N_{i+1,k-1}
                const auto& right = poly[j + 1];
                for (std::size_t e = 0; e + 1 < n; ++e) {
                    out[e] += tau(i + k + 1) * right[e] / d2;
                    out[e + 1] -= right[e] / d2;
                }
            }
        }
        poly = std::move(next);
    }

    Matrix a(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t e = 0; e < n; ++e) a(e, j) = poly[j][e];
    }
    return a;
}

/// M with [1 t ... t^p] = [1 u ... u^p] M for t = t_q + u (t_q1 - t_q).
inline Matrix reparam_matrix(double t_q, double t_q1, int p) {
    if (!(t_q < t_q1)) throw Error(ErrorCode::DegenerateSpan, "reparameterization interval has zero length");
    const double delta = t_q1 - t_q;
    const std::size_t n = static_cast<std::size_t>(p) + 1;
    Matrix m(n, n);
    for (int i = 0; i <= p; ++i) {
        for (int k = 0; k <= i; ++k) {
            m(k, i) = binomial(i, k) * detail::ipow(delta, k) * detail::ipow(t_q, i - k);
        }
    }
    return m;
}

/// B_p(k, j) = coefficient of u^k in the Bernstein polynomial B_{j,p}(u).
inline Matrix bernstein_matrix(int p) {
    if (p < 0 || p > 2 * kMaxDegree) throw Error(ErrorCode::DegreeOutOfRange, "Bernstein degree out of range");
    const std::size_t n = static_cast<std::size_t>(p) + 1;
    Matrix b(n, n);
    for (int j = 0; j <= p; ++j) {
        for (int k = j; k <= p; ++k) {
            const double sign = ((k - j) % 2 == 0) ? 1.0 : -1.0;
            b(k, j) = sign * binomial(p, j) * binomial(p - j, k - j);
        }
    }
    return b;
}

/// Entrywise max of |A X - I|, accumulated in extended precision so the
/// product itself adds no rounding beyond the stored entries.
inline double inverse_residual(const Matrix& a, const Matrix& x) {
    const std::size_t n = a.rows();
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            long double s = (i == j) ? -1.0L : 0.0L;
            for (std::size_t k = 0; k < n; ++k) s += static_cast<long double>(a(i, k)) * x(k, j);
            worst = std::max(worst, static_cast<double>(std::fabs(s)));
        }
    }
    return worst;
}

namespace detail {

inline double inf_norm(const Matrix& m) {
    double best = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < m.cols(); ++c) s += std::abs(m(r, c));
        best = std::max(best, s);
    }
    return best;
}

// One Newton-Schulz correction X += X (I - A X), residual in extended precision.
inline Matrix refine_inverse(const Matrix& a, const Matrix& x) {
    const std::size_t n = a.rows();
    Matrix r(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            long double s = (i == j) ? 1.0L : 0.0L;
            for (std::size_t k = 0; k < n; ++k) s -= static_cast<long double>(a(i, k)) * x(k, j);
            r(i, j) = static_cast<double>(s);
        }
    }
    const Matrix corr = x * r;
    Matrix out = x;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) out(i, j) += corr(i, j);
    }
    return out;
}

}  // namespace detail

/// |A X - I| scaled by ||A|| ||X|| (infinity norms).
inline double relative_inverse_residual(const Matrix& a, const Matrix& x) {
    return inverse_residual(a, x) / (detail::inf_norm(a) * detail::inf_norm(x));
}

/// Hard limit on the relative residual of every cached inverse.
inline constexpr double kInverseResidualLimit = 1e-9;

/// Partial-pivoting inverse of B_p with one refinement step; throws if the residual check fails.
inline Matrix compute_bernstein_inverse(int p) {
    const Matrix b = bernstein_matrix(p);
    Matrix inv = detail::refine_inverse(b, invert(b));
    const double resid = relative_inverse_residual(b, inv);
    if (!(resid <= kInverseResidualLimit)) {
        throw std::logic_error("Bernstein inverse residual " + std::to_string(resid) + " at degree " +
                               std::to_string(p));
    }
    return inv;
}

/// Cached B_p^{-1}; built once per degree.
inline const Matrix& bernstein_matrix_inverse(int p) {
    if (p < 1 || p > kMaxDegree) throw Error(ErrorCode::DegreeOutOfRange, "Bernstein degree out of range");
    static std::array<std::once_flag, kMaxDegree + 1> flags;
    static std::array<Matrix, kMaxDegree + 1> cache;
    std::call_once(flags[p], [p] { cache[p] = compute_bernstein_inverse(p); });
    return cache[p];
}

/// T with b = T a: power coefficients a to Bernstein ordinates b; T(i,j) = C(i,j) / C(n,j).
inline Matrix power_to_bernstein_matrix(int n) {
    if (n < 1 || n > 2 * kMaxDegree) throw Error(ErrorCode::DegreeOutOfRange, "degree out of range");
    const std::size_t sz = static_cast<std::size_t>(n) + 1;
    Matrix t(sz, sz);
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= i; ++j) t(i, j) = binomial(i, j) / binomial(n, j);
    }
    return t;
}

/// Left and right de Casteljau subdivision matrices of degree n at parameter z.
struct SubdivisionPair {
    Matrix left;
    Matrix right;
};

inline SubdivisionPair subdivision_matrices(double z, int n = 3) {
    const std::size_t sz = static_cast<std::size_t>(n) + 1;
    SubdivisionPair s{Matrix(sz, sz), Matrix(sz, sz)};
    const double w = 1.0 - z;
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= i; ++j) {
            s.left(i, j) = binomial(i, j) * detail::ipow(z, j) * detail::ipow(w, i - j);
        }
        for (int j = i; j <= n; ++j) {
            s.right(i, j) = binomial(n - i, j - i) * detail::ipow(z, j - i) * detail::ipow(w, n - j);
        }
    }
    return s;
}

/// Restriction matrix from [0,1] to [z1, z2] of a degree-n Bernstein form.
inline Matrix clipping_matrix(double z1, double z2, int n) {
    if (z1 >= 1.0) {
        // The restriction collapses onto the endpoint u = 1.
        Matrix m(static_cast<std::size_t>(n) + 1, static_cast<std::size_t>(n) + 1);
        for (int i = 0; i <= n; ++i) m(i, n) = 1.0;
        return m;
    }
    const double inner = (z2 - z1) / (1.0 - z1);
    return subdivision_matrices(inner, n).left * subdivision_matrices(z1, n).right;
}

/// g(i,j) = integral over [0,1] of B_{i,m} B_{j,n}; cached per (m, n).
inline const Matrix& gram_matrix(int m, int n) {
    if (m < 0 || n < 0 || m > kMaxDegree || n > kMaxDegree) {
        throw Error(ErrorCode::DegreeOutOfRange, "Gram matrix degree out of range");
    }
    static std::array<std::array<std::once_flag, kMaxDegree + 1>, kMaxDegree + 1> flags;
    static std::array<std::array<Matrix, kMaxDegree + 1>, kMaxDegree + 1> cache;
    std::call_once(flags[m][n], [m, n] {
        Matrix g(static_cast<std::size_t>(m) + 1, static_cast<std::size_t>(n) + 1);
        for (int i = 0; i <= m; ++i) {
            for (int j = 0; j <= n; ++j) {
                g(i, j) = binomial(m, i) * binomial(n, j) / ((m + n + 1) * binomial(m + n, i + j));
            }
        }
        cache[m][n] = std::move(g);
    });
    return cache[m][n];
}

}  // namespace mrep
