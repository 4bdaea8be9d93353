#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace mrep {

/// Dense row-major matrix of doubles. Small (at most 64x64) in every use here.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), entries_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::span<const double> entries() const noexcept { return entries_; }

    double& operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_) throw std::invalid_argument("matrix shape mismatch");
        Matrix out(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const double aik = a(i, k);
                if (aik == 0.0) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
            }
        }
        return out;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

    /// Largest absolute entrywise difference; shapes must match.
    [[nodiscard]] double max_abs_diff(const Matrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("matrix shape mismatch");
        double m = 0.0;
        for (std::size_t i = 0; i < entries_.size(); ++i) m = std::max(m, std::abs(entries_[i] - o.entries_[i]));
        return m;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> entries_;
};

/// out[i] = sum_j m(i,j) * values[j], for any vector-space value type (double, Point).
template <class V>
std::vector<V> apply_matrix(const Matrix& m, std::span<const V> values) {
    if (m.cols() != values.size()) throw std::invalid_argument("matrix/vector size mismatch");
    std::vector<V> out(m.rows(), V{});
    for (std::size_t i = 0; i < m.rows(); ++i) {
        V acc{};
        for (std::size_t j = 0; j < m.cols(); ++j) {
            const double w = m(i, j);
            if (w != 0.0) acc += values[j] * w;
        }
        out[i] = acc;
    }
    return out;
}

template <class V>
std::vector<V> apply_matrix(const Matrix& m, const std::vector<V>& values) {
    return apply_matrix(m, std::span<const V>(values));
}

/// Gauss-Jordan inverse with partial pivoting. Throws on an exactly singular pivot.
inline Matrix invert(const Matrix& m) {
    const std::size_t n = m.rows();
    if (n != m.cols()) throw std::invalid_argument("cannot invert a non-square matrix");
    Matrix a = m;
    Matrix inv = Matrix::identity(n);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        }
        if (a(piv, col) == 0.0) throw std::domain_error("singular matrix");
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(a(piv, c), a(col, c));
                std::swap(inv(piv, c), inv(col, c));
            }
        }
        const double d = a(col, col);
        for (std::size_t c = 0; c < n; ++c) {
            a(col, c) /= d;
            inv(col, c) /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a(r, col);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) {
                a(r, c) -= f * a(col, c);
                inv(r, c) -= f * inv(col, c);
            }
        }
    }
    return inv;
}

}  // namespace mrep
