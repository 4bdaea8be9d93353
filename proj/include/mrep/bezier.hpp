#pragma once

// Bernstein-form helpers shared by the curve stages. The value type V is any
// vector-space element with += and scalar * (double, Point<Dim>).

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "mrep/basis.hpp"
#include "mrep/core.hpp"
#include "mrep/matrix.hpp"

namespace mrep {

/// Evaluates a Bernstein form at u by de Casteljau's algorithm.
template <class V>
V de_casteljau(std::span<const V> ctrl, double u) {
    constexpr std::size_t kStack = 2 * kMaxDegree + 2;
    const std::size_t n = ctrl.size();
    if (n == 0) return V{};
    std::array<V, kStack> small;
    std::vector<V> big;
    V* work = small.data();
    if (n > kStack) {
        big.assign(ctrl.begin(), ctrl.end());
        work = big.data();
    } else {
        std::copy(ctrl.begin(), ctrl.end(), small.begin());
    }
    const double w = 1.0 - u;
    for (std::size_t level = 1; level < n; ++level) {
        for (std::size_t i = 0; i + level < n; ++i) work[i] = work[i] * w + work[i + 1] * u;
    }
    return work[0];
}

template <class V>
V de_casteljau(const std::vector<V>& ctrl, double u) {
    return de_casteljau(std::span<const V>(ctrl), u);
}

template <class V, std::size_t N>
V de_casteljau(const std::array<V, N>& ctrl, double u) {
    return de_casteljau(std::span<const V>(ctrl), u);
}

/// Control points of the same curve one degree higher.
template <class V>
std::vector<V> elevate_once(std::span<const V> ctrl) {
    const std::size_t n = ctrl.size();  // n = p + 1
    std::vector<V> out(n + 1);
    out.front() = ctrl.front();
    out.back() = ctrl.back();
    for (std::size_t i = 1; i < n; ++i) {
        const double a = static_cast<double>(i) / static_cast<double>(n);
        out[i] = ctrl[i - 1] * a + ctrl[i] * (1.0 - a);
    }
    return out;
}

/// Splits a Bernstein form at z with the subdivision matrices; both halves share the split value.
template <class V>
std::pair<std::vector<V>, std::vector<V>> split_bernstein(std::span<const V> ctrl, double z) {
    const int n = static_cast<int>(ctrl.size()) - 1;
    const auto s = subdivision_matrices(z, n);
    auto left = apply_matrix(s.left, ctrl);
    auto right = apply_matrix(s.right, ctrl);
    right.front() = left.back();
    return {std::move(left), std::move(right)};
}

/// Restriction of a Bernstein form to [z1, z2], reparameterized to [0, 1].
template <class V>
std::vector<V> restrict_bernstein(std::span<const V> ctrl, double z1, double z2) {
    // Same map as clipping_matrix(z1, z2, n), done as two in-place de Casteljau passes.
    const std::size_t n = ctrl.size();
    std::vector<V> w(ctrl.begin(), ctrl.end());
    if (z1 >= 1.0) {
        std::fill(w.begin(), w.end(), ctrl.back());
        return w;
    }
    if (z1 > 0.0) {
        // Right part at z1: the last point of each level, collected in place.
        for (std::size_t r = 1; r < n; ++r)
            for (std::size_t i = 0; i + r < n; ++i) w[i] = w[i] * (1.0 - z1) + w[i + 1] * z1;
    }
    const double inner = z1 > 0.0 ? (z2 - z1) / (1.0 - z1) : z2;
    if (inner < 1.0) {
        // Left part at inner: the first point of each level, collected in place.
        for (std::size_t r = 1; r < n; ++r)
            for (std::size_t i = n - 1; i >= r; --i) w[i] = w[i - 1] * (1.0 - inner) + w[i] * inner;
    }
    return w;
}

/// Ascending power-basis coefficients a = B_p * ctrl.
template <class V>
std::vector<V> bernstein_to_power(std::span<const V> ctrl) {
    return apply_matrix(bernstein_matrix(static_cast<int>(ctrl.size()) - 1), ctrl);
}

template <int Dim>
Point<Dim> evaluate(const BezierSegment<Dim>& seg, double u) {
    return de_casteljau(seg.control_points, u);
}

template <int Dim>
Point<Dim> evaluate(const CubicApproxSegment<Dim>& seg, double u) {
    return de_casteljau(seg.control_points, u);
}

}  // namespace mrep
