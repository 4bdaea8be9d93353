#pragma once

// Exact B-spline to piecewise Bezier conversion in matrix form:
//
//     Q_q = B_p^{-1} D_q,   D_q = M_q A_q [P_{q-p} ... P_q]^T
//
// Only the monomial side (T) is reparameterized; the per-span basis matrix A_q
// is built in the span-shifted variable s = t - t_q, which keeps the power-basis
// coefficients well scaled, so M_q reduces to diag(1, dt, dt^2, ...).

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mrep/basis.hpp"
#include "mrep/core.hpp"
#include "mrep/matrix.hpp"
#include "mrep/parallel.hpp"

namespace mrep {

/// Indices q of the nonzero-length spans [t_q, t_{q+1}) inside the domain, ascending.
template <int Dim>
std::vector<std::size_t> nonzero_spans(const BSplineCurve<Dim>& curve) {
    std::vector<std::size_t> spans;
    const std::size_t p = static_cast<std::size_t>(curve.degree);
    const std::size_t last = curve.knots.size() - 1 - p;  // index of the domain end knot
    for (std::size_t q = p; q < last; ++q) {
        if (curve.knots[q] < curve.knots[q + 1]) spans.push_back(q);
    }
    return spans;
}

/// D_q = M_q A_q P_local for one span, as p+1 power-basis coefficient points in u.
template <int Dim>
std::vector<Point<Dim>> span_power_block(const BSplineCurve<Dim>& curve, std::size_t q) {
    const int p = curve.degree;
    const double tq = curve.knots[q];
    const double tq1 = curve.knots[q + 1];
    const Matrix a = basis_coefficient_matrix(curve, q, tq);
    const Matrix m = reparam_matrix(0.0, tq1 - tq, p);
    std::span<const Point<Dim>> local(curve.control_points.data() + (q - static_cast<std::size_t>(p)),
                                      static_cast<std::size_t>(p) + 1);
    return apply_matrix(m * a, local);
}

template <int Dim>
BezierSegment<Dim> decompose_span(const BSplineCurve<Dim>& curve, std::size_t q) {
    const auto d = span_power_block(curve, q);
    return {curve.degree, apply_matrix(bernstein_matrix_inverse(curve.degree), d), {curve.knots[q], curve.knots[q + 1]}};
}

/// One Bezier segment per nonzero span, in parameter order.
///
/// All D_q blocks are stacked span-major into one array and B_p^{-1} is applied
/// to the whole stack in a second pass. `workers` = 0 picks the hardware count.
template <int Dim>
std::vector<BezierSegment<Dim>> decompose_to_bezier(const BSplineCurve<Dim>& curve, std::size_t workers = 1) {
    validate_curve(curve);
    const auto spans = nonzero_spans(curve);
    if (spans.empty()) throw Error(ErrorCode::EmptyDomain, "curve has no nonzero-length span");

    const int p = curve.degree;
    const std::size_t block = static_cast<std::size_t>(p) + 1;
    std::vector<Point<Dim>> stacked(spans.size() * block);
    parallel_for(spans.size(), workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t s = begin; s < end; ++s) {
            const auto d = span_power_block(curve, spans[s]);
            std::copy(d.begin(), d.end(), stacked.begin() + static_cast<std::ptrdiff_t>(s * block));
        }
    });

    const Matrix& binv = bernstein_matrix_inverse(p);
    std::vector<BezierSegment<Dim>> out(spans.size());
    parallel_for(spans.size(), workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t s = begin; s < end; ++s) {
            std::span<const Point<Dim>> d(stacked.data() + s * block, block);
            out[s] = {p, apply_matrix(binv, d), {curve.knots[spans[s]], curve.knots[spans[s] + 1]}};
        }
    });
    // Clamped ends interpolate the end control points; store them exactly.
    out.front().control_points.front() = curve.control_points.front();
    out.back().control_points.back() = curve.control_points.back();
    return out;
}

/// Per-curve outcome of a batch; exactly one of segments / error is meaningful.
template <int Dim>
struct DecomposeOutcome {
    std::vector<BezierSegment<Dim>> segments;
    std::optional<Error> error;

    [[nodiscard]] bool ok() const noexcept { return !error.has_value(); }
};

/// Maps decompose_to_bezier over the batch, one curve per work unit, input order kept.
template <int Dim>
std::vector<DecomposeOutcome<Dim>> batched_decompose(std::span<const BSplineCurve<Dim>> curves,
                                                     std::size_t workers = 0) {
    std::vector<DecomposeOutcome<Dim>> out(curves.size());
    parallel_for(curves.size(), workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            try {
                out[i].segments = decompose_to_bezier(curves[i], 1);
            } catch (const Error& e) {
                out[i].error = e;
            }
        }
    });
    return out;
}

template <int Dim>
std::vector<DecomposeOutcome<Dim>> batched_decompose(const std::vector<BSplineCurve<Dim>>& curves,
                                                     std::size_t workers = 0) {
    return batched_decompose(std::span<const BSplineCurve<Dim>>(curves), workers);
}

}  // namespace mrep
