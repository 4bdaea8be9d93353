#pragma once

// Cubic approximation of piecewise Bezier segments under an error tolerance.
//
// Degree >= 4 segments are first reduced to the L2-optimal cubic that keeps the
// end points and end tangent directions (G1 at the ends). The reduced cubics are
// then measured against their source and split at the parameters of maximum
// deviation, with each new split point snapped onto the source curve, until
// every piece is within tolerance. Work proceeds level by level through the
// subdivision tree; a child prefix sum gives every child a fixed output slot.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mrep/basis.hpp"
#include "mrep/bezier.hpp"
#include "mrep/core.hpp"
#include "mrep/parallel.hpp"

namespace mrep {

template <int Dim>
struct ReductionSolution {
    double delta0 = 1.0;
    double delta1 = 1.0;
    std::array<Point<Dim>, 4> cubic{};
    double l2_error = 0.0;
    /// Set when the closed form was not usable and unit tangent magnitudes were used.
    std::optional<ErrorCode> fallback;
};

/// Control points of `seg` raised to degree `target`.
template <int Dim>
BezierSegment<Dim> elevate_degree(const BezierSegment<Dim>& seg, int target) {
    if (target < seg.degree) {
        throw Error(ErrorCode::DomainError, "cannot elevate degree " + std::to_string(seg.degree) + " to " +
                                                std::to_string(target));
    }
    BezierSegment<Dim> out = seg;
    while (out.degree < target) {
        out.control_points = elevate_once(std::span<const Point<Dim>>(out.control_points));
        ++out.degree;
    }
    return out;
}

/// Squared L2 distance between a degree-p Bezier and a cubic on [0,1], exact via G_{p,p}.
template <int Dim>
double l2_error_exact(std::span<const Point<Dim>> source, const std::array<Point<Dim>, 4>& cubic) {
    const int p = static_cast<int>(source.size()) - 1;
    std::vector<Point<Dim>> diff(cubic.begin(), cubic.end());
    while (static_cast<int>(diff.size()) - 1 < p) diff = elevate_once(std::span<const Point<Dim>>(diff));
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = source[i] - diff[i];
    const Matrix& g = gram_matrix(p, p);
    double eps = 0.0;
    for (std::size_t i = 0; i < diff.size(); ++i) {
        for (std::size_t j = 0; j < diff.size(); ++j) eps += g(i, j) * dot(diff[i], diff[j]);
    }
    return std::max(eps, 0.0);
}

/// Cubic with R0 = Q0, R1 = Q0 + (p/3) dQ0 d0, R2 = Qp - (p/3) dQ_{p-1} d1, R3 = Qp.
template <int Dim>
std::array<Point<Dim>, 4> g1_cubic(std::span<const Point<Dim>> q, double delta0, double delta1) {
    const int p = static_cast<int>(q.size()) - 1;
    const double f = static_cast<double>(p) / 3.0;
    const Point<Dim> t0 = (q[1] - q[0]) * f;
    const Point<Dim> t1 = (q[p] - q[p - 1]) * f;
    return {q[0], q[0] + t0 * delta0, q[p] - t1 * delta1, q[p]};
}

/// L2-optimal G1 cubic for a Bezier segment of degree >= 4 (closed form via Cramer's rule).
template <int Dim>
ReductionSolution<Dim> reduce_to_cubic_g1(const BezierSegment<Dim>& seg) {
    const int p = seg.degree;
    if (p < 4) throw Error(ErrorCode::DomainError, "degree reduction needs degree >= 4");
    std::span<const Point<Dim>> q(seg.control_points);

    ReductionSolution<Dim> sol;
    auto finish = [&](std::optional<ErrorCode> why) {
        sol.fallback = why;
        if (why) sol.delta0 = sol.delta1 = 1.0;
        sol.cubic = g1_cubic(q, sol.delta0, sol.delta1);
        sol.l2_error = l2_error_exact(q, sol.cubic);
        return sol;
    };

    const double scale = bbox_diagonal(seg.control_points);
    const Point<Dim> dq0 = q[1] - q[0];
    const Point<Dim> dq1 = q[p] - q[p - 1];
    if (scale == 0.0 || norm(dq0) < 1e-12 * scale || norm(dq1) < 1e-12 * scale) {
        return finish(ErrorCode::DegenerateTangent);
    }

    const double f = static_cast<double>(p) / 3.0;
    const Point<Dim> d0 = dq0 * f;
    const Point<Dim> d1 = dq1 * f;
    const Matrix& gp = gram_matrix(3, p);
    const Matrix& g3 = gram_matrix(3, 3);
    const std::array<Point<Dim>, 4> w{q[0], q[0], q[p], q[p]};

    auto v_row = [&](std::size_t row) {
        Point<Dim> v{};
        for (int j = 0; j <= p; ++j) v += q[j] * gp(row, j);
        for (std::size_t j = 0; j < 4; ++j) v -= w[j] * g3(row, j);
        return v;
    };
    const Point<Dim> v1 = v_row(1);
    const Point<Dim> v2 = v_row(2);
    const Point<Dim> a0 = d0 * g3(1, 1);
    const Point<Dim> a1 = d1 * -g3(1, 2);
    const Point<Dim> b0 = d0 * g3(2, 1);
    const Point<Dim> b1 = d1 * -g3(2, 2);

    // Stationarity in delta0 and delta1:
    //   (V1 - A0 d0 - A1 d1) . dQ0 = 0,  (V2 - B0 d0 - B1 d1) . dQ_{p-1} = 0
    const double a11 = dot(a0, dq0), a12 = dot(a1, dq0), rhs1 = dot(v1, dq0);
    const double a21 = dot(b0, dq1), a22 = dot(b1, dq1), rhs2 = dot(v2, dq1);
    const double det = a11 * a22 - a12 * a21;
    if (!(std::abs(det) > 1e-12 * (std::abs(a11 * a22) + std::abs(a12 * a21)))) {
        return finish(ErrorCode::SingularSystem);
    }
    sol.delta0 = (rhs1 * a22 - a12 * rhs2) / det;
    sol.delta1 = (a11 * rhs2 - rhs1 * a21) / det;
    return finish(std::nullopt);
}

// ---------------------------------------------------------------------------
// Error measurement and subdivision
// ---------------------------------------------------------------------------

struct ErrorScan {
    double max_error = 0.0;
    std::vector<double> argmax;  // every sampled u within 1e-12 of the maximum
};

/// Ascending power coefficients of a cubic Bezier.
template <int Dim>
std::array<Point<Dim>, 4> cubic_power_form(const std::array<Point<Dim>, 4>& p) {
    return {p[0], (p[1] - p[0]) * 3.0, (p[0] - p[1] * 2.0 + p[2]) * 3.0, p[3] - p[0] + (p[1] - p[2]) * 3.0};
}

/// Original-curve point at the global parameter matching local u of `approx`.
template <int Dim>
Point<Dim> source_point(const CubicApproxSegment<Dim>& approx, const BezierSegment<Dim>& original, double u) {
    const double t = local_to_global(approx.source, u);
    const double v = std::clamp(global_to_local(original.source, t), 0.0, 1.0);
    return evaluate(original, v);
}

namespace detail {

inline const Matrix& cached_bernstein_matrix(int p) {
    static std::array<std::once_flag, kMaxDegree + 1> flags;
    static std::array<Matrix, kMaxDegree + 1> cache;
    std::call_once(flags[p], [p] { cache[p] = bernstein_matrix(p); });
    return cache[p];
}

// Power form is used for the deviation only where its coefficients stay small.
inline constexpr int kPowerFormMaxDegree = 12;

// Sums over coordinates of poly_d(u_k)^2 for a coordinate-major power-form table.
// Hot loop of the approximation stage; x86-64 builds also get an AVX2/FMA clone.
#if defined(__GNUC__) && !defined(__clang__) && defined(__x86_64__)
__attribute__((target_clones("avx512f", "avx2", "default")))
#endif
inline void squared_norm_sweep(const double* coef, std::size_t stride, std::size_t terms, std::size_t dims,
                               const double* us, std::size_t n, double* out) {
    constexpr std::size_t kBlock = 32;
    for (std::size_t k0 = 0; k0 < n; k0 += kBlock) {
        const std::size_t len = std::min(kBlock, n - k0);
        double u[kBlock];
        double acc[kBlock] = {};
        for (std::size_t j = 0; j < kBlock; ++j) u[j] = j < len ? us[k0 + j] : 0.0;
        for (std::size_t d = 0; d < dims; ++d) {
            const double* c = coef + d * stride;
            double v[kBlock];
            for (std::size_t j = 0; j < kBlock; ++j) v[j] = c[terms - 1];
            for (std::size_t i = terms - 1; i-- > 0;)
                for (std::size_t j = 0; j < kBlock; ++j) v[j] = v[j] * u[j] + c[i];
            for (std::size_t j = 0; j < kBlock; ++j) acc[j] += v[j] * v[j];
        }
        for (std::size_t j = 0; j < len; ++j) out[k0 + j] = acc[j];
    }
}

}  // namespace detail

/// Largest deviation |approx(u) - original(t(u))| over `samples` uniform u in [0,1].
///
/// The original is first restricted to the approximant's interval, so both sides
/// are polynomials in the same local u.
template <int Dim>
ErrorScan measure_l1_error(const CubicApproxSegment<Dim>& approx, const BezierSegment<Dim>& original, int samples) {
    if (samples < 2) throw Error(ErrorCode::DomainError, "error scan needs at least two samples");
    const double v0 = std::clamp(global_to_local(original.source, approx.source.a), 0.0, 1.0);
    const double v1 = std::clamp(global_to_local(original.source, approx.source.b), v0, 1.0);
    const auto sub = restrict_bernstein(std::span<const Point<Dim>>(original.control_points), v0, v1);
    const int p = original.degree;

    const std::size_t n = static_cast<std::size_t>(samples);
    thread_local std::vector<double> us, err2;
    us.resize(n);
    err2.resize(n);
    const double step = 1.0 / static_cast<double>(samples - 1);
    for (std::size_t k = 0; k < n; ++k) us[k] = static_cast<double>(k) * step;
    us[n - 1] = 1.0;

    if (p <= detail::kPowerFormMaxDegree) {
        // Deviation polynomial, one coordinate at a time, swept over all samples.
        auto dev = apply_matrix(detail::cached_bernstein_matrix(p), std::span<const Point<Dim>>(sub));
        const auto cubic = cubic_power_form(approx.control_points);
        if (dev.size() < 4) dev.resize(4, Point<Dim>{});
        for (std::size_t i = 0; i < 4; ++i) dev[i] -= cubic[i];
        // Coordinate-major copy so each block of samples runs Horner in registers.
        const std::size_t terms = dev.size();
        std::array<double, Dim*(detail::kPowerFormMaxDegree + 1)> coef{};
        for (std::size_t i = 0; i < terms; ++i)
            for (std::size_t d = 0; d < Dim; ++d) coef[d * (detail::kPowerFormMaxDegree + 1) + i] = dev[i][static_cast<int>(d)];
        detail::squared_norm_sweep(coef.data(), detail::kPowerFormMaxDegree + 1, terms, Dim, us.data(), n, err2.data());
    } else {
        for (std::size_t k = 0; k < n; ++k) {
            const auto d = evaluate(approx, us[k]) - de_casteljau(std::span<const Point<Dim>>(sub), us[k]);
            err2[k] = dot(d, d);
        }
    }
    ErrorScan scan;
    double max2 = 0.0;
    for (double e : err2) max2 = std::max(max2, e);
    scan.max_error = std::sqrt(max2);
    const double floor = std::max(scan.max_error - 1e-12, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        if (err2[k] >= floor * floor && std::sqrt(err2[k]) >= scan.max_error - 1e-12) scan.argmax.push_back(us[k]);
    }
    return scan;
}

/// Splits `approx` at the sorted interior parameters `zs`; every new split point is
/// replaced by the original curve point at the same global parameter.
template <int Dim>
std::vector<CubicApproxSegment<Dim>> subdivide_and_modify(const CubicApproxSegment<Dim>& approx,
                                                          const BezierSegment<Dim>& original,
                                                          std::span<const double> zs) {
    std::vector<double> cuts{0.0};
    for (double z : zs) {
        if (!(z > 0.0 && z < 1.0)) throw Error(ErrorCode::DomainError, "split parameter must lie in (0,1)");
        if (z > cuts.back()) cuts.push_back(z);
    }
    cuts.push_back(1.0);

    std::vector<double> t_cut(cuts.size());
    std::vector<Point<Dim>> snapped(cuts.size());
    for (std::size_t k = 0; k < cuts.size(); ++k) {
        t_cut[k] = local_to_global(approx.source, cuts[k]);
    }
    snapped.front() = approx.control_points.front();
    snapped.back() = approx.control_points.back();
    for (std::size_t k = 1; k + 1 < cuts.size(); ++k) snapped[k] = source_point(approx, original, cuts[k]);

    std::span<const Point<Dim>> parent(approx.control_points);
    std::vector<CubicApproxSegment<Dim>> out(cuts.size() - 1);
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const auto pts = restrict_bernstein(parent, cuts[k], cuts[k + 1]);
        auto& child = out[k];
        std::copy(pts.begin(), pts.end(), child.control_points.begin());
        child.control_points.front() = snapped[k];
        child.control_points.back() = snapped[k + 1];
        child.source = {t_cut[k], t_cut[k + 1]};
        child.measured_error = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

template <int Dim>
std::pair<CubicApproxSegment<Dim>, CubicApproxSegment<Dim>> subdivide_and_modify(
    const CubicApproxSegment<Dim>& approx, const BezierSegment<Dim>& original, double z) {
    const double zs[1] = {z};
    auto parts = subdivide_and_modify(approx, original, std::span<const double>(zs, 1));
    return {parts[0], parts[1]};
}

// ---------------------------------------------------------------------------
// Error-controlled approximation loop
// ---------------------------------------------------------------------------

struct ApproxOptions {
    std::size_t batch_cap = 4096;  // failing segments subdivided per pass
    int loop_samples = 64;
    int verify_samples = 1024;
    int max_depth = 32;
    std::size_t workers = 1;
    bool keep_levels = false;  // record every SubdivisionLevel for inspection
};

/// One level of the subdivision tree.
template <int Dim>
struct SubdivisionLevel {
    std::vector<CubicApproxSegment<Dim>> segments;
    std::vector<std::size_t> compaction_keys;   // indices of segments failing tolerance
    std::vector<std::size_t> child_prefix_sum;  // size keys + 1; child k of key j -> prefix[j] + k
};

template <int Dim>
struct ApproximationResult {
    std::vector<CubicApproxSegment<Dim>> segments;
    std::vector<std::size_t> owner;  // input segment index of every output segment
    std::vector<SubdivisionLevel<Dim>> levels;
    int depth = 0;
    std::size_t passes = 0;
};

namespace detail {

template <int Dim>
CubicApproxSegment<Dim> to_cubic(const BezierSegment<Dim>& seg) {
    CubicApproxSegment<Dim> c;
    std::copy(seg.control_points.begin(), seg.control_points.end(), c.control_points.begin());
    c.source = seg.source;
    return c;
}

}  // namespace detail

/// Cubic pieces covering every input segment to within `alpha` (sampled deviation).
template <int Dim>
ApproximationResult<Dim> approximate_error_controlled(std::span<const BezierSegment<Dim>> input, double alpha,
                                                      const ApproxOptions& opt = {}) {
    if (!(alpha > 0.0)) throw Error(ErrorCode::DomainError, "tolerance must be positive");
    ApproximationResult<Dim> result;
    std::vector<CubicApproxSegment<Dim>> done;
    std::vector<std::size_t> done_owner;

    SubdivisionLevel<Dim> level;
    std::vector<std::size_t> owner;
    for (std::size_t i = 0; i < input.size(); ++i) {
        const auto& seg = input[i];
        if (seg.degree <= 3) {
            // Exact: cubic passthrough, lower degrees elevated.
            done.push_back(detail::to_cubic(elevate_degree(seg, 3)));
            done_owner.push_back(i);
        } else {
            auto c = detail::to_cubic(BezierSegment<Dim>{3, {}, seg.source});
            const auto sol = reduce_to_cubic_g1(seg);
            c.control_points = sol.cubic;
            c.source = seg.source;
            level.segments.push_back(c);
            owner.push_back(i);
        }
    }

    const bool unbounded = std::isinf(alpha);
    for (int depth = 0; !level.segments.empty(); ++depth) {
        result.depth = depth;
        const std::size_t n = level.segments.size();
        std::vector<ErrorScan> scans(n);
        std::vector<char> pass(n, 0);
        parallel_for(n, opt.workers, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                auto& seg = level.segments[i];
                const auto& src = input[owner[i]];
                scans[i] = measure_l1_error(seg, src, opt.loop_samples);
                if (unbounded || scans[i].max_error <= alpha) {
                    auto fine = measure_l1_error(seg, src, opt.verify_samples);
                    if (unbounded || fine.max_error <= alpha) {
                        seg.measured_error = fine.max_error;
                        pass[i] = 1;
                    } else {
                        scans[i] = std::move(fine);
                    }
                }
            }
        });

        level.compaction_keys.clear();
        for (std::size_t i = 0; i < n; ++i) {
            if (pass[i]) {
                done.push_back(level.segments[i]);
                done_owner.push_back(owner[i]);
            } else {
                level.compaction_keys.push_back(i);
            }
        }
        const auto& keys = level.compaction_keys;
        level.child_prefix_sum.assign(keys.size() + 1, 0);
        std::vector<std::vector<double>> cuts(keys.size());
        for (std::size_t j = 0; j < keys.size(); ++j) {
            for (double z : scans[keys[j]].argmax) {
                if (z > 0.0 && z < 1.0) cuts[j].push_back(z);
            }
            if (cuts[j].empty()) cuts[j].push_back(0.5);
            level.child_prefix_sum[j + 1] = level.child_prefix_sum[j] + cuts[j].size() + 1;
        }
        if (keys.empty()) {
            if (opt.keep_levels) result.levels.push_back(std::move(level));
            break;
        }
        if (depth >= opt.max_depth) {
            const auto& bad = level.segments[keys.front()].source;
            throw Error(ErrorCode::DepthExceeded, "tolerance not reached after " + std::to_string(opt.max_depth) +
                                                      " subdivision levels on [" + std::to_string(bad.a) + ", " +
                                                      std::to_string(bad.b) + "]");
        }

        SubdivisionLevel<Dim> next;
        next.segments.resize(level.child_prefix_sum.back());
        std::vector<std::size_t> next_owner(next.segments.size());
        const std::size_t cap = std::max<std::size_t>(1, opt.batch_cap);
        for (std::size_t first = 0; first < keys.size(); first += cap) {
            const std::size_t count = std::min(cap, keys.size() - first);
            ++result.passes;
            parallel_for(count, opt.workers, [&](std::size_t begin, std::size_t end) {
                for (std::size_t jj = begin; jj < end; ++jj) {
                    const std::size_t j = first + jj;
                    const std::size_t parent = keys[j];
                    auto kids = subdivide_and_modify(level.segments[parent], input[owner[parent]],
                                                     std::span<const double>(cuts[j]));
                    for (std::size_t k = 0; k < kids.size(); ++k) {
                        next.segments[level.child_prefix_sum[j] + k] = kids[k];
                        next_owner[level.child_prefix_sum[j] + k] = owner[parent];
                    }
                }
            });
        }
        if (opt.keep_levels) result.levels.push_back(std::move(level));
        level = std::move(next);
        owner = std::move(next_owner);
    }

    std::vector<std::size_t> order(done.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (done_owner[a] != done_owner[b]) return done_owner[a] < done_owner[b];
        return done[a].source.a < done[b].source.a;
    });
    result.segments.reserve(done.size());
    result.owner.reserve(done.size());
    for (std::size_t i : order) {
        result.segments.push_back(done[i]);
        result.owner.push_back(done_owner[i]);
    }
    return result;
}

template <int Dim>
ApproximationResult<Dim> approximate_error_controlled(const std::vector<BezierSegment<Dim>>& input, double alpha,
                                                      const ApproxOptions& opt = {}) {
    return approximate_error_controlled(std::span<const BezierSegment<Dim>>(input), alpha, opt);
}

}  // namespace mrep
