#pragma once

// Point projection and inversion on B-spline curves.
//
// A curve is decomposed and approximated by cubics once. For each query, every
// cubic is split where E' vanishes, pieces that cannot hold a distance minimum
// are dropped by the endpoint sign test, and the single root of E on each
// surviving piece is isolated by Bezier clipping of E's Bernstein form. The
// nearest candidate wins; ties go to the smallest parameter.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mrep/basis.hpp"
#include "mrep/bezier.hpp"
#include "mrep/core.hpp"
#include "mrep/decompose.hpp"
#include "mrep/distance.hpp"
#include "mrep/parallel.hpp"
#include "mrep/reduce.hpp"

namespace mrep {

// ---------------------------------------------------------------------------
// Non-parametric Bezier form of E
// ---------------------------------------------------------------------------

/// Scalar Bezier with control points (i/5, b_i).
struct NonParametricBezier {
    std::array<double, 6> b{};

    [[nodiscard]] double operator()(double u) const { return de_casteljau(b, u); }
};

inline const Matrix& quintic_rebase_matrix() {
    static const Matrix t = power_to_bernstein_matrix(5);
    return t;
}

/// Bernstein ordinates b = T a of a degree-5 power-basis polynomial.
inline NonParametricBezier rebase(const Poly& e) {
    const Matrix& t = quintic_rebase_matrix();
    NonParametricBezier out;
    for (std::size_t i = 0; i < 6; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j <= i; ++j) s += t(i, j) * e.c[j];
        out.b[i] = s;
    }
    return out;
}

/// Applies T to a contiguous block of coefficient rows (6 per row) in one pass.
inline void rebase_batch(std::span<const double> coeffs, std::span<double> ordinates) {
    if (coeffs.size() % 6 != 0 || ordinates.size() != coeffs.size()) {
        throw Error(ErrorCode::DomainError, "rebase block must hold whole rows of 6 coefficients");
    }
    const Matrix& t = quintic_rebase_matrix();
    for (std::size_t row = 0; row < coeffs.size(); row += 6) {
        for (std::size_t i = 0; i < 6; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j <= i; ++j) s += t(i, j) * coeffs[row + j];
            ordinates[row + i] = s;
        }
    }
}

struct HullCrossing {
    double z1 = 0.0;
    double z2 = 1.0;
};

/// [min, max] abscissae where the convex hull of (i/5, b_i) meets y = 0; none if
/// all ordinates share a strict sign.
inline std::optional<HullCrossing> hull_x_intersections(const NonParametricBezier& bez) {
    const auto& b = bez.b;
    const bool all_pos = std::all_of(b.begin(), b.end(), [](double v) { return v > 0.0; });
    const bool all_neg = std::all_of(b.begin(), b.end(), [](double v) { return v < 0.0; });
    if (all_pos || all_neg) return std::nullopt;

    struct P {
        double x, y;
    };
    std::array<P, 6> pts;
    for (std::size_t i = 0; i < 6; ++i) pts[i] = {static_cast<double>(i) / 5.0, b[i]};
    auto cross = [](const P& o, const P& a, const P& c) { return (a.x - o.x) * (c.y - o.y) - (a.y - o.y) * (c.x - o.x); };

    // Monotone chain; the points are already sorted by x.
    std::vector<P> lower, upper;
    for (const P& p : pts) {
        while (lower.size() >= 2 && cross(lower[lower.size() - 2], lower.back(), p) <= 0.0) lower.pop_back();
        lower.push_back(p);
    }
    for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
        while (upper.size() >= 2 && cross(upper[upper.size() - 2], upper.back(), *it) <= 0.0) upper.pop_back();
        upper.push_back(*it);
    }

    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    auto take = [&](double x) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    };
    auto edges = [&](const std::vector<P>& chain) {
        for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
            const P& a = chain[i];
            const P& c = chain[i + 1];
            if (a.y == 0.0) take(a.x);
            if (c.y == 0.0) take(c.x);
            if ((a.y < 0.0 && c.y > 0.0) || (a.y > 0.0 && c.y < 0.0)) {
                take(std::clamp(a.x + (c.x - a.x) * a.y / (a.y - c.y), std::min(a.x, c.x), std::max(a.x, c.x)));
            }
        }
    };
    edges(lower);
    edges(upper);
    if (!(lo <= hi)) return std::nullopt;
    return HullCrossing{lo, hi};
}

/// Restriction of the Bernstein form to [z1, z2], reparameterized to [0, 1].
inline NonParametricBezier clip(const NonParametricBezier& bez, double z1, double z2) {
    if (!(0.0 <= z1 && z1 <= z2 && z2 <= 1.0)) throw Error(ErrorCode::DomainError, "clip range must satisfy 0 <= z1 <= z2 <= 1");
    // S_R(z1) then S_L(inner), i.e. clipping_matrix(z1, z2, 5), as in-place de Casteljau passes.
    NonParametricBezier out = bez;
    auto& w = out.b;
    if (z1 >= 1.0) {
        w.fill(bez.b[5]);
        return out;
    }
    if (z1 > 0.0) {
        for (std::size_t r = 1; r < 6; ++r)
            for (std::size_t i = 0; i + r < 6; ++i) w[i] = w[i] * (1.0 - z1) + w[i + 1] * z1;
    }
    const double inner = z1 > 0.0 ? (z2 - z1) / (1.0 - z1) : z2;
    if (inner < 1.0) {
        for (std::size_t r = 1; r < 6; ++r)
            for (std::size_t i = 5; i >= r; --i) w[i] = w[i - 1] * (1.0 - inner) + w[i] * inner;
    }
    return out;
}

struct ClipResult {
    double u = 0.5;                // root estimate in the input's local parameter
    int iterations = 0;
    std::vector<double> widths;    // enclosing-interval width after each iteration
    double lo = 0.0, hi = 1.0;     // final enclosure
    bool converged = false;        // width reached tol within the iteration budget
};

/// Isolates the single root of a monotone Bernstein form by repeated hull clipping.
inline ClipResult clip_root(const NonParametricBezier& input, double tol = 1e-6, int max_iter = 8) {
    ClipResult res;
    NonParametricBezier bez = input;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < max_iter; ++it) {
        const auto hit = hull_x_intersections(bez);
        if (!hit) {
            if (it == 0) throw Error(ErrorCode::NoRoot, "hull of the distance derivative never crosses zero");
            break;
        }
        const double w = hi - lo;
        const double new_lo = lo + hit->z1 * w;
        const double new_hi = std::max(new_lo, lo + hit->z2 * w);
        bez = clip(bez, hit->z1, hit->z2);
        lo = new_lo;
        hi = new_hi;
        ++res.iterations;
        res.widths.push_back(hi - lo);
        if (hi - lo <= tol) break;
    }
    res.lo = lo;
    res.hi = hi;
    res.converged = hi - lo <= tol;
    res.u = 0.5 * (lo + hi);
    return res;
}

/// Bisection for the sign change of `bez` inside [lo, hi]; used when clipping stalls.
inline double bisect_root(const NonParametricBezier& bez, double lo, double hi, double tol = 1e-14) {
    double flo = bez(lo);
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // adjacent doubles
        const double fm = bez(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Elimination and reduction
// ---------------------------------------------------------------------------

/// Values of E at the two ends of a monotone piece.
struct PieceEnds {
    double e0 = 0.0;
    double e1 = 0.0;
};

/// A piece can hold a distance minimum only if D decreases at its start and E changes sign.
inline bool may_hold_minimum(const PieceEnds& p) { return p.e0 < 0.0 && p.e0 * p.e1 <= 0.0; }

struct CandidateSet {
    std::vector<std::size_t> pieces;  // indices of surviving pieces
    bool curve_start = false;
    bool curve_end = false;
};

/// Survivors of the endpoint sign test; the global curve ends are always candidates.
inline CandidateSet eliminate(std::span<const PieceEnds> pieces, bool has_curve_start, bool has_curve_end) {
    CandidateSet out;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        if (may_hold_minimum(pieces[i])) out.pieces.push_back(i);
    }
    out.curve_start = has_curve_start;
    out.curve_end = has_curve_end;
    return out;
}

template <int Dim>
struct Candidate {
    double t = 0.0;
    Point<Dim> foot{};
    double distance = 0.0;
};

/// Nearest candidate; distances within 1e-12 of the minimum tie and the smallest t wins.
/// Tied candidates within 1e-12 in t of that winner are the same foot found twice
/// (a clipped root next to an exact end candidate); the nearer of those is kept.
template <int Dim>
Candidate<Dim> reduce_min(std::span<const Candidate<Dim>> cands) {
    if (cands.empty()) throw Error(ErrorCode::DomainError, "no projection candidates");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : cands) best = std::min(best, c.distance);
    const Candidate<Dim>* pick = nullptr;
    for (const auto& c : cands) {
        if (c.distance > best + 1e-12) continue;
        if (!pick || c.t < pick->t || (c.t == pick->t && c.distance < pick->distance)) pick = &c;
    }
    const double t_first = pick->t;
    for (const auto& c : cands) {
        if (c.distance > best + 1e-12 || c.t - t_first > 1e-12) continue;
        if (c.distance < pick->distance || (c.distance == pick->distance && c.t < pick->t)) pick = &c;
    }
    return *pick;
}

template <int Dim>
Candidate<Dim> reduce_min(const std::vector<Candidate<Dim>>& cands) {
    return reduce_min(std::span<const Candidate<Dim>>(cands));
}

// ---------------------------------------------------------------------------
// Projector
// ---------------------------------------------------------------------------

/// Per-query diagnostics, filled only when requested.
struct ProjectionTrace {
    struct Dropped {
        std::size_t segment;
        double u0, u1;  // piece range in the segment's local parameter
    };
    std::vector<ClipResult> clips;
    std::vector<Dropped> dropped;
    std::vector<std::size_t> culled;  // segments skipped by the bounding-box bound
    std::size_t pieces = 0;
    std::size_t no_root = 0;  // kept pieces whose hull missed the axis
    std::size_t bisected = 0;  // clips that needed bisection after the iteration budget
};

template <int Dim>
struct ProjectionOutcome {
    ProjectionResult<Dim> result;
    std::optional<Error> error;

    [[nodiscard]] bool ok() const noexcept { return !error.has_value(); }
};

struct ProjectOptions {
    ApproxOptions approx;
    double clip_tol = 1e-6;
    int clip_max_iter = 8;
    /// Skip cubics whose control-point box is farther than the best candidate so far.
    bool cull = true;
};

template <int Dim>
class Projector {
public:
    /// Decomposes and approximates the curve once; queries are read-only afterwards.
    Projector(const BSplineCurve<Dim>& curve, double alpha, std::size_t workers = 1, ProjectOptions opt = {})
        : opt_(opt) {
        init(curve, alpha);
        opt_.approx.workers = workers;
        const auto bez = decompose_to_bezier(curve, workers);
        segments_ = approximate_error_controlled(bez, alpha, opt_.approx).segments;
        finish();
    }

    /// Uses cubics already produced by approximate_error_controlled for this curve.
    Projector(const BSplineCurve<Dim>& curve, std::vector<CubicApproxSegment<Dim>> segments, double alpha,
              ProjectOptions opt = {})
        : opt_(opt) {
        init(curve, alpha);
        if (segments.empty()) throw Error(ErrorCode::EmptyDomain, "no cubic segments to project onto");
        segments_ = std::move(segments);
        finish();
    }

    [[nodiscard]] const std::vector<CubicApproxSegment<Dim>>& segments() const noexcept { return segments_; }
    [[nodiscard]] double tolerance() const noexcept { return alpha_; }
    [[nodiscard]] Interval domain() const noexcept { return domain_; }

    [[nodiscard]] ProjectionResult<Dim> project(const Point<Dim>& q, ProjectionTrace* trace = nullptr) const {
        std::vector<Candidate<Dim>> cands;
        cands.push_back({domain_.a, first_, distance(first_, q)});
        cands.push_back({domain_.b, last_, distance(last_, q)});
        double best = std::min(cands[0].distance, cands[1].distance);

        if (!opt_.cull) {
            for (std::size_t s = 0; s < segments_.size(); ++s) examine(s, q, cands, best, trace);
        } else {
            // Nearest-first descent; a subtree is skipped only if it cannot tie the best (1e-12).
            std::vector<std::size_t> stack{0};
            while (!stack.empty()) {
                const Node& node = nodes_[stack.back()];
                stack.pop_back();
                if (box_distance(node, q) > best + 1e-12) {
                    if (trace) {
                        for (std::size_t s = node.begin; s < node.end; ++s) trace->culled.push_back(s);
                    }
                    continue;
                }
                if (node.left == kNone) {
                    for (std::size_t s = node.begin; s < node.end; ++s) {
                        if (box_distance(boxes_[s], q) > best + 1e-12 || hull_distance(s, q) > best + 1e-12) {
                            if (trace) trace->culled.push_back(s);
                            continue;
                        }
                        examine(s, q, cands, best, trace);
                    }
                    continue;
                }
                const double dl = box_distance(nodes_[node.left], q);
                const double dr = box_distance(nodes_[node.right], q);
                if (dl <= dr) {
                    stack.push_back(node.right);
                    stack.push_back(node.left);
                } else {
                    stack.push_back(node.left);
                    stack.push_back(node.right);
                }
            }
        }

        const Candidate<Dim> winner = reduce_min(cands);
        ProjectionResult<Dim> r;
        r.query = q;
        r.t_star = winner.t;
        r.foot = winner.foot;
        r.distance = winner.distance;
        r.candidates_examined = static_cast<int>(cands.size());
        return r;
    }

    /// Projects every query; chunks of K = ceil(n / workers) queries per worker.
    [[nodiscard]] std::vector<ProjectionOutcome<Dim>> project_all(std::span<const Point<Dim>> queries,
                                                                  std::size_t workers = 1) const {
        std::vector<ProjectionOutcome<Dim>> out(queries.size());
        parallel_for(queries.size(), workers, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                try {
                    out[i].result = project(queries[i]);
                } catch (const Error& e) {
                    out[i].result.query = queries[i];
                    out[i].error = e;
                }
            }
        });
        return out;
    }

    /// Parameter of an on-curve point; PointNotOnCurve beyond 10 alpha.
    [[nodiscard]] double invert(const Point<Dim>& q) const {
        const auto r = project(q);
        if (r.distance > 10.0 * alpha_) {
            throw Error(ErrorCode::PointNotOnCurve, "point is " + std::to_string(r.distance) + " from the curve");
        }
        return r.t_star;
    }

private:
    static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    static constexpr std::size_t kLeafSize = 4;

    struct Box {
        Point<Dim> lo, hi;
    };
    struct Node : Box {
        std::size_t begin = 0, end = 0;
        std::size_t left = kNone, right = kNone;
    };

    void init(const BSplineCurve<Dim>& curve, double alpha) {
        validate_curve(curve);
        if (!(alpha > 0.0)) throw Error(ErrorCode::DomainError, "tolerance must be positive");
        alpha_ = alpha;
        domain_ = curve.domain();
        first_ = curve.control_points.front();
        last_ = curve.control_points.back();
    }

    void finish() {
        power_.resize(segments_.size());
        for (std::size_t i = 0; i < segments_.size(); ++i) power_[i] = cubic_power_form(segments_[i].control_points);
        build_tree();
    }

    static double box_distance(const Box& b, const Point<Dim>& q) {
        double s = 0.0;
        for (int i = 0; i < Dim; ++i) {
            const double d = std::max({b.lo[i] - q[i], 0.0, q[i] - b.hi[i]});
            s += d * d;
        }
        return std::sqrt(s);
    }

    static Box merge(const Box& a, const Box& b) {
        Box m = a;
        for (int i = 0; i < Dim; ++i) {
            m.lo[i] = std::min(a.lo[i], b.lo[i]);
            m.hi[i] = std::max(a.hi[i], b.hi[i]);
        }
        return m;
    }

    // Boxes of the control points enclose each cubic (convex hull property);
    // segments are consecutive along the curve, so ranges make tight nodes.
    /// Distance from q to the chord P0 P3.
    static double chord_distance(const Point<Dim>& a, const Point<Dim>& b, const Point<Dim>& q) {
        const Point<Dim> ab = b - a;
        const double len2 = dot(ab, ab);
        const double t = len2 > 0.0 ? std::clamp(dot(q - a, ab) / len2, 0.0, 1.0) : 0.0;
        return distance(a + ab * t, q);
    }

    // The control hull lies within `width` of the chord, so this bounds the segment
    // from below; much tighter than the box for short, nearly straight pieces.
    double hull_distance(std::size_t s, const Point<Dim>& q) const {
        const auto& c = segments_[s].control_points;
        return chord_distance(c[0], c[3], q) - widths_[s];
    }

    void build_tree() {
        boxes_.resize(segments_.size());
        widths_.resize(segments_.size());
        for (std::size_t s = 0; s < segments_.size(); ++s) {
            const auto& c = segments_[s].control_points;
            Box b{c[0], c[0]};
            for (const auto& p : c) b = merge(b, Box{p, p});
            boxes_[s] = b;
            // Slightly inflated so rounding never makes the bound exceed the true distance.
            widths_[s] = std::max(chord_distance(c[0], c[3], c[1]), chord_distance(c[0], c[3], c[2])) * (1.0 + 1e-12) +
                         1e-15;
        }
        nodes_.clear();
        nodes_.reserve(2 * segments_.size() / kLeafSize + 2);
        if (!segments_.empty()) build_node(0, segments_.size());
    }

    std::size_t build_node(std::size_t begin, std::size_t end) {
        const std::size_t id = nodes_.size();
        nodes_.emplace_back();
        Box b = boxes_[begin];
        for (std::size_t s = begin + 1; s < end; ++s) b = merge(b, boxes_[s]);
        static_cast<Box&>(nodes_[id]) = b;
        nodes_[id].begin = begin;
        nodes_[id].end = end;
        if (end - begin > kLeafSize) {
            const std::size_t mid = begin + (end - begin) / 2;
            const std::size_t l = build_node(begin, mid);
            const std::size_t r = build_node(mid, end);
            nodes_[id].left = l;
            nodes_[id].right = r;
        }
        return id;
    }

    void add(std::vector<Candidate<Dim>>& cands, double& best, double t, const Point<Dim>& foot,
             const Point<Dim>& q) const {
        const double d = distance(foot, q);
        cands.push_back({t, foot, d});
        best = std::min(best, d);
    }

    // Monotone split, elimination and clipping on one cubic.
    void examine(std::size_t s, const Point<Dim>& q, std::vector<Candidate<Dim>>& cands, double& best,
                 ProjectionTrace* trace) const {
        const auto& seg = segments_[s];
        const DistancePolys polys = distance_polys_from_power(power_[s], q);
        const std::vector<double> cuts = monotone_breaks(polys.e_prime);
        const NonParametricBezier whole = rebase(polys.e);
        std::array<double, 6> ends{};
        for (std::size_t k = 0; k < cuts.size(); ++k) ends[k] = polys.e(cuts[k]);
        if (trace) trace->pieces += cuts.size() - 1;

        // A local minimum can sit on a seam where the tangent turns (C0 joins).
        if (s > 0 && ends[0] >= 0.0) add(cands, best, seg.source.a, seg.control_points.front(), q);

        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            if (!may_hold_minimum({ends[k], ends[k + 1]})) {
                if (trace) trace->dropped.push_back({s, cuts[k], cuts[k + 1]});
                continue;
            }
            // E restricted to the piece is the piece's own distance derivative.
            const double u0 = cuts[k], u1 = cuts[k + 1];
            const NonParametricBezier b = cuts.size() > 2 ? clip(whole, u0, u1) : whole;
            try {
                ClipResult clipped = clip_root(b, opt_.clip_tol, opt_.clip_max_iter);
                if (!clipped.converged) {
                    // The enclosure still holds the only root; finish it by bisection.
                    clipped.u = bisect_root(b, clipped.lo, clipped.hi, opt_.clip_tol * 1e-6);
                    if (trace) ++trace->bisected;
                }
                const double u = u0 + (u1 - u0) * clipped.u;
                add(cands, best, local_to_global(seg.source, u), evaluate(seg, u), q);
                if (trace) trace->clips.push_back(std::move(clipped));
            } catch (const Error& e) {
                if (e.code() != ErrorCode::NoRoot) throw;
                // Sign test and rebased ordinates disagree only when E is ~0 at a piece end.
                if (trace) ++trace->no_root;
                for (double u : {u0, u1}) add(cands, best, local_to_global(seg.source, u), evaluate(seg, u), q);
            }
        }
    }

    ProjectOptions opt_;
    double alpha_ = 1e-4;
    Interval domain_;
    Point<Dim> first_{};
    Point<Dim> last_{};
    std::vector<CubicApproxSegment<Dim>> segments_;
    std::vector<std::array<Point<Dim>, 4>> power_;
    std::vector<Box> boxes_;
    std::vector<double> widths_;
    std::vector<Node> nodes_;
};

template <int Dim>
std::vector<ProjectionOutcome<Dim>> project_points(const BSplineCurve<Dim>& curve, std::span<const Point<Dim>> queries,
                                                   double alpha, std::size_t workers = 1) {
    const Projector<Dim> projector(curve, alpha, workers);
    return projector.project_all(queries, workers);
}

template <int Dim>
std::vector<ProjectionOutcome<Dim>> project_points(const BSplineCurve<Dim>& curve,
                                                   const std::vector<Point<Dim>>& queries, double alpha,
                                                   std::size_t workers = 1) {
    return project_points(curve, std::span<const Point<Dim>>(queries), alpha, workers);
}

template <int Dim>
double invert_point(const BSplineCurve<Dim>& curve, const Point<Dim>& q, double alpha) {
    return Projector<Dim>(curve, alpha).invert(q);
}

}  // namespace mrep
