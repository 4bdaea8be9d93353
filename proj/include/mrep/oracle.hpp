#pragma once

// Naive reference implementations used to check the matrix pipeline:
// recursive basis evaluation, serial knot insertion, and brute-force projection.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "mrep/core.hpp"
#include "mrep/decompose.hpp"

namespace mrep::oracle {

/// Span index q with t_q <= t < t_{q+1}; the last nonzero span is closed on the right.
template <int Dim>
std::size_t find_span(const BSplineCurve<Dim>& curve, double t) {
    const auto& k = curve.knots;
    const std::size_t p = static_cast<std::size_t>(curve.degree);
    const std::size_t end_index = k.size() - 1 - p;
    if (t >= k[end_index]) {
        std::size_t q = end_index - 1;
        while (q > p && !(k[q] < k[q + 1])) --q;
        return q;
    }
    const auto it = std::upper_bound(k.begin() + static_cast<std::ptrdiff_t>(p),
                                     k.begin() + static_cast<std::ptrdiff_t>(end_index + 1), t);
    return static_cast<std::size_t>(it - k.begin()) - 1;
}

/// Point on the curve at t by the Cox-de Boor recursion followed by the basis sum.
template <int Dim>
Point<Dim> eval_de_boor(const BSplineCurve<Dim>& curve, double t) {
    const Interval dom = curve.domain();
    if (!(t >= dom.a && t <= dom.b)) {
        throw Error(ErrorCode::DomainError, "parameter " + std::to_string(t) + " outside the curve domain");
    }
    const auto& k = curve.knots;
    const int p = curve.degree;
    const std::size_t q = find_span(curve, t);
    const std::size_t first = q - static_cast<std::size_t>(p);

    // n[j] = N_{first + j, level}; degree-0 functions are indicators of the span.
    std::vector<double> n(static_cast<std::size_t>(p) + 2, 0.0);
    n[static_cast<std::size_t>(p)] = 1.0;
    for (int level = 1; level <= p; ++level) {
        for (std::size_t j = 0; j <= static_cast<std::size_t>(p); ++j) {
            const std::size_t i = first + j;
            double v = 0.0;
            const double d1 = k[i + level] - k[i];
            if (d1 > 0.0) v += (t - k[i]) / d1 * n[j];
            const double d2 = k[i + level + 1] - k[i + 1];
            if (d2 > 0.0) v += (k[i + level + 1] - t) / d2 * n[j + 1];
            n[j] = v;
        }
    }
    Point<Dim> out{};
    for (std::size_t j = 0; j <= static_cast<std::size_t>(p); ++j) out += curve.control_points[first + j] * n[j];
    return out;
}

/// Inserts knot u once (Boehm).
template <int Dim>
void insert_knot(BSplineCurve<Dim>& curve, double u) {
    const int p = curve.degree;
    auto& k = curve.knots;
    const auto& pts = curve.control_points;
    const std::size_t span = static_cast<std::size_t>(std::upper_bound(k.begin(), k.end(), u) - k.begin()) - 1;
    const std::size_t s = static_cast<std::size_t>(std::count(k.begin(), k.end(), u));
    std::vector<Point<Dim>> out(pts.size() + 1);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (i + static_cast<std::size_t>(p) <= span) {
            out[i] = pts[i];
        } else if (i + s <= span) {
            const double alpha = (u - k[i]) / (k[i + static_cast<std::size_t>(p)] - k[i]);
            out[i] = pts[i] * alpha + pts[i - 1] * (1.0 - alpha);
        } else {
            out[i] = pts[i - 1];
        }
    }
    k.insert(k.begin() + static_cast<std::ptrdiff_t>(span) + 1, u);
    curve.control_points = std::move(out);
}

/// Serial Bezier extraction: raise every interior knot to multiplicity p, then read off spans.
template <int Dim>
std::vector<BezierSegment<Dim>> decompose_by_knot_insertion(const BSplineCurve<Dim>& input) {
    validate_curve(input);
    BSplineCurve<Dim> curve = input;
    const int p = curve.degree;
    const Interval dom = curve.domain();
    std::vector<double> interior;
    for (double v : input.knots) {
        if (v > dom.a && v < dom.b && (interior.empty() || interior.back() != v)) interior.push_back(v);
    }
    for (double v : interior) {
        const auto mult = std::count(curve.knots.begin(), curve.knots.end(), v);
        for (auto r = mult; r < p; ++r) insert_knot(curve, v);
    }
    std::vector<BezierSegment<Dim>> out;
    for (std::size_t q : nonzero_spans(curve)) {
        const auto first = curve.control_points.begin() + static_cast<std::ptrdiff_t>(q - static_cast<std::size_t>(p));
        out.push_back({p, std::vector<Point<Dim>>(first, first + p + 1), {curve.knots[q], curve.knots[q + 1]}});
    }
    return out;
}

/// Real roots in [0,1] by sign-change bisection between the critical points,
/// which are found the same way on the derivative. Exact zeros only are trimmed
/// from the leading end.
inline std::vector<double> bisection_roots(std::vector<double> coeffs, double resolution = 1e-12) {
    while (!coeffs.empty() && coeffs.back() == 0.0) coeffs.pop_back();
    std::vector<double> roots;
    if (coeffs.size() <= 1) return roots;
    auto value = [&](double t) {
        double v = 0.0;
        for (std::size_t i = coeffs.size(); i-- > 0;) v = v * t + coeffs[i];
        return v;
    };
    std::vector<double> deriv(coeffs.size() - 1);
    for (std::size_t i = 1; i < coeffs.size(); ++i) deriv[i - 1] = coeffs[i] * static_cast<double>(i);
    std::vector<double> breaks{0.0};
    for (double c : bisection_roots(deriv, resolution)) {
        if (c > 0.0 && c < 1.0) breaks.push_back(c);
    }
    breaks.push_back(1.0);
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        double lo = breaks[k], hi = breaks[k + 1];
        double flo = value(lo), fhi = value(hi);
        if (flo == 0.0) {
            roots.push_back(lo);
            continue;
        }
        if (fhi == 0.0) {
            if (k + 2 == breaks.size()) roots.push_back(hi);
            continue;
        }
        if ((flo < 0.0) == (fhi < 0.0)) continue;
        while (hi - lo > resolution) {
            const double mid = 0.5 * (lo + hi);
            const double fm = value(mid);
            if (fm == 0.0) {
                lo = hi = mid;
                break;
            }
            if ((fm < 0.0) == (flo < 0.0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        roots.push_back(0.5 * (lo + hi));
    }
    std::vector<double> unique;
    for (double r : roots) {
        if (unique.empty() || r - unique.back() > 1e-10) unique.push_back(r);
    }
    return unique;
}

struct OracleProjection {
    double t = 0.0;
    double distance = 0.0;
    double resolution = 0.0;  // max chord between adjacent grid samples
};

/// Brute-force projector: a dense uniform grid sampled once per curve, then
/// ternary refinement of the best cell for each query.
template <int Dim>
class DenseProjector {
public:
    DenseProjector(const BSplineCurve<Dim>& curve, std::size_t grid) : curve_(curve) {
        if (grid < 2) throw Error(ErrorCode::DomainError, "oracle grid needs at least two samples");
        const Interval dom = curve.domain();
        params_.resize(grid);
        samples_.resize(grid);
        for (std::size_t i = 0; i < grid; ++i) {
            params_[i] = (i + 1 == grid) ? dom.b : dom.a + dom.width() * static_cast<double>(i) / static_cast<double>(grid - 1);
            samples_[i] = eval_de_boor(curve_, params_[i]);
        }
        for (std::size_t i = 0; i + 1 < grid; ++i) resolution_ = std::max(resolution_, distance(samples_[i], samples_[i + 1]));
    }

    [[nodiscard]] double resolution() const noexcept { return resolution_; }

    [[nodiscard]] OracleProjection project(const Point<Dim>& q) const {
        std::size_t best = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < samples_.size(); ++i) {
            const auto d = samples_[i] - q;
            const double d2 = dot(d, d);
            if (d2 < best_d2) {
                best_d2 = d2;
                best = i;
            }
        }
        double lo = params_[best == 0 ? 0 : best - 1];
        double hi = params_[std::min(best + 1, params_.size() - 1)];
        auto dist2 = [&](double t) {
            const auto d = eval_de_boor(curve_, t) - q;
            return dot(d, d);
        };
        while (hi - lo > 1e-10) {
            const double m1 = lo + (hi - lo) / 3.0;
            const double m2 = hi - (hi - lo) / 3.0;
            if (dist2(m1) < dist2(m2)) hi = m2; else lo = m1;
        }
        const double tr = 0.5 * (lo + hi);
        const double dr = dist2(tr);
        if (dr < best_d2) return {tr, std::sqrt(dr), resolution_};
        return {params_[best], std::sqrt(best_d2), resolution_};
    }

private:
    BSplineCurve<Dim> curve_;
    std::vector<double> params_;
    std::vector<Point<Dim>> samples_;
    double resolution_ = 0.0;
};

template <int Dim>
OracleProjection oracle_project(const BSplineCurve<Dim>& curve, const Point<Dim>& q, std::size_t grid = 4096) {
    return DenseProjector<Dim>(curve, grid).project(q);
}

}  // namespace mrep::oracle
