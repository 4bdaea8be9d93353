#pragma once

// Seeded generators for test and benchmark inputs. Coordinates lie in [0,1]^Dim.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "mrep/core.hpp"

namespace mrep {

using Rng = std::mt19937_64;

template <int Dim>
Point<Dim> random_point(Rng& rng, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Point<Dim> p;
    for (int i = 0; i < Dim; ++i) p[i] = u(rng);
    return p;
}

/// Clamped curve on [0,1] with uniformly random interior knots (all distinct).
template <int Dim>
BSplineCurve<Dim> random_clamped_curve(Rng& rng, int degree, std::size_t n_ctrl) {
    if (n_ctrl < static_cast<std::size_t>(degree) + 1) {
        throw Error(ErrorCode::CountMismatch, "need at least degree + 1 control points");
    }
    std::uniform_real_distribution<double> u(0.0, 1.0);
    BSplineCurve<Dim> c;
    c.degree = degree;
    const std::size_t interior = n_ctrl - static_cast<std::size_t>(degree) - 1;
    std::vector<double> inner;
    while (inner.size() < interior) {
        const double v = u(rng);
        if (v > 0.0 && std::find(inner.begin(), inner.end(), v) == inner.end()) inner.push_back(v);
    }
    std::sort(inner.begin(), inner.end());
    c.knots.assign(static_cast<std::size_t>(degree) + 1, 0.0);
    c.knots.insert(c.knots.end(), inner.begin(), inner.end());
    c.knots.insert(c.knots.end(), static_cast<std::size_t>(degree) + 1, 1.0);
    for (std::size_t i = 0; i < n_ctrl; ++i) c.control_points.push_back(random_point<Dim>(rng));
    return c;
}

/// Curve with a given knot-vector length, as listed per model in benchmark tables.
template <int Dim>
BSplineCurve<Dim> random_curve_with_knots(Rng& rng, int degree, std::size_t knot_count) {
    return random_clamped_curve<Dim>(rng, degree, knot_count - static_cast<std::size_t>(degree) - 1);
}

template <int Dim>
BezierSegment<Dim> random_bezier(Rng& rng, int degree) {
    BezierSegment<Dim> s;
    s.degree = degree;
    for (int i = 0; i <= degree; ++i) s.control_points.push_back(random_point<Dim>(rng));
    s.source = {0.0, 1.0};
    return s;
}

/// Uniform queries in the box [lo, hi]^Dim.
template <int Dim>
std::vector<Point<Dim>> random_points(Rng& rng, std::size_t n, double lo = 0.0, double hi = 1.0) {
    std::vector<Point<Dim>> pts(n);
    for (auto& p : pts) p = random_point<Dim>(rng, lo, hi);
    return pts;
}

}  // namespace mrep
