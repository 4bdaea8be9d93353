#pragma once

// Squared-distance machinery for one cubic piece and one query point.
//
// With C(t) the cubic and q the query, D(t) = |C(t) - q|^2 and
//     E(t)  = D'(t) = 2 (C(t) - q) . C'(t)                 (degree 5)
//     E'(t) = 2 (C'(t) . C'(t) + (C(t) - q) . C''(t))      (degree 4)
// Real roots of E' split the piece into parts on which E is monotone, so each
// part holds at most one stationary point of D.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "mrep/basis.hpp"
#include "mrep/bezier.hpp"
#include "mrep/core.hpp"
#include "mrep/reduce.hpp"

namespace mrep {

/// Power-basis polynomial of degree at most 5, ascending coefficients.
struct Poly {
    std::array<double, 6> c{};
    int degree = 0;

    [[nodiscard]] double operator()(double t) const {
        double v = 0.0;
        for (int i = degree; i >= 0; --i) v = v * t + c[i];
        return v;
    }

    [[nodiscard]] Poly derivative() const {
        Poly d;
        d.degree = std::max(degree - 1, 0);
        for (int i = 1; i <= degree; ++i) d.c[i - 1] = c[i] * i;
        return d;
    }

    [[nodiscard]] std::span<const double> coeffs() const { return {c.data(), static_cast<std::size_t>(degree) + 1}; }
};

struct DistancePolys {
    Poly e;        // E(t)
    Poly e_prime;  // E'(t)
};

/// E and E' from the power coefficients a0..a3 of C.
template <int Dim>
DistancePolys distance_polys_from_power(const std::array<Point<Dim>, 4>& a, const Point<Dim>& q) {
    const Point<Dim> r0 = a[0] - q;  // C - q
    const std::array<Point<Dim>, 3> d{a[1], a[2] * 2.0, a[3] * 3.0};  // C'
    const std::array<Point<Dim>, 2> dd{a[2] * 2.0, a[3] * 6.0};       // C''
    const std::array<Point<Dim>, 4> r{r0, a[1], a[2], a[3]};

    DistancePolys out;
    out.e.degree = 5;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 3; ++j) out.e.c[i + j] += 2.0 * dot(r[i], d[j]);
    }
    out.e_prime.degree = 4;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) out.e_prime.c[i + j] += 2.0 * dot(d[i], d[j]);
    }
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 2; ++j) {
            if (i + j <= 4) out.e_prime.c[i + j] += 2.0 * dot(r[i], dd[j]);
        }
    }
    return out;
}

template <int Dim>
DistancePolys distance_polys(const std::array<Point<Dim>, 4>& ctrl, const Point<Dim>& q) {
    return distance_polys_from_power(cubic_power_form(ctrl), q);
}

// ---------------------------------------------------------------------------
// Closed-form real roots
// ---------------------------------------------------------------------------

namespace detail {

inline void solve_linear(double c0, double c1, std::vector<double>& out) {
    if (c1 != 0.0) out.push_back(-c0 / c1);
}

// c0 + c1 x + c2 x^2 with c2 != 0; cancellation-free form.
inline void solve_quadratic(double c0, double c1, double c2, std::vector<double>& out) {
    const double disc = c1 * c1 - 4.0 * c2 * c0;
    if (disc < 0.0) return;
    if (disc == 0.0) {
        out.push_back(-c1 / (2.0 * c2));
        return;
    }
    const double s = std::sqrt(disc);
    const double k = -0.5 * (c1 + std::copysign(s, c1));
    out.push_back(k / c2);
    if (k != 0.0) out.push_back(c0 / k);
    else out.push_back(-out.back());
}

// Monic x^3 + a x^2 + b x + c.
inline void solve_cubic_monic(double a, double b, double c, std::vector<double>& out) {
    const double a3 = a / 3.0;
    const double p = b - a * a3;                               // depressed: y^3 + p y + r
    const double r = c - a3 * b + 2.0 * a3 * a3 * a3;
    const double half_r = 0.5 * r;
    const double third_p = p / 3.0;
    const double disc = half_r * half_r + third_p * third_p * third_p;
    if (disc > 0.0) {
        // One real root (Cardano).
        const double s = std::sqrt(disc);
        const double u = std::cbrt(-half_r + std::copysign(s, -half_r));
        const double y = (u != 0.0) ? u - third_p / u : 0.0;
        out.push_back(y - a3);
    } else if (third_p == 0.0) {
        out.push_back(-a3);
    } else {
        // Three real roots (trigonometric form).
        const double m = 2.0 * std::sqrt(-third_p);
        const double arg = std::clamp(3.0 * r / (p * m), -1.0, 1.0);
        const double theta = std::acos(arg) / 3.0;
        constexpr double two_pi_3 = 2.0943951023931954923;
        for (int k = 0; k < 3; ++k) out.push_back(m * std::cos(theta - two_pi_3 * k) - a3);
    }
}

// Monic x^4 + a x^3 + b x^2 + c x + d by Ferrari's method.
inline void solve_quartic_monic(double a, double b, double c, double d, std::vector<double>& out) {
    const double a4 = a / 4.0;
    const double a2 = a4 * a4;
    // Depressed quartic y^4 + P y^2 + Q y + R, x = y - a/4.
    const double P = b - 6.0 * a2;
    const double Q = c - 2.0 * b * a4 + 8.0 * a2 * a4;
    const double R = d - c * a4 + b * a2 - 3.0 * a2 * a2;
    // Length scale of y: P ~ L^2, Q ~ L^3, R ~ L^4.
    const double len = std::max(std::sqrt(std::abs(P)), std::sqrt(std::sqrt(std::abs(R))));

    std::vector<double> ys;
    auto biquadratic = [&] {
        // z^2 + P z + R with z = y^2.
        std::vector<double> zs;
        solve_quadratic(R, P, 1.0, zs);
        for (double z : zs) {
            if (z > 0.0) {
                ys.push_back(std::sqrt(z));
                ys.push_back(-std::sqrt(z));
            } else if (z == 0.0) {
                ys.push_back(0.0);
            }
        }
    };
    if (std::abs(Q) <= 1e-14 * len * len * len) {
        biquadratic();
    } else {
        // Resolvent cubic m^3 + P m^2 + (P^2/4 - R) m - Q^2/8; its largest root is positive.
        std::vector<double> ms;
        solve_cubic_monic(P, 0.25 * P * P - R, -0.125 * Q * Q, ms);
        double m = *std::max_element(ms.begin(), ms.end());
        for (int it = 0; it < 2; ++it) {
            const double f = ((m + P) * m + (0.25 * P * P - R)) * m - 0.125 * Q * Q;
            const double fp = (3.0 * m + 2.0 * P) * m + (0.25 * P * P - R);
            if (fp == 0.0) break;
            const double next = m - f / fp;
            if (!(next > 0.0)) break;
            m = next;
        }
        if (m > 0.0) {
            const double s = std::sqrt(2.0 * m);
            const double base = 0.5 * P + m;
            const double shift = Q / (2.0 * s);
            solve_quadratic(base + shift, -s, 1.0, ys);
            solve_quadratic(base - shift, s, 1.0, ys);
        } else {
            biquadratic();
        }
    }
    for (double y : ys) out.push_back(y - a4);
}

}  // namespace detail

/// Degree after dropping leading coefficients with |c_n| <= 1e-12 max|c|; -1 if identically zero.
inline int effective_degree(std::span<const double> coeffs) {
    double big = 0.0;
    for (double v : coeffs) big = std::max(big, std::abs(v));
    if (big == 0.0) return -1;
    int n = static_cast<int>(coeffs.size()) - 1;
    while (n > 0 && std::abs(coeffs[n]) <= 1e-12 * big) --n;
    return n;
}

inline double horner(std::span<const double> coeffs, int degree, double t) {
    double v = 0.0;
    for (int i = degree; i >= 0; --i) v = v * t + coeffs[i];
    return v;
}

/// All real roots of a polynomial of degree <= 4 (closed forms), unsorted, unpolished.
inline std::vector<double> real_roots_closed_form(std::span<const double> coeffs) {
    std::vector<double> out;
    const int n = effective_degree(coeffs);
    if (n <= 0) return out;
    const double lead = coeffs[n];
    switch (n) {
    case 1: detail::solve_linear(coeffs[0], coeffs[1], out); break;
    case 2: detail::solve_quadratic(coeffs[0], coeffs[1], coeffs[2], out); break;
    case 3: detail::solve_cubic_monic(coeffs[2] / lead, coeffs[1] / lead, coeffs[0] / lead, out); break;
    case 4:
        detail::solve_quartic_monic(coeffs[3] / lead, coeffs[2] / lead, coeffs[1] / lead, coeffs[0] / lead, out);
        break;
    default: throw Error(ErrorCode::DomainError, "closed-form solver handles degree <= 4");
    }
    return out;
}

/// Sorted real roots in [0,1] of a polynomial of degree <= 4.
///
/// Closed forms (Ferrari, Cardano, quadratic, linear by effective degree), each
/// root polished by up to three Newton steps and deduplicated within 1e-10.
inline std::vector<double> solve_quartic(std::span<const double> coeffs) {
    const int n = effective_degree(coeffs);
    std::vector<double> roots;
    if (n <= 0) return roots;
    const std::span<const double> c = coeffs.first(static_cast<std::size_t>(n) + 1);
    double big = 0.0;
    for (double v : c) big = std::max(big, std::abs(v));

    for (double r : real_roots_closed_form(c)) {
        if (!std::isfinite(r)) continue;
        double best = r;
        double best_val = std::abs(horner(c, n, r));
        double x = r;
        for (int it = 0; it < 3 && best_val > 0.0; ++it) {
            double v = 0.0, dv = 0.0;
            for (int i = n; i >= 0; --i) {
                dv = dv * x + v;
                v = v * x + c[i];
            }
            if (dv == 0.0) break;
            x -= v / dv;
            const double val = std::abs(horner(c, n, x));
            if (!(val < best_val) || std::abs(x - r) > 1e-3) break;
            best = x;
            best_val = val;
        }
        if (best < 0.0 && best > -1e-12) best = 0.0;
        if (best > 1.0 && best < 1.0 + 1e-12) best = 1.0;
        if (best >= 0.0 && best <= 1.0) roots.push_back(best);
    }
    std::sort(roots.begin(), roots.end());
    std::vector<double> unique;
    for (double r : roots) {
        if (unique.empty() || r - unique.back() > 1e-10) unique.push_back(r);
    }
    return unique;
}

inline std::vector<double> solve_quartic(const Poly& p) { return solve_quartic(p.coeffs()); }

/// Reference Newton solver used only for the speed comparison in benchmarks:
/// Newton from `seeds` uniform starts in [0,1], converged roots deduplicated.
inline std::vector<double> newton_quartic_roots(std::span<const double> coeffs, int seeds = 8, int max_iter = 50) {
    const int n = effective_degree(coeffs);
    std::vector<double> roots;
    if (n <= 0) return roots;
    for (int s = 0; s < seeds; ++s) {
        double x = (s + 0.5) / seeds;
        for (int it = 0; it < max_iter; ++it) {
            double v = 0.0, dv = 0.0;
            for (int i = n; i >= 0; --i) {
                dv = dv * x + v;
                v = v * x + coeffs[i];
            }
            if (dv == 0.0) break;
            const double step = v / dv;
            x -= step;
            if (std::abs(step) < 1e-14) break;
        }
        if (x >= 0.0 && x <= 1.0) roots.push_back(x);
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end(), [](double a, double b) { return b - a <= 1e-10; }),
                roots.end());
    return roots;
}

// ---------------------------------------------------------------------------
// Monotone split
// ---------------------------------------------------------------------------

/// Break parameters {0, interior roots of E' ..., 1}; roots within 1e-10 of an end are dropped.
inline std::vector<double> monotone_breaks(const Poly& e_prime) {
    std::vector<double> cuts{0.0};
    for (double r : solve_quartic(e_prime)) {
        if (r > 1e-10 && r < 1.0 - 1e-10) cuts.push_back(r);
    }
    cuts.push_back(1.0);
    return cuts;
}

/// Exact subdivision of `seg` at the interior roots of E' for query q.
template <int Dim>
std::vector<CubicApproxSegment<Dim>> monotonic_split(const CubicApproxSegment<Dim>& seg, const Point<Dim>& q) {
    const auto cuts = monotone_breaks(distance_polys(seg.control_points, q).e_prime);
    std::vector<CubicApproxSegment<Dim>> out;
    out.reserve(cuts.size() - 1);
    if (cuts.size() == 2) {
        out.push_back(seg);
        return out;
    }
    std::span<const Point<Dim>> parent(seg.control_points);
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const auto pts = restrict_bernstein(parent, cuts[k], cuts[k + 1]);
        CubicApproxSegment<Dim> piece;
        std::copy(pts.begin(), pts.end(), piece.control_points.begin());
        piece.source = sub_interval(seg.source, cuts[k], cuts[k + 1]);
        piece.measured_error = seg.measured_error;
        out.push_back(piece);
    }
    return out;
}

/// E' sampled at `samples` points keeps one sign, ignoring values within 1e-10 of
/// the largest sampled magnitude (numerical zeros at the piece ends).
template <int Dim>
bool is_monotone_piece(const CubicApproxSegment<Dim>& piece, const Point<Dim>& q, int samples = 64) {
    const Poly ep = distance_polys(piece.control_points, q).e_prime;
    std::vector<double> v(static_cast<std::size_t>(samples));
    double scale = 0.0;
    for (int k = 0; k < samples; ++k) {
        v[k] = ep(static_cast<double>(k) / (samples - 1));
        scale = std::max(scale, std::abs(v[k]));
    }
    bool pos = false, neg = false;
    for (double x : v) {
        if (std::abs(x) <= 1e-10 * scale) continue;
        (x > 0.0 ? pos : neg) = true;
    }
    return !(pos && neg);
}

}  // namespace mrep
