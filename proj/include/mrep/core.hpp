#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mrep {

/// Highest curve degree accepted by the library.
inline constexpr int kMaxDegree = 31;

enum class ErrorCode {
    NonMonotoneKnots,
    NotClamped,
    CountMismatch,
    DegreeOutOfRange,
    ExcessMultiplicity,
    NonFinite,
    DomainError,
    DegenerateSpan,
    EmptyDomain,
    DegenerateTangent,
    SingularSystem,
    DepthExceeded,
    NoRoot,
    PointNotOnCurve,
    ParseError,
    IoError,
};

inline const char* to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::NonMonotoneKnots: return "NonMonotoneKnots";
    case ErrorCode::NotClamped: return "NotClamped";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::DegreeOutOfRange: return "DegreeOutOfRange";
    case ErrorCode::ExcessMultiplicity: return "ExcessMultiplicity";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::DegenerateSpan: return "DegenerateSpan";
    case ErrorCode::EmptyDomain: return "EmptyDomain";
    case ErrorCode::DegenerateTangent: return "DegenerateTangent";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::DepthExceeded: return "DepthExceeded";
    case ErrorCode::NoRoot: return "NoRoot";
    case ErrorCode::PointNotOnCurve: return "PointNotOnCurve";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Exception carrying a machine-readable code alongside the message.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// ---------------------------------------------------------------------------
// Points
// ---------------------------------------------------------------------------

template <int Dim>
struct Point {
    static_assert(Dim >= 1, "dimension must be positive");
    std::array<double, Dim> c{};

    constexpr double& operator[](std::size_t i) { return c[i]; }
    constexpr double operator[](std::size_t i) const { return c[i]; }

    constexpr Point& operator+=(const Point& o) {
        for (int i = 0; i < Dim; ++i) c[i] += o.c[i];
        return *this;
    }
    constexpr Point& operator-=(const Point& o) {
        for (int i = 0; i < Dim; ++i) c[i] -= o.c[i];
        return *this;
    }
    constexpr Point& operator*=(double s) {
        for (auto& x : c) x *= s;
        return *this;
    }

    friend constexpr Point operator+(Point a, const Point& b) { return a += b; }
    friend constexpr Point operator-(Point a, const Point& b) { return a -= b; }
    friend constexpr Point operator*(Point a, double s) { return a *= s; }
    friend constexpr Point operator*(double s, Point a) { return a *= s; }
    friend constexpr bool operator==(const Point&, const Point&) = default;
};

template <int Dim>
constexpr double dot(const Point<Dim>& a, const Point<Dim>& b) {
    double s = 0.0;
    for (int i = 0; i < Dim; ++i) s += a[i] * b[i];
    return s;
}

template <int Dim>
inline double norm(const Point<Dim>& a) {
    return std::sqrt(dot(a, a));
}

template <int Dim>
inline double distance(const Point<Dim>& a, const Point<Dim>& b) {
    return norm(a - b);
}

/// Length of the bounding-box diagonal of a point set; 0 for fewer than two points.
template <int Dim>
double bbox_diagonal(const std::vector<Point<Dim>>& pts) {
    if (pts.empty()) return 0.0;
    Point<Dim> lo = pts.front(), hi = pts.front();
    for (const auto& p : pts) {
        for (int i = 0; i < Dim; ++i) {
            lo[i] = std::min(lo[i], p[i]);
            hi[i] = std::max(hi[i], p[i]);
        }
    }
    return norm(hi - lo);
}

// ---------------------------------------------------------------------------
// Parameter intervals
// ---------------------------------------------------------------------------

/// Closed parameter range [a, b] in the original curve domain.
struct Interval {
    double a = 0.0;
    double b = 1.0;

    [[nodiscard]] double width() const noexcept { return b - a; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Maps a local parameter u in [0,1] to the global parameter of `iv`.
inline double local_to_global(const Interval& iv, double u) {
    if (!(u >= 0.0 && u <= 1.0)) {
        throw Error(ErrorCode::DomainError, "local parameter " + std::to_string(u) + " outside [0,1]");
    }
    if (u == 1.0) return iv.b;
    return iv.a + u * (iv.b - iv.a);
}

/// Inverse of local_to_global; t is not required to lie inside the interval.
inline double global_to_local(const Interval& iv, double t) {
    if (!(iv.b > iv.a)) throw Error(ErrorCode::DegenerateSpan, "interval has zero width");
    return (t - iv.a) / (iv.b - iv.a);
}

/// Interval covering the local sub-range [u0, u1] of `iv`.
inline Interval sub_interval(const Interval& iv, double u0, double u1) {
    return {local_to_global(iv, u0), local_to_global(iv, u1)};
}

// ---------------------------------------------------------------------------
// Curve types
// ---------------------------------------------------------------------------

using KnotVector = std::vector<double>;

template <int Dim>
struct BSplineCurve {
    int degree = 0;
    KnotVector knots;
    std::vector<Point<Dim>> control_points;

    [[nodiscard]] Interval domain() const { return {knots[degree], knots[knots.size() - 1 - degree]}; }
};

template <int Dim>
struct BezierSegment {
    int degree = 0;
    std::vector<Point<Dim>> control_points;
    Interval source;
};

template <int Dim>
struct CubicApproxSegment {
    std::array<Point<Dim>, 4> control_points{};
    Interval source;
    double measured_error = 0.0;
};

template <int Dim>
struct ProjectionResult {
    Point<Dim> query{};
    double t_star = 0.0;
    Point<Dim> foot{};
    double distance = 0.0;
    int candidates_examined = 0;
};

/// Checks every knot-vector and curve invariant; returns the curve unchanged on success.
template <int Dim>
const BSplineCurve<Dim>& validate_curve(const BSplineCurve<Dim>& curve) {
    const int p = curve.degree;
    if (p < 1 || p > kMaxDegree) {
        throw Error(ErrorCode::DegreeOutOfRange,
                    "degree " + std::to_string(p) + " outside [1," + std::to_string(kMaxDegree) + "]");
    }
    const auto& t = curve.knots;
    const std::size_t n_ctrl = curve.control_points.size();
    if (n_ctrl < static_cast<std::size_t>(p) + 1 || t.size() != n_ctrl + static_cast<std::size_t>(p) + 1) {
        throw Error(ErrorCode::CountMismatch,
                    std::to_string(t.size()) + " knots with " + std::to_string(n_ctrl) +
                        " control points at degree " + std::to_string(p) + " (need knots = points + degree + 1)");
    }
    for (double k : t) {
        if (!std::isfinite(k)) throw Error(ErrorCode::NonFinite, "knot vector contains a non-finite value");
    }
    for (const auto& pt : curve.control_points) {
        for (int i = 0; i < Dim; ++i) {
            if (!std::isfinite(pt[i])) throw Error(ErrorCode::NonFinite, "control point is not finite");
        }
    }
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        if (t[i] > t[i + 1]) {
            throw Error(ErrorCode::NonMonotoneKnots, "knots[" + std::to_string(i) + "] > knots[" +
                                                         std::to_string(i + 1) + "]");
        }
    }
    const std::size_t last = t.size() - 1;
    for (int i = 1; i <= p; ++i) {
        if (t[i] != t[0] || t[last - i] != t[last]) {
            throw Error(ErrorCode::NotClamped, "first and last " + std::to_string(p + 1) + " knots must repeat");
        }
    }
    std::size_t run = 1;
    for (std::size_t i = 1; i < t.size(); ++i) {
        run = (t[i] == t[i - 1]) ? run + 1 : 1;
        if (run > static_cast<std::size_t>(p) + 1) {
            throw Error(ErrorCode::ExcessMultiplicity,
                        "knot " + std::to_string(t[i]) + " has multiplicity above degree + 1");
        }
    }
    return curve;
}

}  // namespace mrep
