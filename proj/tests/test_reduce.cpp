#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "mrep/decompose.hpp"
#include "mrep/random.hpp"
#include "mrep/reduce.hpp"

using namespace mrep;

namespace {

// Plain Bernstein-sum evaluation, independent of the library's de Casteljau.
template <int Dim, class Pts>
Point<Dim> bernstein_sum(const Pts& pts, double u) {
    const int n = static_cast<int>(pts.size()) - 1;
    Point<Dim> out{};
    for (int i = 0; i <= n; ++i) out += pts[static_cast<std::size_t>(i)] * (binomial(n, i) * std::pow(u, i) * std::pow(1 - u, n - i));
    return out;
}

// Midpoint-rule squared L2 distance on [0,1].
template <int Dim>
double l2_quadrature(const BezierSegment<Dim>& seg, const std::array<Point<Dim>, 4>& cubic, int steps = 4000) {
    double s = 0.0;
    for (int k = 0; k < steps; ++k) {
        const double u = (k + 0.5) / steps;
        const auto d = bernstein_sum<Dim>(seg.control_points, u) - bernstein_sum<Dim>(cubic, u);
        s += dot(d, d);
    }
    return s / steps;
}

template <int Dim>
double sampled_deviation(const CubicApproxSegment<Dim>& c, const BezierSegment<Dim>& src, int samples) {
    double worst = 0.0;
    for (int k = 0; k <= samples; ++k) {
        const double u = static_cast<double>(k) / samples;
        const double t = c.source.a + u * (c.source.b - c.source.a);
        const double v = std::clamp((t - src.source.a) / (src.source.b - src.source.a), 0.0, 1.0);
        worst = std::max(worst, distance(bernstein_sum<Dim>(c.control_points, u), bernstein_sum<Dim>(src.control_points, v)));
    }
    return worst;
}

template <int Dim>
std::vector<BezierSegment<Dim>> random_segments(std::uint64_t seed, int degree, std::size_t n_ctrl) {
    Rng rng(seed);
    return decompose_to_bezier(random_clamped_curve<Dim>(rng, degree, n_ctrl));
}

}  // namespace

TEST(Elevate, PreservesShape) {
    Rng rng(41);
    for (int p = 1; p <= 6; ++p) {
        const auto seg = random_bezier<3>(rng, p);
        const auto up = elevate_degree(seg, p + 4);
        EXPECT_EQ(up.degree, p + 4);
        ASSERT_EQ(up.control_points.size(), static_cast<std::size_t>(p + 5));
        for (int k = 0; k <= 20; ++k)
            EXPECT_NEAR(distance(bernstein_sum<3>(seg.control_points, k / 20.0), bernstein_sum<3>(up.control_points, k / 20.0)), 0.0, 1e-14);
    }
    EXPECT_THROW((void)elevate_degree(random_bezier<2>(rng, 5), 3), Error);
}

TEST(L2Error, MatchesQuadrature) {
    Rng rng(42);
    for (int p = 3; p <= 9; ++p) {
        const auto seg = random_bezier<2>(rng, p);
        const std::array<Point<2>, 4> cubic{random_point<2>(rng), random_point<2>(rng), random_point<2>(rng), random_point<2>(rng)};
        EXPECT_NEAR(l2_error_exact(std::span<const Point<2>>(seg.control_points), cubic), l2_quadrature(seg, cubic), 1e-7);
    }
}

TEST(G1Cubic, EndpointsAndTangents) {
    Rng rng(43);
    const auto seg = random_bezier<3>(rng, 6);
    const auto c = g1_cubic(std::span<const Point<3>>(seg.control_points), 0.7, 1.3);
    const auto& q = seg.control_points;
    EXPECT_EQ(c[0], q[0]);
    EXPECT_EQ(c[3], q[6]);
    EXPECT_NEAR(distance(c[1], q[0] + (q[1] - q[0]) * (2.0 * 0.7)), 0.0, 1e-15);
    EXPECT_NEAR(distance(c[2], q[6] - (q[6] - q[5]) * (2.0 * 1.3)), 0.0, 1e-15);
}

TEST(ReduceG1, RecoversElevatedCubic) {
    Rng rng(44);
    for (int p = 4; p <= 10; ++p) {
        const auto cubic = random_bezier<2>(rng, 3);
        const auto sol = reduce_to_cubic_g1(elevate_degree(cubic, p));
        EXPECT_FALSE(sol.fallback.has_value());
        EXPECT_NEAR(sol.delta0, 1.0, 1e-9) << p;
        EXPECT_NEAR(sol.delta1, 1.0, 1e-9) << p;
        for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(distance(sol.cubic[i], cubic.control_points[i]), 0.0, 1e-9);
        EXPECT_LT(sol.l2_error, 1e-18);
    }
}

TEST(ReduceG1, DeltasAreStationaryUnderIndependentQuadrature) {
    // The objective is quadratic in (delta0, delta1); finite differences of the
    // quadrature objective must vanish at the closed-form optimum.
    Rng rng(45);
    for (int k = 0; k < 20; ++k) {
        const int p = 4 + k % 6;
        const auto seg = random_bezier<2>(rng, p);
        const auto sol = reduce_to_cubic_g1(seg);
        ASSERT_FALSE(sol.fallback.has_value());
        std::span<const Point<2>> q(seg.control_points);
        auto f = [&](double d0, double d1) { return l2_quadrature(seg, g1_cubic(q, d0, d1), 800); };
        const double h = 1e-3;
        const double f0 = f(sol.delta0, sol.delta1);
        const double g0 = (f(sol.delta0 + h, sol.delta1) - f(sol.delta0 - h, sol.delta1)) / (2 * h);
        const double g1 = (f(sol.delta0, sol.delta1 + h) - f(sol.delta0, sol.delta1 - h)) / (2 * h);
        const double curv = (f(sol.delta0 + h, sol.delta1) - 2 * f0 + f(sol.delta0 - h, sol.delta1)) / (h * h);
        EXPECT_LT(std::abs(g0), 1e-6 * std::max(1.0, curv)) << p;
        EXPECT_LT(std::abs(g1), 1e-6 * std::max(1.0, curv)) << p;
        for (double d0 : {-0.2, 0.2})
            for (double d1 : {-0.2, 0.2}) EXPECT_GE(f(sol.delta0 + d0, sol.delta1 + d1), f0);
        EXPECT_NEAR(sol.l2_error, f0, 1e-6 * std::max(1.0, f0));
    }
}

TEST(ReduceG1, DegenerateTangentFallsBack) {
    BezierSegment<2> seg{4, {{{0, 0}}, {{0, 0}}, {{1, 1}}, {{2, 0}}, {{3, 0}}}, {0, 1}};
    const auto sol = reduce_to_cubic_g1(seg);
    ASSERT_TRUE(sol.fallback.has_value());
    EXPECT_EQ(*sol.fallback, ErrorCode::DegenerateTangent);
    EXPECT_EQ(sol.delta0, 1.0);
    EXPECT_EQ(sol.delta1, 1.0);
}

TEST(ReduceG1, RejectsLowDegree) {
    Rng rng(46);
    EXPECT_THROW((void)reduce_to_cubic_g1(random_bezier<2>(rng, 3)), Error);
}

TEST(MeasureError, MatchesIndependentSampling) {
    Rng rng(47);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 30; ++k) {
        const int p = 4 + k % 12;  // crosses the power-form cutoff
        auto src = random_bezier<3>(rng, p);
        src.source = {0.2, 0.8};
        CubicApproxSegment<3> c;
        c.control_points = reduce_to_cubic_g1(src).cubic;
        double a = u(rng), b = u(rng);
        if (a > b) std::swap(a, b);
        if (b - a < 1e-3) continue;
        c.source = {0.2 + 0.6 * a, 0.2 + 0.6 * b};
        const std::vector<Point<3>> whole(c.control_points.begin(), c.control_points.end());
        const auto part = restrict_bernstein(std::span<const Point<3>>(whole), a, b);
        std::copy(part.begin(), part.end(), c.control_points.begin());
        const auto scan = measure_l1_error(c, src, 256);
        EXPECT_NEAR(scan.max_error, sampled_deviation(c, src, 255), 1e-12 + 1e-9 * scan.max_error);
        ASSERT_FALSE(scan.argmax.empty());
        for (double z : scan.argmax) {
            const double t = local_to_global(c.source, z);
            const auto d = distance(bernstein_sum<3>(c.control_points, z),
                                    bernstein_sum<3>(src.control_points, (t - 0.2) / 0.6));
            EXPECT_NEAR(d, scan.max_error, 1e-11);
        }
    }
}

TEST(Subdivide, SnapsToOriginal) {
    Rng rng(48);
    const auto src = random_bezier<2>(rng, 6);
    CubicApproxSegment<2> c;
    c.control_points = reduce_to_cubic_g1(src).cubic;
    c.source = src.source;
    const std::vector<double> zs{0.25, 0.6};
    const auto kids = subdivide_and_modify(c, src, std::span<const double>(zs));
    ASSERT_EQ(kids.size(), 3u);
    EXPECT_EQ(kids[0].control_points[0], c.control_points[0]);
    EXPECT_EQ(kids[2].control_points[3], c.control_points[3]);
    for (std::size_t k = 0; k + 1 < kids.size(); ++k) {
        EXPECT_EQ(kids[k].control_points[3], kids[k + 1].control_points[0]);
        EXPECT_EQ(kids[k].source.b, kids[k + 1].source.a);
        EXPECT_NEAR(distance(kids[k].control_points[3], bernstein_sum<2>(src.control_points, zs[k])), 0.0, 1e-14);
    }
    const std::vector<double> bad{1.0};
    EXPECT_THROW((void)subdivide_and_modify(c, src, std::span<const double>(bad)), Error);
}

TEST(Approximate, LowDegreesPassThroughExactly) {
    const auto quad = random_segments<2>(49, 2, 6);
    const auto cub = random_segments<2>(50, 3, 6);
    for (const auto* segs : {&quad, &cub}) {
        const auto r = approximate_error_controlled(*segs, 1e-12);
        ASSERT_EQ(r.segments.size(), segs->size());
        for (std::size_t i = 0; i < segs->size(); ++i) {
            EXPECT_EQ(r.owner[i], i);
            EXPECT_LT(sampled_deviation(r.segments[i], (*segs)[i], 200), 1e-14);
        }
    }
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(approximate_error_controlled(cub, 1e-12).segments[0].control_points[i], cub[0].control_points[i]);
}

TEST(Approximate, UnboundedToleranceKeepsOnePiecePerSegment) {
    const auto segs = random_segments<3>(51, 7, 15);
    const auto r = approximate_error_controlled(segs, std::numeric_limits<double>::infinity());
    ASSERT_EQ(r.segments.size(), segs.size());
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const auto sol = reduce_to_cubic_g1(segs[i]);
        for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(r.segments[i].control_points[k], sol.cubic[k]);
    }
}

TEST(Approximate, ToleranceTilingAndContinuity) {
    for (const double alpha : {1e-2, 1e-3}) {
        const auto segs = random_segments<2>(52, 5, 12);
        ApproxOptions opt;
        opt.keep_levels = true;
        const auto r = approximate_error_controlled(segs, alpha, opt);
        ASSERT_EQ(r.segments.size(), r.owner.size());
        std::size_t i = 0;
        for (std::size_t s = 0; s < segs.size(); ++s) {
            ASSERT_LT(i, r.segments.size());
            EXPECT_EQ(r.owner[i], s);
            EXPECT_EQ(r.segments[i].source.a, segs[s].source.a);
            for (; i + 1 < r.segments.size() && r.owner[i + 1] == s; ++i) {
                EXPECT_EQ(r.segments[i].source.b, r.segments[i + 1].source.a);
                EXPECT_EQ(r.segments[i].control_points[3], r.segments[i + 1].control_points[0]);
            }
            EXPECT_EQ(r.segments[i].source.b, segs[s].source.b);
            ++i;
        }
        EXPECT_EQ(i, r.segments.size());
        for (std::size_t k = 0; k < r.segments.size(); ++k) {
            const double dev = sampled_deviation(r.segments[k], segs[r.owner[k]], 1023);
            EXPECT_LE(dev, alpha * (1 + 1e-9));
            EXPECT_NEAR(dev, r.segments[k].measured_error, 1e-12);
        }
        for (const auto& level : r.levels) {
            ASSERT_EQ(level.child_prefix_sum.size(), level.compaction_keys.size() + 1);
            EXPECT_EQ(level.child_prefix_sum.front(), 0u);
            for (std::size_t j = 0; j + 1 < level.child_prefix_sum.size(); ++j)
                EXPECT_GE(level.child_prefix_sum[j + 1], level.child_prefix_sum[j] + 2);
        }
        for (std::size_t d = 0; d + 1 < r.levels.size(); ++d)
            EXPECT_EQ(r.levels[d + 1].segments.size(), r.levels[d].child_prefix_sum.back());
    }
}

TEST(Approximate, TighterToleranceNeverCoarser) {
    const auto segs = random_segments<2>(53, 6, 10);
    std::size_t prev = 0;
    for (const double alpha : {1e-1, 1e-2, 1e-3}) {
        const auto n = approximate_error_controlled(segs, alpha).segments.size();
        EXPECT_GE(n, prev);
        prev = n;
    }
}

TEST(Approximate, WorkerCountDoesNotChangeBits) {
    const auto segs = random_segments<3>(54, 6, 30);
    ApproxOptions one, many;
    many.workers = 8;
    many.batch_cap = 3;
    const auto a = approximate_error_controlled(segs, 1e-3, one);
    const auto b = approximate_error_controlled(segs, 1e-3, many);
    ASSERT_EQ(a.segments.size(), b.segments.size());
    for (std::size_t i = 0; i < a.segments.size(); ++i) {
        EXPECT_EQ(0, std::memcmp(a.segments[i].control_points.data(), b.segments[i].control_points.data(), sizeof(Point<3>) * 4));
        EXPECT_EQ(a.segments[i].source.a, b.segments[i].source.a);
    }
}

TEST(Approximate, BadToleranceAndDepthLimit) {
    const auto segs = random_segments<2>(55, 6, 8);
    EXPECT_THROW((void)approximate_error_controlled(segs, 0.0), Error);
    EXPECT_THROW((void)approximate_error_controlled(segs, -1.0), Error);
    ApproxOptions opt;
    opt.max_depth = 0;
    try {
        (void)approximate_error_controlled(segs, 1e-9, opt);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DepthExceeded);
    }
}
