#include <gtest/gtest.h>

#include <random>

#include "mrep/distance.hpp"
#include "mrep/oracle.hpp"
#include "mrep/random.hpp"

using namespace mrep;

namespace {

Point<2> cubic_at(const std::array<Point<2>, 4>& p, double t) {
    const double s = 1 - t;
    return p[0] * (s * s * s) + p[1] * (3 * s * s * t) + p[2] * (3 * s * t * t) + p[3] * (t * t * t);
}

// Ascending coefficients of prod (t - r_i), times `lead`.
std::vector<double> from_roots(const std::vector<double>& roots, double lead) {
    std::vector<double> c{lead};
    for (double r : roots) {
        std::vector<double> next(c.size() + 1, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i + 1] += c[i];
            next[i] -= r * c[i];
        }
        c = next;
    }
    return c;
}

}  // namespace

TEST(DistancePolys, MatchFiniteDifferences) {
    Rng rng(61);
    for (int k = 0; k < 30; ++k) {
        const std::array<Point<2>, 4> c{random_point<2>(rng), random_point<2>(rng), random_point<2>(rng), random_point<2>(rng)};
        const auto q = random_point<2>(rng, -0.5, 1.5);
        const auto polys = distance_polys(c, q);
        EXPECT_EQ(polys.e.degree, 5);
        EXPECT_EQ(polys.e_prime.degree, 4);
        auto d2 = [&](double t) {
            const auto d = cubic_at(c, t) - q;
            return dot(d, d);
        };
        const double h = 1e-5;
        for (int s = 1; s < 20; ++s) {
            const double t = s / 20.0;
            EXPECT_NEAR(polys.e(t), (d2(t + h) - d2(t - h)) / (2 * h), 1e-7);
            EXPECT_NEAR(polys.e_prime(t), (polys.e(t + h) - polys.e(t - h)) / (2 * h), 1e-6);
        }
        const auto de = polys.e.derivative();
        for (int i = 0; i <= 4; ++i) EXPECT_NEAR(de.c[static_cast<std::size_t>(i)], polys.e_prime.c[static_cast<std::size_t>(i)], 1e-12);
    }
}

TEST(EffectiveDegree, DropsNegligibleLeads) {
    EXPECT_EQ(effective_degree(std::vector<double>{0, 0, 0}), -1);
    EXPECT_EQ(effective_degree(std::vector<double>{1, 2, 1e-14}), 1);
    EXPECT_EQ(effective_degree(std::vector<double>{1, 2, 3, 4, 5}), 4);
    EXPECT_EQ(effective_degree(std::vector<double>{3}), 0);
}

TEST(SolveQuartic, KnownRoots) {
    const auto r = solve_quartic(from_roots({0.1, 0.35, 0.6, 0.95}, 2.0));
    ASSERT_EQ(r.size(), 4u);
    EXPECT_NEAR(r[0], 0.1, 1e-12);
    EXPECT_NEAR(r[1], 0.35, 1e-12);
    EXPECT_NEAR(r[2], 0.6, 1e-12);
    EXPECT_NEAR(r[3], 0.95, 1e-12);

    // Roots outside [0,1] are discarded.
    const auto out = solve_quartic(from_roots({-0.5, 0.4, 1.5, 3.0}, 1.0));
    ASSERT_EQ(out.size(), 1u);
    EXPECT_NEAR(out[0], 0.4, 1e-12);

    // No real roots at all.
    EXPECT_TRUE(solve_quartic(std::vector<double>{1, 0, 1, 0, 1}).empty());
}

TEST(SolveQuartic, LowerEffectiveDegrees) {
    const auto cubic = solve_quartic(std::vector<double>{-0.006, 0.11, -0.6, 1.0, 0.0});  // (t-.1)(t-.2)(t-.3)
    ASSERT_EQ(cubic.size(), 3u);
    EXPECT_NEAR(cubic[0], 0.1, 1e-12);
    EXPECT_NEAR(cubic[2], 0.3, 1e-12);
    const auto quad = solve_quartic(std::vector<double>{0.25, -1.0, 1.0});
    ASSERT_EQ(quad.size(), 1u);  // exact double root 0.5
    EXPECT_EQ(quad[0], 0.5);
    const auto lin = solve_quartic(std::vector<double>{-0.25, 1.0});
    ASSERT_EQ(lin.size(), 1u);
    EXPECT_DOUBLE_EQ(lin[0], 0.25);
    EXPECT_TRUE(solve_quartic(std::vector<double>{0, 0, 0, 0, 0}).empty());
    EXPECT_TRUE(solve_quartic(std::vector<double>{2}).empty());
    EXPECT_THROW((void)real_roots_closed_form(std::vector<double>{1, 1, 1, 1, 1, 1}), Error);
}

TEST(SolveQuartic, AgreesWithBisectionOracle) {
    Rng rng(62);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int compared = 0;
    for (int k = 0; k < 3000; ++k) {
        std::vector<double> c(5);
        for (auto& v : c) v = u(rng);
        const auto ours = solve_quartic(c);
        const auto ref = oracle::bisection_roots(c);
        // Skip near-tangent cases where the count itself is ill-conditioned.
        bool touchy = false;
        Poly p;
        p.degree = 4;
        std::copy(c.begin(), c.end(), p.c.begin());
        const Poly dp = p.derivative();
        for (double r : ref) touchy |= std::abs(dp(r)) < 1e-6;
        for (double r : ours) touchy |= std::abs(dp(r)) < 1e-6;
        if (touchy) continue;
        ++compared;
        ASSERT_EQ(ours.size(), ref.size()) << k;
        for (std::size_t i = 0; i < ours.size(); ++i) EXPECT_NEAR(ours[i], ref[i], 1e-9);
    }
    EXPECT_GT(compared, 2900);
}

TEST(SolveQuartic, NewtonReferenceFindsSameRoots) {
    const auto c = from_roots({0.2, 0.7}, 1.0);
    const auto r = newton_quartic_roots(c);
    ASSERT_EQ(r.size(), 2u);
    EXPECT_NEAR(r[0], 0.2, 1e-12);
    EXPECT_NEAR(r[1], 0.7, 1e-12);
}

TEST(MonotoneSplit, PiecesAreMonotoneAndTile) {
    Rng rng(63);
    int split = 0;
    for (int k = 0; k < 200; ++k) {
        CubicApproxSegment<2> seg;
        for (auto& p : seg.control_points) p = random_point<2>(rng);
        seg.source = {0.25, 0.75};
        const auto q = random_point<2>(rng, -0.5, 1.5);
        const auto pieces = monotonic_split(seg, q);
        ASSERT_FALSE(pieces.empty());
        split += pieces.size() > 1;
        EXPECT_EQ(pieces.front().source.a, 0.25);
        EXPECT_EQ(pieces.back().source.b, 0.75);
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            EXPECT_TRUE(is_monotone_piece(pieces[i], q)) << k << " piece " << i;
            if (i + 1 < pieces.size()) {
                EXPECT_EQ(pieces[i].source.b, pieces[i + 1].source.a);
                EXPECT_NEAR(distance(pieces[i].control_points[3], pieces[i + 1].control_points[0]), 0.0, 1e-14);
            }
        }
    }
    EXPECT_GT(split, 20);
}

TEST(MonotoneSplit, DetectsNonMonotonePiece) {
    // An S-shaped cubic seen from above: E' changes sign.
    CubicApproxSegment<2> seg;
    seg.control_points = {{{{0, 0}}, {{1, 3}}, {{2, -3}}, {{3, 0}}}};
    seg.source = {0, 1};
    const Point<2> q{{1.5, 5.0}};
    const auto breaks = monotone_breaks(distance_polys(seg.control_points, q).e_prime);
    ASSERT_GT(breaks.size(), 2u);
    EXPECT_FALSE(is_monotone_piece(seg, q));
}
