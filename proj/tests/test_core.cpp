#include <gtest/gtest.h>

#include <random>

#include "mrep/core.hpp"
#include "mrep/random.hpp"

using namespace mrep;

namespace {

BSplineCurve<2> cubic_single_span() {
    BSplineCurve<2> c;
    c.degree = 3;
    c.knots = {0, 0, 0, 0, 1, 1, 1, 1};
    c.control_points = {{{0, 0}}, {{1, 2}}, {{2, 2}}, {{3, 0}}};
    return c;
}

ErrorCode code_of(const auto& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::IoError;
}

}  // namespace

TEST(Validate, SingleSpanCubicIsAccepted) { EXPECT_NO_THROW(validate_curve(cubic_single_span())); }

TEST(Validate, DegreeFourWithTenKnotsAndFivePoints) {
    BSplineCurve<3> c;
    c.degree = 4;
    c.knots = {0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
    for (int i = 0; i < 5; ++i) c.control_points.push_back({{0.1 * i, 0.2, 0.3}});
    EXPECT_NO_THROW(validate_curve(c));
}

TEST(Validate, DecreasingKnotPair) {
    auto c = cubic_single_span();
    c.knots = {0, 0, 0, 0, 0.5, 0.4, 1, 1, 1, 1};
    c.control_points.resize(6, {{1, 1}});
    EXPECT_EQ(code_of([&] { validate_curve(c); }), ErrorCode::NonMonotoneKnots);
}

TEST(Validate, UnclampedStart) {
    auto c = cubic_single_span();
    c.knots = {0, 0, 0, 0.1, 1, 1, 1, 1};
    EXPECT_EQ(code_of([&] { validate_curve(c); }), ErrorCode::NotClamped);
}

TEST(Validate, WrongPointCount) {
    auto c = cubic_single_span();
    c.control_points.pop_back();
    EXPECT_EQ(code_of([&] { validate_curve(c); }), ErrorCode::CountMismatch);
}

TEST(Validate, DegreeLimits) {
    auto c = cubic_single_span();
    c.degree = 0;
    EXPECT_EQ(code_of([&] { validate_curve(c); }), ErrorCode::DegreeOutOfRange);

    BSplineCurve<2> big;
    big.degree = 32;
    big.knots.assign(33, 0.0);
    big.knots.insert(big.knots.end(), 33, 1.0);
    big.control_points.resize(33);
    EXPECT_EQ(code_of([&] { validate_curve(big); }), ErrorCode::DegreeOutOfRange);
}

TEST(Validate, InteriorMultiplicityAboveDegreePlusOne) {
    BSplineCurve<2> c;
    c.degree = 1;
    c.knots = {0, 0, 0.5, 0.5, 0.5, 1, 1};
    c.control_points.resize(5, {{0, 0}});
    EXPECT_EQ(code_of([&] { validate_curve(c); }), ErrorCode::ExcessMultiplicity);
}

TEST(Interval, LocalToGlobalExamples) {
    EXPECT_DOUBLE_EQ(local_to_global({0.0, 1.0}, 0.25), 0.25);
    EXPECT_DOUBLE_EQ(local_to_global({2.0, 4.0}, 0.5), 3.0);
    EXPECT_EQ(local_to_global({0.2, 0.5}, 1.0), 0.5);
}

TEST(Interval, OutsideUnitRangeIsDomainError) {
    EXPECT_EQ(code_of([] { local_to_global({0, 1}, 1.5); }), ErrorCode::DomainError);
    EXPECT_EQ(code_of([] { local_to_global({0, 1}, -1e-9); }), ErrorCode::DomainError);
}

TEST(Interval, RoundTripProperty) {
    Rng rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0), a(-10.0, 10.0), w(1e-3, 5.0);
    for (int i = 0; i < 10000; ++i) {
        const double lo = a(rng);
        const Interval iv{lo, lo + w(rng)};
        const double v = u(rng);
        EXPECT_NEAR(global_to_local(iv, local_to_global(iv, v)), v, 1e-14 * std::max(1.0, std::abs(lo) / iv.width()));
    }
}

TEST(Interval, SubIntervalKeepsStoredEnds) {
    const Interval iv{0.3, 0.9};
    const auto left = sub_interval(iv, 0.0, 0.4);
    const auto right = sub_interval(iv, 0.4, 1.0);
    EXPECT_EQ(left.b, right.a);
    EXPECT_EQ(left.a, iv.a);
    EXPECT_EQ(right.b, iv.b);
}

TEST(Point, Arithmetic) {
    const Point<3> a{{1, 2, 3}}, b{{4, 6, 3}};
    EXPECT_DOUBLE_EQ(distance(a, b), 5.0);
    EXPECT_DOUBLE_EQ(dot(a, b), 4 + 12 + 9);
    EXPECT_EQ(a + b - b, a);
    EXPECT_DOUBLE_EQ(bbox_diagonal(std::vector<Point<3>>{a, b}), 5.0);
}
