#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "mrep/decompose.hpp"
#include "mrep/io.hpp"
#include "mrep/random.hpp"
#include "mrep/reduce.hpp"

using namespace mrep;
namespace fs = std::filesystem;

namespace {

class TempDir : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("mrep_io_" + std::to_string(::getpid()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    [[nodiscard]] std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

std::string message_of(const auto& fn) {
    try {
        fn();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ParseError);
        return e.what();
    }
    ADD_FAILURE() << "no error raised";
    return {};
}

}  // namespace

using IoFiles = TempDir;

TEST_F(IoFiles, CurveRoundTripIsExact) {
    Rng rng(81);
    const auto c = random_clamped_curve<3>(rng, 4, 9);
    io::write_curves<3>(path("c.json"), {c}, false);
    bool batch = true;
    const auto back = io::read_curves<3>(path("c.json"), &batch);
    EXPECT_FALSE(batch);
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0].degree, c.degree);
    EXPECT_EQ(back[0].knots, c.knots);
    EXPECT_EQ(back[0].control_points, c.control_points);
    EXPECT_EQ(io::document_dimension(io::parse_json(io::read_text(path("c.json")), "c"), "c"), 3);
}

TEST_F(IoFiles, BatchRoundTrip) {
    Rng rng(82);
    std::vector<BSplineCurve<2>> cs{random_clamped_curve<2>(rng, 2, 5), random_clamped_curve<2>(rng, 7, 20)};
    io::write_curves(path("b.json"), cs, true);
    bool batch = false;
    const auto back = io::read_curves<2>(path("b.json"), &batch);
    EXPECT_TRUE(batch);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1].control_points, cs[1].control_points);
}

TEST_F(IoFiles, PointsRoundTripCsvAndJson) {
    Rng rng(83);
    const auto pts = random_points<2>(rng, 50, -1.0, 1.0);
    io::write_points(path("p.csv"), pts);
    io::write_points(path("p.json"), pts);
    EXPECT_EQ(io::read_points<2>(path("p.csv")), pts);
    EXPECT_EQ(io::read_points<2>(path("p.json")), pts);
    EXPECT_EQ(io::points_file_dimension(path("p.csv")), 2);
    EXPECT_EQ(io::points_file_dimension(path("p.json")), 2);
}

TEST(IoFormats, SegmentsAndCubicsRoundTrip) {
    Rng rng(84);
    const auto segs = decompose_to_bezier(random_clamped_curve<2>(rng, 5, 9));
    const auto back = io::segments_from_json<2>(io::json::parse(io::segments_to_json(segs).dump()), "s");
    ASSERT_EQ(back.size(), segs.size());
    for (std::size_t i = 0; i < segs.size(); ++i) {
        EXPECT_EQ(back[i].control_points, segs[i].control_points);
        EXPECT_EQ(back[i].source.a, segs[i].source.a);
        EXPECT_EQ(back[i].source.b, segs[i].source.b);
    }
    const auto cubics = approximate_error_controlled(segs, 1e-3).segments;
    const auto cb = io::cubics_from_json<2>(io::json::parse(io::cubics_to_json(cubics).dump()), "c");
    ASSERT_EQ(cb.size(), cubics.size());
    for (std::size_t i = 0; i < cubics.size(); ++i) {
        EXPECT_EQ(cb[i].control_points, cubics[i].control_points);
        EXPECT_EQ(cb[i].measured_error, cubics[i].measured_error);
    }
}

TEST(IoFormats, ResultLinesRoundTrip) {
    std::vector<io::ResultRecord<2>> recs(3);
    recs[0] = {0, 0.25, {{0.1, 0.2}}, 0.5, std::nullopt, std::nullopt};
    recs[1] = {1, 0.75, {{1.0 / 3, 2.0 / 3}}, 1e-17, 1.5e-17, std::nullopt};
    recs[2] = {2, 0.0, {{0, 0}}, 0.0, std::nullopt, std::string("point is 3 from the curve")};
    std::string text;
    for (const auto& r : recs) text += io::result_to_json_line(r) + "\n";
    EXPECT_NE(text.find("\"disagreement\""), std::string::npos);
    EXPECT_EQ(io::results_from_json_lines<2>(text, "r"), recs);
}

TEST(IoErrors, MalformedJsonReportsLineAndColumn) {
    const std::string text = "{\n  \"degree\": 3,\n  \"knots\": [0, 0,, 1]\n}\n";
    const auto msg = message_of([&] { (void)io::parse_json(text, "curve.json"); });
    EXPECT_NE(msg.find("curve.json:3:"), std::string::npos) << msg;
}

TEST(IoErrors, LineColumnHelper) {
    const std::string text = "ab\ncd\n\nef";
    EXPECT_EQ(io::line_col(text, 0), (std::pair<std::size_t, std::size_t>{1, 1}));
    EXPECT_EQ(io::line_col(text, 4), (std::pair<std::size_t, std::size_t>{2, 2}));
    EXPECT_EQ(io::line_col(text, 7), (std::pair<std::size_t, std::size_t>{4, 1}));
}

TEST(IoErrors, SchemaErrorsNameThePointer) {
    const auto missing = message_of([] {
        (void)io::curves_from_json<2>(io::json::parse(R"({"degree": 1, "control_points": [[0,0],[1,1]]})"), "c.json");
    });
    EXPECT_NE(missing.find("missing field \"knots\""), std::string::npos) << missing;

    const auto bad_point = message_of([] {
        (void)io::curves_from_json<2>(
            io::json::parse(R"([{"degree": 1, "knots": [0,0,1,1], "control_points": [[0,0],[1,"x"]]}])"), "c.json");
    });
    EXPECT_NE(bad_point.find("/0/control_points/1/1"), std::string::npos) << bad_point;

    const auto wrong_dim = message_of([] {
        (void)io::points_from_json<3>(io::json::parse(R"({"points": [[0,0,0],[1,1]]})"), "p.json");
    });
    EXPECT_NE(wrong_dim.find("/points/1"), std::string::npos) << wrong_dim;

    const auto degree = message_of([] {
        (void)io::curves_from_json<2>(io::json::parse(R"({"degree": 1.5, "knots": [], "control_points": []})"), "c");
    });
    EXPECT_NE(degree.find("/degree"), std::string::npos) << degree;
}

TEST(IoErrors, CsvCellPositions) {
    const auto bad = message_of([] { (void)io::points_from_csv<2>("0,1\n\n2,abc\n", "q.csv"); });
    EXPECT_NE(bad.find("q.csv:3:3"), std::string::npos) << bad;
    const auto extra = message_of([] { (void)io::points_from_csv<2>("0,1,2\n", "q.csv"); });
    EXPECT_NE(extra.find("q.csv:1:5"), std::string::npos) << extra;
    const auto short_row = message_of([] { (void)io::points_from_csv<3>("0,1\n", "q.csv"); });
    EXPECT_NE(short_row.find("expected 3 columns"), std::string::npos) << short_row;
    EXPECT_EQ(io::points_from_csv<2>("1.5, 2\r\n", "q.csv"), (std::vector<Point<2>>{{{1.5, 2}}}));
}

TEST(IoErrors, MissingFile) {
    try {
        (void)io::read_text("/nonexistent/dir/file.json");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IoError);
    }
}
