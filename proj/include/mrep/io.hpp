#pragma once

// File formats.
//
//   curve:    {"degree": p, "knots": [...], "control_points": [[x, y(, z)], ...]}
//             or an array of such objects (batch)
//   points:   {"points": [[...], ...]} or CSV with one point per line
//   segments: {"segments": [{"degree": p, "control_points": [...], "interval": [a, b]}, ...]}
//   cubics:   {"segments": [{"control_points": [4 points], "interval": [a, b], "error": e}, ...]}
//   results:  JSON lines {"query_index", "t_star", "foot", "distance"}
//
// Syntax errors report file:line:col; schema errors report file and JSON pointer.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mrep/core.hpp"

namespace mrep::io {

using json = nlohmann::json;

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, path + ": cannot open for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, path + ": cannot open for writing");
    out << text;
    if (!out) throw Error(ErrorCode::IoError, path + ": write failed");
}

/// 1-based line and column of byte offset `pos`.
inline std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t pos) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < pos && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

inline json parse_json(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t pos = e.byte > 0 ? e.byte - 1 : 0;
        const auto [line, col] = line_col(text, pos);
        throw Error(ErrorCode::ParseError,
                    source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
    }
}

namespace detail {

[[noreturn]] inline void schema_error(const std::string& source, const std::string& where, const std::string& what) {
    throw Error(ErrorCode::ParseError, source + ": " + (where.empty() ? "/" : where) + ": " + what);
}

inline double number(const json& j, const std::string& source, const std::string& where) {
    if (!j.is_number()) schema_error(source, where, "expected a number");
    return j.get<double>();
}

inline const json& field(const json& obj, const char* key, const std::string& source, const std::string& where) {
    if (!obj.is_object()) schema_error(source, where, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) schema_error(source, where, std::string("missing field \"") + key + "\"");
    return *it;
}

template <int Dim>
Point<Dim> point(const json& j, const std::string& source, const std::string& where) {
    if (!j.is_array() || j.size() != static_cast<std::size_t>(Dim)) {
        schema_error(source, where, "expected a point with " + std::to_string(Dim) + " coordinates");
    }
    Point<Dim> p;
    for (int i = 0; i < Dim; ++i) p[i] = number(j[i], source, where + "/" + std::to_string(i));
    return p;
}

template <int Dim>
std::vector<Point<Dim>> points(const json& j, const std::string& source, const std::string& where) {
    if (!j.is_array()) schema_error(source, where, "expected an array of points");
    std::vector<Point<Dim>> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(point<Dim>(j[i], source, where + "/" + std::to_string(i)));
    return out;
}

template <int Dim>
json point_json(const Point<Dim>& p) {
    json a = json::array();
    for (int i = 0; i < Dim; ++i) a.push_back(p[i]);
    return a;
}

template <int Dim>
json points_json(const std::vector<Point<Dim>>& pts) {
    json a = json::array();
    for (const auto& p : pts) a.push_back(point_json(p));
    return a;
}

inline Interval interval(const json& j, const std::string& source, const std::string& where) {
    if (!j.is_array() || j.size() != 2) schema_error(source, where, "expected [a, b]");
    return {number(j[0], source, where + "/0"), number(j[1], source, where + "/1")};
}

}  // namespace detail

/// Coordinate count of the first control point / point in a curve or points document.
inline int document_dimension(const json& doc, const std::string& source) {
    const json* first = nullptr;
    if (doc.is_array() && !doc.empty() && doc[0].is_object() && doc[0].contains("control_points")) {
        first = &doc[0]["control_points"];
    } else if (doc.is_object() && doc.contains("control_points")) {
        first = &doc["control_points"];
    } else if (doc.is_object() && doc.contains("points")) {
        first = &doc["points"];
    } else if (doc.is_object() && doc.contains("segments") && doc["segments"].is_array() && !doc["segments"].empty()) {
        first = &doc["segments"][0]["control_points"];
    }
    if (!first || !first->is_array() || first->empty() || !(*first)[0].is_array()) {
        detail::schema_error(source, "", "cannot infer the point dimension");
    }
    return static_cast<int>((*first)[0].size());
}

// ---------------------------------------------------------------------------
// Curves
// ---------------------------------------------------------------------------

template <int Dim>
BSplineCurve<Dim> curve_from_json(const json& j, const std::string& source, const std::string& where = "") {
    BSplineCurve<Dim> c;
    const json& deg = detail::field(j, "degree", source, where);
    if (!deg.is_number_integer()) detail::schema_error(source, where + "/degree", "expected an integer");
    c.degree = deg.get<int>();
    const json& knots = detail::field(j, "knots", source, where);
    if (!knots.is_array()) detail::schema_error(source, where + "/knots", "expected an array");
    for (std::size_t i = 0; i < knots.size(); ++i) {
        c.knots.push_back(detail::number(knots[i], source, where + "/knots/" + std::to_string(i)));
    }
    c.control_points = detail::points<Dim>(detail::field(j, "control_points", source, where), source,
                                           where + "/control_points");
    return c;
}

template <int Dim>
json curve_to_json(const BSplineCurve<Dim>& c) {
    return {{"degree", c.degree}, {"knots", c.knots}, {"control_points", detail::points_json(c.control_points)}};
}

/// One curve or a batch; `batch` reports which form the document used.
template <int Dim>
std::vector<BSplineCurve<Dim>> curves_from_json(const json& doc, const std::string& source, bool* batch = nullptr) {
    std::vector<BSplineCurve<Dim>> out;
    if (doc.is_array()) {
        for (std::size_t i = 0; i < doc.size(); ++i) out.push_back(curve_from_json<Dim>(doc[i], source, "/" + std::to_string(i)));
    } else {
        out.push_back(curve_from_json<Dim>(doc, source));
    }
    if (batch) *batch = doc.is_array();
    return out;
}

template <int Dim>
std::vector<BSplineCurve<Dim>> read_curves(const std::string& path, bool* batch = nullptr) {
    return curves_from_json<Dim>(parse_json(read_text(path), path), path, batch);
}

template <int Dim>
void write_curves(const std::string& path, const std::vector<BSplineCurve<Dim>>& curves, bool batch) {
    json doc;
    if (batch) {
        doc = json::array();
        for (const auto& c : curves) doc.push_back(curve_to_json(c));
    } else {
        doc = curve_to_json(curves.at(0));
    }
    write_text(path, doc.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Segments
// ---------------------------------------------------------------------------

template <int Dim>
json segments_to_json(const std::vector<BezierSegment<Dim>>& segs) {
    json arr = json::array();
    for (const auto& s : segs) {
        arr.push_back({{"degree", s.degree},
                       {"control_points", detail::points_json(s.control_points)},
                       {"interval", {s.source.a, s.source.b}}});
    }
    return {{"segments", arr}};
}

template <int Dim>
std::vector<BezierSegment<Dim>> segments_from_json(const json& doc, const std::string& source,
                                                   const std::string& where = "") {
    const json& arr = detail::field(doc, "segments", source, where);
    if (!arr.is_array()) detail::schema_error(source, where + "/segments", "expected an array");
    std::vector<BezierSegment<Dim>> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string at = where + "/segments/" + std::to_string(i);
        BezierSegment<Dim> s;
        s.degree = detail::field(arr[i], "degree", source, at).get<int>();
        s.control_points = detail::points<Dim>(detail::field(arr[i], "control_points", source, at), source,
                                               at + "/control_points");
        s.source = detail::interval(detail::field(arr[i], "interval", source, at), source, at + "/interval");
        out.push_back(std::move(s));
    }
    return out;
}

template <int Dim>
json cubics_to_json(const std::vector<CubicApproxSegment<Dim>>& segs) {
    json arr = json::array();
    for (const auto& s : segs) {
        json pts = json::array();
        for (const auto& p : s.control_points) pts.push_back(detail::point_json(p));
        arr.push_back({{"control_points", pts}, {"interval", {s.source.a, s.source.b}}, {"error", s.measured_error}});
    }
    return {{"segments", arr}};
}

template <int Dim>
std::vector<CubicApproxSegment<Dim>> cubics_from_json(const json& doc, const std::string& source,
                                                      const std::string& where = "") {
    const json& arr = detail::field(doc, "segments", source, where);
    if (!arr.is_array()) detail::schema_error(source, where + "/segments", "expected an array");
    std::vector<CubicApproxSegment<Dim>> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string at = where + "/segments/" + std::to_string(i);
        const auto pts = detail::points<Dim>(detail::field(arr[i], "control_points", source, at), source,
                                             at + "/control_points");
        if (pts.size() != 4) detail::schema_error(source, at + "/control_points", "expected 4 control points");
        CubicApproxSegment<Dim> s;
        std::copy(pts.begin(), pts.end(), s.control_points.begin());
        s.source = detail::interval(detail::field(arr[i], "interval", source, at), source, at + "/interval");
        s.measured_error = detail::number(detail::field(arr[i], "error", source, at), source, at + "/error");
        out.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Points
// ---------------------------------------------------------------------------

inline bool is_csv_path(const std::string& path) {
    return path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
}

/// Number of comma-separated fields on the first non-empty CSV line.
inline int csv_dimension(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        return static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
    }
    return 0;
}

template <int Dim>
std::vector<Point<Dim>> points_from_csv(const std::string& text, const std::string& source) {
    std::vector<Point<Dim>> out;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        Point<Dim> p;
        std::size_t start = 0;
        int field = 0;
        for (;;) {
            const std::size_t comma = line.find(',', start);
            const std::string cell = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
            if (field >= Dim) {
                throw Error(ErrorCode::ParseError, source + ":" + std::to_string(line_no) + ":" +
                                                       std::to_string(start + 1) + ": too many columns");
            }
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(cell, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || cell.find_first_not_of(" \t", used) != std::string::npos) {
                throw Error(ErrorCode::ParseError, source + ":" + std::to_string(line_no) + ":" +
                                                       std::to_string(start + 1) + ": not a number");
            }
            p[field++] = v;
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (field != Dim) {
            throw Error(ErrorCode::ParseError, source + ":" + std::to_string(line_no) + ":1: expected " +
                                                   std::to_string(Dim) + " columns");
        }
        out.push_back(p);
    }
    return out;
}

template <int Dim>
std::string points_to_csv(const std::vector<Point<Dim>>& pts) {
    std::string out;
    char buf[32];
    for (const auto& p : pts) {
        for (int i = 0; i < Dim; ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", p[i]);
            if (i) out += ',';
            out += buf;
        }
        out += '\n';
    }
    return out;
}

template <int Dim>
json points_to_json(const std::vector<Point<Dim>>& pts) {
    return {{"points", detail::points_json(pts)}};
}

template <int Dim>
std::vector<Point<Dim>> points_from_json(const json& doc, const std::string& source) {
    return detail::points<Dim>(detail::field(doc, "points", source, ""), source, "/points");
}

/// Dimension of a points file (JSON or CSV by extension).
inline int points_file_dimension(const std::string& path) {
    const std::string text = read_text(path);
    if (is_csv_path(path)) return csv_dimension(text);
    return document_dimension(parse_json(text, path), path);
}

template <int Dim>
std::vector<Point<Dim>> read_points(const std::string& path) {
    const std::string text = read_text(path);
    if (is_csv_path(path)) return points_from_csv<Dim>(text, path);
    return points_from_json<Dim>(parse_json(text, path), path);
}

template <int Dim>
void write_points(const std::string& path, const std::vector<Point<Dim>>& pts) {
    if (is_csv_path(path)) write_text(path, points_to_csv(pts));
    else write_text(path, points_to_json(pts).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

template <int Dim>
struct ResultRecord {
    std::size_t query_index = 0;
    double t_star = 0.0;
    Point<Dim> foot{};
    double distance = 0.0;
    std::optional<double> oracle_distance;  // present with --verify
    std::optional<std::string> error;

    friend bool operator==(const ResultRecord&, const ResultRecord&) = default;
};

template <int Dim>
std::string result_to_json_line(const ResultRecord<Dim>& r) {
    json j = {{"query_index", r.query_index}, {"t_star", r.t_star}, {"foot", detail::point_json(r.foot)},
              {"distance", r.distance}};
    if (r.oracle_distance) {
        j["oracle_distance"] = *r.oracle_distance;
        j["disagreement"] = std::abs(r.distance - *r.oracle_distance);
    }
    if (r.error) j["error"] = *r.error;
    return j.dump();
}

template <int Dim>
std::vector<ResultRecord<Dim>> results_from_json_lines(const std::string& text, const std::string& source) {
    std::vector<ResultRecord<Dim>> out;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = source + ":" + std::to_string(line_no);
        const json j = parse_json(line, where);
        ResultRecord<Dim> r;
        r.query_index = detail::field(j, "query_index", where, "").get<std::size_t>();
        r.t_star = detail::number(detail::field(j, "t_star", where, ""), where, "/t_star");
        r.foot = detail::point<Dim>(detail::field(j, "foot", where, ""), where, "/foot");
        r.distance = detail::number(detail::field(j, "distance", where, ""), where, "/distance");
        if (j.contains("oracle_distance")) r.oracle_distance = detail::number(j["oracle_distance"], where, "/oracle_distance");
        if (j.contains("error")) r.error = j["error"].get<std::string>();
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace mrep::io
