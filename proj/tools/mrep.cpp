// mrep: command-line front end for decomposition, approximation, projection and inversion.
//
// Exit codes: 0 ok, 1 usage, 2 input error, 3 verification failure.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mrep/io.hpp"
#include "mrep/mrep.hpp"
#include "mrep/selftest.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kInput = 2;
constexpr int kVerify = 3;

struct Settings {
    std::string curve_file;
    std::string points_file;
    std::string out;
    double tolerance = 1e-4;
    std::size_t workers = 0;
    unsigned long long seed = 1;
    bool verify = false;
    std::size_t points = 10000;
    int repeats = 1;
    std::size_t oracle_grid = 4096;
    bool inject_fault = false;
};

void emit(const Settings& s, const std::string& text) {
    if (s.out.empty() || s.out == "-") {
        std::cout << text;
    } else {
        mrep::io::write_text(s.out, text);
    }
}

std::size_t workers_of(const Settings& s) { return s.workers == 0 ? mrep::default_workers() : s.workers; }

template <int Dim>
mrep::BSplineCurve<Dim> single_curve(const std::string& path) {
    auto curves = mrep::io::read_curves<Dim>(path);
    if (curves.size() != 1) {
        throw mrep::Error(mrep::ErrorCode::ParseError, path + ": expected exactly one curve, found " +
                                                           std::to_string(curves.size()));
    }
    return curves.front();
}

int curve_dimension(const std::string& path) {
    const std::string text = mrep::io::read_text(path);
    return mrep::io::document_dimension(mrep::io::parse_json(text, path), path);
}

template <int Dim>
int run_decompose(const Settings& s) {
    bool batch = false;
    const auto curves = mrep::io::read_curves<Dim>(s.curve_file, &batch);
    const auto outcomes = mrep::batched_decompose(curves, workers_of(s));
    nlohmann::json doc = nlohmann::json::array();
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (!outcomes[i].ok()) {
            std::cerr << s.curve_file << ": curve " << i << ": " << outcomes[i].error->what() << "\n";
            return kInput;
        }
        doc.push_back(mrep::io::segments_to_json(outcomes[i].segments));
    }
    emit(s, (batch ? doc : doc.front()).dump(1) + "\n");
    return kOk;
}

template <int Dim>
int run_approximate(const Settings& s) {
    bool batch = false;
    const auto curves = mrep::io::read_curves<Dim>(s.curve_file, &batch);
    nlohmann::json doc = nlohmann::json::array();
    mrep::ApproxOptions opt;
    opt.workers = workers_of(s);
    for (const auto& c : curves) {
        const auto bez = mrep::decompose_to_bezier(c, opt.workers);
        doc.push_back(mrep::io::cubics_to_json(mrep::approximate_error_controlled(bez, s.tolerance, opt).segments));
    }
    emit(s, (batch ? doc : doc.front()).dump(1) + "\n");
    return kOk;
}

/// Shared by project and invert; `invert` turns far-off points into per-record errors.
template <int Dim>
int run_queries(const Settings& s, bool invert) {
    const auto curve = single_curve<Dim>(s.curve_file);
    if (mrep::io::points_file_dimension(s.points_file) != Dim) {
        throw mrep::Error(mrep::ErrorCode::ParseError,
                          s.points_file + ": point dimension does not match the curve dimension " + std::to_string(Dim));
    }
    const auto queries = mrep::io::read_points<Dim>(s.points_file);
    const std::size_t workers = workers_of(s);
    const mrep::Projector<Dim> projector(curve, s.tolerance, workers);
    const auto outcomes = projector.project_all(std::span<const mrep::Point<Dim>>(queries), workers);

    std::vector<mrep::io::ResultRecord<Dim>> records(queries.size());
    std::optional<mrep::oracle::DenseProjector<Dim>> oracle;
    if (s.verify) oracle.emplace(curve, s.oracle_grid);
    bool failed = false;
    bool disagreed = false;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        auto& r = records[i];
        r.query_index = i;
        r.t_star = outcomes[i].result.t_star;
        r.foot = outcomes[i].result.foot;
        r.distance = outcomes[i].result.distance;
        if (!outcomes[i].ok()) {
            r.error = outcomes[i].error->what();
        } else if (invert && r.distance > 10.0 * s.tolerance) {
            r.error = "point is " + std::to_string(r.distance) + " from the curve";
        }
        if (r.error) failed = true;
        if (oracle) {
            const auto o = oracle->project(queries[i]);
            r.oracle_distance = o.distance;
            if (r.distance - o.distance > s.tolerance + o.resolution) disagreed = true;
        }
    }
    std::string text;
    for (const auto& r : records) text += mrep::io::result_to_json_line(r) + "\n";
    emit(s, text);
    if (failed) {
        std::cerr << "some queries failed; see the \"error\" fields\n";
        return kInput;
    }
    if (disagreed) {
        std::cerr << "verification failed: distance exceeds the oracle by more than tolerance + resolution\n";
        return kVerify;
    }
    return kOk;
}

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

template <int Dim>
int run_bench(const Settings& s) {
    if (s.points < 1) throw mrep::Error(mrep::ErrorCode::DomainError, "--points must be at least 1");
    const auto curve = single_curve<Dim>(s.curve_file);
    const std::size_t workers = workers_of(s);
    mrep::Rng rng(s.seed);
    const auto queries = mrep::random_points<Dim>(rng, s.points);

    std::ostringstream csv;
    csv << "stage,points,repeat,total_ms,avg_us_per_point,workers\n";
    auto row = [&](const char* stage, int rep, double ms) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s,%zu,%d,%.3f,%.4f,%zu\n", stage, s.points, rep, ms,
                      1000.0 * ms / static_cast<double>(s.points), workers);
        csv << buf;
    };
    mrep::ApproxOptions opt;
    opt.workers = workers;
    for (int rep = 0; rep < s.repeats; ++rep) {
        auto t0 = std::chrono::steady_clock::now();
        const auto bez = mrep::decompose_to_bezier(curve, workers);
        row("decompose", rep, ms_since(t0));
        t0 = std::chrono::steady_clock::now();
        auto cubics = mrep::approximate_error_controlled(bez, s.tolerance, opt).segments;
        row("approximate", rep, ms_since(t0));
        t0 = std::chrono::steady_clock::now();
        const mrep::Projector<Dim> projector(curve, std::move(cubics), s.tolerance);
        const auto out = projector.project_all(std::span<const mrep::Point<Dim>>(queries), workers);
        row("monotonic+project", rep, ms_since(t0));
    }

    // Closed-form quartic roots against Newton iteration on the same seeded set.
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::vector<double> quartics(5 * 10000);
    for (auto& c : quartics) c = coef(rng);
    std::size_t sink = 0;
    auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < quartics.size(); i += 5)
        sink += mrep::solve_quartic(std::span<const double>(quartics.data() + i, 5)).size();
    const double closed_ms = ms_since(t0);
    t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < quartics.size(); i += 5)
        sink += mrep::newton_quartic_roots(std::span<const double>(quartics.data() + i, 5)).size();
    const double newton_ms = ms_since(t0);
    char buf[256];
    std::snprintf(buf, sizeof buf, "quartic_closed_form,%d,0,%.3f,%.4f,1\nquartic_newton,%d,0,%.3f,%.4f,1\n", 10000,
                  closed_ms, 1000.0 * closed_ms / 10000.0, 10000, newton_ms, 1000.0 * newton_ms / 10000.0);
    csv << buf;
    emit(s, csv.str());
    std::cerr << "closed-form vs Newton quartic speed ratio: " << (closed_ms > 0 ? newton_ms / closed_ms : 0.0)
              << " (" << sink << " roots)\n";
    return kOk;
}

int run_selftest(const Settings& s) {
    mrep::selftest::Options opt;
    opt.seed = s.seed;
    opt.inject_fault = s.inject_fault;
    bool ok = true;
    std::ostringstream text;
    for (const auto& r : mrep::selftest::run_all(opt)) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%-24s %s  count=%zu  max_residual=%.3e  limit=%.1e\n", r.name.c_str(),
                      r.passed ? "PASS" : "FAIL", r.count, r.max_residual, r.limit);
        text << buf;
        ok = ok && r.passed;
    }
    emit(s, text.str());
    return ok ? kOk : kVerify;
}

template <template <int> class Fn>
int by_dimension(int dim, const Settings& s) {
    if (dim == 2) return Fn<2>::run(s);
    if (dim == 3) return Fn<3>::run(s);
    throw mrep::Error(mrep::ErrorCode::ParseError, s.curve_file + ": unsupported dimension " + std::to_string(dim));
}

template <int D> struct Decompose { static int run(const Settings& s) { return run_decompose<D>(s); } };
template <int D> struct Approximate { static int run(const Settings& s) { return run_approximate<D>(s); } };
template <int D> struct Project { static int run(const Settings& s) { return run_queries<D>(s, false); } };
template <int D> struct Invert { static int run(const Settings& s) { return run_queries<D>(s, true); } };
template <int D> struct Bench { static int run(const Settings& s) { return run_bench<D>(s); } };

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"B-spline decomposition, cubic approximation and point projection"};
    app.require_subcommand(1);
    Settings s;

    auto common = [&](CLI::App* cmd) {
        cmd->add_option("--out,-o", s.out, "Output file (default stdout)");
        cmd->add_option("--workers,-w", s.workers, "Worker threads, 0 = machine parallelism");
    };
    auto tolerance = [&](CLI::App* cmd) {
        cmd->add_option("--tolerance,-t", s.tolerance, "Approximation tolerance")->check(CLI::PositiveNumber);
    };

    auto* dec = app.add_subcommand("decompose", "Split curves into Bezier segments");
    dec->add_option("curve", s.curve_file, "Curve JSON")->required();
    common(dec);

    auto* apx = app.add_subcommand("approximate", "Approximate curves by cubic pieces");
    apx->add_option("curve", s.curve_file, "Curve JSON")->required();
    common(apx);
    tolerance(apx);

    auto* prj = app.add_subcommand("project", "Closest curve point for each query");
    auto* inv = app.add_subcommand("invert", "Curve parameter of each on-curve point");
    for (auto* cmd : {prj, inv}) {
        cmd->add_option("curve", s.curve_file, "Curve JSON")->required();
        cmd->add_option("points", s.points_file, "Points JSON or CSV")->required();
        common(cmd);
        tolerance(cmd);
        cmd->add_flag("--verify", s.verify, "Check every query against the dense-sampling oracle");
        cmd->add_option("--oracle-grid", s.oracle_grid, "Oracle grid size")->check(CLI::Range(2, 1 << 24));
    }

    auto* bch = app.add_subcommand("bench", "Stage timings as CSV");
    bch->add_option("curve", s.curve_file, "Curve JSON")->required();
    common(bch);
    tolerance(bch);
    bch->add_option("--points,-n", s.points, "Random query count")->check(CLI::PositiveNumber);
    bch->add_option("--repeats,-r", s.repeats, "Repetitions")->check(CLI::PositiveNumber);
    bch->add_option("--seed", s.seed, "Query generator seed");

    auto* slf = app.add_subcommand("selftest", "Run the built-in invariant suites");
    slf->add_option("--out,-o", s.out, "Output file (default stdout)");
    slf->add_option("--seed", s.seed, "Fixture seed");
    slf->add_flag("--inject-fault", s.inject_fault, "Corrupt one inverse-table entry before checking");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (slf->parsed()) return run_selftest(s);
        const int dim = curve_dimension(s.curve_file);
        if (dec->parsed()) return by_dimension<Decompose>(dim, s);
        if (apx->parsed()) return by_dimension<Approximate>(dim, s);
        if (prj->parsed()) return by_dimension<Project>(dim, s);
        if (inv->parsed()) return by_dimension<Invert>(dim, s);
        if (bch->parsed()) return by_dimension<Bench>(dim, s);
    } catch (const mrep::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInput;
    }
    return kUsage;
}
