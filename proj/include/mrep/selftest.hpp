#pragma once

// Built-in invariant suites run by `mrep selftest`.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "mrep/basis.hpp"
#include "mrep/bezier.hpp"
#include "mrep/decompose.hpp"
#include "mrep/distance.hpp"
#include "mrep/oracle.hpp"
#include "mrep/project.hpp"
#include "mrep/random.hpp"

namespace mrep::selftest {

struct SuiteResult {
    std::string name;
    std::size_t count = 0;
    double max_residual = 0.0;
    double limit = 0.0;
    bool passed = false;
};

struct Options {
    unsigned long long seed = 20240611ULL;
    /// Perturbs one entry of the cached Bernstein inverses before they are checked.
    bool inject_fault = false;
};

inline SuiteResult partition_of_unity(Rng& rng) {
    SuiteResult r{"partition_of_unity", 0, 0.0, 1e-12, false};
    for (int c = 0; c < 20; ++c) {
        const int p = 1 + c % 8;
        auto curve = random_clamped_curve<1>(rng, p, static_cast<std::size_t>(p) + 1 + static_cast<std::size_t>(c));
        for (std::size_t q : nonzero_spans(curve)) {
            const Matrix a = basis_coefficient_matrix(curve, q, curve.knots[q]);
            const double dt = curve.knots[q + 1] - curve.knots[q];
            for (int k = 0; k <= 8; ++k) {
                const double s = dt * k / 8.0;
                double sum = 0.0;
                for (std::size_t j = 0; j < a.cols(); ++j) {
                    double v = 0.0;
                    for (std::size_t e = a.rows(); e-- > 0;) v = v * s + a(e, j);
                    sum += v;
                }
                r.max_residual = std::max(r.max_residual, std::abs(sum - 1.0));
                ++r.count;
            }
        }
    }
    r.passed = r.max_residual <= r.limit;
    return r;
}

inline SuiteResult bernstein_inverse(const Options& opt) {
    SuiteResult r{"bernstein_inverse", 0, 0.0, kInverseResidualLimit, false};
    for (int p = 1; p <= kMaxDegree; ++p) {
        Matrix inv = bernstein_matrix_inverse(p);
        if (opt.inject_fault) inv(0, 0) += 1e-3;
        r.max_residual = std::max(r.max_residual, relative_inverse_residual(bernstein_matrix(p), inv));
        ++r.count;
    }
    r.passed = r.max_residual <= r.limit;
    return r;
}

inline SuiteResult decomposition_exactness(Rng& rng) {
    SuiteResult r{"decomposition_exactness", 0, 0.0, 1e-9, false};
    for (int c = 0; c < 20; ++c) {
        const int p = 2 + c % 7;
        auto curve = random_clamped_curve<3>(rng, p, static_cast<std::size_t>(p) + 3 + static_cast<std::size_t>(c));
        for (const auto& seg : decompose_to_bezier(curve)) {
            for (int k = 0; k <= 16; ++k) {
                const double u = k / 16.0;
                const auto mine = evaluate(seg, u);
                const auto ref = oracle::eval_de_boor(curve, local_to_global(seg.source, u));
                r.max_residual = std::max(r.max_residual, distance(mine, ref));
                ++r.count;
            }
        }
    }
    r.passed = r.max_residual <= r.limit;
    return r;
}

inline SuiteResult quartic_oracle(Rng& rng) {
    SuiteResult r{"quartic_oracle", 0, 0.0, 1e-8, false};
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    bool count_ok = true;
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> c(5);
        for (auto& v : c) v = u(rng);
        const auto mine = solve_quartic(c);
        const auto ref = oracle::bisection_roots(c);
        if (mine.size() != ref.size()) {
            count_ok = false;
            continue;
        }
        for (std::size_t k = 0; k < mine.size(); ++k) r.max_residual = std::max(r.max_residual, std::abs(mine[k] - ref[k]));
        ++r.count;
    }
    r.passed = count_ok && r.max_residual <= r.limit;
    return r;
}

inline SuiteResult clipping_enclosure(Rng& rng) {
    SuiteResult r{"clipping_enclosure", 0, 0.0, 0.0, false};
    std::uniform_real_distribution<double> u(0.05, 0.95);
    std::uniform_real_distribution<double> far(1.5, 3.0);
    double worst = 0.0;  // largest distance of the root outside its enclosure
    for (int i = 0; i < 200; ++i) {
        // Monotone quintic with exactly one root in [0,1]: (t - r) (t + a)(t + b) ... with outside roots.
        const double root = u(rng);
        std::vector<double> poly{1.0};
        auto mul = [&](double s) {  // poly *= (t - s)
            std::vector<double> next(poly.size() + 1, 0.0);
            for (std::size_t k = 0; k < poly.size(); ++k) {
                next[k + 1] += poly[k];
                next[k] -= s * poly[k];
            }
            poly = next;
        };
        mul(root);
        for (int k = 0; k < 4; ++k) mul(k % 2 ? far(rng) : -far(rng));
        if (poly[5] < 0.0) for (auto& v : poly) v = -v;
        Poly e;
        e.degree = 5;
        std::copy(poly.begin(), poly.end(), e.c.begin());
        NonParametricBezier bez = rebase(e);
        if (!(bez.b[0] < 0.0 && bez.b[5] > 0.0)) continue;
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 8; ++it) {
            const auto hit = hull_x_intersections(bez);
            if (!hit) {
                worst = std::max(worst, 1.0);
                break;
            }
            const double w = hi - lo;
            const double nlo = lo + hit->z1 * w, nhi = lo + hit->z2 * w;
            bez = clip(bez, hit->z1, hit->z2);
            lo = nlo;
            hi = nhi;
            const double slack = 1e-12;
            if (root < lo - slack) worst = std::max(worst, lo - root);
            if (root > hi + slack) worst = std::max(worst, root - hi);
            if (hi - lo <= 1e-12) break;
        }
        ++r.count;
    }
    r.max_residual = worst;
    r.passed = worst <= r.limit;
    return r;
}

inline std::vector<SuiteResult> run_all(const Options& opt = {}) {
    Rng rng(opt.seed);
    std::vector<SuiteResult> out;
    out.push_back(partition_of_unity(rng));
    out.push_back(bernstein_inverse(opt));
    out.push_back(decomposition_exactness(rng));
    out.push_back(quartic_oracle(rng));
    out.push_back(clipping_enclosure(rng));
    return out;
}

}  // namespace mrep::selftest
