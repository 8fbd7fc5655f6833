#pragma once

#include "ralg.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace ralg::testing {

inline Vec vec(std::initializer_list<double> v) {
    Vec out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index k = 0;
    for (double d : v) out[k++] = d;
    return out;
}

inline Expression ex(const std::string& s, int n) { return Expression::parse(s, n); }

inline std::vector<Expression> rows(int n, std::initializer_list<std::initializer_list<const char*>> r) {
    std::vector<Expression> out;
    for (const auto& row : r)
        for (const char* e : row) out.push_back(ex(e, n));
    return out;
}

/// Transitive, n = 2, r = 3. #a3 = x2 d1 so the kernel rotates with x2;
/// [a2, a3] = a1 keeps the anchor a morphism.
inline CatalogEntry twisted() {
    AlgebroidChart ch(2, 3, rows(2, {{"1", "0"}, {"0", "1"}, {"x2", "0"}}), {{1, 2, 0, Expression::constant(1, 2)}},
                      Box{{-1, -1}, {1, 1}});
    return {"twisted", ch, MetricField::identity(2, 3), "rotating kernel"};
}

/// Transitive, n = 1, r = 3, kernel span{a2, a3} with [a2, a3] = a3 and a
/// non-diagonal metric depending on x1.
inline CatalogEntry warped() {
    AlgebroidChart ch(1, 3, rows(1, {{"1"}, {"0"}, {"0"}}), {{1, 2, 2, Expression::constant(1, 1)}}, Box{{-1}, {1}});
    MetricField g(1, 3,
                  {{0, 0, Expression::constant(1, 1)},
                   {1, 1, ex("exp(2*x1)", 1)},
                   {2, 2, ex("1+x1^2", 1)},
                   {1, 2, ex("0.3*x1", 1)}});
    return {"warped", ch, g, "non-unimodular kernel, curved fiber metric"};
}

/// Catalog plus the two test charts.
inline std::vector<CatalogEntry> all_charts() {
    std::vector<CatalogEntry> out = catalog::all();
    out.push_back(twisted());
    out.push_back(warped());
    return out;
}

inline bool transitive(const CatalogEntry& e) {
    return split(e.chart, e.metric, e.chart.domain().center()).q == e.chart.n();
}

/// Seeded sample of (x, mu) with x in the box (10% margin) and mu in [-1, 1]^r.
inline std::vector<AVector> sample_vectors(const AlgebroidChart& chart, int count, std::uint64_t seed = 42,
                                           double margin = 0.1) {
    HaltonSampler s(chart.n() + chart.r(), seed);
    std::vector<AVector> out;
    for (int k = 0; k < count; ++k) {
        const Vec u = s.next();
        out.push_back({chart.domain().map(u.head(chart.n()), margin), (2.0 * u.tail(chart.r()).array() - 1.0).matrix()});
    }
    return out;
}

/// Central difference of a vector-valued function of one real variable.
inline Vec central(const std::function<Vec(double)>& f, double h) { return (f(h) - f(-h)) / (2.0 * h); }

}  // namespace ralg::testing
