#pragma once

#include "ralg/algebroid.hpp"
#include "ralg/errors.hpp"
#include "ralg/expression.hpp"
#include "ralg/metric.hpp"

#include <numbers>
#include <string>
#include <string_view>
#include <vector>

namespace ralg {

struct CatalogEntry {
    std::string name;
    AlgebroidChart chart;
    MetricField metric;
    std::string description;
};

namespace catalog {

namespace detail {

inline std::vector<Expression> anchor_rows(int n, const std::vector<std::vector<std::string>>& rows) {
    std::vector<Expression> out;
    for (const auto& row : rows)
        for (const std::string& e : row) out.push_back(Expression::parse(e, n));
    return out;
}

inline std::vector<MetricEntry> unit_metric(int n, int r) {
    std::vector<MetricEntry> out;
    for (int i = 0; i < r; ++i) out.push_back({i, i, Expression::constant(1.0, n)});
    return out;
}

inline Box box(std::vector<double> lo, std::vector<double> hi) { return Box{std::move(lo), std::move(hi)}; }

inline BracketEntry c(int s, int t, int u, double v, int n) { return {s - 1, t - 1, u - 1, Expression::constant(v, n)}; }

}  // namespace detail

inline std::vector<std::string> names() {
    return {"euclidean2", "sphere_chart", "so3_biinv", "aff2", "heisenberg_central", "foliation_xy"};
}

inline CatalogEntry get(std::string_view name) {
    using namespace detail;
    constexpr double pi = std::numbers::pi;
    if (name == "euclidean2") {
        AlgebroidChart ch(2, 2, anchor_rows(2, {{"1", "0"}, {"0", "1"}}), {}, box({-10, -10}, {10, 10}));
        return {"euclidean2", ch, MetricField(2, 2, unit_metric(2, 2)),
                "tangent bundle of the plane; flat, straight-line geodesics"};
    }
    if (name == "sphere_chart") {
        AlgebroidChart ch(2, 2, anchor_rows(2, {{"1", "0"}, {"0", "1"}}), {},
                          box({0.1, -pi + 0.1}, {pi - 0.1, pi - 0.1}));
        MetricField g(2, 2, {{0, 0, Expression::constant(1.0, 2)}, {1, 1, Expression::parse("sin(x1)^2", 2)}});
        return {"sphere_chart", ch, g, "round unit sphere in polar coordinates (x1 = polar, x2 = azimuth); K = 1"};
    }
    if (name == "so3_biinv") {
        AlgebroidChart ch(1, 3, anchor_rows(1, {{"0"}, {"0"}, {"0"}}),
                          {c(1, 2, 3, 1, 1), c(2, 3, 1, 1, 1), c(1, 3, 2, -1, 1)}, box({-1}, {1}));
        return {"so3_biinv", ch, MetricField(1, 3, unit_metric(1, 3)),
                "so(3) over a point with the bi-invariant metric; Gamma = C/2, geodesic field vanishes, unimodular"};
    }
    if (name == "aff2") {
        AlgebroidChart ch(1, 2, anchor_rows(1, {{"0"}, {"0"}}), {c(1, 2, 2, 1, 1)}, box({-1}, {1}));
        return {"aff2", ch, MetricField(1, 2, unit_metric(1, 2)),
                "affine Lie algebra [e1,e2] = e2 over a point; not unimodular, div X_E(mu) = mu1"};
    }
    if (name == "heisenberg_central") {
        AlgebroidChart ch(2, 3, anchor_rows(2, {{"1", "0"}, {"0", "1"}, {"0", "0"}}), {c(1, 2, 3, 1, 2)},
                          box({-10, -10}, {10, 10}));
        return {"heisenberg_central", ch, MetricField(2, 3, unit_metric(2, 3)),
                "transitive algebroid over the plane with central kernel a3; T = 0, H_{a1}a2 = a3/2, K(a1,a2) = -3/4"};
    }
    if (name == "foliation_xy") {
        AlgebroidChart ch(3, 2, anchor_rows(3, {{"1", "0", "0"}, {"0", "1", "0"}}), {},
                          box({-10, -10, -10}, {10, 10, 10}));
        return {"foliation_xy", ch, MetricField(3, 2, unit_metric(3, 2)),
                "horizontal planes z = const in R^3; injective anchor"};
    }
    throw PreconditionError("unknown catalog entry '" + std::string(name) + "'");
}

inline std::vector<CatalogEntry> all() {
    std::vector<CatalogEntry> out;
    for (const std::string& n : names()) out.push_back(get(n));
    return out;
}

}  // namespace catalog

}  // namespace ralg
