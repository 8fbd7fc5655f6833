#include "support.hpp"

#include <gtest/gtest.h>

using namespace ralg;
using namespace ralg::testing;

namespace {

bool lie_algebra(const CatalogEntry& e) { return e.chart.anchor_is_zero(); }

// Divergence of X_E for the volume of the Sasaki metric, by central
// differences. In (x, mu) the Sasaki metric is block-triangular against
// h (+) g, so its density is sqrt(det h det g) and does not depend on mu.
double fd_divergence(const CatalogEntry& e, const AVector& a, double step = 1e-5) {
    const int n = e.chart.n(), r = e.chart.r();
    auto field = [&](const Vec& x, const Vec& mu) { return geodesic_rhs(e.chart, e.metric, x, mu); };
    double div = 0.0;
    for (int j = 0; j < r; ++j) {
        Vec mp = a.mu, mm = a.mu;
        mp[j] += step;
        mm[j] -= step;
        div += (field(a.x, mp).second[j] - field(a.x, mm).second[j]) / (2 * step);
    }
    if (lie_algebra(e)) return div;
    auto rho = [&](const Vec& x) {
        return std::sqrt(leaf_geometry(e.chart, e.metric, x, false).h.determinant() * e.metric.at(x, 0).g.determinant());
    };
    for (int m = 0; m < n; ++m) {
        Vec xp = a.x, xm = a.x;
        xp[m] += step;
        xm[m] -= step;
        div += (rho(xp) * field(xp, a.mu).first[m] - rho(xm) * field(xm, a.mu).first[m]) / (2 * step) / rho(a.x);
    }
    return div;
}

}  // namespace

TEST(Split, Examples) {
    const CatalogEntry h = catalog::get("heisenberg_central");
    const SplitFrame f = split(h.chart, h.metric, vec({0.2, -0.3}));
    EXPECT_EQ(f.q, 2);
    EXPECT_LT(max_abs(Vec(f.vertical.col(0).cwiseAbs() - vec({0, 0, 1}))), 1e-15);
    EXPECT_LT(max_abs(Vec((f.Ph - vec({1, 1, 0}).asDiagonal().toDenseMatrix()).reshaped())), 1e-15);

    const CatalogEntry plane = catalog::get("euclidean2");
    const SplitFrame p = split(plane.chart, plane.metric, vec({1, 1}));
    EXPECT_EQ(p.q, 2);
    EXPECT_EQ(p.vertical_dim(), 0);

    const CatalogEntry aff = catalog::get("aff2");
    const SplitFrame a = split(aff.chart, aff.metric, vec({0.0}));
    EXPECT_EQ(a.q, 0);
    EXPECT_EQ(a.vertical_dim(), 2);
    EXPECT_FALSE(a.warning);
}

TEST(Split, FrameInvariants) {
    for (const CatalogEntry& e : all_charts())
        for (const AVector& v : sample_vectors(e.chart, 20)) {
            const SplitFrame f = split(e.chart, e.metric, v.x);
            const MetricAt m = e.metric.at(v.x, 0);
            const int r = e.chart.r();
            EXPECT_EQ(f.q + f.vertical_dim(), r);
            const Mat E = f.frame();
            EXPECT_LT(max_abs(Vec((E.transpose() * m.g * E - Mat::Identity(r, r)).reshaped())), 1e-10) << e.name;
            const StructureAt st = e.chart.structure_at(v.x, 0);
            for (int j = 0; j < f.vertical_dim(); ++j)
                EXPECT_LT(Vec(st.b.transpose() * f.vertical.col(j)).norm(), 1e-9) << e.name;
            EXPECT_LT(max_abs(Vec((f.Ph * f.Ph - f.Ph).reshaped())), 1e-12) << e.name;
        }
}

TEST(Tensors, HeisenbergHalfBracket) {
    const CatalogEntry e = catalog::get("heisenberg_central");
    const OneillPoint p = oneill_point(e.chart, e.metric, vec({0.4, 0.1}));
    EXPECT_LT(max_abs(oneill_H_apply(p, vec({1, 0, 0}), vec({0, 1, 0})) - vec({0, 0, 0.5})), 1e-15);
    EXPECT_LT(max_abs(oneill_H_apply(p, vec({0, 1, 0}), vec({1, 0, 0})) - vec({0, 0, -0.5})), 1e-15);
    const OneillTensors t = oneill_tensors(p);
    for (double c : t.T.data()) EXPECT_LT(std::abs(c), 1e-15);
}

TEST(Tensors, FlatPlaneVanishes) {
    const CatalogEntry e = catalog::get("euclidean2");
    const OneillTensors t = oneill_tensors(e.chart, e.metric, vec({3, -2}));
    for (double c : t.T.data()) EXPECT_EQ(c, 0.0);
    for (double c : t.H.data()) EXPECT_EQ(c, 0.0);
}

TEST(Identities, HoldOnAllCharts) {
    for (const CatalogEntry& e : all_charts())
        for (const AVector& v : sample_vectors(e.chart, 20, 13))
            for (const IdentityResidual& id : oneill_identities(e.chart, e.metric, v.x))
                EXPECT_TRUE(id.pass()) << e.name << " " << id.name << " " << id.residual;
}

TEST(Divergence, Examples) {
    const CatalogEntry aff = catalog::get("aff2");
    EXPECT_NEAR(divergence_XE(aff.chart, aff.metric, {vec({0.5}), vec({1, 0})}).total, 1.0, 1e-14);
    const CatalogEntry so3 = catalog::get("so3_biinv");
    const CatalogEntry h = catalog::get("heisenberg_central");
    for (const AVector& v : sample_vectors(so3.chart, 10)) EXPECT_LT(std::abs(divergence_XE(so3.chart, so3.metric, v).total), 1e-15);
    for (const AVector& v : sample_vectors(h.chart, 10)) EXPECT_LT(std::abs(divergence_XE(h.chart, h.metric, v).total), 1e-15);
}

TEST(Divergence, Aff2MatchesPolynomialField) {
    // X_E = mu1 mu2 d2 - mu2^2 d1 on the fiber, divergence mu1.
    const CatalogEntry aff = catalog::get("aff2");
    for (const AVector& v : sample_vectors(aff.chart, 10)) {
        const auto [dx, dmu] = geodesic_rhs(aff.chart, aff.metric, v.x, v.mu);
        EXPECT_LT(max_abs(dmu - vec({-v.mu[1] * v.mu[1], v.mu[0] * v.mu[1]})), 1e-15);
        EXPECT_NEAR(divergence_XE(aff.chart, aff.metric, v).total, v.mu[0], 1e-14);
    }
}

TEST(Divergence, MatchesFiniteDifferenceOfSasakiVolume) {
    for (const CatalogEntry& e : all_charts()) {
        if (!lie_algebra(e) && !transitive(e)) continue;
        for (const AVector& v : sample_vectors(e.chart, 50, 21)) {
            const DivergenceResult d = divergence_XE(e.chart, e.metric, v);
            EXPECT_LT(d.closure_residual, 1e-9) << e.name;
            EXPECT_NEAR(d.total, fd_divergence(e, v), 1e-5) << e.name;
        }
    }
}

TEST(Divergence, WarpedChartIsNotDivergenceFree) {
    const CatalogEntry e = warped();
    const AVector v{vec({0.3}), vec({0.2, 0.7, -0.4})};
    const DivergenceResult d = divergence_XE(e.chart, e.metric, v);
    EXPECT_GT(std::abs(d.trace_term), 0.1);
    EXPECT_NEAR(d.total, fd_divergence(e, v), 1e-5);
}

TEST(Connector, VerticalTangentIsItself) {
    for (const CatalogEntry& e : all_charts())
        for (const AVector& a : sample_vectors(e.chart, 5)) {
            const Vec w = Vec::LinSpaced(e.chart.r(), -1, 2);
            EXPECT_LT(max_abs(connector(e.chart, e.metric, a, {Vec::Zero(e.chart.n()), w}) - w), 1e-15) << e.name;
        }
}

TEST(Connector, GeodesicFieldMapsToMinusVerticalDerivative) {
    for (const CatalogEntry& e : all_charts())
        for (const AVector& a : sample_vectors(e.chart, 20, 4)) {
            const auto [dx, dmu] = geodesic_rhs(e.chart, e.metric, a.x, a.mu);
            const SplitFrame f = split(e.chart, e.metric, a.x);
            const SectionField av = SectionField::constant(f.Pv * a.mu, e.chart.n());
            const Vec D = covariant_derivative(e.chart, e.metric, av, SectionField::constant(a.mu, e.chart.n()), a.x);
            EXPECT_LT(max_abs(connector(e.chart, e.metric, a, {dx, dmu}) + D), 1e-9) << e.name;
        }
}

TEST(Connector, HeisenbergExample) {
    const CatalogEntry e = catalog::get("heisenberg_central");
    const AVector a{vec({0.1, 0.5}), vec({1, 0, 1})};
    const auto [dx, dmu] = geodesic_rhs(e.chart, e.metric, a.x, a.mu);
    EXPECT_LT(max_abs(connector(e.chart, e.metric, a, {dx, dmu}) - vec({0, 0.5, 0})), 1e-15);
}

TEST(Connector, OutsideAnchorImageRejected) {
    const CatalogEntry e = catalog::get("foliation_xy");
    EXPECT_THROW(connector(e.chart, e.metric, {vec({0, 0, 0}), vec({1, 1})}, {vec({0, 0, 1}), vec({0, 0})}),
                 PreconditionError);
}

TEST(Connector, TangentDecomposition) {
    // Z = horizontal tangent over dp(Z) + vertical injection of K(Z).
    for (const CatalogEntry& e : all_charts()) {
        if (!transitive(e)) continue;
        HaltonSampler s(e.chart.n() + e.chart.r(), 99);
        for (const AVector& a : sample_vectors(e.chart, 10)) {
            const Vec u = 2.0 * s.next().array() - 1.0;
            const ATangent Z{u.head(e.chart.n()), u.tail(e.chart.r())};
            const Vec K = connector(e.chart, e.metric, a, Z);
            const ATangent Hz = horizontal_tangent(e.chart, e.metric, a, Z.dx);
            EXPECT_LT(max_abs(connector(e.chart, e.metric, a, Hz)), 1e-12) << e.name;
            EXPECT_LT(max_abs(Hz.dx - Z.dx), 1e-15) << e.name;
            EXPECT_LT(max_abs(Hz.dmu + K - Z.dmu), 1e-9) << e.name;
        }
    }
}

TEST(Sasaki, LieAlgebraIsFlatFiberMetric) {
    for (const char* name : {"aff2", "so3_biinv"}) {
        const CatalogEntry e = catalog::get(name);
        for (const AVector& a : sample_vectors(e.chart, 10)) {
            const Vec w1 = Vec::LinSpaced(e.chart.r(), 0.5, -1), w2 = Vec::LinSpaced(e.chart.r(), 2, 1);
            const ATangent Z1{Vec::Zero(1), w1}, Z2{Vec::Zero(1), w2};
            EXPECT_NEAR(sasaki_metric(e.chart, e.metric, a, Z1, Z2), e.metric.at(a.x, 0).inner(w1, w2), 1e-15);
        }
    }
}

TEST(Sasaki, FlatPlaneHorizontalUnit) {
    const CatalogEntry e = catalog::get("euclidean2");
    const AVector a{vec({1, 2}), vec({0.3, -0.6})};
    const ATangent Z = horizontal_tangent(e.chart, e.metric, a, vec({0.6, 0.8}));
    EXPECT_NEAR(sasaki_metric(e.chart, e.metric, a, Z, Z), 1.0, 1e-15);
}

TEST(Sasaki, PositiveAndSymmetric) {
    for (const CatalogEntry& e : all_charts()) {
        if (!transitive(e)) continue;
        HaltonSampler s(2 * (e.chart.n() + e.chart.r()), 5);
        for (const AVector& a : sample_vectors(e.chart, 20)) {
            const Vec u = 2.0 * s.next().array() - 1.0;
            const int n = e.chart.n(), r = e.chart.r();
            const ATangent Z1{u.segment(0, n), u.segment(n, r)}, Z2{u.segment(n + r, n), u.segment(2 * n + r, r)};
            EXPECT_GT(sasaki_metric(e.chart, e.metric, a, Z1, Z1), 0.0) << e.name;
            EXPECT_NEAR(sasaki_metric(e.chart, e.metric, a, Z1, Z2), sasaki_metric(e.chart, e.metric, a, Z2, Z1), 1e-14);
        }
    }
    const CatalogEntry f = catalog::get("foliation_xy");
    const ATangent Z{vec({1, 0, 0}), vec({0, 0})};
    EXPECT_THROW(sasaki_metric(f.chart, f.metric, {vec({0, 0, 0}), vec({1, 0})}, Z, Z), PreconditionError);
}

TEST(LeafMetric, Examples) {
    const CatalogEntry h = catalog::get("heisenberg_central");
    const CatalogEntry p = catalog::get("euclidean2");
    const CatalogEntry f = catalog::get("foliation_xy");
    const Vec e1 = vec({1, 0}), e2 = vec({0, 1});
    for (const CatalogEntry* c : {&h, &p}) {
        const Vec x = vec({0.3, -0.7});
        EXPECT_NEAR(leaf_metric(c->chart, c->metric, x, e1, e1), 1.0, 1e-15);
        EXPECT_NEAR(leaf_metric(c->chart, c->metric, x, e1, e2), 0.0, 1e-15);
        EXPECT_NEAR(leaf_metric(c->chart, c->metric, x, e2, e2), 1.0, 1e-15);
    }
    const Vec x3 = vec({1, 2, 3});
    EXPECT_NEAR(leaf_metric(f.chart, f.metric, x3, vec({1, 0, 0}), vec({1, 0, 0})), 1.0, 1e-15);
    EXPECT_NEAR(leaf_metric(f.chart, f.metric, x3, vec({1, 0, 0}), vec({0, 1, 0})), 0.0, 1e-15);
    EXPECT_NEAR(leaf_geometry(h.chart, h.metric, vec({0, 0})).h(0, 0), 1.0, 1e-15);
}

TEST(CurvatureIdentities, HeisenbergHorizontalPair) {
    const CatalogEntry e = catalog::get("heisenberg_central");
    const auto ids = oneill_curvature_check(e.chart, e.metric, vec({0.2, 0.1}));
    ASSERT_EQ(ids.size(), 3u);
    EXPECT_FALSE(ids[0].applicable);  // one-dimensional kernel
    EXPECT_EQ(ids[2].name, "horizontal_pair");
    EXPECT_NEAR(ids[2].lhs, -0.75, 1e-12);
    EXPECT_LT(ids[2].residual(), 1e-8);
    EXPECT_EQ(ids[1].name, "mixed_pair");
    EXPECT_NEAR(ids[1].lhs, 0.25, 1e-12);
    EXPECT_LT(ids[1].residual(), 1e-8);
}

TEST(CurvatureIdentities, FlatPlane) {
    const CatalogEntry e = catalog::get("euclidean2");
    for (const CurvatureIdentity& c : oneill_curvature_check(e.chart, e.metric, vec({1, 1}))) {
        EXPECT_EQ(c.residual(), 0.0);
        if (c.applicable) {
            EXPECT_EQ(c.lhs, 0.0);
        }
    }
}

TEST(CurvatureIdentities, HoldAtRandomPoints) {
    for (const CatalogEntry& e : all_charts()) {
        if (!transitive(e) && !lie_algebra(e)) {
            EXPECT_THROW(oneill_curvature_check(e.chart, e.metric, e.chart.domain().center()), PreconditionError);
            continue;
        }
        for (const AVector& v : sample_vectors(e.chart, 10, 31))
            for (const CurvatureIdentity& c : oneill_curvature_check(e.chart, e.metric, v.x))
                EXPECT_LT(c.residual(), 1e-8) << e.name << " " << c.name;
    }
}

TEST(CurvatureIdentities, So3VerticalPair) {
    // Bi-invariant so(3) with the unit metric: K = 1/4 on every plane.
    const CatalogEntry e = catalog::get("so3_biinv");
    const auto ids = oneill_curvature_check(e.chart, e.metric, vec({0.0}));
    ASSERT_TRUE(ids[0].applicable);
    EXPECT_NEAR(ids[0].lhs, 0.25, 1e-14);
    EXPECT_LT(ids[0].residual(), 1e-12);
}

TEST(HorizontalGeodesic, FollowsLeafGeodesic) {
    const CatalogEntry e = catalog::get("heisenberg_central");
    const Vec x0 = vec({-0.3, 0.2});
    const Vec mu0 = vec({1, 1, 0}) / std::sqrt(2.0);
    const APath g = geodesic_integrate(e.chart, e.metric, {x0, mu0}, 0.0, 1.0);
    const LeafPath l = leaf_geodesic(e.chart, e.metric, x0, anchor_apply(e.chart, {x0, mu0}), 1.0);
    ASSERT_EQ(g.size(), l.t.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        EXPECT_LT(max_abs(g.x[k] - l.x[k]), 1e-7);
        EXPECT_LT(std::abs(g.mu[k][2]), 1e-12);  // stays horizontal
    }
    EXPECT_LT(max_abs(l.x.back() - (x0 + mu0.head(2))), 1e-12);
}

TEST(HorizontalGeodesic, TwistedChartAgrees) {
    const CatalogEntry e = twisted();
    const Vec x0 = vec({0.1, -0.2});
    const SplitFrame f = split(e.chart, e.metric, x0);
    const Vec mu0 = f.Ph * vec({0.3, 0.4, 0.2});
    const APath g = geodesic_integrate(e.chart, e.metric, {x0, mu0}, 0.0, 1.0);
    const LeafPath l = leaf_geodesic(e.chart, e.metric, x0, anchor_apply(e.chart, {x0, mu0}), 1.0);
    for (std::size_t k = 0; k < g.size(); k += 50) EXPECT_LT(max_abs(g.x[k] - l.x[k]), 1e-7);
}
