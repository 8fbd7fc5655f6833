#include "support.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace ralg;
using namespace ralg::testing;

TEST(Poisson, Plane) {
    const CatalogEntry e = catalog::get("euclidean2");
    const Mat pi = poisson_matrix(e.chart, {vec({0.5, -2}), vec({3, 4})});
    Mat expected = Mat::Zero(4, 4);
    expected.topRightCorner(2, 2) = -Mat::Identity(2, 2);
    expected.bottomLeftCorner(2, 2) = Mat::Identity(2, 2);
    EXPECT_EQ(pi, expected);
}

TEST(Poisson, So3Cyclic) {
    const CatalogEntry e = catalog::get("so3_biinv");
    const Vec xi = vec({0.3, -1.1, 2.5});
    const Mat pi = poisson_matrix(e.chart, {vec({0.0}), xi});
    EXPECT_EQ(pi(1, 2), xi[2]);
    EXPECT_EQ(pi(2, 3), xi[0]);
    EXPECT_EQ(pi(3, 1), xi[1]);
    EXPECT_EQ(pi(2, 1), -xi[2]);
    EXPECT_EQ(pi.row(0).norm(), 0.0);
}

TEST(Poisson, Heisenberg) {
    const CatalogEntry e = catalog::get("heisenberg_central");
    const Mat pi = poisson_matrix(e.chart, {vec({0.1, 0.2}), vec({1, 2, 7})});
    EXPECT_EQ(pi(0, 2), -1.0);
    EXPECT_EQ(pi(1, 3), -1.0);
    EXPECT_EQ(pi(2, 3), 7.0);
    EXPECT_EQ(pi(0, 4), 0.0);
    EXPECT_EQ(pi(1, 4), 0.0);
    EXPECT_EQ(pi(2, 4), 0.0);
}

TEST(Poisson, Antisymmetric) {
    for (const CatalogEntry& e : all_charts())
        for (const AVector& a : sample_vectors(e.chart, 10)) {
            const Mat pi = poisson_matrix(e.chart, {a.x, a.mu});
            EXPECT_EQ(pi, Mat(-pi.transpose())) << e.name;
        }
}

TEST(MetricIso, IdentityMetric) {
    const CatalogEntry e = catalog::get("heisenberg_central");
    EXPECT_EQ(metric_iso(e.metric, {vec({0, 0}), vec({1, 2, 3})}).mu, vec({1, 2, 3}));
    const CatalogEntry s = catalog::get("sphere_chart");
    EXPECT_LT(max_abs(metric_iso(s.metric, {vec({std::numbers::pi / 2, 1}), vec({-1, 2})}).mu - vec({-1, 2})), 1e-15);
}

TEST(MetricIso, RoundTripAndIsometry) {
    for (const CatalogEntry& e : all_charts())
        for (const AVector& a : sample_vectors(e.chart, 20)) {
            const DualPoint p{a.x, a.mu};
            EXPECT_LT(max_abs(metric_iso_inv(e.metric, metric_iso(e.metric, p)).xi - p.xi), 1e-12) << e.name;
            const MetricAt m = e.metric.at(a.x, 0);
            const double lhs = m.norm2(metric_iso(e.metric, p).mu), rhs = p.xi.dot(m.ginv * p.xi);
            EXPECT_NEAR(lhs, rhs, 1e-10) << e.name;
        }
}

TEST(MetricIso, SingularMetricRejected) {
    const CatalogEntry e = catalog::get("euclidean2");
    const MetricField bad(2, 2, {{0, 0, ex("x1^2", 2)}, {1, 1, Expression::constant(1, 2)}});
    EXPECT_THROW(metric_iso(bad, {vec({0, 0}), vec({1, 1})}), SingularMetric);
    EXPECT_THROW(hamiltonian_field(e.chart, bad, {vec({0, 0}), vec({1, 1})}), SingularMetric);
}

TEST(HamiltonianField, Examples) {
    const CatalogEntry plane = catalog::get("euclidean2");
    const HamiltonianField a = hamiltonian_field(plane.chart, plane.metric, {vec({0.2, 0.3}), vec({1, 2})});
    EXPECT_EQ(a.dx, vec({1, 2}));
    EXPECT_EQ(a.dmu, vec({0, 0}));

    const CatalogEntry so3 = catalog::get("so3_biinv");
    for (const AVector& v : sample_vectors(so3.chart, 10))
        EXPECT_LT(max_abs(hamiltonian_field(so3.chart, so3.metric, v).dmu), 1e-15);

    const CatalogEntry aff = catalog::get("aff2");
    const HamiltonianField c = hamiltonian_field(aff.chart, aff.metric, {vec({0.0}), vec({0, 1})});
    EXPECT_EQ(c.dx, vec({0.0}));
    EXPECT_LT(max_abs(c.dmu - vec({-1, 0})), 1e-15);
}

TEST(HamiltonianField, EulerIdentity) {
    const CatalogEntry plane = catalog::get("euclidean2");
    EXPECT_EQ(euler_identity_residual(plane.chart, plane.metric, {vec({1, 1}), vec({0.3, -0.8})}), 0.0);
    for (const CatalogEntry& e : all_charts())
        for (const AVector& v : sample_vectors(e.chart, 20, 5))
            EXPECT_LT(euler_identity_residual(e.chart, e.metric, v), 1e-12) << e.name;
}

TEST(HamiltonianField, MatchesGeodesicEquation) {
    for (const CatalogEntry& e : all_charts())
        for (const AVector& v : sample_vectors(e.chart, 100)) {
            const HamiltonianField h = hamiltonian_field(e.chart, e.metric, v);
            const auto [dx, dmu] = geodesic_rhs(e.chart, e.metric, v.x, v.mu);
            EXPECT_LT(max_abs(h.dx - dx), 1e-8) << e.name;
            EXPECT_LT(max_abs(h.dmu - dmu), 1e-8) << e.name;
        }
}

TEST(HamiltonianField, EnergyIsCasimirOfItsOwnFlow) {
    // {E, E} = dE^T pi dE.
    for (const CatalogEntry& e : all_charts())
        for (const AVector& v : sample_vectors(e.chart, 20, 3)) {
            const int n = e.chart.n();
            const DualPoint p = metric_iso_inv(e.metric, v);
            const MetricAt m = e.metric.at(v.x, 1);
            Vec dE(n + e.chart.r());
            for (int i = 0; i < n; ++i) {
                const Mat dginv = -m.ginv * m.dg[i] * m.ginv;
                dE[i] = 0.5 * p.xi.dot(dginv * p.xi);
            }
            dE.tail(e.chart.r()) = m.ginv * p.xi;
            EXPECT_LT(std::abs(dE.dot(poisson_matrix(e.chart, p) * dE)), 1e-12) << e.name;
        }
}

TEST(HamiltonianField, FlowPreservesEnergy) {
    // dE/dt along X_E, with E as a function of (x, mu).
    for (const CatalogEntry& e : all_charts())
        for (const AVector& v : sample_vectors(e.chart, 20, 8)) {
            const HamiltonianField h = hamiltonian_field(e.chart, e.metric, v);
            const double step = 1e-6;
            const double ep = energy(e.metric, {v.x + step * h.dx, v.mu + step * h.dmu});
            const double em = energy(e.metric, {v.x - step * h.dx, v.mu - step * h.dmu});
            EXPECT_LT(std::abs(ep - em) / (2 * step), 1e-7) << e.name;
        }
}
