#pragma once

// Geodesic flow seen from the dual bundle: the linear Poisson structure on A*
//
//   {x_i, x_j} = 0,  {x_i, xi_s} = -b^{si},  {xi_s, xi_t} = sum_u C_st^u xi_u
//
// and E = 1/2 sum g^{ij} xi_i xi_j. The field X_E(f) = {E, f} is pushed to
// (x, mu) through mu = g^{-1} xi. Nothing here uses Christoffel symbols.

#include "ralg/algebroid.hpp"
#include "ralg/dual_matrix.hpp"
#include "ralg/metric.hpp"
#include "ralg/tensor.hpp"

#include <utility>

namespace ralg {

struct DualPoint {
    Vec x;
    Vec xi;
};

/// Antisymmetric (n+r)x(n+r) bivector in coordinates (x_1..x_n, xi_1..xi_r).
inline Mat poisson_matrix(const AlgebroidChart& chart, const DualPoint& p) {
    const int n = chart.n(), r = chart.r();
    if (p.x.size() != n || p.xi.size() != r) throw PreconditionError("dual point has wrong dimensions");
    Mat pi = Mat::Zero(n + r, n + r);
    for (int s = 0; s < r; ++s)
        for (int i = 0; i < n; ++i) {
            const double b = chart.anchor(s, i).value(p.x);
            pi(i, n + s) = -b;
            pi(n + s, i) = b;
        }
    for (int s = 0; s < r; ++s)
        for (int t = s + 1; t < r; ++t) {
            double v = 0.0;
            for (int u = 0; u < r; ++u) {
                const Expression& c = chart.bracket(s, t, u);
                if (!c.is_zero()) v += c.value(p.x) * p.xi[u];
            }
            pi(n + s, n + t) = v;
            pi(n + t, n + s) = -v;
        }
    return pi;
}

/// g^{-1} at x as hyper-duals: value plus exact x-gradient of every entry.
inline SquareMatrix<HyperDual> inverse_metric_dual(const MetricField& metric, const Vec& x) {
    const int r = metric.r();
    SquareMatrix<HyperDual> g{r, {}};
    g.a.reserve(static_cast<std::size_t>(r * r));
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) g.a.push_back(metric.entry(i, j).dual(x, false));
    (void)metric.at(x, 0);  // positive-definiteness check
    return invert(std::move(g));
}

/// mu_k = sum_i g^{ki} xi_i.
inline AVector metric_iso(const MetricField& metric, const DualPoint& p) {
    return {p.x, metric.at(p.x, 0).ginv * p.xi};
}

/// xi_i = sum_k g_ik mu_k.
inline DualPoint metric_iso_inv(const MetricField& metric, const AVector& v) {
    return {v.x, metric.at(v.x, 0).g * v.mu};
}

struct HamiltonianField {
    Vec dx, dmu;
};

inline HamiltonianField hamiltonian_field(const AlgebroidChart& chart, const MetricField& metric, const AVector& v) {
    const int n = chart.n(), r = chart.r();
    if (v.x.size() != n || v.mu.size() != r) throw PreconditionError("vector has wrong dimensions");
    const SquareMatrix<HyperDual> ginv = inverse_metric_dual(metric, v.x);
    Mat G(r, r);
    std::vector<Mat> dG(static_cast<std::size_t>(n), Mat(r, r));
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            G(i, j) = ginv(i, j).value();
            for (int m = 0; m < n; ++m) dG[m](i, j) = ginv(i, j).gradient()[m];
        }
    const DualPoint p = metric_iso_inv(metric, v);

    // dE in (x, xi).
    Vec dE(n + r);
    for (int m = 0; m < n; ++m) dE[m] = 0.5 * p.xi.dot(dG[m] * p.xi);
    dE.tail(r) = G * p.xi;

    // dz_a/dt = {E, z_a} = sum_b pi(b, a) dE_b.
    const Vec zdot = poisson_matrix(chart, p).transpose() * dE;
    HamiltonianField out;
    out.dx = zdot.head(n);
    out.dmu = G * zdot.tail(r);
    for (int m = 0; m < n; ++m) out.dmu += out.dx[m] * (dG[m] * p.xi);
    return out;
}

/// |X_E(x, 2mu) - (2 dx, 4 dmu)|, max over components.
inline double euler_identity_residual(const AlgebroidChart& chart, const MetricField& metric, const AVector& v) {
    const HamiltonianField a = hamiltonian_field(chart, metric, v);
    const HamiltonianField b = hamiltonian_field(chart, metric, {v.x, 2.0 * v.mu});
    return std::max(max_abs(b.dx - 2.0 * a.dx), max_abs(b.dmu - 4.0 * a.dmu));
}

}  // namespace ralg
