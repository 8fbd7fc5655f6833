#pragma once

// A-paths, geodesics, parallel transport, Jacobi sections and d(exp).
//
// Geodesics solve
//   dx_i/dt  = sum_j mu_j b^{ji}
//   dmu_j/dt = -sum_{s,u} mu_s mu_u Gamma_su^j
// with classical RK4 on a fixed grid; paths keep node derivatives so they can
// be evaluated anywhere by cubic Hermite interpolation.

#include "ralg/algebroid.hpp"
#include "ralg/errors.hpp"
#include "ralg/metric.hpp"
#include "ralg/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace ralg {

inline constexpr double kDefaultStep = 1e-3;
inline constexpr double kGeneratedPathTolerance = 1e-9;
inline constexpr double kUserPathTolerance = 1e-6;
inline constexpr double kGeodesicTolerance = 1e-6;

namespace detail {

struct HermiteWeights {
    double h00, h10, h01, h11;     // value
    double d00, d10, d01, d11;     // derivative
};

inline HermiteWeights hermite(double s, double h) {
    const double s2 = s * s, s3 = s2 * s;
    return {2 * s3 - 3 * s2 + 1, (s3 - 2 * s2 + s) * h, -2 * s3 + 3 * s2, (s3 - s2) * h,
            (6 * s2 - 6 * s) / h, 3 * s2 - 4 * s + 1, (-6 * s2 + 6 * s) / h, 3 * s2 - 2 * s};
}

/// Interval index k with t[k] <= time <= t[k+1] (clamped to the grid).
inline std::size_t locate(const std::vector<double>& t, double time) {
    if (t.size() < 2) throw PreconditionError("grid needs at least two nodes");
    auto it = std::upper_bound(t.begin(), t.end(), time);
    std::size_t k = it == t.begin() ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
    return std::min(k, t.size() - 2);
}

/// Weights for the first derivative at t[at] from nodes t[first..first+count).
/// Fornberg's recursion; works on non-uniform grids.
inline std::vector<double> derivative_weights(const std::vector<double>& t, std::size_t first, std::size_t count,
                                              std::size_t at) {
    const double z = t[at];
    std::vector<std::vector<double>> c(count, std::vector<double>(2, 0.0));
    double c1 = 1.0, c4 = t[first] - z;
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < count; ++i) {
        const std::size_t mn = std::min<std::size_t>(i, 1);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = t[first + i] - z;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = t[first + i] - t[first + j];
            c2 *= c3;
            if (j == i - 1) {
                for (std::size_t k = mn; k >= 1; --k) c[i][k] = c1 * (static_cast<double>(k) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (std::size_t k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - static_cast<double>(k) * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(count);
    for (std::size_t i = 0; i < count; ++i) w[i] = c[i][1];
    return w;
}

/// Fourth-order finite-difference derivative of node values: centered five-point
/// stencils in the interior, shifted stencils near the ends.
inline std::vector<Vec> differentiate(const std::vector<double>& t, const std::vector<Vec>& y) {
    const std::size_t N = t.size();
    if (N < 5) throw PreconditionError("differentiation needs at least five nodes");
    std::vector<Vec> out(N);
    for (std::size_t k = 0; k < N; ++k) {
        const std::size_t first = std::min(k < 2 ? 0 : k - 2, N - 5);
        const std::vector<double> w = derivative_weights(t, first, 5, k);
        Vec d = Vec::Zero(y[k].size());
        for (std::size_t i = 0; i < 5; ++i) d += w[i] * y[first + i];
        out[k] = d;
    }
    return out;
}

}  // namespace detail

/// A time-discretized A-path: states and their time derivatives at the nodes.
struct APath {
    std::vector<double> t;
    std::vector<Vec> x, mu, dx, dmu;
    double energy_drift = 0.0;  // max |E(t)-E(0)|/E(0), geodesics only

    std::size_t size() const { return t.size(); }
    int n() const { return x.empty() ? 0 : static_cast<int>(x.front().size()); }
    int r() const { return mu.empty() ? 0 : static_cast<int>(mu.front().size()); }
    AVector node(std::size_t k) const { return {x[k], mu[k]}; }
    AVector front() const { return node(0); }
    AVector back() const { return node(size() - 1); }

    Vec x_at(double time) const { return interp(x, dx, time); }
    Vec mu_at(double time) const { return interp(mu, dmu, time); }
    AVector at(double time) const { return {x_at(time), mu_at(time)}; }
    Vec velocity_at(double time) const { return interp_derivative(x, dx, time); }

    /// The path run backwards: t -> -alpha(T0 + T1 - t).
    APath reversed() const {
        APath out;
        const double t0 = t.front(), t1 = t.back();
        for (std::size_t k = size(); k-- > 0;) {
            out.t.push_back(t0 + t1 - t[k]);
            out.x.push_back(x[k]);
            out.mu.push_back(-mu[k]);
            out.dx.push_back(-dx[k]);
            out.dmu.push_back(dmu[k]);
        }
        return out;
    }

    /// Build from sampled nodes; node derivatives by fourth-order differences.
    static APath from_samples(std::vector<double> times, std::vector<Vec> xs, std::vector<Vec> mus) {
        if (times.size() != xs.size() || times.size() != mus.size()) throw PreconditionError("sample arrays differ in length");
        for (std::size_t k = 1; k < times.size(); ++k)
            if (!(times[k] > times[k - 1])) throw PreconditionError("path times must be strictly increasing");
        APath p;
        p.dx = detail::differentiate(times, xs);
        p.dmu = detail::differentiate(times, mus);
        p.t = std::move(times);
        p.x = std::move(xs);
        p.mu = std::move(mus);
        return p;
    }

    /// max over interval midpoints of |#(alpha(t)) - d/dt p(alpha(t))|.
    double constraint_residual(const AlgebroidChart& chart) const {
        double worst = 0.0;
        for (std::size_t k = 0; k + 1 < size(); ++k) {
            const double tm = 0.5 * (t[k] + t[k + 1]);
            const AVector a = at(tm);
            worst = std::max(worst, max_abs(anchor_apply(chart, a) - velocity_at(tm)));
        }
        return worst;
    }

private:
    Vec interp(const std::vector<Vec>& y, const std::vector<Vec>& d, double time) const {
        const std::size_t k = detail::locate(t, time);
        const double h = t[k + 1] - t[k];
        const detail::HermiteWeights w = detail::hermite((time - t[k]) / h, h);
        return w.h00 * y[k] + w.h10 * d[k] + w.h01 * y[k + 1] + w.h11 * d[k + 1];
    }
    Vec interp_derivative(const std::vector<Vec>& y, const std::vector<Vec>& d, double time) const {
        const std::size_t k = detail::locate(t, time);
        const double h = t[k + 1] - t[k];
        const detail::HermiteWeights w = detail::hermite((time - t[k]) / h, h);
        return w.d00 * y[k] + w.d10 * d[k] + w.d01 * y[k + 1] + w.d11 * d[k + 1];
    }
};

/// An alpha-section in fiber coordinates on its host path's grid.
struct FiberCurve {
    std::vector<double> t;
    std::vector<Vec> values;

    std::size_t size() const { return t.size(); }
    double max_norm() const {
        double m = 0.0;
        for (const Vec& v : values) m = std::max(m, max_abs(v));
        return m;
    }
};

/// The geodesic left the chart's domain box. Carries the path up to the last
/// node inside the box.
class DomainExit : public Error {
public:
    DomainExit(double exit_time, APath partial)
        : Error("trajectory left the domain box at t = " + format_real(exit_time)),
          exit_time_(exit_time),
          partial_(std::move(partial)) {}

    double exit_time() const noexcept { return exit_time_; }
    const APath& partial() const noexcept { return partial_; }

private:
    double exit_time_;
    APath partial_;
};

namespace detail {

inline int step_count(double t0, double t1, double h) {
    if (!(t1 > t0)) throw PreconditionError("time span must be increasing");
    if (!(h > 0.0)) throw PreconditionError("step must be positive");
    return std::max(1, static_cast<int>(std::ceil((t1 - t0) / h - 1e-9)));
}

/// Classical RK4 step for y' = f(t, y).
template <class F>
Vec rk4_step(F&& f, double t, const Vec& y, double h) {
    const Vec k1 = f(t, y);
    const Vec k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
    const Vec k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
    const Vec k4 = f(t + h, y + h * k3);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace detail

/// Right-hand side of the geodesic system at (x, mu): (dx, dmu).
inline std::pair<Vec, Vec> geodesic_rhs(const AlgebroidChart& chart, const MetricField& metric, const Vec& x,
                                        const Vec& mu) {
    const PointGeometry p = geometry_at(chart, metric, x, 0);
    return {p.st.b.transpose() * mu, -p.chr.contract(mu, mu)};
}

inline double energy(const MetricField& metric, const AVector& v) { return 0.5 * metric.at(v.x, 0).norm2(v.mu); }

inline APath geodesic_integrate(const AlgebroidChart& chart, const MetricField& metric, const AVector& start,
                                double t0, double t1, double h = kDefaultStep) {
    const int n = chart.n(), r = chart.r();
    if (start.x.size() != n || start.mu.size() != r) throw PreconditionError("start vector has wrong dimensions");
    if (!chart.domain().contains(start.x)) throw PreconditionError("start point outside the domain box");
    const int steps = detail::step_count(t0, t1, h);
    const double dt = (t1 - t0) / steps;

    auto f = [&](double, const Vec& y) {
        const auto [dx, dmu] = geodesic_rhs(chart, metric, y.head(n), y.tail(r));
        Vec out(n + r);
        out << dx, dmu;
        return out;
    };

    APath path;
    Vec y(n + r);
    y << start.x, start.mu;
    const double e0 = energy(metric, start);
    auto push = [&](double time, const Vec& state) {
        const Vec d = f(time, state);
        path.t.push_back(time);
        path.x.push_back(state.head(n));
        path.mu.push_back(state.tail(r));
        path.dx.push_back(d.head(n));
        path.dmu.push_back(d.tail(r));
        const double e = energy(metric, {state.head(n), state.tail(r)});
        if (e0 > 0.0) path.energy_drift = std::max(path.energy_drift, std::abs(e - e0) / e0);
    };
    push(t0, y);
    for (int k = 1; k <= steps; ++k) {
        const double time = k == steps ? t1 : t0 + k * dt;
        y = detail::rk4_step(f, t0 + (k - 1) * dt, y, dt);
        if (!chart.domain().contains(y.head(n))) throw DomainExit(time, path);
        push(time, y);
    }
    return path;
}

inline Vec exp_map(const AlgebroidChart& chart, const MetricField& metric, const Vec& m, const Vec& a,
                   double h = kDefaultStep) {
    return geodesic_integrate(chart, metric, {m, a}, 0.0, 1.0, h).back().x;
}

namespace detail {

/// Integrate a linear fiber ODE y' = F(t, alpha(t), x(t), y) on the path's grid.
template <class F>
std::vector<Vec> integrate_along(const APath& alpha, const Vec& y0, F&& rhs) {
    std::vector<Vec> out{y0};
    out.reserve(alpha.size());
    Vec y = y0;
    for (std::size_t k = 0; k + 1 < alpha.size(); ++k) {
        y = rk4_step(rhs, alpha.t[k], y, alpha.t[k + 1] - alpha.t[k]);
        out.push_back(y);
    }
    return out;
}

}  // namespace detail

/// Solve s' = -sum alpha^i s^j Gamma_ij with s(t0) = s0.
inline FiberCurve parallel_transport(const AlgebroidChart& chart, const MetricField& metric, const APath& alpha,
                                     const Vec& s0) {
    if (s0.size() != chart.r()) throw PreconditionError("initial section has wrong rank");
    auto rhs = [&](double time, const Vec& s) {
        const AVector a = alpha.at(time);
        return Vec(-christoffel(chart, metric, a.x).contract(a.mu, s));
    };
    return {alpha.t, detail::integrate_along(alpha, s0, rhs)};
}

/// Matrix whose columns transport the basis a_1..a_r to the end of the path.
inline Mat transport_matrix(const AlgebroidChart& chart, const MetricField& metric, const APath& alpha) {
    const int r = chart.r();
    Mat P(r, r);
    for (int j = 0; j < r; ++j) P.col(j) = parallel_transport(chart, metric, alpha, Vec::Unit(r, j)).values.back();
    return P;
}

/// (nabla^alpha s)(t) = s'(t) + sum alpha^i s^j Gamma_ij at the nodes.
inline FiberCurve derivative_along(const AlgebroidChart& chart, const MetricField& metric, const APath& alpha,
                                   const FiberCurve& s) {
    if (s.t != alpha.t) throw PreconditionError("fiber curve grid differs from the path grid");
    const std::vector<Vec> ds = detail::differentiate(s.t, s.values);
    FiberCurve out{s.t, {}};
    out.values.reserve(s.size());
    for (std::size_t k = 0; k < s.size(); ++k)
        out.values.push_back(ds[k] + christoffel(chart, metric, alpha.x[k]).contract(alpha.mu[k], s.values[k]));
    return out;
}

inline double geodesic_residual(const AlgebroidChart& chart, const MetricField& metric, const APath& alpha) {
    return derivative_along(chart, metric, alpha, FiberCurve{alpha.t, alpha.mu}).max_norm();
}

struct JacobiSolution {
    FiberCurve beta;
    FiberCurve dbeta;  // nabla^alpha beta
};

/// beta'' = R(alpha, beta) alpha with beta'' the iterated derivative along alpha.
inline JacobiSolution jacobi_solve(const AlgebroidChart& chart, const MetricField& metric, const APath& alpha,
                                   const Vec& beta0, const Vec& dbeta0, double tol = kGeodesicTolerance) {
    const int r = chart.r();
    if (beta0.size() != r || dbeta0.size() != r) throw PreconditionError("initial data has wrong rank");
    const double res = geodesic_residual(chart, metric, alpha);
    if (!(res < tol)) throw PreconditionError("path is not a geodesic (residual " + format_real(res) + ")");
    auto rhs = [&](double time, const Vec& y) {
        const AVector a = alpha.at(time);
        const PointGeometry p = geometry_at(chart, metric, a.x, 1);
        const Curvature R = curvature_from(p);
        const Vec b = y.head(r), w = y.tail(r);
        Vec out(2 * r);
        out << w - p.chr.contract(a.mu, b), R.apply(a.mu, b, a.mu) - p.chr.contract(a.mu, w);
        return out;
    };
    Vec y0(2 * r);
    y0 << beta0, dbeta0;
    const std::vector<Vec> ys = detail::integrate_along(alpha, y0, rhs);
    JacobiSolution out{{alpha.t, {}}, {alpha.t, {}}};
    for (const Vec& y : ys) {
        out.beta.values.push_back(y.head(r));
        out.dbeta.values.push_back(y.tail(r));
    }
    return out;
}

/// d_a exp_m(u) = #(beta(1)) for the Jacobi section with beta(0)=0, beta'(0)=u.
inline Vec dexp(const AlgebroidChart& chart, const MetricField& metric, const Vec& m, const Vec& a, const Vec& u,
                double h = kDefaultStep) {
    const APath alpha = geodesic_integrate(chart, metric, {m, a}, 0.0, 1.0, h);
    const JacobiSolution J = jacobi_solve(chart, metric, alpha, Vec::Zero(chart.r()), u);
    return anchor_apply(chart, {alpha.x.back(), J.beta.values.back()});
}

}  // namespace ralg
