#pragma once

// Variations of A-paths on a rectangular (eps, t) mesh.
//
//   Delta(alpha, beta) = D_t beta - D_eps alpha
//
// with D_t beta = d_t beta + Gamma(alpha, beta) and D_eps alpha = d_eps alpha
// + Gamma(beta, alpha). Mesh derivatives are second-order finite differences
// (centered inside, one-sided at the edges).

#include "ralg/algebroid.hpp"
#include "ralg/errors.hpp"
#include "ralg/metric.hpp"
#include "ralg/paths.hpp"
#include "ralg/tensor.hpp"

#include <string>
#include <vector>

namespace ralg {

inline constexpr double kTransverseInputTolerance = 1e-6;
inline constexpr double kTransverseOutputTolerance = 1e-4;
inline constexpr double kHomotopyTolerance = 1e-5;

class MeshTooCoarse : public Error {
public:
    using Error::Error;
};

/// alpha(eps_i, t_j) and optionally beta(eps_i, t_j), stored row-major by eps.
struct VariationGrid {
    std::vector<double> eps, t;
    std::vector<Vec> x, mu, beta;

    int n_eps() const { return static_cast<int>(eps.size()); }
    int n_t() const { return static_cast<int>(t.size()); }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i * n_t() + j); }
    bool has_beta() const { return !beta.empty(); }

    const Vec& x_at(int i, int j) const { return x[index(i, j)]; }
    const Vec& mu_at(int i, int j) const { return mu[index(i, j)]; }
    const Vec& beta_at(int i, int j) const { return beta[index(i, j)]; }

    /// Rows sampled from A-paths that share one time grid.
    static VariationGrid from_paths(std::vector<double> eps, const std::vector<APath>& rows) {
        if (eps.size() != rows.size()) throw PreconditionError("one path per eps value expected");
        VariationGrid g;
        g.eps = std::move(eps);
        g.t = rows.front().t;
        for (const APath& p : rows) {
            if (p.t != g.t) throw PreconditionError("paths must share the time grid");
            g.x.insert(g.x.end(), p.x.begin(), p.x.end());
            g.mu.insert(g.mu.end(), p.mu.begin(), p.mu.end());
        }
        return g;
    }

    void check_shape(bool need_beta) const {
        if (n_eps() < 3 || n_t() < 3) throw MeshTooCoarse("variation mesh needs at least 3 nodes in each direction");
        const std::size_t N = eps.size() * t.size();
        if (x.size() != N || mu.size() != N) throw PreconditionError("variation grid arrays have the wrong size");
        if (need_beta && beta.size() != N) throw PreconditionError("variation grid has no transverse field");
        for (std::size_t k = 1; k < eps.size(); ++k)
            if (!(eps[k] > eps[k - 1])) throw PreconditionError("eps grid must be increasing");
        for (std::size_t k = 1; k < t.size(); ++k)
            if (!(t[k] > t[k - 1])) throw PreconditionError("t grid must be increasing");
    }
};

namespace detail {

/// Second-order derivative weights at node k of grid `z`.
inline std::vector<double> mesh_weights(const std::vector<double>& z, std::size_t k, std::size_t& first) {
    const std::size_t N = z.size();
    first = k == 0 ? 0 : (k == N - 1 ? N - 3 : k - 1);
    return derivative_weights(z, first, 3, k);
}

/// d/dt of a node field at (i, j).
inline Vec d_t(const VariationGrid& g, const std::vector<Vec>& f, int i, int j) {
    std::size_t first = 0;
    const std::vector<double> w = mesh_weights(g.t, static_cast<std::size_t>(j), first);
    Vec out = w[0] * f[g.index(i, static_cast<int>(first))];
    for (std::size_t m = 1; m < 3; ++m) out += w[m] * f[g.index(i, static_cast<int>(first + m))];
    return out;
}

/// d/deps of a node field at (i, j).
inline Vec d_eps(const VariationGrid& g, const std::vector<Vec>& f, int i, int j) {
    std::size_t first = 0;
    const std::vector<double> w = mesh_weights(g.eps, static_cast<std::size_t>(i), first);
    Vec out = w[0] * f[g.index(static_cast<int>(first), j)];
    for (std::size_t m = 1; m < 3; ++m) out += w[m] * f[g.index(static_cast<int>(first + m), j)];
    return out;
}

/// Cubic Lagrange interpolation of a row at time `time` from the 4 nearest nodes.
inline Vec lagrange_row(const VariationGrid& g, const std::vector<Vec>& f, int i, double time) {
    const int N = g.n_t();
    const std::size_t k = locate(g.t, time);
    int first = static_cast<int>(k) - 1;
    first = std::clamp(first, 0, std::max(0, N - 4));
    const int count = std::min(4, N);
    Vec out = Vec::Zero(f[g.index(i, first)].size());
    for (int a = 0; a < count; ++a) {
        double w = 1.0;
        for (int b = 0; b < count; ++b)
            if (b != a) w *= (time - g.t[first + b]) / (g.t[first + a] - g.t[first + b]);
        out += w * f[g.index(i, first + a)];
    }
    return out;
}

inline Christoffel gamma_at(const AlgebroidChart& chart, const MetricField& metric, const Vec& x) {
    return christoffel(chart, metric, x);
}

}  // namespace detail

/// max over rows and interval midpoints of |#(alpha) - d_t gamma|, using
/// node differences for d_t gamma.
inline double apath_residual(const AlgebroidChart& chart, const VariationGrid& g) {
    double worst = 0.0;
    for (int i = 0; i < g.n_eps(); ++i)
        for (int j = 0; j < g.n_t(); ++j)
            worst = std::max(worst, max_abs(anchor_apply(chart, {g.x_at(i, j), g.mu_at(i, j)}) - detail::d_t(g, g.x, i, j)));
    return worst;
}

/// max over interior nodes of |#(beta) - d_eps gamma|.
inline double transversality_residual(const AlgebroidChart& chart, const VariationGrid& g) {
    g.check_shape(true);
    double worst = 0.0;
    for (int i = 1; i + 1 < g.n_eps(); ++i)
        for (int j = 1; j + 1 < g.n_t(); ++j)
            worst = std::max(worst,
                             max_abs(anchor_apply(chart, {g.x_at(i, j), g.beta_at(i, j)}) - detail::d_eps(g, g.x, i, j)));
    return worst;
}

/// Delta at every node (one-sided differences on the mesh edges).
inline std::vector<Vec> delta(const AlgebroidChart& chart, const MetricField& metric, const VariationGrid& g) {
    g.check_shape(true);
    std::vector<Vec> out(g.x.size());
    for (int i = 0; i < g.n_eps(); ++i)
        for (int j = 0; j < g.n_t(); ++j) {
            const Christoffel c = detail::gamma_at(chart, metric, g.x_at(i, j));
            const Vec& a = g.mu_at(i, j);
            const Vec& b = g.beta_at(i, j);
            const Vec Dt_beta = detail::d_t(g, g.beta, i, j) + c.contract(a, b);
            const Vec De_alpha = detail::d_eps(g, g.mu, i, j) + c.contract(b, a);
            out[g.index(i, j)] = Dt_beta - De_alpha;
        }
    return out;
}

/// max over interior nodes of |#(Delta)|.
inline double delta_anchor_residual(const AlgebroidChart& chart, const VariationGrid& g, const std::vector<Vec>& d) {
    double worst = 0.0;
    for (int i = 1; i + 1 < g.n_eps(); ++i)
        for (int j = 1; j + 1 < g.n_t(); ++j)
            worst = std::max(worst, max_abs(anchor_apply(chart, {g.x_at(i, j), d[g.index(i, j)]})));
    return worst;
}

struct TransverseResult {
    VariationGrid grid;
    double transversality = 0.0;
};

/// Integrate d_t beta = d_eps alpha + sum (beta^i alpha^j - alpha^i beta^j) Gamma_ij
/// along every eps-row from beta(eps, t_0) = beta0[eps].
inline TransverseResult solve_transverse(const AlgebroidChart& chart, const MetricField& metric, VariationGrid g,
                                         const std::vector<Vec>& beta0) {
    g.check_shape(false);
    if (static_cast<int>(beta0.size()) != g.n_eps()) throw PreconditionError("one initial value per eps row expected");
    for (int i = 0; i < g.n_eps(); ++i) {
        const double res = max_abs(anchor_apply(chart, {g.x_at(i, 0), beta0[i]}) - detail::d_eps(g, g.x, i, 0));
        if (!(res < kTransverseInputTolerance))
            throw PreconditionError("initial transverse values violate #(beta) = d gamma/d eps (residual " +
                                    format_real(res) + ")");
    }
    std::vector<Vec> de_alpha(g.x.size());
    for (int i = 0; i < g.n_eps(); ++i)
        for (int j = 0; j < g.n_t(); ++j) de_alpha[g.index(i, j)] = detail::d_eps(g, g.mu, i, j);

    g.beta.assign(g.x.size(), Vec());
    for (int i = 0; i < g.n_eps(); ++i) {
        auto at = [&](int j, double time, const std::vector<Vec>& f) {
            return time == g.t[j] ? f[g.index(i, j)] : detail::lagrange_row(g, f, i, time);
        };
        Vec y = beta0[i];
        g.beta[g.index(i, 0)] = y;
        for (int j = 0; j + 1 < g.n_t(); ++j) {
            auto rhs = [&](double time, const Vec& b) {
                const int node = time == g.t[j + 1] ? j + 1 : j;
                const Vec xa = at(node, time, g.x), a = at(node, time, g.mu), da = at(node, time, de_alpha);
                const Christoffel c = detail::gamma_at(chart, metric, xa);
                return Vec(da + c.contract(b, a) - c.contract(a, b));
            };
            y = detail::rk4_step(rhs, g.t[j], y, g.t[j + 1] - g.t[j]);
            g.beta[g.index(i, j + 1)] = y;
        }
    }
    TransverseResult out{std::move(g), 0.0};
    out.transversality = transversality_residual(chart, out.grid);
    if (out.transversality > kTransverseOutputTolerance)
        throw MeshTooCoarse("transverse solution violates #(beta) = d gamma/d eps by " + format_real(out.transversality));
    return out;
}

struct HomotopyCheck {
    double max_end_norm = 0.0;  // max_eps |beta(eps, t_end)|
    bool is_homotopy = false;
};

/// Solve with beta(eps, t_0) = 0 and test beta(eps, t_end) = 0.
inline HomotopyCheck homotopy_check(const AlgebroidChart& chart, const MetricField& metric, const VariationGrid& g) {
    const TransverseResult res =
        solve_transverse(chart, metric, g, std::vector<Vec>(static_cast<std::size_t>(g.n_eps()), Vec::Zero(chart.r())));
    HomotopyCheck out;
    for (int i = 0; i < g.n_eps(); ++i)
        out.max_end_norm = std::max(out.max_end_norm, max_abs(res.grid.beta_at(i, g.n_t() - 1)));
    out.is_homotopy = out.max_end_norm < kHomotopyTolerance;
    return out;
}

/// Per-node residual of  D_t D_eps s - D_eps D_t s = R(alpha, beta) s + D_Delta s.
/// Entries on the mesh edges are left at zero.
struct CommutationResidual {
    std::vector<double> node;  // same indexing as the grid
    double max_interior = 0.0;
};

inline CommutationResidual curvature_commutation_residual(const AlgebroidChart& chart, const MetricField& metric,
                                                          const VariationGrid& g, const std::vector<Vec>& s) {
    g.check_shape(true);
    if (s.size() != g.x.size()) throw PreconditionError("section values must cover the mesh");
    const std::vector<Vec> D = delta(chart, metric, g);
    std::vector<Christoffel> chr;
    chr.reserve(g.x.size());
    for (const Vec& x : g.x) chr.push_back(detail::gamma_at(chart, metric, x));

    std::vector<Vec> De_s(g.x.size()), Dt_s(g.x.size());
    for (int i = 0; i < g.n_eps(); ++i)
        for (int j = 0; j < g.n_t(); ++j) {
            const std::size_t k = g.index(i, j);
            De_s[k] = detail::d_eps(g, s, i, j) + chr[k].contract(g.beta[k], s[k]);
            Dt_s[k] = detail::d_t(g, s, i, j) + chr[k].contract(g.mu[k], s[k]);
        }
    CommutationResidual out;
    out.node.assign(g.x.size(), 0.0);
    for (int i = 1; i + 1 < g.n_eps(); ++i)
        for (int j = 1; j + 1 < g.n_t(); ++j) {
            const std::size_t k = g.index(i, j);
            const Vec lhs = detail::d_t(g, De_s, i, j) + chr[k].contract(g.mu[k], De_s[k]) -
                            (detail::d_eps(g, Dt_s, i, j) + chr[k].contract(g.beta[k], Dt_s[k]));
            const Curvature R = curvature(chart, metric, g.x[k]);
            const Vec rhs = R.apply(g.mu[k], g.beta[k], s[k]) + chr[k].contract(D[k], s[k]);
            out.node[k] = max_abs(lhs - rhs);
            out.max_interior = std::max(out.max_interior, out.node[k]);
        }
    return out;
}

struct FirstVariation {
    double lhs = 0.0;  // dE/deps at the middle row
    double rhs = 0.0;
    double residual() const { return std::abs(lhs - rhs); }
};

/// dE/deps = <beta, alpha>|_0^1 - int <beta, D_t alpha> - int <Delta, alpha>
/// at the middle eps-row; E(eps) = 1/2 int <alpha, alpha> dt by trapezoids.
inline FirstVariation first_variation_residual(const AlgebroidChart& chart, const MetricField& metric,
                                               const VariationGrid& g) {
    g.check_shape(true);
    if (g.n_eps() % 2 == 0) throw PreconditionError("first variation needs an odd number of eps rows");
    const int mid = g.n_eps() / 2, N = g.n_t();
    auto trapezoid = [&](const std::vector<double>& f) {
        double s = 0.0;
        for (int j = 0; j + 1 < N; ++j) s += 0.5 * (g.t[j + 1] - g.t[j]) * (f[j] + f[j + 1]);
        return s;
    };
    auto energy_row = [&](int i) {
        std::vector<double> e(static_cast<std::size_t>(N));
        for (int j = 0; j < N; ++j) e[j] = 0.5 * metric.at(g.x_at(i, j), 0).norm2(g.mu_at(i, j));
        return trapezoid(e);
    };
    FirstVariation out;
    out.lhs = (energy_row(mid + 1) - energy_row(mid - 1)) / (g.eps[mid + 1] - g.eps[mid - 1]);

    const std::vector<Vec> D = delta(chart, metric, g);
    std::vector<double> f1(static_cast<std::size_t>(N)), f2(static_cast<std::size_t>(N));
    for (int j = 0; j < N; ++j) {
        const Vec& x = g.x_at(mid, j);
        const MetricAt mt = metric.at(x, 0);
        const Vec& a = g.mu_at(mid, j);
        const Vec Dt_alpha = detail::d_t(g, g.mu, mid, j) + christoffel(chart, metric, x).contract(a, a);
        f1[j] = mt.inner(g.beta_at(mid, j), Dt_alpha);
        f2[j] = mt.inner(D[g.index(mid, j)], a);
    }
    auto boundary = [&](int j) { return metric.at(g.x_at(mid, j), 0).inner(g.beta_at(mid, j), g.mu_at(mid, j)); };
    out.rhs = boundary(N - 1) - boundary(0) - trapezoid(f1) - trapezoid(f2);
    return out;
}

struct PencilComparison {
    double max_deviation = 0.0;
    FiberCurve from_pencil, from_ode;
};

/// Transverse variation of the pencil t -> phi_t(a + eps u) with beta(eps, 0) = 0,
/// compared at eps = 0 with the Jacobi section beta(0) = 0, beta'(0) = u.
inline PencilComparison jacobi_from_geodesic_pencil(const AlgebroidChart& chart, const MetricField& metric,
                                                    const AVector& a, const Vec& u, double eps_step = 1e-3,
                                                    double h = kDefaultStep) {
    std::vector<APath> rows;
    const std::vector<double> eps{-eps_step, 0.0, eps_step};
    for (double e : eps) rows.push_back(geodesic_integrate(chart, metric, {a.x, a.mu + e * u}, 0.0, 1.0, h));
    const VariationGrid g = VariationGrid::from_paths(eps, rows);
    const TransverseResult tr = solve_transverse(chart, metric, g, std::vector<Vec>(3, Vec::Zero(chart.r())));
    const JacobiSolution J = jacobi_solve(chart, metric, rows[1], Vec::Zero(chart.r()), u);
    PencilComparison out;
    out.from_ode = J.beta;
    out.from_pencil.t = g.t;
    for (int j = 0; j < g.n_t(); ++j) {
        out.from_pencil.values.push_back(tr.grid.beta_at(1, j));
        out.max_deviation = std::max(out.max_deviation, max_abs(tr.grid.beta_at(1, j) - J.beta.values[j]));
    }
    return out;
}

}  // namespace ralg
