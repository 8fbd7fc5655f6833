#pragma once

// Fiber metric and its Levi-Civita A-connection.
//
// Christoffel symbols D_{a_i} a_j = sum_k Gamma_{ij}^k a_k are computed in
// closed form from g, its first derivatives, the anchor and the bracket:
//
//   Gamma_ij^k = 1/2 sum_l g^{kl} S_ijl
//   S_ijl = sum_u b^{iu} d_u g_jl + b^{ju} d_u g_il - b^{lu} d_u g_ij
//         + sum_u C_ij^u g_ul + C_li^u g_uj + C_lj^u g_ui
//
// and their x-derivatives by differentiating that expression exactly
// (Hessians of g, gradients of b and C), so curvature has no step size.

#include "ralg/algebroid.hpp"
#include "ralg/errors.hpp"
#include "ralg/expression.hpp"
#include "ralg/tensor.hpp"

#include <Eigen/Eigenvalues>

#include <cstdint>
#include <vector>

namespace ralg {

inline constexpr double kMinMetricEigenvalue = 1e-10;

struct MetricEntry {
    int i, j;  // 0-based, i <= j
    Expression value;
};

/// g, its inverse and derivatives at a point. `dg[m]` is d_m g; `d2g(m,p,i,j)`
/// is d_m d_p g_ij (present for order 2).
struct MetricAt {
    Mat g, ginv;
    std::vector<Mat> dg;
    Tensor4 d2g;
    double min_eigenvalue = 0.0;

    double inner(const Vec& a, const Vec& b) const { return a.dot(g * b); }
    double norm2(const Vec& a) const { return inner(a, a); }
};

class MetricField {
public:
    MetricField() = default;

    /// Upper-triangular entries (i <= j); missing entries are zero.
    MetricField(int n, int r, const std::vector<MetricEntry>& entries) : n_(n), r_(r) {
        g_.assign(static_cast<std::size_t>(r * r), Expression::constant(0.0, n));
        std::vector<bool> seen(g_.size(), false);
        for (const MetricEntry& e : entries) {
            if (e.i < 0 || e.j < 0 || e.i >= r || e.j >= r) throw PreconditionError("metric index out of range");
            if (e.i > e.j) throw PreconditionError("metric entries must have i <= j");
            if (e.value.variable_count() != n) throw PreconditionError("metric expression has wrong variable count");
            const std::size_t k = static_cast<std::size_t>(e.i * r + e.j);
            if (seen[k]) throw PreconditionError("duplicate metric entry");
            seen[k] = true;
            g_[k] = e.value;
            g_[static_cast<std::size_t>(e.j * r + e.i)] = e.value;
        }
    }

    static MetricField identity(int n, int r) {
        std::vector<MetricEntry> e;
        for (int i = 0; i < r; ++i) e.push_back({i, i, Expression::constant(1.0, n)});
        return MetricField(n, r, e);
    }

    int n() const { return n_; }
    int r() const { return r_; }
    const Expression& entry(int i, int j) const { return g_[static_cast<std::size_t>(i * r_ + j)]; }

    std::vector<MetricEntry> entries() const {
        std::vector<MetricEntry> out;
        for (int i = 0; i < r_; ++i)
            for (int j = i; j < r_; ++j)
                if (!entry(i, j).is_zero()) out.push_back({i, j, entry(i, j)});
        return out;
    }

    /// Throws SingularMetric when the smallest eigenvalue is below the threshold.
    MetricAt at(const Vec& x, int order = 1) const {
        MetricAt m;
        m.g = Mat(r_, r_);
        if (order >= 1) m.dg.assign(static_cast<std::size_t>(n_), Mat::Zero(r_, r_));
        if (order >= 2) m.d2g = Tensor4(n_, n_, r_, r_);
        for (int i = 0; i < r_; ++i) {
            for (int j = i; j < r_; ++j) {
                const Expression& e = entry(i, j);
                const EvalResult v = e.evaluate(x, order);
                m.g(i, j) = m.g(j, i) = v.value;
                if (order >= 1 && !e.is_constant()) {
                    for (int a = 0; a < n_; ++a) m.dg[a](i, j) = m.dg[a](j, i) = v.gradient[a];
                    if (order >= 2)
                        for (int a = 0; a < n_; ++a)
                            for (int b = 0; b < n_; ++b) m.d2g(a, b, i, j) = m.d2g(a, b, j, i) = v.hessian(a, b);
                }
            }
        }
        Eigen::SelfAdjointEigenSolver<Mat> eig(m.g, Eigen::EigenvaluesOnly);
        m.min_eigenvalue = eig.eigenvalues().minCoeff();
        if (!(m.min_eigenvalue > kMinMetricEigenvalue))
            throw SingularMetric("metric not positive definite (smallest eigenvalue " + format_real(m.min_eigenvalue) + ")");
        m.ginv = m.g.llt().solve(Mat::Identity(r_, r_));
        return m;
    }

private:
    int n_ = 0, r_ = 0;
    std::vector<Expression> g_;
};

struct MetricCheck {
    double min_eigenvalue = 0.0;
    double max_asymmetry = 0.0;
    Vec worst_point;
    bool pass = false;
};

/// Smallest eigenvalue of g over a seeded Halton sample of the domain box.
inline MetricCheck validate_metric(const AlgebroidChart& chart, const MetricField& metric, int samples = 200,
                                   std::uint64_t seed = 42) {
    MetricCheck out;
    out.min_eigenvalue = std::numeric_limits<double>::infinity();
    HaltonSampler sampler(chart.n(), seed);
    for (int k = 0; k < samples; ++k) {
        const Vec x = chart.domain().map(sampler.next());
        Mat g(metric.r(), metric.r());
        for (int i = 0; i < metric.r(); ++i)
            for (int j = 0; j < metric.r(); ++j) g(i, j) = metric.entry(i, j).value(x);
        out.max_asymmetry = std::max(out.max_asymmetry, (g - g.transpose()).cwiseAbs().maxCoeff());
        const double lam = Eigen::SelfAdjointEigenSolver<Mat>(g, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
        if (lam < out.min_eigenvalue) {
            out.min_eigenvalue = lam;
            out.worst_point = x;
        }
    }
    out.pass = out.min_eigenvalue > kMinMetricEigenvalue && out.max_asymmetry < 1e-12;
    return out;
}

/// Gamma(i,j,k) = Gamma_ij^k; dgamma(m,i,j,k) = d_m Gamma_ij^k when requested.
struct Christoffel {
    Tensor3 gamma;
    Tensor4 dgamma;
    bool has_derivatives = false;

    int rank() const { return gamma.dim(0); }

    /// D_u w for constant-coefficient extensions: sum_ij u^i w^j Gamma_ij^k.
    Vec contract(const Vec& u, const Vec& w) const {
        const int r = rank();
        Vec out = Vec::Zero(r);
        for (int i = 0; i < r; ++i) {
            if (u[i] == 0.0) continue;
            for (int j = 0; j < r; ++j) {
                const double c = u[i] * w[j];
                if (c == 0.0) continue;
                for (int k = 0; k < r; ++k) out[k] += c * gamma(i, j, k);
            }
        }
        return out;
    }

    /// Directional derivative along tangent v of contract(u, w), u and w fixed.
    Vec contract_derivative(const Vec& v, const Vec& u, const Vec& w) const {
        const int r = rank(), n = static_cast<int>(v.size());
        Vec out = Vec::Zero(r);
        for (int m = 0; m < n; ++m) {
            if (v[m] == 0.0) continue;
            for (int i = 0; i < r; ++i)
                for (int j = 0; j < r; ++j) {
                    const double c = v[m] * u[i] * w[j];
                    if (c == 0.0) continue;
                    for (int k = 0; k < r; ++k) out[k] += c * dgamma(m, i, j, k);
                }
        }
        return out;
    }
};

/// Closed-form Christoffel symbols from evaluated structure and metric data.
/// Derivatives need `st.order >= 1` and metric order 2.
inline Christoffel christoffel_from(const StructureAt& st, const MetricAt& mt, bool with_derivatives = false) {
    const int n = st.n, r = st.r;
    Tensor3 S(r, r, r);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
            for (int l = 0; l < r; ++l) {
                double v = 0.0;
                for (int u = 0; u < n; ++u)
                    v += st.b(i, u) * mt.dg[u](j, l) + st.b(j, u) * mt.dg[u](i, l) - st.b(l, u) * mt.dg[u](i, j);
                for (int u = 0; u < r; ++u)
                    v += st.C(i, j, u) * mt.g(u, l) + st.C(l, i, u) * mt.g(u, j) + st.C(l, j, u) * mt.g(u, i);
                S(i, j, l) = v;
            }

    Christoffel out;
    out.gamma = Tensor3(r, r, r);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
            for (int k = 0; k < r; ++k) {
                double v = 0.0;
                for (int l = 0; l < r; ++l) v += mt.ginv(k, l) * S(i, j, l);
                out.gamma(i, j, k) = 0.5 * v;
            }
    if (!with_derivatives) return out;
    if (st.order < 1 || mt.d2g.dim(0) != n) throw PreconditionError("Christoffel derivatives need second-order data");

    out.dgamma = Tensor4(n, r, r, r);
    out.has_derivatives = true;
    for (int m = 0; m < n; ++m) {
        const Mat dginv = -mt.ginv * mt.dg[m] * mt.ginv;
        Tensor3 dS(r, r, r);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j)
                for (int l = 0; l < r; ++l) {
                    double v = 0.0;
                    for (int u = 0; u < n; ++u) {
                        v += st.db(m, i, u) * mt.dg[u](j, l) + st.b(i, u) * mt.d2g(m, u, j, l);
                        v += st.db(m, j, u) * mt.dg[u](i, l) + st.b(j, u) * mt.d2g(m, u, i, l);
                        v -= st.db(m, l, u) * mt.dg[u](i, j) + st.b(l, u) * mt.d2g(m, u, i, j);
                    }
                    for (int u = 0; u < r; ++u) {
                        v += st.dC(m, i, j, u) * mt.g(u, l) + st.C(i, j, u) * mt.dg[m](u, l);
                        v += st.dC(m, l, i, u) * mt.g(u, j) + st.C(l, i, u) * mt.dg[m](u, j);
                        v += st.dC(m, l, j, u) * mt.g(u, i) + st.C(l, j, u) * mt.dg[m](u, i);
                    }
                    dS(i, j, l) = v;
                }
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j)
                for (int k = 0; k < r; ++k) {
                    double v = 0.0;
                    for (int l = 0; l < r; ++l) v += dginv(k, l) * S(i, j, l) + mt.ginv(k, l) * dS(i, j, l);
                    out.dgamma(m, i, j, k) = 0.5 * v;
                }
    }
    return out;
}

/// Everything the connection needs at one point. `order` 0 gives Gamma;
/// order 1 adds dGamma (and lets callers form curvature).
struct PointGeometry {
    Vec x;
    StructureAt st;
    MetricAt mt;
    Christoffel chr;
};

inline PointGeometry geometry_at(const AlgebroidChart& chart, const MetricField& metric, const Vec& x, int order = 0) {
    PointGeometry p;
    p.x = x;
    p.st = chart.structure_at(x, order >= 1 ? 1 : 0);
    p.mt = metric.at(x, order >= 1 ? 2 : 1);
    p.chr = christoffel_from(p.st, p.mt, order >= 1);
    return p;
}

inline Christoffel christoffel(const AlgebroidChart& chart, const MetricField& metric, const Vec& x,
                               bool with_derivatives = false) {
    return geometry_at(chart, metric, x, with_derivatives ? 1 : 0).chr;
}

/// (D_f g)^u = sum f_s g_t Gamma_st^u + #(f)(g_u) at x.
inline Vec covariant_derivative(const AlgebroidChart& chart, const MetricField& metric, const SectionField& f,
                                const SectionField& g, const Vec& x) {
    const int r = chart.r();
    if (f.rank() != r || g.rank() != r) throw PreconditionError("section has wrong number of components");
    const PointGeometry p = geometry_at(chart, metric, x, 0);
    Vec fv(r), gv(r);
    Mat gd(r, chart.n());
    for (int s = 0; s < r; ++s) {
        fv[s] = f.components[s].value(x);
        const EvalResult e = g.components[s].evaluate(x, 1);
        gv[s] = e.value;
        gd.row(s) = e.gradient.transpose();
    }
    return p.chr.contract(fv, gv) + gd * (p.st.b.transpose() * fv);
}

/// riemann(i,j,k,l) is the a_l component of R(a_i,a_j)a_k.
struct Curvature {
    Tensor4 riemann;

    int rank() const { return riemann.dim(0); }

    /// R(a,b)c.
    Vec apply(const Vec& a, const Vec& b, const Vec& c) const {
        const int r = rank();
        Vec out = Vec::Zero(r);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j) {
                const double ab = a[i] * b[j];
                if (ab == 0.0) continue;
                for (int k = 0; k < r; ++k) {
                    const double abc = ab * c[k];
                    if (abc == 0.0) continue;
                    for (int l = 0; l < r; ++l) out[l] += abc * riemann(i, j, k, l);
                }
            }
        return out;
    }
};

inline Curvature curvature_from(const PointGeometry& p) {
    if (!p.chr.has_derivatives) throw PreconditionError("curvature needs Christoffel derivatives");
    const int n = p.st.n, r = p.st.r;
    const Tensor3& G = p.chr.gamma;
    const Tensor4& dG = p.chr.dgamma;
    Curvature R{Tensor4(r, r, r, r)};
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
            for (int k = 0; k < r; ++k)
                for (int l = 0; l < r; ++l) {
                    double v = 0.0;
                    for (int m = 0; m < n; ++m) v += p.st.b(i, m) * dG(m, j, k, l) - p.st.b(j, m) * dG(m, i, k, l);
                    for (int m = 0; m < r; ++m) {
                        v += G(j, k, m) * G(i, m, l) - G(i, k, m) * G(j, m, l);
                        v -= p.st.C(i, j, m) * G(m, k, l);
                    }
                    R.riemann(i, j, k, l) = v;
                }
    return R;
}

inline Curvature curvature(const AlgebroidChart& chart, const MetricField& metric, const Vec& x) {
    return curvature_from(geometry_at(chart, metric, x, 1));
}

inline constexpr double kMinGramDeterminant = 1e-12;

/// K(a,b) = -<R(a,b)a, b> / (<a,a><b,b> - <a,b>^2).
inline double sectional_curvature(const Curvature& R, const MetricAt& mt, const Vec& a, const Vec& b) {
    const double gram = mt.norm2(a) * mt.norm2(b) - mt.inner(a, b) * mt.inner(a, b);
    if (!(gram > kMinGramDeterminant)) throw PreconditionError("degenerate pair for sectional curvature");
    return -mt.inner(R.apply(a, b, a), b) / gram;
}

inline double sectional_curvature(const AlgebroidChart& chart, const MetricField& metric, const Vec& x, const Vec& a,
                                  const Vec& b) {
    const PointGeometry p = geometry_at(chart, metric, x, 1);
    return sectional_curvature(curvature_from(p), p.mt, a, b);
}

}  // namespace ralg
