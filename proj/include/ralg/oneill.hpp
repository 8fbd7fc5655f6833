#pragma once

// Vertical/horizontal splitting A_x = ker(#_x) + ker(#_x)^perp and the
// O'Neill tensors
//
//   T_a b = (D_{a^v} b^v)^h + (D_{a^v} b^h)^v
//   H_a b = (D_{a^h} b^v)^h + (D_{a^h} b^h)^v
//
// Sections are the constant-coefficient extensions of vectors at x, split by
// the projectors P_h(y), P_v(y) at nearby points y. Along horizontal
// directions the projectors move when the kernel rotates, so H carries the
// exact derivative of P_h along #(a^h).

#include "ralg/algebroid.hpp"
#include "ralg/dual_matrix.hpp"
#include "ralg/errors.hpp"
#include "ralg/metric.hpp"
#include "ralg/tensor.hpp"

#include <Eigen/SVD>

#include <string>
#include <vector>

namespace ralg {

inline constexpr double kRankThreshold = 1e-10;
inline constexpr double kLeafTolerance = 1e-9;
inline constexpr double kIdentityTolerance = 1e-9;

struct SplitFrame {
    Vec x;
    int q = 0;                  // anchor rank
    Mat horizontal;             // r x q, g-orthonormal columns
    Mat vertical;               // r x (r-q), g-orthonormal columns
    Mat Ph, Pv;                 // g-orthogonal projectors
    Mat range_directions;       // n x q, right singular vectors of the anchor matrix
    Vec singular_values;
    bool warning = false;       // a singular value sits within 10x of the rank threshold

    int rank() const { return static_cast<int>(Ph.rows()); }
    int vertical_dim() const { return static_cast<int>(vertical.cols()); }
    /// Horizontal columns first, then vertical.
    Mat frame() const {
        Mat E(rank(), rank());
        E << horizontal, vertical;
        return E;
    }
};

namespace detail {

/// Columns of K made g-orthonormal (same span).
inline Mat g_orthonormalize(const Mat& K, const Mat& g) {
    if (K.cols() == 0) return K;
    const Mat M = K.transpose() * g * K;
    const Eigen::LLT<Mat> llt(M);
    const Mat Lt = llt.matrixL().transpose();
    return Lt.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(K);
}

}  // namespace detail

/// Split from evaluated data; `st.b` is the r x n anchor matrix.
inline SplitFrame split_from(const StructureAt& st, const MetricAt& mt, const Vec& x) {
    const int r = st.r;
    Eigen::JacobiSVD<Mat> svd(st.b, Eigen::ComputeFullU | Eigen::ComputeFullV);
    SplitFrame f;
    f.x = x;
    f.singular_values = svd.singularValues();
    const double smax = f.singular_values.size() ? f.singular_values[0] : 0.0;
    const double thr = kRankThreshold * smax;
    for (Eigen::Index i = 0; i < f.singular_values.size(); ++i) {
        const double s = f.singular_values[i];
        if (s > thr) ++f.q;
        if (smax > 0.0 && s > 0.1 * thr && s < 10.0 * thr) f.warning = true;
    }
    const Mat U = svd.matrixU();
    f.range_directions = svd.matrixV().leftCols(f.q);
    f.vertical = detail::g_orthonormalize(U.rightCols(r - f.q), mt.g);
    f.horizontal = detail::g_orthonormalize(mt.ginv * U.leftCols(f.q), mt.g);
    f.Ph = f.horizontal * f.horizontal.transpose() * mt.g;
    f.Pv = Mat::Identity(r, r) - f.Ph;
    return f;
}

inline SplitFrame split(const AlgebroidChart& chart, const MetricField& metric, const Vec& x) {
    return split_from(chart.structure_at(x, 0), metric.at(x, 0), x);
}

/// Geometry plus split at one point, with first derivatives available.
struct OneillPoint {
    PointGeometry geo;
    SplitFrame frame;
    Curvature R;

    const Mat& Ph() const { return frame.Ph; }
    const Mat& Pv() const { return frame.Pv; }
    Vec gamma(const Vec& a, const Vec& b) const { return geo.chr.contract(a, b); }
    Vec anchor(const Vec& a) const { return geo.st.b.transpose() * a; }
    double inner(const Vec& a, const Vec& b) const { return geo.mt.inner(a, b); }
};

inline OneillPoint oneill_point(const AlgebroidChart& chart, const MetricField& metric, const Vec& x) {
    OneillPoint p;
    p.geo = geometry_at(chart, metric, x, 1);
    p.frame = split_from(p.geo.st, p.geo.mt, x);
    p.R = curvature_from(p.geo);
    return p;
}

/// Derivative of P_h along the tangent vector `v`, holding the range
/// directions fixed: P_h = G Q (Q^T G Q)^{-1} Q^T with G = g^{-1}, Q = B S.
inline Mat horizontal_projector_derivative(const OneillPoint& p, const Vec& v) {
    const int n = p.geo.st.n, r = p.geo.st.r, q = p.frame.q;
    if (q == 0 || q == r) return Mat::Zero(r, r);
    Mat dB = Mat::Zero(r, n), dg = Mat::Zero(r, r);
    for (int m = 0; m < n; ++m) {
        if (v[m] == 0.0) continue;
        for (int s = 0; s < r; ++s)
            for (int i = 0; i < n; ++i) dB(s, i) += v[m] * p.geo.st.db(m, s, i);
        dg += v[m] * p.geo.mt.dg[m];
    }
    const Mat& G = p.geo.mt.ginv;
    const Mat& S = p.frame.range_directions;
    const Mat Q = p.geo.st.b * S, dQ = dB * S;
    const Mat dG = -G * dg * G;
    const Mat Minv = (Q.transpose() * G * Q).inverse();
    const Mat dM = dQ.transpose() * G * Q + Q.transpose() * dG * Q + Q.transpose() * G * dQ;
    const Mat dMinv = -Minv * dM * Minv;
    return dG * Q * Minv * Q.transpose() + G * dQ * Minv * Q.transpose() + G * Q * dMinv * Q.transpose() +
           G * Q * Minv * dQ.transpose();
}

/// T_a b for vectors a, b at the point.
inline Vec oneill_T_apply(const OneillPoint& p, const Vec& a, const Vec& b) {
    const Vec av = p.Pv() * a;
    return p.Ph() * p.gamma(av, p.Pv() * b) + p.Pv() * p.gamma(av, p.Ph() * b);
}

/// H_a b for vectors a, b at the point.
inline Vec oneill_H_apply(const OneillPoint& p, const Vec& a, const Vec& b) {
    const Vec ah = p.Ph() * a;
    const Mat dPh = horizontal_projector_derivative(p, p.anchor(ah));
    const Vec D_bv = p.gamma(ah, p.Pv() * b) - dPh * b;
    const Vec D_bh = p.gamma(ah, p.Ph() * b) + dPh * b;
    return p.Ph() * D_bv + p.Pv() * D_bh;
}

/// Derivative of y -> T(y)[a, b] (a, b fixed coefficient vectors) along tangent v.
inline Vec oneill_T_derivative(const OneillPoint& p, const Vec& v, const Vec& a, const Vec& b) {
    const Mat dPh = horizontal_projector_derivative(p, v);
    const Mat dPv = -dPh;
    const Vec av = p.Pv() * a, bv = p.Pv() * b, bh = p.Ph() * b;
    const Vec dav = dPv * a, dbv = dPv * b, dbh = dPh * b;
    const Christoffel& c = p.geo.chr;
    const Vec first = c.contract_derivative(v, av, bv) + c.contract(dav, bv) + c.contract(av, dbv);
    const Vec second = c.contract_derivative(v, av, bh) + c.contract(dav, bh) + c.contract(av, dbh);
    return dPh * c.contract(av, bv) + p.Ph() * first + dPv * c.contract(av, bh) + p.Pv() * second;
}

/// Components in the frame basis: T(i,j,k) = <E_k, T_{E_i} E_j>, same for H.
struct OneillTensors {
    SplitFrame frame;
    Tensor3 T, H;
    bool warning = false;
};

inline OneillTensors oneill_tensors(const OneillPoint& p) {
    const int r = p.frame.rank();
    const Mat E = p.frame.frame();
    OneillTensors out{p.frame, Tensor3(r, r, r), Tensor3(r, r, r), p.frame.warning};
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            const Vec t = oneill_T_apply(p, E.col(i), E.col(j));
            const Vec h = oneill_H_apply(p, E.col(i), E.col(j));
            for (int k = 0; k < r; ++k) {
                out.T(i, j, k) = p.inner(E.col(k), t);
                out.H(i, j, k) = p.inner(E.col(k), h);
            }
        }
    return out;
}

inline OneillTensors oneill_tensors(const AlgebroidChart& chart, const MetricField& metric, const Vec& x) {
    return oneill_tensors(oneill_point(chart, metric, x));
}

struct IdentityResidual {
    std::string name;
    double residual = 0.0;
    double tolerance = kIdentityTolerance;
    bool pass() const { return residual < tolerance; }
};

/// The algebraic identities of T and H on all frame triples, plus
/// H_{a^h} b^h = [a^h, b^h]^v / 2 and the horizontal part of D_u v = T_u v
/// for vertical u, v, and the Levi-Civita connection of the kernel algebra
/// matching the vertical part of D_u v.
inline std::vector<IdentityResidual> oneill_identities(const OneillPoint& p) {
    const int r = p.frame.rank();
    const Mat& Ph = p.Ph();
    const Mat& Pv = p.Pv();
    const Mat E = p.frame.frame();
    double t_h_zero = 0, t_def = 0, t_sym = 0, t_skew = 0, h_v_zero = 0, h_def = 0, h_anti = 0, h_skew = 0;
    double bracket_half = 0, vertical_split = 0, kernel_lc = 0;
    for (int i = 0; i < r; ++i) {
        const Vec a = E.col(i);
        const Vec ah = Ph * a, av = Pv * a;
        for (int j = 0; j < r; ++j) {
            const Vec b = E.col(j);
            const Vec bh = Ph * b, bv = Pv * b;
            t_h_zero = std::max({t_h_zero, max_abs(oneill_T_apply(p, ah, bv)), max_abs(oneill_T_apply(p, ah, bh))});
            h_v_zero = std::max({h_v_zero, max_abs(oneill_H_apply(p, av, bh)), max_abs(oneill_H_apply(p, av, bv))});

            // Definitions, via covariant derivatives of the split sections.
            const Mat dPh = horizontal_projector_derivative(p, p.anchor(ah));
            const Vec D_av_bv = p.gamma(av, bv), D_av_bh = p.gamma(av, bh);
            const Vec D_ah_bv = p.gamma(ah, bv) - dPh * b, D_ah_bh = p.gamma(ah, bh) + dPh * b;
            t_def = std::max({t_def, max_abs(oneill_T_apply(p, av, bv) - Ph * D_av_bv),
                              max_abs(oneill_T_apply(p, av, bh) - Pv * D_av_bh)});
            h_def = std::max({h_def, max_abs(oneill_H_apply(p, ah, bv) - Ph * D_ah_bv),
                              max_abs(oneill_H_apply(p, ah, bh) - Pv * D_ah_bh)});

            t_sym = std::max(t_sym, max_abs(oneill_T_apply(p, av, bv) - oneill_T_apply(p, bv, av)));
            h_anti = std::max(h_anti, max_abs(oneill_H_apply(p, ah, bh) + oneill_H_apply(p, bh, ah)));

            // [a^h, b^h] of the split sections at x.
            const Mat dPh_b = horizontal_projector_derivative(p, p.anchor(bh));
            Vec br = Vec::Zero(r);
            for (int s = 0; s < r; ++s)
                for (int t = 0; t < r; ++t)
                    for (int u = 0; u < r; ++u) br[u] += ah[s] * bh[t] * p.geo.st.C(s, t, u);
            br += dPh * b - dPh_b * a;
            bracket_half = std::max(bracket_half, max_abs(oneill_H_apply(p, ah, bh) - 0.5 * (Pv * br)));

            vertical_split = std::max(vertical_split, max_abs(Ph * p.gamma(av, bv) - oneill_T_apply(p, av, bv)));

            for (int k = 0; k < r; ++k) {
                const Vec c = E.col(k);
                const Vec ch = Ph * c, cv = Pv * c;
                t_skew = std::max(t_skew, std::abs(p.inner(oneill_T_apply(p, av, bv), ch) +
                                                   p.inner(oneill_T_apply(p, av, ch), bv)));
                h_skew = std::max(h_skew, std::abs(p.inner(oneill_H_apply(p, ah, bh), cv) +
                                                   p.inner(oneill_H_apply(p, ah, cv), bh)));
            }
        }
    }

    // Koszul formula on the kernel algebra (G_x, g restricted).
    const Mat& K = p.frame.vertical;
    const int kv = static_cast<int>(K.cols());
    auto bracket = [&](const Vec& u, const Vec& w) {
        Vec out = Vec::Zero(r);
        for (int s = 0; s < r; ++s)
            for (int t = 0; t < r; ++t)
                for (int l = 0; l < r; ++l) out[l] += u[s] * w[t] * p.geo.st.C(s, t, l);
        return out;
    };
    for (int i = 0; i < kv; ++i)
        for (int j = 0; j < kv; ++j) {
            Vec lc = Vec::Zero(r);
            for (int m = 0; m < kv; ++m) {
                const Vec u = K.col(i), w = K.col(j), z = K.col(m);
                const double v = 0.5 * (p.inner(bracket(u, w), z) - p.inner(bracket(w, z), u) + p.inner(bracket(z, u), w));
                lc += v * z;
            }
            kernel_lc = std::max(kernel_lc, max_abs(Pv * p.gamma(K.col(i), K.col(j)) - lc));
        }

    return {{"T_horizontal_slot_zero", t_h_zero},  {"T_definition", t_def},
            {"T_vertical_symmetric", t_sym},       {"T_skew_adjoint", t_skew},
            {"H_vertical_slot_zero", h_v_zero},    {"H_definition", h_def},
            {"H_horizontal_antisymmetric", h_anti}, {"H_skew_adjoint", h_skew},
            {"H_half_bracket", bracket_half},      {"vertical_second_fundamental_form", vertical_split},
            {"kernel_levi_civita", kernel_lc}};
}

inline std::vector<IdentityResidual> oneill_identities(const AlgebroidChart& chart, const MetricField& metric,
                                                       const Vec& x) {
    return oneill_identities(oneill_point(chart, metric, x));
}

struct DivergenceResult {
    double trace_term = 0.0;   // Tr ad_{a^v}
    double n_term = 0.0;       // <a^h, N>
    double total = 0.0;
    double closure_residual = 0.0;  // horizontal part of [a^v, kernel]
    bool warning = false;
};

/// div X_E(a) = Tr ad_{a^v} + <a^h, N>, N = sum_i T_{k_i} k_i over a
/// g-orthonormal kernel frame.
inline DivergenceResult divergence_XE(const AlgebroidChart& chart, const MetricField& metric, const AVector& v) {
    const int r = chart.r();
    const StructureAt st = chart.structure_at(v.x, 0);
    const MetricAt mt = metric.at(v.x, 1);
    const Christoffel chr = christoffel_from(st, mt);
    const SplitFrame f = split_from(st, mt, v.x);
    const Vec av = f.Pv * v.mu, ah = f.Ph * v.mu;
    DivergenceResult out;
    out.warning = f.warning;
    Vec N = Vec::Zero(r);
    for (int j = 0; j < f.vertical_dim(); ++j) {
        const Vec k = f.vertical.col(j);
        Vec br = Vec::Zero(r);
        for (int s = 0; s < r; ++s)
            for (int t = 0; t < r; ++t)
                for (int u = 0; u < r; ++u) br[u] += av[s] * k[t] * st.C(s, t, u);
        out.trace_term += mt.inner(k, br);
        out.closure_residual = std::max(out.closure_residual, max_abs(f.Ph * br));
        N += f.Ph * chr.contract(k, k);
    }
    out.n_term = mt.inner(ah, N);
    out.total = out.trace_term + out.n_term;
    return out;
}

/// A tangent vector to A at a point, in coordinates (x, mu).
struct ATangent {
    Vec dx;
    Vec dmu;
};

/// Horizontal element alpha with #(alpha) = u. Throws when u is not in the
/// image of the anchor.
inline Vec horizontal_lift(const StructureAt& st, const SplitFrame& f, const Vec& u) {
    const int r = st.r;
    if (f.q == 0) {
        if (max_abs(u) > kLeafTolerance) throw PreconditionError("tangent vector not in the anchor image");
        return Vec::Zero(r);
    }
    const Mat A = st.b.transpose() * f.horizontal;  // n x q, full column rank
    const Vec c = A.colPivHouseholderQr().solve(u);
    const double res = max_abs(A * c - u);
    if (!(res < kLeafTolerance * std::max(1.0, max_abs(u))))
        throw PreconditionError("tangent vector not in the anchor image (residual " + format_real(res) + ")");
    return f.horizontal * c;
}

/// K(Z) = Z_mu + sum alpha_i mu_j Gamma_ij, alpha the horizontal lift of dp(Z).
inline Vec connector(const AlgebroidChart& chart, const MetricField& metric, const AVector& a, const ATangent& Z) {
    const StructureAt st = chart.structure_at(a.x, 0);
    const MetricAt mt = metric.at(a.x, 1);
    const SplitFrame f = split_from(st, mt, a.x);
    const Vec alpha = horizontal_lift(st, f, Z.dx);
    return Z.dmu + christoffel_from(st, mt).contract(alpha, a.mu);
}

/// Tangent vector at a whose connector vanishes and whose projection is u.
inline ATangent horizontal_tangent(const AlgebroidChart& chart, const MetricField& metric, const AVector& a,
                                   const Vec& u) {
    const StructureAt st = chart.structure_at(a.x, 0);
    const MetricAt mt = metric.at(a.x, 1);
    const SplitFrame f = split_from(st, mt, a.x);
    const Vec alpha = horizontal_lift(st, f, u);
    return {u, -christoffel_from(st, mt).contract(alpha, a.mu)};
}

/// <u, v>_L = <alpha, beta> for the horizontal lifts of u, v.
inline double leaf_metric(const AlgebroidChart& chart, const MetricField& metric, const Vec& x, const Vec& u,
                          const Vec& v) {
    const StructureAt st = chart.structure_at(x, 0);
    const MetricAt mt = metric.at(x, 0);
    const SplitFrame f = split_from(st, mt, x);
    return mt.inner(horizontal_lift(st, f, u), horizontal_lift(st, f, v));
}

/// Polarized Sasaki metric g_L(Z1, Z2) = <dp Z1, dp Z2>_L + <K Z1, K Z2>.
inline double sasaki_metric(const AlgebroidChart& chart, const MetricField& metric, const AVector& a,
                            const ATangent& Z1, const ATangent& Z2) {
    const SplitFrame f = split(chart, metric, a.x);
    const bool transitive = f.q == chart.n();
    const bool lie_algebra = chart.anchor_is_zero();
    if (!transitive && !lie_algebra)
        throw PreconditionError("Sasaki metric needs a transitive or Lie-algebra chart");
    const MetricAt mt = metric.at(a.x, 0);
    return leaf_metric(chart, metric, a.x, Z1.dx, Z2.dx) +
           mt.inner(connector(chart, metric, a, Z1), connector(chart, metric, a, Z2));
}

/// Induced metric h = (B^T g^{-1} B)^{-1} on a transitive chart, with its
/// classical Levi-Civita connection and curvature in the chart coordinates.
struct LeafGeometry {
    Mat h, hinv;
    Tensor3 gamma;     // gamma(i,j,k): Gamma~_ij^k
    Tensor4 riemann;   // riemann(i,j,k,l): d_l component of R(d_i, d_j) d_k
    bool has_curvature = false;

    Vec acceleration(const Vec& v) const {
        const int n = static_cast<int>(v.size());
        Vec out = Vec::Zero(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) out[k] -= v[i] * v[j] * gamma(i, j, k);
        return out;
    }

    /// <R(u,v)v, u> / (|u|^2 |v|^2 - <u,v>^2) in the metric h.
    double sectional(const Vec& u, const Vec& v) const {
        if (!has_curvature) throw PreconditionError("leaf geometry built without curvature");
        const int n = static_cast<int>(u.size());
        Vec Ruvv = Vec::Zero(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l) Ruvv[l] += u[i] * v[j] * v[k] * riemann(i, j, k, l);
        const double gram = u.dot(h * u) * v.dot(h * v) - std::pow(u.dot(h * v), 2);
        if (!(gram > kMinGramDeterminant)) throw PreconditionError("degenerate pair for sectional curvature");
        return Ruvv.dot(h * u) / gram;
    }
};

inline LeafGeometry leaf_geometry(const AlgebroidChart& chart, const MetricField& metric, const Vec& x,
                                  bool with_curvature = true) {
    const int n = chart.n(), r = chart.r();
    const SplitFrame f = split(chart, metric, x);
    if (f.q != n) throw PreconditionError("leaf geometry needs a transitive chart");

    SquareMatrix<HyperDual> g{r, {}};
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) g.a.push_back(metric.entry(i, j).dual(x, with_curvature));
    const SquareMatrix<HyperDual> G = invert(std::move(g));
    std::vector<HyperDual> B;
    for (int s = 0; s < r; ++s)
        for (int i = 0; i < n; ++i) B.push_back(chart.anchor(s, i).dual(x, with_curvature));
    SquareMatrix<HyperDual> M{n, std::vector<HyperDual>(static_cast<std::size_t>(n * n), constant_like(B.front(), 0.0))};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int s = 0; s < r; ++s)
                for (int t = 0; t < r; ++t) M(i, j) = M(i, j) + B[s * n + i] * G(s, t) * B[t * n + j];
    const SquareMatrix<HyperDual> hd = invert(std::move(M));

    LeafGeometry L;
    L.h = Mat(n, n);
    std::vector<Mat> dh(static_cast<std::size_t>(n), Mat(n, n));
    Tensor4 d2h(n, n, n, n);  // (m,p,i,j)
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            L.h(i, j) = hd(i, j).value();
            for (int m = 0; m < n; ++m) {
                dh[m](i, j) = hd(i, j).gradient()[m];
                if (with_curvature)
                    for (int p = 0; p < n; ++p) d2h(m, p, i, j) = hd(i, j).hessian()(m, p);
            }
        }
    L.h = 0.5 * (L.h + L.h.transpose());
    L.hinv = L.h.inverse();

    // Gamma~_ij^k = 1/2 h^{kl} (d_i h_jl + d_j h_il - d_l h_ij)
    Tensor3 S(n, n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l) S(i, j, l) = dh[i](j, l) + dh[j](i, l) - dh[l](i, j);
    L.gamma = Tensor3(n, n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double v = 0.0;
                for (int l = 0; l < n; ++l) v += L.hinv(k, l) * S(i, j, l);
                L.gamma(i, j, k) = 0.5 * v;
            }
    if (!with_curvature) return L;

    Tensor4 dgamma(n, n, n, n);  // (m,i,j,k)
    for (int m = 0; m < n; ++m) {
        const Mat dhinv = -L.hinv * dh[m] * L.hinv;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    double v = 0.0;
                    for (int l = 0; l < n; ++l) {
                        const double dS = d2h(m, i, j, l) + d2h(m, j, i, l) - d2h(m, l, i, j);
                        v += dhinv(k, l) * S(i, j, l) + L.hinv(k, l) * dS;
                    }
                    dgamma(m, i, j, k) = 0.5 * v;
                }
    }
    // R(d_i,d_j)d_k = sum_l (d_i G_jk^l - d_j G_ik^l + G_jk^m G_im^l - G_ik^m G_jm^l) d_l
    L.riemann = Tensor4(n, n, n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double v = dgamma(i, j, k, l) - dgamma(j, i, k, l);
                    for (int m = 0; m < n; ++m)
                        v += L.gamma(j, k, m) * L.gamma(i, m, l) - L.gamma(i, k, m) * L.gamma(j, m, l);
                    L.riemann(i, j, k, l) = v;
                }
    L.has_curvature = true;
    return L;
}

struct LeafPath {
    std::vector<double> t;
    std::vector<Vec> x, v;
};

/// Geodesic of the induced leaf metric from (x0, v0), RK4 on (x, dx/dt).
inline LeafPath leaf_geodesic(const AlgebroidChart& chart, const MetricField& metric, const Vec& x0, const Vec& v0,
                              double t1, double h = 1e-3) {
    const int n = chart.n();
    const int steps = std::max(1, static_cast<int>(std::ceil(t1 / h - 1e-9)));
    const double dt = t1 / steps;
    auto f = [&](const Vec& y) {
        Vec out(2 * n);
        out << y.tail(n), leaf_geometry(chart, metric, y.head(n), false).acceleration(y.tail(n));
        return out;
    };
    LeafPath p;
    Vec y(2 * n);
    y << x0, v0;
    p.t.push_back(0.0);
    p.x.push_back(x0);
    p.v.push_back(v0);
    for (int k = 1; k <= steps; ++k) {
        const Vec k1 = f(y), k2 = f(y + 0.5 * dt * k1), k3 = f(y + 0.5 * dt * k2), k4 = f(y + dt * k3);
        y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        p.t.push_back(k == steps ? t1 : k * dt);
        p.x.push_back(y.head(n));
        p.v.push_back(y.tail(n));
    }
    return p;
}

struct CurvatureIdentity {
    std::string name;
    bool applicable = false;
    double lhs = 0.0, rhs = 0.0;
    double residual() const { return applicable ? std::abs(lhs - rhs) : 0.0; }
};

/// Sectional curvature of the kernel Lie algebra with the restricted metric,
/// from the Koszul formula on an orthonormal basis.
inline double kernel_sectional_curvature(const OneillPoint& p, int i0, int j0) {
    const Mat& K = p.frame.vertical;
    const int k = static_cast<int>(K.cols()), r = p.frame.rank();
    Tensor3 c(k, k, k);  // [k_i, k_j] = sum c_ij^m k_m
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            Vec br = Vec::Zero(r);
            for (int s = 0; s < r; ++s)
                for (int t = 0; t < r; ++t)
                    for (int u = 0; u < r; ++u) br[u] += K(s, i) * K(t, j) * p.geo.st.C(s, t, u);
            for (int m = 0; m < k; ++m) c(i, j, m) = p.inner(K.col(m), br);
        }
    Tensor3 G(k, k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            for (int m = 0; m < k; ++m) G(i, j, m) = 0.5 * (c(i, j, m) - c(j, m, i) + c(m, i, j));
    auto D = [&](const Vec& u, const Vec& w) {
        Vec out = Vec::Zero(k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                for (int m = 0; m < k; ++m) out[m] += u[i] * w[j] * G(i, j, m);
        return out;
    };
    auto br = [&](const Vec& u, const Vec& w) {
        Vec out = Vec::Zero(k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                for (int m = 0; m < k; ++m) out[m] += u[i] * w[j] * c(i, j, m);
        return out;
    };
    const Vec a = Vec::Unit(k, i0), b = Vec::Unit(k, j0);
    const Vec Rab_a = D(a, D(b, a)) - D(b, D(a, a)) - D(br(a, b), a);
    return -Rab_a.dot(b);
}

/// O'Neill's curvature identities on the first frame vectors of each kind:
///   K(a,b)   = K^(a,b) + |T_a b|^2 - <T_a a, T_b b>          a, b vertical
///   K(s,a)   = <(D_s T)_a a, s> - |T_a s|^2 + |H_s a|^2        s horizontal
///   K(s1,s2) = K~(#s1, #s2) - 3 |H_{s1} s2|^2
inline std::vector<CurvatureIdentity> oneill_curvature_check(const AlgebroidChart& chart, const MetricField& metric,
                                                             const Vec& x) {
    const OneillPoint p = oneill_point(chart, metric, x);
    const int q = p.frame.q, kv = p.frame.vertical_dim();
    const bool transitive = q == chart.n();
    if (!transitive && !chart.anchor_is_zero())
        throw PreconditionError("curvature identities need a transitive or Lie-algebra chart");
    auto K = [&](const Vec& a, const Vec& b) { return sectional_curvature(p.R, p.geo.mt, a, b); };
    auto norm2 = [&](const Vec& a) { return p.inner(a, a); };

    std::vector<CurvatureIdentity> out(3);
    out[0].name = "vertical_pair";
    out[1].name = "mixed_pair";
    out[2].name = "horizontal_pair";

    if (kv >= 2) {
        const Vec a = p.frame.vertical.col(0), b = p.frame.vertical.col(1);
        out[0].applicable = true;
        out[0].lhs = K(a, b);
        out[0].rhs = kernel_sectional_curvature(p, 0, 1) + norm2(oneill_T_apply(p, a, b)) -
                     p.inner(oneill_T_apply(p, a, a), oneill_T_apply(p, b, b));
    }
    if (kv >= 1 && q >= 1) {
        const Vec s = p.frame.horizontal.col(0), a = p.frame.vertical.col(0);
        // (D_s T)_a a = D_s(T_a a) - T_{D_s a} a - T_a D_s a, a extended with constant coefficients.
        const Vec Ds_a = p.gamma(s, a);
        const Vec Ds_Taa = p.gamma(s, oneill_T_apply(p, a, a)) + oneill_T_derivative(p, p.anchor(s), a, a);
        const Vec DsT = Ds_Taa - oneill_T_apply(p, Ds_a, a) - oneill_T_apply(p, a, Ds_a);
        out[1].applicable = true;
        out[1].lhs = K(s, a);
        out[1].rhs = p.inner(DsT, s) - norm2(oneill_T_apply(p, a, s)) + norm2(oneill_H_apply(p, s, a));
    }
    if (q >= 2 && transitive) {
        const Vec s1 = p.frame.horizontal.col(0), s2 = p.frame.horizontal.col(1);
        const LeafGeometry L = leaf_geometry(chart, metric, x, true);
        out[2].applicable = true;
        out[2].lhs = K(s1, s2);
        out[2].rhs = L.sectional(p.anchor(s1), p.anchor(s2)) - 3.0 * norm2(oneill_H_apply(p, s1, s2));
    }
    return out;
}

}  // namespace ralg
