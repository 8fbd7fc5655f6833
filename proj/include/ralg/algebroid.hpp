#pragma once

// Lie algebroids over a single chart, given by structure functions
//
//   #(a_s)      = sum_i b^{si} d/dx_i
//   [a_s, a_t]  = sum_u C_{st}^u a_u
//
// All indices in this library are 0-based; user-facing text (chart files,
// CSV headers) is 1-based.

#include "ralg/errors.hpp"
#include "ralg/expression.hpp"
#include "ralg/sampling.hpp"
#include "ralg/tensor.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace ralg {

/// Axis-aligned sampling box of a chart.
struct Box {
    std::vector<double> lo, hi;

    int dim() const { return static_cast<int>(lo.size()); }

    bool contains(const Vec& x) const {
        for (int i = 0; i < dim(); ++i)
            if (!(x[i] >= lo[i] && x[i] <= hi[i])) return false;
        return true;
    }

    /// Map a point of [0,1)^n into the box, keeping `margin` (a fraction of
    /// each side) clear of the boundary.
    Vec map(const Vec& unit, double margin = 0.0) const {
        Vec x(dim());
        for (int i = 0; i < dim(); ++i) {
            const double width = hi[i] - lo[i];
            x[i] = lo[i] + width * (margin + (1.0 - 2.0 * margin) * unit[i]);
        }
        return x;
    }

    Vec center() const { return map(Vec::Constant(dim(), 0.5)); }
};

/// An element of the fiber A_x in the basis a_1..a_r.
struct AVector {
    Vec x;
    Vec mu;
};

/// A section x -> sum_s f_s(x) a_s.
struct SectionField {
    std::vector<Expression> components;

    static SectionField constant(const Vec& coefficients, int n) {
        SectionField f;
        for (Eigen::Index s = 0; s < coefficients.size(); ++s)
            f.components.push_back(Expression::constant(coefficients[s], n));
        return f;
    }
    static SectionField basis(int s, int r, int n) {
        Vec e = Vec::Zero(r);
        e[s] = 1.0;
        return constant(e, n);
    }

    int rank() const { return static_cast<int>(components.size()); }
};

/// One upper-triangular bracket coefficient C_{st}^u with s < t (0-based).
struct BracketEntry {
    int s, t, u;
    Expression value;
};

/// Structure functions evaluated at a point, with derivatives up to the
/// requested order. `db(m,s,i) = d_m b^{si}`, `d2b(m,p,s,i) = d_m d_p b^{si}`,
/// `dC(m,s,t,u) = d_m C_{st}^u`.
struct StructureAt {
    int n = 0, r = 0, order = 0;
    Mat b;  // r x n
    Tensor3 db;
    Tensor4 d2b;
    Tensor3 C;
    Tensor4 dC;
};

class AlgebroidChart {
public:
    AlgebroidChart() = default;

    /// `anchor` holds r*n expressions, row-major by section: anchor[s*n + i] = b^{si}.
    /// Bracket entries must have s < t; the remaining coefficients are filled
    /// by antisymmetry and default to zero.
    AlgebroidChart(int n, int r, std::vector<Expression> anchor, const std::vector<BracketEntry>& entries, Box domain)
        : n_(n), r_(r), anchor_(std::move(anchor)), domain_(std::move(domain)) {
        if (n < 1 || r < 1) throw PreconditionError("chart needs n >= 1 and r >= 1");
        if (static_cast<int>(anchor_.size()) != r * n) throw PreconditionError("anchor must have r*n entries");
        if (domain_.dim() != n) throw PreconditionError("domain box must have n intervals");
        for (int i = 0; i < n; ++i)
            if (!(domain_.lo[i] < domain_.hi[i])) throw PreconditionError("empty domain interval");
        for (const Expression& e : anchor_) check_arity(e);
        bracket_.assign(static_cast<std::size_t>(r * r * r), Expression::constant(0.0, n));
        std::vector<bool> seen(bracket_.size(), false);
        for (const BracketEntry& e : entries) {
            if (e.s < 0 || e.t < 0 || e.u < 0 || e.s >= r || e.t >= r || e.u >= r)
                throw PreconditionError("bracket index out of range");
            if (e.s >= e.t) throw PreconditionError("bracket entries must have s < t");
            check_arity(e.value);
            const std::size_t k = index(e.s, e.t, e.u);
            if (seen[k]) throw PreconditionError("duplicate bracket entry");
            seen[k] = true;
            bracket_[k] = e.value;
            bracket_[index(e.t, e.s, e.u)] = -e.value;
        }
    }

    int n() const { return n_; }
    int r() const { return r_; }
    const Box& domain() const { return domain_; }
    const Expression& anchor(int s, int i) const { return anchor_[static_cast<std::size_t>(s * n_ + i)]; }
    const Expression& bracket(int s, int t, int u) const { return bracket_[index(s, t, u)]; }

    /// Upper-triangular nonzero bracket entries, as accepted by the constructor.
    std::vector<BracketEntry> bracket_entries() const {
        std::vector<BracketEntry> out;
        for (int s = 0; s < r_; ++s)
            for (int t = s + 1; t < r_; ++t)
                for (int u = 0; u < r_; ++u)
                    if (!bracket(s, t, u).is_zero()) out.push_back({s, t, u, bracket(s, t, u)});
        return out;
    }

    bool anchor_is_zero() const {
        return std::all_of(anchor_.begin(), anchor_.end(), [](const Expression& e) { return e.is_zero(); });
    }

    StructureAt structure_at(const Vec& x, int order = 1) const {
        StructureAt st;
        st.n = n_;
        st.r = r_;
        st.order = order;
        st.b = Mat(r_, n_);
        st.C = Tensor3(r_, r_, r_);
        if (order >= 1) {
            st.db = Tensor3(n_, r_, n_);
            st.dC = Tensor4(n_, r_, r_, r_);
        }
        if (order >= 2) st.d2b = Tensor4(n_, n_, r_, n_);
        for (int s = 0; s < r_; ++s) {
            for (int i = 0; i < n_; ++i) {
                const EvalResult e = anchor(s, i).evaluate(x, order);
                st.b(s, i) = e.value;
                if (order >= 1 && !anchor(s, i).is_constant()) {
                    for (int m = 0; m < n_; ++m) st.db(m, s, i) = e.gradient[m];
                    if (order >= 2)
                        for (int m = 0; m < n_; ++m)
                            for (int p = 0; p < n_; ++p) st.d2b(m, p, s, i) = e.hessian(m, p);
                }
            }
        }
        for (int s = 0; s < r_; ++s) {
            for (int t = 0; t < r_; ++t) {
                for (int u = 0; u < r_; ++u) {
                    const Expression& c = bracket(s, t, u);
                    if (c.is_constant()) {
                        st.C(s, t, u) = c.constant_value();
                        continue;
                    }
                    const EvalResult e = c.evaluate(x, order >= 1 ? 1 : 0);
                    st.C(s, t, u) = e.value;
                    if (order >= 1)
                        for (int m = 0; m < n_; ++m) st.dC(m, s, t, u) = e.gradient[m];
                }
            }
        }
        return st;
    }

private:
    std::size_t index(int s, int t, int u) const {
        return static_cast<std::size_t>((s * r_ + t) * r_ + u);
    }
    void check_arity(const Expression& e) const {
        if (e.variable_count() != n_) throw PreconditionError("expression variable count differs from chart dimension");
    }

    int n_ = 0, r_ = 0;
    std::vector<Expression> anchor_;
    std::vector<Expression> bracket_;
    Box domain_;
};

/// #(v) = sum_s mu_s b^{s.}(x).
inline Vec anchor_apply(const AlgebroidChart& chart, const AVector& v) {
    return chart.structure_at(v.x, 0).b.transpose() * v.mu;
}

/// [f, g]^u = sum f_s g_t C_{st}^u + #(f)(g_u) - #(g)(f_u), evaluated at x.
inline Vec bracket_sections(const AlgebroidChart& chart, const SectionField& f, const SectionField& g, const Vec& x) {
    const int n = chart.n(), r = chart.r();
    if (f.rank() != r || g.rank() != r) throw PreconditionError("section has wrong number of components");
    const StructureAt st = chart.structure_at(x, 0);
    Vec fv(r), gv(r);
    Mat fd(r, n), gd(r, n);
    for (int s = 0; s < r; ++s) {
        const EvalResult a = f.components[s].evaluate(x, 1);
        const EvalResult b = g.components[s].evaluate(x, 1);
        fv[s] = a.value;
        gv[s] = b.value;
        fd.row(s) = a.gradient.transpose();
        gd.row(s) = b.gradient.transpose();
    }
    const Vec f_tangent = st.b.transpose() * fv;
    const Vec g_tangent = st.b.transpose() * gv;
    Vec out = gd * f_tangent - fd * g_tangent;
    for (int s = 0; s < r; ++s)
        for (int t = 0; t < r; ++t)
            for (int u = 0; u < r; ++u) out[u] += fv[s] * gv[t] * st.C(s, t, u);
    return out;
}

struct AxiomResult {
    std::string name;
    double max_residual = 0.0;
    double tolerance = 0.0;
    Vec worst_point;
    std::array<int, 4> indices{-1, -1, -1, -1};  // 0-based; -1 when unused
    bool pass = true;
};

struct ValidationReport {
    std::vector<AxiomResult> axioms;
    int samples = 0;

    bool pass() const {
        return std::all_of(axioms.begin(), axioms.end(), [](const AxiomResult& a) { return a.pass; });
    }
    const AxiomResult& axiom(const std::string& name) const {
        for (const AxiomResult& a : axioms)
            if (a.name == name) return a;
        throw PreconditionError("no axiom named " + name);
    }
};

inline constexpr double kValidationTolerance = 1e-9;

namespace detail {

inline void record(AxiomResult& a, double residual, const Vec& x, std::array<int, 4> idx) {
    if (a.worst_point.size() == 0 || residual > a.max_residual) {
        a.max_residual = residual;
        a.worst_point = x;
        a.indices = idx;
    }
}

}  // namespace detail

/// Residuals of the algebroid axioms at one point:
/// antisymmetry of C, the anchor being a bracket morphism, and the Jacobi
/// identity on basis triples.
inline void accumulate_axioms(const AlgebroidChart& chart, const Vec& x, AxiomResult& antisym, AxiomResult& morphism,
                              AxiomResult& jacobi) {
    const int n = chart.n(), r = chart.r();
    const StructureAt st = chart.structure_at(x, 1);

    for (int s = 0; s < r; ++s)
        for (int t = 0; t < r; ++t)
            for (int u = 0; u < r; ++u)
                detail::record(antisym, std::abs(st.C(s, t, u) + st.C(t, s, u)), x, {s, t, u, -1});

    // #[a_s,a_t] - [#a_s, #a_t], component k.
    for (int s = 0; s < r; ++s) {
        for (int t = s + 1; t < r; ++t) {
            for (int k = 0; k < n; ++k) {
                double v = 0.0;
                for (int u = 0; u < r; ++u) v += st.C(s, t, u) * st.b(u, k);
                for (int m = 0; m < n; ++m) v -= st.b(s, m) * st.db(m, t, k) - st.b(t, m) * st.db(m, s, k);
                detail::record(morphism, std::abs(v), x, {s, t, k, -1});
            }
        }
    }

    // [[a_s,a_t],a_u] = sum_v (sum_m C_st^m C_mu^v - #a_u(C_st^v)) a_v, summed cyclically.
    auto term = [&](int s, int t, int u, int v) {
        double acc = 0.0;
        for (int m = 0; m < r; ++m) acc += st.C(s, t, m) * st.C(m, u, v);
        for (int i = 0; i < n; ++i) acc -= st.b(u, i) * st.dC(i, s, t, v);
        return acc;
    };
    for (int s = 0; s < r; ++s)
        for (int t = s + 1; t < r; ++t)
            for (int u = t + 1; u < r; ++u)
                for (int v = 0; v < r; ++v) {
                    const double jac = term(s, t, u, v) + term(t, u, s, v) + term(u, s, t, v);
                    detail::record(jacobi, std::abs(jac), x, {s, t, u, v});
                }
}

/// Sample the chart's domain box with a seeded Halton set and report the
/// worst residual of each axiom.
inline ValidationReport validate(const AlgebroidChart& chart, int samples = 200, std::uint64_t seed = 42,
                                 double tolerance = kValidationTolerance) {
    if (samples < 1) throw PreconditionError("validate needs at least one sample");
    AxiomResult antisym{"antisymmetry", 0.0, tolerance, {}, {-1, -1, -1, -1}, true};
    AxiomResult morphism{"anchor_morphism", 0.0, tolerance, {}, {-1, -1, -1, -1}, true};
    AxiomResult jacobi{"jacobi", 0.0, tolerance, {}, {-1, -1, -1, -1}, true};
    HaltonSampler sampler(chart.n(), seed);
    for (int k = 0; k < samples; ++k) {
        const Vec x = chart.domain().map(sampler.next());
        accumulate_axioms(chart, x, antisym, morphism, jacobi);
    }
    ValidationReport report;
    report.samples = samples;
    for (AxiomResult* a : {&antisym, &morphism, &jacobi}) {
        a->pass = a->max_residual < a->tolerance;
        report.axioms.push_back(*a);
    }
    return report;
}

}  // namespace ralg
