// ralg: command-line front end for the Lie algebroid library.
//
//   ralg <verb> (--chart FILE | --catalog NAME) [options]
//
// Writes <verb>.csv and report.txt into --out. Exit 0 when every check
// passes, 1 when one fails, 2 on bad input.

#include "ralg.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace ralg;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitInput = 2;

struct Options {
    std::string verb;
    std::string chart_file, catalog_name;
    std::uint64_t seed = 42;
    std::string out = ".";
    int samples = -1;
    double step = kDefaultStep;
    std::optional<double> tol;
    std::string x, mu, s, beta0, dbeta0, u, grid;
    double t1 = 1.0;
    int n_eps = 21;
};

struct Check {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool lower_bound = false;  // pass when value > tolerance

    bool pass() const {
        if (!std::isfinite(value)) return false;
        return lower_bound ? value > tolerance : value < tolerance;
    }
};

class Report {
public:
    explicit Report(const Options& o) : opts_(o) {}

    void check(const std::string& name, double residual, double tolerance) {
        checks_.push_back({name, residual, opts_.tol.value_or(tolerance), false});
    }
    void at_least(const std::string& name, double value, double bound) { checks_.push_back({name, value, bound, true}); }
    void info(const std::string& key, const std::string& value) { info_.emplace_back(key, value); }

    bool pass() const {
        for (const Check& c : checks_)
            if (!c.pass()) return false;
        return true;
    }

    void write(std::ostream& out, const std::string& chart, double seconds) const {
        out << "command=" << opts_.verb << "\n";
        out << "chart=" << chart << "\n";
        out << "seed=" << opts_.seed << "\n";
        for (const auto& [k, v] : info_) out << k << "=" << v << "\n";
        for (const Check& c : checks_) {
            const std::string p = "check." + c.name + ".";
            out << p << (c.lower_bound ? "value=" : "residual=") << format_real(c.value) << "\n";
            out << p << (c.lower_bound ? "bound=" : "tolerance=") << format_real(c.tolerance) << "\n";
            out << p << "pass=" << (c.pass() ? 1 : 0) << "\n";
        }
        out << "pass=" << (pass() ? 1 : 0) << "\n";
        out << "wall_time_s=" << format_real(seconds) << "\n";
    }

private:
    const Options& opts_;
    std::vector<Check> checks_;
    std::vector<std::pair<std::string, std::string>> info_;
};

struct Loaded {
    AlgebroidChart chart;
    MetricField metric;
    std::string label;
};

Loaded load(const Options& o) {
    if (!o.catalog_name.empty()) {
        CatalogEntry e = catalog::get(o.catalog_name);
        return {std::move(e.chart), std::move(e.metric), "catalog:" + o.catalog_name};
    }
    std::ifstream in(o.chart_file);
    if (!in) throw PreconditionError("cannot open chart file '" + o.chart_file + "'");
    ChartFile f = parse_chart_file(in);
    return {std::move(f.chart), std::move(f.metric), o.chart_file};
}

// "0.5, pi/2" -> vector; empty text gives `fallback`.
Vec parse_vec(const std::string& flag, const std::string& text, int dim, const Vec& fallback) {
    if (text.empty()) return fallback;
    std::vector<double> vals;
    std::stringstream ss(text);
    for (std::string tok; std::getline(ss, tok, ',');) {
        Expression e;
        try {
            e = Expression::parse(tok, 1);
        } catch (const ralg::ParseError& err) {
            throw PreconditionError(flag + ": " + err.what());
        }
        if (!e.is_constant()) throw PreconditionError(flag + ": '" + tok + "' is not a constant");
        vals.push_back(e.constant_value());
    }
    if (static_cast<int>(vals.size()) != dim)
        throw PreconditionError(flag + " expects " + std::to_string(dim) + " components, got " + std::to_string(vals.size()));
    return Eigen::Map<const Vec>(vals.data(), dim);
}

std::vector<AVector> sample(const AlgebroidChart& chart, int count, std::uint64_t seed) {
    HaltonSampler s(chart.n() + chart.r(), seed);
    std::vector<AVector> out;
    for (int k = 0; k < count; ++k) {
        const Vec u = s.next();
        out.push_back({chart.domain().map(u.head(chart.n()), 0.05), (2.0 * u.tail(chart.r()).array() - 1.0).matrix()});
    }
    return out;
}

int samples_or(const Options& o, int fallback) {
    const int n = o.samples < 0 ? fallback : o.samples;
    if (n < 1) throw PreconditionError("--samples must be positive");
    return n;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> out;
    for (int k = 0; k < n; ++k) out.push_back(a + (b - a) * k / (n - 1));
    return out;
}

class Outputs {
public:
    explicit Outputs(const Options& o) : dir_(o.out), verb_(o.verb) { fs::create_directories(dir_); }

    std::ofstream open(const std::string& name) const {
        std::ofstream f(dir_ / name, std::ios::binary);
        if (!f) throw PreconditionError("cannot write " + (dir_ / name).string());
        return f;
    }
    std::ofstream main() const { return open(verb_ + ".csv"); }
    fs::path dir() const { return dir_; }

private:
    fs::path dir_;
    std::string verb_;
};

// ------------------------------------------------------------------ verbs

void run_validate(const Options& o, const Loaded& L, const Outputs& out, Report& rep) {
    const int n = samples_or(o, 200);
    const ValidationReport v = validate(L.chart, n, o.seed);
    auto f = out.main();
    write_validation_csv(f, v, L.chart.n());
    for (const AxiomResult& a : v.axioms) rep.check(a.name, a.max_residual, a.tolerance);
    const MetricCheck m = validate_metric(L.chart, L.metric, n, o.seed);
    rep.check("metric_symmetry", m.max_asymmetry, 1e-12);
    rep.at_least("metric_min_eigenvalue", m.min_eigenvalue, kMinMetricEigenvalue);
}

struct Start {
    Vec x, mu;
};

Start start_of(const Options& o, const Loaded& L) {
    return {parse_vec("--x", o.x, L.chart.n(), L.chart.domain().center()),
            parse_vec("--mu", o.mu, L.chart.r(), Vec::Unit(L.chart.r(), 0))};
}

APath integrate(const Options& o, const Loaded& L, const Start& s, const Outputs& out) {
    try {
        return geodesic_integrate(L.chart, L.metric, {s.x, s.mu}, 0.0, o.t1, o.step);
    } catch (const DomainExit& e) {
        auto f = out.main();
        write_path_csv(f, e.partial());
        throw;
    }
}

void run_geodesic(const Options& o, const Loaded& L, const Outputs& out, Report& rep) {
    const APath p = integrate(o, L, start_of(o, L), out);
    auto f = out.main();
    write_path_csv(f, p);
    rep.check("energy_drift", p.energy_drift, 1e-8);
    rep.check("geodesic_residual", geodesic_residual(L.chart, L.metric, p), kGeodesicTolerance);
}

void run_exp(const Options& o, const Loaded& L, const Outputs& out, Report& rep) {
    const Start s = start_of(o, L);
    const APath p = integrate(o, L, s, out);
    // Same map at half the step.
    const Vec fine = exp_map(L.chart, L.metric, s.x, s.mu * o.t1, o.step / (2.0 * o.t1));
    auto f = out.main();
    std::vector<std::string> cols = csv::numbered("m", L.chart.n());
    for (const auto& c : csv::numbered("a", L.chart.r())) cols.push_back(c);
    for (const auto& c : csv::numbered("exp", L.chart.n())) cols.push_back(c);
    csv::header(f, cols);
    csv::values(f, s.x, false);
    csv::values(f, s.mu * o.t1);
    csv::values(f, p.back().x);
    f << "\n";
    rep.check("energy_drift", p.energy_drift, 1e-8);
    rep.check("step_halving", max_abs(fine - p.back().x), 1e-8);
}

void run_transport(const Options& o, const Loaded& L, const Outputs& out, Report& rep) {
    const Start st = start_of(o, L);
    const Vec s0 = parse_vec("--s", o.s, L.chart.r(), Vec::Unit(L.chart.r(), 0));
    const APath p = integrate(o, L, st, out);
    const FiberCurve s = parallel_transport(L.chart, L.metric, p, s0);
    auto f = out.main();
    std::vector<std::string> cols{"t"};
    for (const auto& c : csv::numbered("x", L.chart.n())) cols.push_back(c);
    for (const auto& c : csv::numbered("s", L.chart.r())) cols.push_back(c);
    csv::header(f, cols);
    double drift = 0.0;
    const double n0 = L.metric.at(p.x.front(), 0).norm2(s0);
    for (std::size_t k = 0; k < p.size(); ++k) {
        f << format_real(p.t[k]);
        csv::values(f, p.x[k]);
        csv::values(f, s.values[k]);
        f << "\n";
        drift = std::max(drift, std::abs(L.metric.at(p.x[k], 0).norm2(s.values[k]) - n0));
    }
    rep.check("norm_drift", drift, 1e-8);
    rep.check("covariant_derivative", derivative_along(L.chart, L.metric, p, s).max_norm(), 1e-6);
}

void run_jacobi(const Options& o, const Loaded& L, const Outputs& out, Report& rep) {
    const Start st = start_of(o, L);
    const int r = L.chart.r();
    const Vec b0 = parse_vec("--beta0", o.beta0, r, Vec::Zero(r));
    const Vec db0 = parse_vec("--dbeta0", o.dbeta0, r, Vec::Unit(r, 0));
    const APath p = integrate(o, L, st, out);
    const JacobiSolution J = jacobi_solve(L.chart, L.metric, p, b0, db0);
    auto f = out.main();
    std::vector<std::string> cols{"t"};
    for (const auto& c : csv::numbered("beta", r)) cols.push_back(c);
    for (const auto& c : csv::numbered("dbeta", r)) cols.push_back(c);
    csv::header(f, cols);
    // <beta, alpha> is affine in t along a geodesic.
    const double c0 = L.metric.at(p.x.front(), 0).inner(b0, p.mu.front());
    const double c1 = L.metric.at(p.x.front(), 0).inner(db0, p.mu.front());
    double affine = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        f << format_real(p.t[k]);
        csv::values(f, J.beta.values[k]);
        csv::values(f, J.dbeta.values[k]);
        f << "\n";
        const double ip = L.metric.at(p.x[k], 0).inner(J.beta.values[k], p.mu[k]);
        affine = std::max(affine, std::abs(ip - c0 - c1 * (p.t[k] - p.t.front())));
    }
    rep.check("inner_product_affine", affine, 1e-8);
    if (b0.isZero() && o.t1 == 1.0) {
        const PencilComparison c = jacobi_from_geodesic_pencil(L.chart, L.metric, {st.x, st.mu}, db0, 1e-3, o.step);
        rep.check("pencil", c.max_deviation, 1e-4);
    }
}

void run_curvature(const Options& o, const Loaded& L, const Outputs& out, Report& rep) {
    const Vec x = parse_vec("--x", o.x, L.chart.n(), L.chart.domain().center());
    if (!L.chart.domain().contains(x)) throw PreconditionError("--x outside the domain box");
    const Curvature R = curvature(L.chart, L.metric, x);
    {
        auto f = out.main();
        write_curvature_csv(f, R);
        auto c = out.open("christoffel.csv");
        write_christoffel_csv(c, christoffel(L.chart, L.metric, x));
    }
    const Mat g = L.metric.at(x, 0).g;
    const int r = L.chart.r();
    // Rl(i,j,k,l) = <R(a_i,a_j)a_k, a_l>
    auto Rl = [&](int i, int j, int k, int l) {
        double s = 0.0;
        for (int m = 0; m < r; ++m) s += R.riemann(i, j, k, m) * g(m, l);
        return s;
    };
    double skew = 0.0, metric = 0.0, pair = 0.0, bianchi = 0.0;
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
            for (int k = 0; k < r; ++k)
                for (int l = 0; l < r; ++l) {
                    skew = std::max(skew, std::abs(Rl(i, j, k, l) + Rl(j, i, k, l)));
                    metric = std::max(metric, std::abs(Rl(i, j, k, l) + Rl(i, j, l, k)));
                    pair = std::max(pair, std::abs(Rl(i, j, k, l) - Rl(k, l, i, j)));
                    bianchi = std::max(bianchi, std::abs(Rl(i, j, k, l) + Rl(j, k, i, l) + Rl(k, i, j, l)));
                }
    rep.check("skew_ij", skew, 1e-9);
    rep.check("skew_kl", metric, 1e-9);
    rep.check("pair_symmetry", pair, 1e-9);
    rep.check("bianchi", bianchi, 1e-9);
}

void run_oneill(const Options& o, const Loaded& L, const Outputs& out, Report& rep) {
    const Vec x = parse_vec("--x", o.x, L.chart.n(), L.chart.domain().center());
    if (!L.chart.domain().contains(x)) throw PreconditionError("--x outside the domain box");
    const OneillPoint p = oneill_point(L.chart, L.metric, x);
    const OneillTensors t = oneill_tensors(p);
    const int r = L.chart.r();
    {
        auto f = out.main();
        csv::header(f, {"tensor", "i", "j", "k", "value"});
        for (const auto& [name, T] : {std::pair{"T", &t.T}, std::pair{"H", &t.H}})
            for (int i = 0; i < r; ++i)
                for (int j = 0; j < r; ++j)
                    for (int k = 0; k < r; ++k)
                        f << name << "," << i + 1 << "," << j + 1 << "," << k + 1 << "," << format_real((*T)(i, j, k)) << "\n";
    }
    rep.info("q", std::to_string(t.frame.q));
    rep.info("rank_warning", t.warning ? "1" : "0");

    std::vector<Vec> points{x};
    for (const AVector& a : sample(L.chart, samples_or(o, 20), o.seed)) points.push_back(a.x);
    std::vector<std::pair<std::string, double>> worst;
    auto record = [&](const std::string& name, double v) {
        for (auto& w : worst)
            if (w.first == name) {
                w.second = std::max(w.second, v);
                return;
            }
        worst.emplace_back(name, v);
    };
    const bool curvature_ok = t.frame.q == L.chart.n() || L.chart.anchor_is_zero();
    for (const Vec& y : points) {
        for (const IdentityResidual& id : oneill_identities(L.chart, L.metric, y)) record(id.name, id.residual);
        if (curvature_ok)
            for (const CurvatureIdentity& c : oneill_curvature_check(L.chart, L.metric, y))
                if (c.applicable) record("curvature_" + c.name, c.residual());
    }
    for (const auto& [name, v] : worst) rep.check(name, v, name.starts_with("curvature_") ? 1e-8 : kIdentityTolerance);
}

// Divergence of X_E for the Sasaki volume by central differences; only
// for Lie-algebra and transitive charts.
double fd_divergence(const Loaded& L, const AVector& a, double h = 1e-5) {
    const int n = L.chart.n(), r = L.chart.r();
    auto field = [&](const Vec& x, const Vec& mu) { return geodesic_rhs(L.chart, L.metric, x, mu); };
    double div = 0.0;
    for (int j = 0; j < r; ++j) {
        Vec mp = a.mu, mm = a.mu;
        mp[j] += h;
        mm[j] -= h;
        div += (field(a.x, mp).second[j] - field(a.x, mm).second[j]) / (2 * h);
    }
    if (L.chart.anchor_is_zero()) return div;
    auto rho = [&](const Vec& x) {
        return std::sqrt(leaf_geometry(L.chart, L.metric, x, false).h.determinant() * L.metric.at(x, 0).g.determinant());
    };
    for (int m = 0; m < n; ++m) {
        Vec xp = a.x, xm = a.x;
        xp[m] += h;
        xm[m] -= h;
        div += (rho(xp) * field(xp, a.mu).first[m] - rho(xm) * field(xm, a.mu).first[m]) / (2 * h) / rho(a.x);
    }
    return div;
}

void run_divergence(const Options& o, const Loaded& L, const Outputs& out, Report& rep) {
    const int n = L.chart.n(), r = L.chart.r();
    std::vector<AVector> pts;
    for (int k = 0; k < r; ++k) pts.push_back({L.chart.domain().center(), Vec::Unit(r, k)});
    for (const AVector& a : sample(L.chart, samples_or(o, 50), o.seed)) pts.push_back(a);
    const bool oracle = L.chart.anchor_is_zero() || split(L.chart, L.metric, pts.front().x).q == n;

    auto f = out.main();
    std::vector<std::string> cols = csv::numbered("x", n);
    for (const auto& c : csv::numbered("mu", r)) cols.push_back(c);
    for (const char* c : {"trace_term", "n_term", "total", "fd_total"}) cols.push_back(c);
    csv::header(f, cols);
    double closure = 0.0, fd = 0.0;
    for (const AVector& a : pts) {
        const DivergenceResult d = divergence_XE(L.chart, L.metric, a);
        csv::values(f, a.x, false);
        csv::values(f, a.mu);
        f << "," << format_real(d.trace_term) << "," << format_real(d.n_term) << "," << format_real(d.total) << ",";
        if (oracle) {
            const double v = fd_divergence(L, a);
            f << format_real(v);
            fd = std::max(fd, std::abs(v - d.total));
        }
        f << "\n";
        closure = std::max(closure, d.closure_residual);
    }
    rep.check("kernel_closure", closure, 1e-9);
    if (oracle) rep.check("fd_divergence", fd, 1e-5);
}

void run_hamcheck(const Options& o, const Loaded& L, const Outputs& out, Report& rep) {
    const int n = L.chart.n(), r = L.chart.r();
    auto f = out.main();
    std::vector<std::string> cols = csv::numbered("x", n);
    for (const auto& c : csv::numbered("mu", r)) cols.push_back(c);
    cols.push_back("residual");
    cols.push_back("euler_residual");
    csv::header(f, cols);
    double worst = 0.0, euler = 0.0;
    for (const AVector& a : sample(L.chart, samples_or(o, 100), o.seed)) {
        const HamiltonianField h = hamiltonian_field(L.chart, L.metric, a);
        const auto [dx, dmu] = geodesic_rhs(L.chart, L.metric, a.x, a.mu);
        const double res = std::max(max_abs(h.dx - dx), max_abs(h.dmu - dmu));
        const double e = euler_identity_residual(L.chart, L.metric, a);
        csv::values(f, a.x, false);
        csv::values(f, a.mu);
        f << "," << format_real(res) << "," << format_real(e) << "\n";
        worst = std::max(worst, res);
        euler = std::max(euler, e);
    }
    rep.check("hamiltonian_field", worst, 1e-8);
    rep.check("euler_identity", euler, 1e-9);
}

VariationGrid variation_input(const Options& o, const Loaded& L) {
    const int r = L.chart.r();
    if (!o.grid.empty()) {
        std::ifstream in(o.grid);
        if (!in) throw PreconditionError("cannot open grid file '" + o.grid + "'");
        VariationGrid g = read_variation_csv(in, L.chart.n(), r);
        if (!g.has_beta()) {
            const Vec b0 = parse_vec("--beta0", o.beta0, r, Vec::Zero(r));
            g = solve_transverse(L.chart, L.metric, g, std::vector<Vec>(g.eps.size(), b0)).grid;
        }
        return g;
    }
    // Geodesic pencil t -> phi_t(x, mu + eps u).
    if (o.n_eps < 3) throw PreconditionError("--n-eps must be at least 3");
    const Start st = start_of(o, L);
    const Vec u = parse_vec("--u", o.u, r, Vec::Unit(r, r - 1));
    const std::vector<double> eps = linspace(-0.05, 0.05, o.n_eps);
    std::vector<APath> rows;
    for (double e : eps) rows.push_back(geodesic_integrate(L.chart, L.metric, {st.x, st.mu + e * u}, 0.0, o.t1, o.step));
    return solve_transverse(L.chart, L.metric, VariationGrid::from_paths(eps, rows), std::vector<Vec>(eps.size(), Vec::Zero(r)))
        .grid;
}

void run_variation(const Options& o, const Loaded& L, const Outputs& out, Report& rep) {
    const VariationGrid g = variation_input(o, L);
    {
        auto f = out.main();
        write_variation_csv(f, g);
    }
    rep.info("n_eps", std::to_string(g.n_eps()));
    rep.info("n_t", std::to_string(g.n_t()));
    rep.check("transversality", transversality_residual(L.chart, g), kTransverseOutputTolerance);
    const std::vector<Vec> D = delta(L.chart, L.metric, g);
    rep.check("delta_anchor", delta_anchor_residual(L.chart, g, D), 1e-5);
    const std::vector<Vec> s(g.x.size(), Vec::Ones(L.chart.r()));
    rep.check("curvature_commutation", curvature_commutation_residual(L.chart, L.metric, g, s).max_interior, 1e-3);
    if (g.n_eps() % 2 == 1) rep.check("first_variation", first_variation_residual(L.chart, L.metric, g).residual(), 1e-4);
}

void run_catalog(const Options& o, const Outputs& out, Report& rep) {
    auto f = out.main();
    csv::header(f, {"name", "n", "r", "description"});
    for (const CatalogEntry& e : catalog::all())
        f << e.name << "," << e.chart.n() << "," << e.chart.r() << ",\"" << e.description << "\"\n";
    if (!o.catalog_name.empty()) {
        const CatalogEntry e = catalog::get(o.catalog_name);
        auto c = out.open(e.name + ".chart");
        write_chart_file(c, e.chart, e.metric, e.description);
        rep.info("written", (out.dir() / (e.name + ".chart")).string());
    }
}

int dispatch(const Options& o) {
    const auto t0 = std::chrono::steady_clock::now();
    Report rep(o);
    std::string label = "-";
    const Outputs out(o);
    int code = kExitPass;
    try {
        if (o.verb == "catalog") {
            run_catalog(o, out, rep);
            if (!o.catalog_name.empty()) label = "catalog:" + o.catalog_name;
        } else {
            if (o.chart_file.empty() == o.catalog_name.empty())
                throw PreconditionError("exactly one of --chart or --catalog is required");
            if (!(o.step > 0.0)) throw PreconditionError("--step must be positive");
            if (!(o.t1 > 0.0)) throw PreconditionError("--t1 must be positive");
            const Loaded L = load(o);
            label = L.label;
            if (o.verb == "validate") run_validate(o, L, out, rep);
            else if (o.verb == "geodesic") run_geodesic(o, L, out, rep);
            else if (o.verb == "exp") run_exp(o, L, out, rep);
            else if (o.verb == "transport") run_transport(o, L, out, rep);
            else if (o.verb == "jacobi") run_jacobi(o, L, out, rep);
            else if (o.verb == "curvature") run_curvature(o, L, out, rep);
            else if (o.verb == "oneill") run_oneill(o, L, out, rep);
            else if (o.verb == "divergence") run_divergence(o, L, out, rep);
            else if (o.verb == "hamcheck") run_hamcheck(o, L, out, rep);
            else if (o.verb == "variation-check") run_variation(o, L, out, rep);
        }
        code = rep.pass() ? kExitPass : kExitFail;
    } catch (const DomainExit& e) {
        std::cerr << "ralg: " << e.what() << "\n";
        rep.info("domain_exit_time", format_real(e.exit_time()));
        rep.at_least("stayed_in_domain", 0.0, 0.0);
        code = kExitFail;
    } catch (const MeshTooCoarse& e) {
        std::cerr << "ralg: " << e.what() << "\n";
        rep.at_least("mesh_resolved", 0.0, 0.0);
        code = kExitFail;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ofstream f = out.open("report.txt");
    rep.write(f, label, secs);
    rep.write(std::cout, label, secs);
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Riemannian Lie algebroid checks"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* c) {
        auto* chart = c->add_option("--chart", o.chart_file, "chart file");
        auto* cat = c->add_option("--catalog", o.catalog_name, "catalog entry name");
        chart->excludes(cat);
        c->add_option("--seed", o.seed, "sampling seed")->capture_default_str();
        c->add_option("--out", o.out, "output directory")->capture_default_str();
        c->add_option("--samples", o.samples, "number of sample points");
        c->add_option("--step", o.step, "integration step")->capture_default_str();
        c->add_option("--tol", o.tol, "override check tolerances");
    };
    auto path_opts = [&](CLI::App* c) {
        c->add_option("--x", o.x, "base point, comma separated (default: box centre)");
        c->add_option("--mu", o.mu, "initial fiber vector (default: e1)");
        c->add_option("--t1", o.t1, "final time")->capture_default_str();
    };

    struct Verb {
        const char* name;
        const char* help;
    };
    const Verb verbs[] = {
        {"validate", "check the algebroid axioms and the metric"},
        {"geodesic", "integrate a geodesic"},
        {"exp", "exponential map"},
        {"transport", "parallel transport along a geodesic"},
        {"jacobi", "Jacobi field along a geodesic"},
        {"curvature", "Christoffel symbols and curvature at a point"},
        {"oneill", "T and H tensors and their identities"},
        {"divergence", "divergence of the geodesic field"},
        {"hamcheck", "geodesic field against the Hamiltonian field"},
        {"variation-check", "transverse variation identities"},
        {"catalog", "list catalog entries, write one as a chart file"},
    };
    for (const Verb& v : verbs) {
        CLI::App* c = app.add_subcommand(v.name, v.help);
        common(c);
        const std::string name = v.name;
        if (name == "geodesic" || name == "exp" || name == "transport" || name == "jacobi" || name == "variation-check")
            path_opts(c);
        if (name == "curvature" || name == "oneill") c->add_option("--x", o.x, "point (default: box centre)");
        if (name == "transport") c->add_option("--s", o.s, "initial section value (default: e1)");
        if (name == "jacobi" || name == "variation-check") c->add_option("--beta0", o.beta0, "initial beta (default: 0)");
        if (name == "jacobi") c->add_option("--dbeta0", o.dbeta0, "initial covariant derivative of beta (default: e1)");
        if (name == "variation-check") {
            c->add_option("--grid", o.grid, "variation CSV (default: geodesic pencil)");
            c->add_option("--u", o.u, "pencil direction (default: e_r)");
            c->add_option("--n-eps", o.n_eps, "pencil rows")->capture_default_str();
        }
        c->callback([&o, name] { o.verb = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitPass : kExitInput;
    }

    try {
        return dispatch(o);
    } catch (const ChartFileError& e) {
        std::cerr << "ralg: " << o.chart_file << ": " << e.what() << "\n";
    } catch (const Error& e) {
        std::cerr << "ralg: " << e.what() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "ralg: " << e.what() << "\n";
    }
    return kExitInput;
}
