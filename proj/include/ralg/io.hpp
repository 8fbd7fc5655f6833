#pragma once

// Chart files and CSV output. Numbers are written with 17 significant digits;
// indices in files are 1-based.

#include "ralg/algebroid.hpp"
#include "ralg/errors.hpp"
#include "ralg/expression.hpp"
#include "ralg/metric.hpp"
#include "ralg/paths.hpp"
#include "ralg/variations.hpp"

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace ralg {

struct ChartFile {
    AlgebroidChart chart;
    MetricField metric;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

inline int parse_int(const std::string& s, int line) {
    std::size_t pos = 0;
    int v = 0;
    try {
        v = std::stoi(s, &pos);
    } catch (const std::exception&) {
        throw ChartFileError("expected an integer, got '" + s + "'", line);
    }
    if (pos != s.size()) throw ChartFileError("expected an integer, got '" + s + "'", line);
    return v;
}

/// A constant expression such as "0.1" or "pi - 0.1".
inline double parse_constant(const std::string& s, int line) {
    try {
        const Expression e = Expression::parse(s, 1);
        if (!e.is_constant()) throw ChartFileError("expected a constant, got '" + s + "'", line);
        return e.constant_value();
    } catch (const ParseError& err) {
        throw ChartFileError(err.what(), line);
    }
}

inline Expression parse_expr(const std::string& s, int n, int line) {
    try {
        return Expression::parse(s, n);
    } catch (const ParseError& err) {
        throw ChartFileError(err.what(), line);
    }
}

}  // namespace detail

/// Grammar (one statement per line, '#' starts a comment):
///
///   [algebroid]
///   n = <int>
///   r = <int>
///   domain = lo,hi; lo,hi; ...          (n intervals)
///   b = e,...,e; ...; e,...,e           (r rows of n expressions)
///   C s,t,u = <expr>                    (1-based, s < t; zero if absent)
///   [metric]
///   g i,j = <expr>                      (1-based, i <= j; zero if absent)
inline ChartFile parse_chart_file(std::istream& in) {
    std::string section;
    std::optional<int> n, r;
    std::optional<std::pair<std::string, int>> domain_text, b_text;
    std::vector<std::tuple<int, int, int, std::string, int>> c_text;
    std::vector<std::tuple<int, int, std::string, int>> g_text;
    std::map<std::string, int> seen;

    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string s = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ChartFileError("unterminated section header", line);
            section = detail::trim(s.substr(1, s.size() - 2));
            if (section != "algebroid" && section != "metric") throw ChartFileError("unknown section [" + section + "]", line);
            if (seen.count("[" + section + "]")) throw ChartFileError("duplicate section [" + section + "]", line);
            seen["[" + section + "]"] = line;
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ChartFileError("expected 'key = value'", line);
        const std::string lhs = detail::trim(s.substr(0, eq));
        const std::string rhs = detail::trim(s.substr(eq + 1));
        if (rhs.empty()) throw ChartFileError("missing value for '" + lhs + "'", line);
        if (section.empty()) throw ChartFileError("statement outside a section", line);

        std::istringstream key_in(lhs);
        std::string key, idx;
        key_in >> key;
        std::getline(key_in, idx);
        idx = detail::trim(idx);

        if (section == "algebroid") {
            if (key == "C") {
                const auto parts = detail::split(idx, ',');
                if (parts.size() != 3) throw ChartFileError("C needs three indices 's,t,u'", line);
                c_text.emplace_back(detail::parse_int(parts[0], line), detail::parse_int(parts[1], line),
                                    detail::parse_int(parts[2], line), rhs, line);
                continue;
            }
            if (!idx.empty()) throw ChartFileError("unexpected indices on '" + key + "'", line);
            if (seen.count(key)) throw ChartFileError("duplicate key '" + key + "'", line);
            seen[key] = line;
            if (key == "n") n = detail::parse_int(rhs, line);
            else if (key == "r") r = detail::parse_int(rhs, line);
            else if (key == "domain") domain_text = {rhs, line};
            else if (key == "b") b_text = {rhs, line};
            else throw ChartFileError("unknown key '" + key + "' in [algebroid]", line);
        } else {
            if (key != "g") throw ChartFileError("unknown key '" + key + "' in [metric]", line);
            const auto parts = detail::split(idx, ',');
            if (parts.size() != 2) throw ChartFileError("g needs two indices 'i,j'", line);
            g_text.emplace_back(detail::parse_int(parts[0], line), detail::parse_int(parts[1], line), rhs, line);
        }
    }

    const int end = line;
    if (!n) throw ChartFileError("missing 'n'", end);
    if (!r) throw ChartFileError("missing 'r'", end);
    if (!domain_text) throw ChartFileError("missing 'domain'", end);
    if (!b_text) throw ChartFileError("missing 'b'", end);
    if (*n < 1 || *r < 1) throw ChartFileError("n and r must be positive", seen.at(*n < 1 ? "n" : "r"));
    if (!seen.count("[metric]")) throw ChartFileError("missing [metric] section", end);

    Box box;
    {
        const auto& [text, l] = *domain_text;
        const auto intervals = detail::split(text, ';');
        if (static_cast<int>(intervals.size()) != *n) throw ChartFileError("domain needs n intervals", l);
        for (const std::string& iv : intervals) {
            const auto ends = detail::split(iv, ',');
            if (ends.size() != 2) throw ChartFileError("interval must be 'lo,hi'", l);
            box.lo.push_back(detail::parse_constant(ends[0], l));
            box.hi.push_back(detail::parse_constant(ends[1], l));
            if (!(box.lo.back() < box.hi.back())) throw ChartFileError("empty domain interval", l);
        }
    }
    std::vector<Expression> anchor;
    {
        const auto& [text, l] = *b_text;
        const auto rows = detail::split(text, ';');
        if (static_cast<int>(rows.size()) != *r) throw ChartFileError("b needs r rows", l);
        for (const std::string& row : rows) {
            const auto cols = detail::split(row, ',');
            if (static_cast<int>(cols.size()) != *n) throw ChartFileError("each row of b needs n entries", l);
            for (const std::string& c : cols) anchor.push_back(detail::parse_expr(c, *n, l));
        }
    }
    std::vector<BracketEntry> brackets;
    for (const auto& [s, t, u, text, l] : c_text) {
        if (s < 1 || t < 1 || u < 1 || s > *r || t > *r || u > *r) throw ChartFileError("bracket index out of range", l);
        if (s >= t) throw ChartFileError("bracket entries need s < t", l);
        for (const BracketEntry& e : brackets)
            if (e.s == s - 1 && e.t == t - 1 && e.u == u - 1) throw ChartFileError("duplicate bracket entry", l);
        brackets.push_back({s - 1, t - 1, u - 1, detail::parse_expr(text, *n, l)});
    }
    std::vector<MetricEntry> entries;
    for (const auto& [i, j, text, l] : g_text) {
        if (i < 1 || j < 1 || i > *r || j > *r) throw ChartFileError("metric index out of range", l);
        if (i > j) throw ChartFileError("metric entries need i <= j", l);
        for (const MetricEntry& e : entries)
            if (e.i == i - 1 && e.j == j - 1) throw ChartFileError("duplicate metric entry", l);
        entries.push_back({i - 1, j - 1, detail::parse_expr(text, *n, l)});
    }
    return {AlgebroidChart(*n, *r, std::move(anchor), brackets, std::move(box)), MetricField(*n, *r, entries)};
}

inline ChartFile parse_chart_file(const std::string& text) {
    std::istringstream in(text);
    return parse_chart_file(in);
}

inline void write_chart_file(std::ostream& out, const AlgebroidChart& chart, const MetricField& metric,
                             const std::string& comment = {}) {
    if (!comment.empty()) out << "# " << comment << "\n";
    const int n = chart.n(), r = chart.r();
    out << "[algebroid]\n";
    out << "n = " << n << "\n";
    out << "r = " << r << "\n";
    out << "domain = ";
    for (int i = 0; i < n; ++i)
        out << (i ? "; " : "") << format_real(chart.domain().lo[i]) << "," << format_real(chart.domain().hi[i]);
    out << "\nb = ";
    for (int s = 0; s < r; ++s) {
        out << (s ? "; " : "");
        for (int i = 0; i < n; ++i) out << (i ? "," : "") << chart.anchor(s, i).to_string();
    }
    out << "\n";
    for (const BracketEntry& e : chart.bracket_entries())
        out << "C " << e.s + 1 << "," << e.t + 1 << "," << e.u + 1 << " = " << e.value.to_string() << "\n";
    out << "[metric]\n";
    for (const MetricEntry& e : metric.entries())
        out << "g " << e.i + 1 << "," << e.j + 1 << " = " << e.value.to_string() << "\n";
}

// ---------------------------------------------------------------- CSV

namespace csv {

inline void header(std::ostream& out, const std::vector<std::string>& cols) {
    for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
    out << "\n";
}

inline std::vector<std::string> numbered(const std::string& prefix, int count) {
    std::vector<std::string> out;
    for (int k = 1; k <= count; ++k) out.push_back(prefix + std::to_string(k));
    return out;
}

inline void values(std::ostream& out, const Vec& v, bool leading_comma = true) {
    for (Eigen::Index k = 0; k < v.size(); ++k) out << ((leading_comma || k) ? "," : "") << format_real(v[k]);
}

}  // namespace csv

/// Columns t, x1..xn, mu1..mur.
inline void write_path_csv(std::ostream& out, const APath& p) {
    std::vector<std::string> cols{"t"};
    for (const auto& c : csv::numbered("x", p.n())) cols.push_back(c);
    for (const auto& c : csv::numbered("mu", p.r())) cols.push_back(c);
    csv::header(out, cols);
    for (std::size_t k = 0; k < p.size(); ++k) {
        out << format_real(p.t[k]);
        csv::values(out, p.x[k]);
        csv::values(out, p.mu[k]);
        out << "\n";
    }
}

/// Columns t, <prefix>1..<prefix>r.
inline void write_fiber_csv(std::ostream& out, const FiberCurve& s, const std::string& prefix = "s") {
    std::vector<std::string> cols{"t"};
    const int r = s.values.empty() ? 0 : static_cast<int>(s.values.front().size());
    for (const auto& c : csv::numbered(prefix, r)) cols.push_back(c);
    csv::header(out, cols);
    for (std::size_t k = 0; k < s.size(); ++k) {
        out << format_real(s.t[k]);
        csv::values(out, s.values[k]);
        out << "\n";
    }
}

/// Columns i, j, k, value with value = Gamma_ij^k.
inline void write_christoffel_csv(std::ostream& out, const Christoffel& c) {
    const int r = c.rank();
    csv::header(out, {"i", "j", "k", "value"});
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
            for (int k = 0; k < r; ++k)
                out << i + 1 << "," << j + 1 << "," << k + 1 << "," << format_real(c.gamma(i, j, k)) << "\n";
}

/// Columns i, j, k, l, value with value = a_l component of R(a_i, a_j) a_k.
inline void write_curvature_csv(std::ostream& out, const Curvature& R) {
    const int r = R.rank();
    csv::header(out, {"i", "j", "k", "l", "value"});
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
            for (int k = 0; k < r; ++k)
                for (int l = 0; l < r; ++l)
                    out << i + 1 << "," << j + 1 << "," << k + 1 << "," << l + 1 << ","
                        << format_real(R.riemann(i, j, k, l)) << "\n";
}

/// One row per axiom: name, worst residual, tolerance, pass, indices, worst point.
inline void write_validation_csv(std::ostream& out, const ValidationReport& rep, int n) {
    std::vector<std::string> cols{"axiom", "max_residual", "tolerance", "pass", "i1", "i2", "i3", "i4"};
    for (const auto& c : csv::numbered("x", n)) cols.push_back(c);
    csv::header(out, cols);
    for (const AxiomResult& a : rep.axioms) {
        out << a.name << "," << format_real(a.max_residual) << "," << format_real(a.tolerance) << ","
            << (a.pass ? 1 : 0);
        for (int idx : a.indices) out << "," << (idx < 0 ? 0 : idx + 1);
        if (a.worst_point.size() == n) csv::values(out, a.worst_point);
        else
            for (int i = 0; i < n; ++i) out << ",";
        out << "\n";
    }
}

/// Columns eps, t, x1..xn, mu1..mur [, beta1..betar].
inline void write_variation_csv(std::ostream& out, const VariationGrid& g) {
    const int n = static_cast<int>(g.x.front().size()), r = static_cast<int>(g.mu.front().size());
    std::vector<std::string> cols{"eps", "t"};
    for (const auto& c : csv::numbered("x", n)) cols.push_back(c);
    for (const auto& c : csv::numbered("mu", r)) cols.push_back(c);
    if (g.has_beta())
        for (const auto& c : csv::numbered("beta", r)) cols.push_back(c);
    csv::header(out, cols);
    for (int i = 0; i < g.n_eps(); ++i)
        for (int j = 0; j < g.n_t(); ++j) {
            out << format_real(g.eps[i]) << "," << format_real(g.t[j]);
            csv::values(out, g.x_at(i, j));
            csv::values(out, g.mu_at(i, j));
            if (g.has_beta()) csv::values(out, g.beta_at(i, j));
            out << "\n";
        }
}

/// Inverse of write_variation_csv. Rows must be ordered by eps, then t.
inline VariationGrid read_variation_csv(std::istream& in, int n, int r) {
    std::string line;
    if (!std::getline(in, line)) throw PreconditionError("empty variation CSV");
    const auto cols = detail::split(detail::trim(line), ',');
    const bool with_beta = static_cast<int>(cols.size()) == 2 + n + 2 * r;
    if (!with_beta && static_cast<int>(cols.size()) != 2 + n + r)
        throw PreconditionError("variation CSV has " + std::to_string(cols.size()) + " columns");
    VariationGrid g;
    std::vector<double> eps_col, t_col;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (detail::trim(line).empty()) continue;
        const auto f = detail::split(detail::trim(line), ',');
        if (f.size() != cols.size()) throw PreconditionError("row " + std::to_string(row) + " has the wrong width");
        std::vector<double> v;
        for (const auto& s : f) {
            std::size_t used = 0;
            double d = 0.0;
            try {
                d = std::stod(s, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || detail::trim(s.substr(used)).size())
                throw PreconditionError("row " + std::to_string(row) + ": bad number '" + s + "'");
            v.push_back(d);
        }
        eps_col.push_back(v[0]);
        t_col.push_back(v[1]);
        g.x.push_back(Eigen::Map<Vec>(v.data() + 2, n));
        g.mu.push_back(Eigen::Map<Vec>(v.data() + 2 + n, r));
        if (with_beta) g.beta.push_back(Eigen::Map<Vec>(v.data() + 2 + n + r, r));
    }
    for (double e : eps_col)
        if (g.eps.empty() || e != g.eps.back()) g.eps.push_back(e);
    for (std::size_t k = 0; k < t_col.size() && eps_col[k] == eps_col.front(); ++k) g.t.push_back(t_col[k]);
    if (g.eps.size() * g.t.size() != g.x.size()) throw PreconditionError("variation CSV is not a rectangular mesh");
    for (std::size_t k = 0; k < t_col.size(); ++k)
        if (t_col[k] != g.t[k % g.t.size()]) throw PreconditionError("variation CSV rows use different time grids");
    return g;
}

}  // namespace ralg
