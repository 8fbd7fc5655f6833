#pragma once

// Analytic expressions over chart variables x1..xn.
//
// Grammar (EBNF, whitespace ignored between tokens):
//
//   expr     = term { ("+" | "-") term } ;
//   term     = unary { ("*" | "/") unary } ;
//   unary    = ("-" | "+") unary | power ;
//   power    = primary [ "^" exponent ] ;          (right-associative)
//   exponent = ("-" | "+") exponent | power ;
//   primary  = number | variable | "pi" | function "(" expr ")" | "(" expr ")" ;
//   variable = "x" digit { digit } ;                (1-based, at most n)
//   function = "sin" | "cos" | "tan" | "exp" | "log" | "sqrt"
//            | "sinh" | "cosh" | "neg" ;
//   number   = digits [ "." [ digits ] ] [ exponent-part ]
//            | "." digits [ exponent-part ] ;
//
// Precedence: ^ binds tighter than unary minus, which binds tighter than
// * and /, which bind tighter than + and -. So -x1^2 is -(x1^2).
// Subtrees without variables are folded to constants while parsing.

#include "ralg/errors.hpp"
#include "ralg/hyperdual.hpp"

#include <Eigen/Dense>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>

namespace ralg {

/// Value, gradient and Hessian of an expression at a point. `gradient` is
/// empty for order-0 evaluations, `hessian` empty below order 2.
struct EvalResult {
    double value = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
};

enum class Func { Sin, Cos, Tan, Exp, Log, Sqrt, Sinh, Cosh, Neg };

inline const char* func_name(Func f) {
    switch (f) {
        case Func::Sin: return "sin";
        case Func::Cos: return "cos";
        case Func::Tan: return "tan";
        case Func::Exp: return "exp";
        case Func::Log: return "log";
        case Func::Sqrt: return "sqrt";
        case Func::Sinh: return "sinh";
        case Func::Cosh: return "cosh";
        case Func::Neg: return "neg";
    }
    return "?";
}

/// Shortest round-trippable text for a double (17 significant digits).
inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

struct Node {
    enum class Kind { Const, Var, Add, Sub, Mul, Div, Pow, Call };

    Kind kind = Kind::Const;
    double value = 0.0;  // Const
    int index = 0;       // Var, 0-based
    Func func = Func::Neg;
    std::shared_ptr<const Node> lhs, rhs;  // Call uses lhs only
};

using NodePtr = std::shared_ptr<const Node>;

inline bool is_const(const NodePtr& p) { return p->kind == Node::Kind::Const; }

inline NodePtr make_const(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Const;
    n->value = v;
    return n;
}

inline NodePtr make_var(int index) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Var;
    n->index = index;
    return n;
}

inline std::string print(const Node& n) {
    using K = Node::Kind;
    switch (n.kind) {
        case K::Const: {
            std::string s = format_real(n.value);
            return n.value < 0.0 || std::signbit(n.value) ? "(" + s + ")" : s;
        }
        case K::Var: return "x" + std::to_string(n.index + 1);
        case K::Call: return std::string(func_name(n.func)) + "(" + print(*n.lhs) + ")";
        default: break;
    }
    const char* op = n.kind == K::Add ? "+" : n.kind == K::Sub ? "-" : n.kind == K::Mul ? "*" : n.kind == K::Div ? "/" : "^";
    return "(" + print(*n.lhs) + op + print(*n.rhs) + ")";
}

inline bool is_integer(double p) { return std::floor(p) == p && std::abs(p) < 1e15; }

// Scalar-generic evaluation. `leaf(i)` yields variable i; `constant(c)` a constant.
template <class T, class Leaf, class Constant>
T eval(const Node& n, const Leaf& leaf, const Constant& constant) {
    using K = Node::Kind;
    auto value_of = [](const T& t) -> double {
        if constexpr (std::is_same_v<T, double>) return t;
        else return t.value();
    };
    auto fail = [&](const char* what) -> T { throw DomainError(what, print(n)); };
    switch (n.kind) {
        case K::Const: return constant(n.value);
        case K::Var: return leaf(n.index);
        case K::Add: return eval<T>(*n.lhs, leaf, constant) + eval<T>(*n.rhs, leaf, constant);
        case K::Sub: return eval<T>(*n.lhs, leaf, constant) - eval<T>(*n.rhs, leaf, constant);
        case K::Mul: return eval<T>(*n.lhs, leaf, constant) * eval<T>(*n.rhs, leaf, constant);
        case K::Div: {
            T d = eval<T>(*n.rhs, leaf, constant);
            if (value_of(d) == 0.0) return fail("division by zero");
            return eval<T>(*n.lhs, leaf, constant) / d;
        }
        case K::Pow: {
            T base = eval<T>(*n.lhs, leaf, constant);
            const double b = value_of(base);
            if (is_const(n.rhs)) {
                const double p = n.rhs->value;
                if (!is_integer(p) && b <= 0.0) return fail("non-integer power of a non-positive base");
                if (p < 0.0 && b == 0.0) return fail("negative power of zero");
                using std::pow;
                return pow(base, p);
            }
            if (b <= 0.0) return fail("variable exponent on a non-positive base");
            using std::pow;
            return pow(base, eval<T>(*n.rhs, leaf, constant));
        }
        case K::Call: {
            T a = eval<T>(*n.lhs, leaf, constant);
            const double u = value_of(a);
            using std::cos, std::cosh, std::exp, std::log, std::sin, std::sinh, std::sqrt, std::tan;
            switch (n.func) {
                case Func::Sin: return sin(a);
                case Func::Cos: return cos(a);
                case Func::Tan:
                    if (std::cos(u) == 0.0) return fail("tan at a pole");
                    return tan(a);
                case Func::Exp: return exp(a);
                case Func::Log:
                    if (u <= 0.0) return fail("log of a non-positive value");
                    return log(a);
                case Func::Sqrt:
                    if (u < 0.0) return fail("sqrt of a negative value");
                    if constexpr (!std::is_same_v<T, double>) {
                        if (u == 0.0) return fail("sqrt is not differentiable at 0");
                    }
                    return sqrt(a);
                case Func::Sinh: return sinh(a);
                case Func::Cosh: return cosh(a);
                case Func::Neg: return -a;
            }
        }
    }
    return constant(0.0);
}

inline double fold(const Node& n) {
    const double v = eval<double>(n, [](int) -> double { return 0.0; }, [](double c) { return c; });
    if (!std::isfinite(v)) throw DomainError("non-finite constant", print(n));
    return v;
}

inline NodePtr make_binary(Node::Kind kind, NodePtr lhs, NodePtr rhs) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    if (is_const(n->lhs) && is_const(n->rhs)) return make_const(fold(*n));
    return n;
}

inline NodePtr make_call(Func f, NodePtr arg) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Call;
    n->func = f;
    n->lhs = std::move(arg);
    if (is_const(n->lhs)) return make_const(fold(*n));
    return n;
}

inline bool equal(const Node& a, const Node& b) {
    if (a.kind != b.kind) return false;
    using K = Node::Kind;
    switch (a.kind) {
        case K::Const: return a.value == b.value && std::signbit(a.value) == std::signbit(b.value);
        case K::Var: return a.index == b.index;
        case K::Call: return a.func == b.func && equal(*a.lhs, *b.lhs);
        default: return equal(*a.lhs, *b.lhs) && equal(*a.rhs, *b.rhs);
    }
}

class Parser {
public:
    Parser(std::string_view text, int n) : text_(text), n_(n) {}

    NodePtr parse() {
        NodePtr e = expr();
        skip();
        if (pos_ != text_.size()) throw ParseError("unexpected '" + std::string(1, text_[pos_]) + "'", pos_);
        return e;
    }

private:
    void skip() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) {
            if (pos_ >= text_.size()) throw ParseError(std::string("expected '") + c + "' but reached end", pos_);
            throw ParseError(std::string("expected '") + c + "'", pos_);
        }
    }

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            if (accept('+')) lhs = make_binary(Node::Kind::Add, lhs, term());
            else if (accept('-')) lhs = make_binary(Node::Kind::Sub, lhs, term());
            else return lhs;
        }
    }
    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (accept('*')) lhs = make_binary(Node::Kind::Mul, lhs, unary());
            else if (accept('/')) lhs = make_binary(Node::Kind::Div, lhs, unary());
            else return lhs;
        }
    }
    NodePtr negate(NodePtr a) { return make_call(Func::Neg, std::move(a)); }
    NodePtr unary() {
        if (accept('-')) return negate(unary());
        if (accept('+')) return unary();
        return power();
    }
    NodePtr exponent() {
        if (accept('-')) return negate(exponent());
        if (accept('+')) return exponent();
        return power();
    }
    NodePtr power() {
        NodePtr base = primary();
        if (accept('^')) return make_binary(Node::Kind::Pow, base, exponent());
        return base;
    }
    NodePtr primary() {
        skip();
        if (pos_ >= text_.size()) throw ParseError("unexpected end of expression", pos_);
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
        throw ParseError("unexpected '" + std::string(1, c) + "'", pos_);
    }
    NodePtr number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            std::size_t k = 0;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_, ++k;
            return k;
        };
        std::size_t count = digits();
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            count += digits();
        }
        if (count == 0) throw ParseError("malformed number", start);
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (digits() == 0) throw ParseError("malformed exponent", start);
        }
        const std::string literal(text_.substr(start, pos_ - start));
        const double v = std::strtod(literal.c_str(), nullptr);
        if (!std::isfinite(v)) throw ParseError("literal out of range", start);
        return make_const(v);
    }
    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        const std::string name(text_.substr(start, pos_ - start));
        if (name == "pi") return make_const(std::numbers::pi);
        if (name.size() > 1 && name[0] == 'x' && name.find_first_not_of("0123456789", 1) == std::string::npos) {
            const long index = std::stol(name.substr(1));
            if (index < 1 || index > n_)
                throw ParseError("variable " + name + " out of range (n = " + std::to_string(n_) + ")", start);
            return make_var(static_cast<int>(index - 1));
        }
        static constexpr Func funcs[] = {Func::Sin, Func::Cos, Func::Tan, Func::Exp, Func::Log,
                                         Func::Sqrt, Func::Sinh, Func::Cosh, Func::Neg};
        for (Func f : funcs) {
            if (name == func_name(f)) {
                expect('(');
                NodePtr arg = expr();
                expect(')');
                return make_call(f, arg);
            }
        }
        throw ParseError("unknown identifier '" + name + "'", start);
    }

    std::string_view text_;
    int n_;
    std::size_t pos_ = 0;
};

}  // namespace detail

/// Immutable analytic expression over `variable_count()` chart variables.
class Expression {
public:
    Expression() : Expression(0.0, 1) {}
    Expression(double constant, int n) : root_(detail::make_const(constant)), n_(n) {}

    static Expression parse(std::string_view text, int n) {
        if (n < 1) throw PreconditionError("variable count must be at least 1");
        return Expression(detail::Parser(text, n).parse(), n);
    }
    static Expression constant(double c, int n) { return Expression(c, n); }
    /// Variable x_{index+1}; `index` is 0-based.
    static Expression variable(int index, int n) {
        if (index < 0 || index >= n) throw PreconditionError("variable index out of range");
        return Expression(detail::make_var(index), n);
    }

    int variable_count() const { return n_; }
    bool is_constant() const { return detail::is_const(root_); }
    double constant_value() const { return root_->value; }
    bool is_zero() const { return is_constant() && root_->value == 0.0; }

    std::string to_string() const { return detail::print(*root_); }

    double value(const Eigen::VectorXd& x) const {
        if (is_constant()) return root_->value;
        check_arity(x);
        return detail::eval<double>(
            *root_, [&](int i) { return x[i]; }, [](double c) { return c; });
    }

    /// Exact derivatives up to `order` (0, 1 or 2) by hyper-dual evaluation.
    EvalResult evaluate(const Eigen::VectorXd& x, int order = 2) const {
        EvalResult r;
        if (order <= 0) {
            r.value = value(x);
            return r;
        }
        const bool second = order >= 2;
        if (is_constant()) {
            r.value = root_->value;
            r.gradient = Eigen::VectorXd::Zero(n_);
            if (second) r.hessian = Eigen::MatrixXd::Zero(n_, n_);
            return r;
        }
        HyperDual d = dual(x, second);
        r.value = d.value();
        r.gradient = d.gradient();
        if (second) r.hessian = d.hessian();
        return r;
    }

    HyperDual dual(const Eigen::VectorXd& x, bool second_order = true) const {
        check_arity(x);
        return detail::eval<HyperDual>(
            *root_, [&](int i) { return HyperDual::variable(x[i], i, n_, second_order); },
            [&](double c) { return HyperDual::constant(c, n_, second_order); });
    }

    friend bool operator==(const Expression& a, const Expression& b) {
        return a.n_ == b.n_ && detail::equal(*a.root_, *b.root_);
    }

    friend Expression operator+(const Expression& a, const Expression& b) {
        return combine(detail::Node::Kind::Add, a, b);
    }
    friend Expression operator-(const Expression& a, const Expression& b) {
        return combine(detail::Node::Kind::Sub, a, b);
    }
    friend Expression operator*(const Expression& a, const Expression& b) {
        return combine(detail::Node::Kind::Mul, a, b);
    }
    friend Expression operator/(const Expression& a, const Expression& b) {
        return combine(detail::Node::Kind::Div, a, b);
    }
    friend Expression operator-(const Expression& a) {
        return Expression(detail::make_call(Func::Neg, a.root_), a.n_);
    }

private:
    Expression(detail::NodePtr root, int n) : root_(std::move(root)), n_(n) {}

    static Expression combine(detail::Node::Kind kind, const Expression& a, const Expression& b) {
        if (a.n_ != b.n_) throw PreconditionError("expressions over different variable counts");
        return Expression(detail::make_binary(kind, a.root_, b.root_), a.n_);
    }

    void check_arity(const Eigen::VectorXd& x) const {
        if (x.size() != n_) throw PreconditionError("point has wrong dimension for expression");
    }

    detail::NodePtr root_;
    int n_;
};

}  // namespace ralg
