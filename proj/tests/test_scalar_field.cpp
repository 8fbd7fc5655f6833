#include "support.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace ralg;
using ralg::testing::vec;

namespace {

// Random polynomial of total degree <= 4 in n variables, as text.
std::string random_polynomial(std::mt19937_64& rng, int n) {
    std::uniform_int_distribution<int> terms(1, 6), var(1, n), deg(0, 4);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    std::string s;
    const int count = terms(rng);
    for (int k = 0; k < count; ++k) {
        if (k) s += " + ";
        s += "(" + format_real(coef(rng)) + ")";
        int left = deg(rng);
        while (left > 0) {
            const int p = std::uniform_int_distribution<int>(1, left)(rng);
            s += "*x" + std::to_string(var(rng)) + (p > 1 ? "^" + std::to_string(p) : "");
            left -= p;
        }
    }
    return s;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

void expect_matches_fd(const Expression& e, const Vec& x, double tol) {
    const int n = e.variable_count();
    const double h = 1e-5;
    const EvalResult r = e.evaluate(x, 2);
    for (int i = 0; i < n; ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        EXPECT_LT(rel(r.gradient[i], (e.value(xp) - e.value(xm)) / (2 * h)), tol) << e.to_string();
        const Vec dg = (e.evaluate(xp, 1).gradient - e.evaluate(xm, 1).gradient) / (2 * h);
        for (int j = 0; j < n; ++j) EXPECT_LT(rel(r.hessian(i, j), dg[j]), tol) << e.to_string();
    }
}

}  // namespace

TEST(Parse, ProductOfTwoVariables) {
    const Expression e = Expression::parse("x1*x2", 2);
    EXPECT_EQ(e.to_string(), "(x1*x2)");
    EXPECT_EQ(e, Expression::variable(0, 2) * Expression::variable(1, 2));
}

TEST(Parse, PowerOfSine) {
    const Expression e = Expression::parse("sin(x1)^2", 1);
    EXPECT_EQ(e.to_string(), "(sin(x1)^2)");
}

TEST(Parse, VariableOutOfRange) {
    EXPECT_THROW(Expression::parse("x3", 2), ParseError);
    EXPECT_THROW(Expression::parse("x0", 2), ParseError);
}

TEST(Parse, SyntaxErrorsCarryPosition) {
    try {
        Expression::parse("x1 + * x2", 2);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.position(), 5u);
    }
    EXPECT_THROW(Expression::parse("sin x1", 1), ParseError);
    EXPECT_THROW(Expression::parse("foo(x1)", 1), ParseError);
    EXPECT_THROW(Expression::parse("(x1", 1), ParseError);
    EXPECT_THROW(Expression::parse("", 1), ParseError);
    EXPECT_THROW(Expression::parse("1.2.3", 1), ParseError);
}

TEST(Parse, Precedence) {
    const Vec x = vec({3.0, 2.0});
    EXPECT_DOUBLE_EQ(Expression::parse("-x1^2", 2).value(x), -9.0);
    EXPECT_DOUBLE_EQ(Expression::parse("x2^3^2", 2).value(x), 512.0);   // right-associative
    EXPECT_DOUBLE_EQ(Expression::parse("x1-x2-1", 2).value(x), 0.0);     // left-associative
    EXPECT_DOUBLE_EQ(Expression::parse("x1/x2/3", 2).value(x), 0.5);
    EXPECT_DOUBLE_EQ(Expression::parse("1+x1*x2^2", 2).value(x), 13.0);
    EXPECT_DOUBLE_EQ(Expression::parse("2^-1", 1).value(vec({0.0})), 0.5);
}

TEST(Parse, ConstantsFolded) {
    const Expression e = Expression::parse("2*pi - sin(0) + 3^2", 2);
    ASSERT_TRUE(e.is_constant());
    EXPECT_DOUBLE_EQ(e.constant_value(), 2 * std::numbers::pi + 9);
    EXPECT_TRUE(Expression::parse("0*1", 3).is_zero());
}

TEST(Evaluate, SineSquaredAtHalfPi) {
    const EvalResult r = Expression::parse("sin(x1)^2", 1).evaluate(vec({std::numbers::pi / 2}));
    EXPECT_NEAR(r.value, 1.0, 1e-15);
    EXPECT_NEAR(r.gradient[0], 0.0, 1e-15);
}

TEST(Evaluate, ProductGradientHessian) {
    const EvalResult r = Expression::parse("x1*x2", 2).evaluate(vec({3, 4}));
    EXPECT_EQ(r.value, 12.0);
    EXPECT_EQ(r.gradient, vec({4, 3}));
    EXPECT_EQ(r.hessian(0, 0), 0.0);
    EXPECT_EQ(r.hessian(0, 1), 1.0);
    EXPECT_EQ(r.hessian(1, 0), 1.0);
    EXPECT_EQ(r.hessian(1, 1), 0.0);
}

TEST(Evaluate, SecondDerivative) {
    EXPECT_EQ(Expression::parse("x1^2*x2", 2).evaluate(vec({1, 5})).hessian(0, 0), 10.0);
}

TEST(Evaluate, DomainErrorNamesSubexpression) {
    const Expression e = Expression::parse("1 + log(x1 - 1)", 1);
    try {
        e.value(vec({0.5}));
        FAIL();
    } catch (const DomainError& err) {
        EXPECT_EQ(err.subexpression(), "log((x1-1))");
    }
    EXPECT_THROW(Expression::parse("sqrt(x1)", 1).evaluate(vec({-1.0})), DomainError);
    EXPECT_NO_THROW(Expression::parse("sqrt(x1)", 1).evaluate(vec({2.0})));
}

TEST(Evaluate, WrongArity) {
    EXPECT_THROW(Expression::parse("x1", 2).value(vec({1.0})), PreconditionError);
}

TEST(Property, PolynomialDerivativesMatchFiniteDifferences) {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> coord(-1.5, 1.5);
    for (int trial = 0; trial < 200; ++trial) {
        const Expression e = Expression::parse(random_polynomial(rng, 3), 3);
        const Vec x = vec({coord(rng), coord(rng), coord(rng)});
        expect_matches_fd(e, x, 1e-6);
    }
}

TEST(Property, TranscendentalDerivativesMatchFiniteDifferences) {
    const char* texts[] = {"sin(x1)*cos(x2)",      "exp(x1*x2)/(1+x2^2)", "log(2+x1^2)*sqrt(3+x2)",
                           "tan(0.3*x1)-sinh(x2)", "cosh(x1-x2)^1.5",     "x1^x2",
                           "neg(x1)*x2^-2"};
    HaltonSampler s(2, 42);
    for (const char* t : texts) {
        const Expression e = Expression::parse(t, 2);
        for (int k = 0; k < 20; ++k) expect_matches_fd(e, (0.5 + s.next().array()).matrix(), 1e-6);
    }
}

TEST(Property, HessianSymmetric) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const Expression e = Expression::parse("sin(" + random_polynomial(rng, 3) + ")*exp(x2)", 3);
        const Mat H = e.evaluate(vec({coord(rng), coord(rng), coord(rng)})).hessian;
        EXPECT_LT((H - H.transpose()).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(Property, PrintParseRoundTrip) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    std::vector<std::string> texts{"sin(x1)^2", "-x1^2", "x1/(x2-3)", "2^-x1", "exp(-(x1+x2)^2)*cosh(x1)",
                                   "1e-3*x2 - .5", "neg(x1)^3"};
    for (int k = 0; k < 20; ++k) texts.push_back(random_polynomial(rng, 2));
    for (const std::string& t : texts) {
        const Expression e = Expression::parse(t, 2);
        const Expression back = Expression::parse(e.to_string(), 2);
        EXPECT_EQ(back, e) << t;
        EXPECT_EQ(back.to_string(), e.to_string());
        for (int p = 0; p < 100; ++p) {
            const Vec x = vec({coord(rng), coord(rng)});
            EXPECT_EQ(back.value(x), e.value(x));
        }
    }
}
