#pragma once

#include <Eigen/Dense>

#include <cmath>

namespace ralg {

/// Second-order forward-mode number over `n` independent variables.
///
/// Carries a value, its gradient and (optionally) its Hessian. A number
/// built with `second_order == false` leaves the Hessian empty and every
/// operation skips it. Hessians are assembled only from symmetric pieces
/// (scaled copies and `u vᵀ + v uᵀ` pairs), so they are exactly symmetric.
class HyperDual {
public:
    HyperDual() = default;

    static HyperDual constant(double value, int n, bool second_order = true) {
        HyperDual d;
        d.value_ = value;
        d.gradient_ = Eigen::VectorXd::Zero(n);
        if (second_order) d.hessian_ = Eigen::MatrixXd::Zero(n, n);
        return d;
    }

    static HyperDual variable(double value, int index, int n, bool second_order = true) {
        HyperDual d = constant(value, n, second_order);
        d.gradient_[index] = 1.0;
        return d;
    }

    /// Assemble from parts; an empty `hessian` makes a first-order number.
    static HyperDual from_parts(double value, Eigen::VectorXd gradient, Eigen::MatrixXd hessian) {
        HyperDual d;
        d.value_ = value;
        d.gradient_ = std::move(gradient);
        d.hessian_ = std::move(hessian);
        return d;
    }

    double value() const { return value_; }
    const Eigen::VectorXd& gradient() const { return gradient_; }
    const Eigen::MatrixXd& hessian() const { return hessian_; }
    bool has_hessian() const { return hessian_.size() > 0; }

    /// f(u) given f(u), f'(u), f''(u).
    HyperDual chain(double f, double df, double d2f) const {
        HyperDual r;
        r.value_ = f;
        r.gradient_ = df * gradient_;
        if (has_hessian()) r.hessian_ = df * hessian_ + d2f * (gradient_ * gradient_.transpose());
        return r;
    }

    HyperDual operator-() const { return chain(-value_, -1.0, 0.0); }

    HyperDual& operator+=(const HyperDual& o) {
        value_ += o.value_;
        gradient_ += o.gradient_;
        if (has_hessian()) hessian_ += o.hessian_;
        return *this;
    }
    HyperDual& operator-=(const HyperDual& o) {
        value_ -= o.value_;
        gradient_ -= o.gradient_;
        if (has_hessian()) hessian_ -= o.hessian_;
        return *this;
    }
    HyperDual& operator*=(double c) {
        value_ *= c;
        gradient_ *= c;
        if (has_hessian()) hessian_ *= c;
        return *this;
    }
    HyperDual& operator+=(double c) {
        value_ += c;
        return *this;
    }

    friend HyperDual operator+(HyperDual a, const HyperDual& b) { return a += b; }
    friend HyperDual operator-(HyperDual a, const HyperDual& b) { return a -= b; }
    friend HyperDual operator+(HyperDual a, double c) { return a += c; }
    friend HyperDual operator+(double c, HyperDual a) { return a += c; }
    friend HyperDual operator-(HyperDual a, double c) { return a += -c; }
    friend HyperDual operator-(double c, const HyperDual& a) { return (-a) + c; }
    friend HyperDual operator*(HyperDual a, double c) { return a *= c; }
    friend HyperDual operator*(double c, HyperDual a) { return a *= c; }

    friend HyperDual operator*(const HyperDual& a, const HyperDual& b) {
        HyperDual r;
        r.value_ = a.value_ * b.value_;
        r.gradient_ = b.value_ * a.gradient_ + a.value_ * b.gradient_;
        if (a.has_hessian()) {
            const Eigen::MatrixXd cross = a.gradient_ * b.gradient_.transpose();
            r.hessian_ = b.value_ * a.hessian_ + a.value_ * b.hessian_ + cross + cross.transpose();
        }
        return r;
    }

    friend HyperDual reciprocal(const HyperDual& a) {
        const double inv = 1.0 / a.value_;
        return a.chain(inv, -inv * inv, 2.0 * inv * inv * inv);
    }

    friend HyperDual operator/(const HyperDual& a, const HyperDual& b) { return a * reciprocal(b); }
    friend HyperDual operator/(const HyperDual& a, double c) { return a * (1.0 / c); }
    friend HyperDual operator/(double c, const HyperDual& b) { return c * reciprocal(b); }

private:
    double value_ = 0.0;
    Eigen::VectorXd gradient_;
    Eigen::MatrixXd hessian_;
};

inline HyperDual sin(const HyperDual& a) {
    const double s = std::sin(a.value()), c = std::cos(a.value());
    return a.chain(s, c, -s);
}
inline HyperDual cos(const HyperDual& a) {
    const double s = std::sin(a.value()), c = std::cos(a.value());
    return a.chain(c, -s, -c);
}
inline HyperDual tan(const HyperDual& a) {
    const double t = std::tan(a.value());
    const double sec2 = 1.0 + t * t;
    return a.chain(t, sec2, 2.0 * t * sec2);
}
inline HyperDual exp(const HyperDual& a) {
    const double e = std::exp(a.value());
    return a.chain(e, e, e);
}
inline HyperDual log(const HyperDual& a) {
    const double inv = 1.0 / a.value();
    return a.chain(std::log(a.value()), inv, -inv * inv);
}
inline HyperDual sqrt(const HyperDual& a) {
    const double s = std::sqrt(a.value());
    return a.chain(s, 0.5 / s, -0.25 / (s * a.value()));
}
inline HyperDual sinh(const HyperDual& a) {
    const double s = std::sinh(a.value()), c = std::cosh(a.value());
    return a.chain(s, c, s);
}
inline HyperDual cosh(const HyperDual& a) {
    const double s = std::sinh(a.value()), c = std::cosh(a.value());
    return a.chain(c, s, c);
}

/// a^p for a constant exponent.
inline HyperDual pow(const HyperDual& a, double p) {
    const double u = a.value();
    if (p == 0.0) return a.chain(1.0, 0.0, 0.0);
    if (p == 1.0) return a;
    if (p == 2.0) return a.chain(u * u, 2.0 * u, 2.0);
    return a.chain(std::pow(u, p), p * std::pow(u, p - 1.0), p * (p - 1.0) * std::pow(u, p - 2.0));
}

/// a^b with a variable exponent; requires a > 0.
inline HyperDual pow(const HyperDual& a, const HyperDual& b) { return exp(b * log(a)); }

}  // namespace ralg
