#pragma once

// Small dense matrices over double or HyperDual, row-major in a std::vector.
// Just enough to invert a metric while carrying exact derivatives.

#include "ralg/errors.hpp"
#include "ralg/hyperdual.hpp"

#include <cmath>
#include <utility>
#include <vector>

namespace ralg {

inline double value_of(double v) { return v; }
inline double value_of(const HyperDual& v) { return v.value(); }

inline double constant_like(double, double c) { return c; }
inline HyperDual constant_like(const HyperDual& like, double c) {
    return HyperDual::constant(c, static_cast<int>(like.gradient().size()), like.has_hessian());
}

template <class T>
struct SquareMatrix {
    int size = 0;
    std::vector<T> a;

    T& operator()(int i, int j) { return a[static_cast<std::size_t>(i * size + j)]; }
    const T& operator()(int i, int j) const { return a[static_cast<std::size_t>(i * size + j)]; }
};

/// Gauss-Jordan inverse with partial pivoting on the value part.
template <class T>
SquareMatrix<T> invert(SquareMatrix<T> m) {
    const int n = m.size;
    const T& like = m.a.front();
    SquareMatrix<T> inv{n, std::vector<T>(m.a.size(), constant_like(like, 0.0))};
    for (int i = 0; i < n; ++i) inv(i, i) = constant_like(like, 1.0);
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int i = col + 1; i < n; ++i)
            if (std::abs(value_of(m(i, col))) > std::abs(value_of(m(piv, col)))) piv = i;
        if (value_of(m(piv, col)) == 0.0) throw SingularMetric("singular matrix in inversion");
        if (piv != col)
            for (int j = 0; j < n; ++j) {
                std::swap(m(col, j), m(piv, j));
                std::swap(inv(col, j), inv(piv, j));
            }
        const T p = m(col, col);
        for (int j = 0; j < n; ++j) {
            m(col, j) = m(col, j) / p;
            inv(col, j) = inv(col, j) / p;
        }
        for (int i = 0; i < n; ++i) {
            if (i == col) continue;
            const T f = m(i, col);
            for (int j = 0; j < n; ++j) {
                m(i, j) = m(i, j) - f * m(col, j);
                inv(i, j) = inv(i, j) - f * inv(col, j);
            }
        }
    }
    return inv;
}

}  // namespace ralg
