#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <vector>

namespace ralg {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Dense row-major array of fixed rank with runtime extents.
template <std::size_t Rank>
class Tensor {
public:
    Tensor() { dims_.fill(0); }

    template <class... Dims>
    explicit Tensor(Dims... dims) : dims_{static_cast<int>(dims)...} {
        static_assert(sizeof...(Dims) == Rank);
        std::size_t total = 1;
        for (int d : dims_) total *= static_cast<std::size_t>(d);
        data_.assign(total, 0.0);
    }

    template <class... Idx>
    double& operator()(Idx... idx) {
        return data_[offset(idx...)];
    }
    template <class... Idx>
    double operator()(Idx... idx) const {
        return data_[offset(idx...)];
    }

    int dim(std::size_t k) const { return dims_[k]; }
    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    template <class... Idx>
    std::size_t offset(Idx... idx) const {
        static_assert(sizeof...(Idx) == Rank);
        const std::array<int, Rank> ix{static_cast<int>(idx)...};
        std::size_t off = 0;
        for (std::size_t k = 0; k < Rank; ++k) off = off * static_cast<std::size_t>(dims_[k]) + static_cast<std::size_t>(ix[k]);
        return off;
    }

    std::array<int, Rank> dims_;
    std::vector<double> data_;
};

using Tensor3 = Tensor<3>;
using Tensor4 = Tensor<4>;

inline double max_abs(const Vec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace ralg
