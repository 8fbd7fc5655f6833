#pragma once

#include "ralg/tensor.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace ralg {

/// Halton sequence with a seeded Cranley-Patterson rotation: a different
/// seed gives a different (but equally well spread) point set.
class HaltonSampler {
public:
    HaltonSampler(int dims, std::uint64_t seed) : shift_(dims) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (double& s : shift_) s = unit(rng);
    }

    /// Next point in [0,1)^dims.
    Vec next() {
        ++index_;
        Vec u(static_cast<Eigen::Index>(shift_.size()));
        for (std::size_t d = 0; d < shift_.size(); ++d) {
            double v = radical_inverse(index_, prime(d)) + shift_[d];
            u[static_cast<Eigen::Index>(d)] = v - std::floor(v);
        }
        return u;
    }

private:
    static double radical_inverse(std::uint64_t i, unsigned base) {
        double f = 1.0, r = 0.0;
        while (i > 0) {
            f /= base;
            r += f * static_cast<double>(i % base);
            i /= base;
        }
        return r;
    }

    static unsigned prime(std::size_t k) {
        static const std::vector<unsigned> primes = [] {
            std::vector<unsigned> p;
            for (unsigned c = 2; p.size() < 64; ++c) {
                bool is_prime = true;
                for (unsigned q : p) {
                    if (q * q > c) break;
                    if (c % q == 0) { is_prime = false; break; }
                }
                if (is_prime) p.push_back(c);
            }
            return p;
        }();
        return primes.at(k);
    }

    std::vector<double> shift_;
    std::uint64_t index_ = 0;
};

}  // namespace ralg
