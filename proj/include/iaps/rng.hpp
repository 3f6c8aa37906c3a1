#pragma once

#include "iaps/types.hpp"

#include <cstdint>
#include <cmath>

namespace iaps {

// Counter-based substream RNG: a stream is (seed, tag) and substreams are
// derived by mixing further tags, so trial t of experiment e always sees the
// same randomness regardless of thread scheduling or evaluation order.
//
// Gaussian variates are produced by an explicit Box-Muller transform so that
// draws are bit-identical across standard libraries.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : state_(mix(seed ^ 0x9e3779b97f4a7c15ULL)) {}

    RngStream substream(std::uint64_t tag) const {
        return RngStream(mix(state_ ^ mix(tag + 0x632be59bd9b4e019ULL)));
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard real normal N(0, 1)
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform(); // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

    // circular complex normal CN(0, sigma2), E|z|^2 = sigma2
    Complex cgaussian(double sigma2 = 1.0) {
        double s = std::sqrt(sigma2 / 2.0);
        double u1 = 1.0 - uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        return Complex(s * r * std::cos(2.0 * M_PI * u2), s * r * std::sin(2.0 * M_PI * u2));
    }

    VecC cgaussian_vector(Eigen::Index n, double sigma2 = 1.0) {
        VecC v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = cgaussian(sigma2);
        return v;
    }

    MatC cgaussian_matrix(Eigen::Index rows, Eigen::Index cols, double sigma2 = 1.0) {
        MatC m(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = cgaussian(sigma2);
        return m;
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace iaps
