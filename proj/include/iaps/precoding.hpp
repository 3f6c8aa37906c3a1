#pragma once

#include "iaps/types.hpp"

#include <iosfwd>

namespace iaps {

// Power-scaled precoder matrix. Column 0 is the dedicated sensing stream,
// columns 1..K the UE streams.
struct PrecoderSet {
    MatC w_tilde; // M x (K+1), unit-norm columns
    VecD p;       // K+1 stream powers, mW
    MatC W;       // columns sqrt(p_k) w_tilde_k
    MatC W_hat;   // W W^H, Hermitian PSD, trace = sum(p)

    int streams() const { return static_cast<int>(w_tilde.cols()); }
};

PrecoderSet make_precoder_set(const MatC& w_tilde, const VecD& p);

// Regularized zero-forcing directions: column k proportional to
// (H H^H + lambda I)^{-1} h_k, unit-normalized, first nonzero entry made
// real nonnegative so outputs are reproducible across backends.
MatC rzf(const MatC& H, double lambda);

enum class ZfrMode { projection, paper_literal };

// Sensing precoder nulled toward the UEs. Projection mode projects the
// transmit steering vector onto the orthogonal complement of span(H) and
// guarantees h_k^H w0 = 0 exactly; paper_literal solves (I - H H^H) w = a
// with a Tikhonov fallback when that system is ill-conditioned.
VecC zfr(const MatC& H, const VecC& a_theta, ZfrMode mode = ZfrMode::projection);

// Classical MMSE scaling for the RZF regularizer.
inline double rzf_lambda_default(int K, double sigma_nc2, double p_max_mw) {
    return K * sigma_nc2 / p_max_mw;
}

// SINR of UE k (1-based; column 0 is the sensing stream).
double sinr(const MatC& H, const PrecoderSet& ps, int k, double sigma_nc2);

// Per-stream gains |a(theta)^H w_tilde_k|^2, k = 0..K.
VecD beam_gain(const PrecoderSet& ps, const VecC& a_theta);

void precoders_to_csv(const PrecoderSet& ps, std::ostream& out);

} // namespace iaps
