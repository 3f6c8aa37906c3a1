#pragma once

#include "iaps/precoding.hpp"
#include "iaps/types.hpp"

#include <vector>

namespace iaps {

// Limited-backhaul pipeline: each node matched-filters its own observation,
// whitens by the interference-plus-noise covariance and thresholds a local
// GLRT; only the resulting bit leaves the node.

// Z_tilde = (1/sqrt(L)) sum_l z[l] S^H[l], an N x (K+1) matrix.
MatC matched_filter(const MatC& z_slots, const MatC& S);

// Q_tilde = G W_hat G^H + sigma^2 I; pass G = nullptr for the BS (no
// target-free term), which yields sigma^2 I on its own antenna count.
MatC interference_cov(const MatC* G, const MatC& W_hat, double sigma_ns2, int n_rx);

// Per-node detector state: covariance factorization, whitener and threshold.
// The covariance of vec(Z_tilde) is block-diagonal with identical N x N
// blocks, so whitening operates per block.
class LocalDetector {
public:
    LocalDetector(int node, MatC q_tilde, double pfa);

    int node() const { return node_; }
    const MatC& q_tilde() const { return q_tilde_; }
    // U with U U^H = Q_tilde^{-1} (so U^H Q_tilde U = I)
    const MatC& whitener() const { return u_; }
    double zeta() const { return zeta_; }

    MatC solve(const MatC& rhs) const { return llt_.solve(rhs); }

private:
    int node_;
    MatC q_tilde_;
    Eigen::LLT<MatC> llt_;
    MatC u_;
    double zeta_;
};

// Local GLRT deviance with known angles: 2 |tr(Z~ W^H B^H Q~^{-1})|^2 / tr(B W_hat B^H Q~^{-1});
// exactly central chi-square with 2 DoF under H0.
double local_glrt(const MatC& z_tilde, const PrecoderSet& ps, const MatC& B_hat,
                  const LocalDetector& det);

struct GridGlrtResult {
    double statistic = 0.0;
    double phi_hat = 0.0;
    double theta_hat = 0.0;
};

// Grid-search mode: maximizes the same ratio over a (phi, theta) grid.
GridGlrtResult local_glrt_grid(const MatC& z_tilde, const PrecoderSet& ps,
                               const LocalDetector& det, int m_tx, double delta,
                               double grid_step_rad);

// MLE of the physical gain: d^H C^{-1} z / (sqrt(L) d^H C^{-1} d) with
// d = vec(B W); recovers alpha exactly in the noise-free case.
Complex mle_alpha_local(const MatC& z_tilde, const MatC& B_hat, const PrecoderSet& ps,
                        const LocalDetector& det, int L);

// rho_r = sigma_rcs^2 L tr(B W_hat B^H Q~^{-1}) (the BS case is the same with
// Q~ = sigma^2 I on N0 antennas).
double noncentrality_local(const PrecoderSet& ps, const MatC& B_hat, const LocalDetector& det,
                           int L, double sigma_rcs2);

// 1 iff the statistic reaches the threshold (boundary decides H1).
bool local_decision(double statistic, double zeta);

struct LocalReport {
    int node = 0;
    double statistic = 0.0;
    double zeta = 0.0;
    bool decision = false;
    double rho = 0.0;
    double pd = 0.0;
};

} // namespace iaps
