#include "iaps/detect_local.hpp"

#include "iaps/chi2.hpp"
#include "iaps/scenario.hpp"

#include <cmath>
#include <stdexcept>

namespace iaps {

MatC matched_filter(const MatC& z_slots, const MatC& S) {
    if (z_slots.cols() != S.cols()) throw std::invalid_argument("matched_filter: slot count mismatch");
    const double L = static_cast<double>(S.cols());
    return (z_slots * S.adjoint()) / std::sqrt(L);
}

MatC interference_cov(const MatC* G, const MatC& W_hat, double sigma_ns2, int n_rx) {
    MatC q = sigma_ns2 * MatC::Identity(n_rx, n_rx);
    if (G != nullptr) {
        if (G->rows() != n_rx || G->cols() != W_hat.rows())
            throw std::invalid_argument("interference_cov: dimension mismatch");
        q += *G * W_hat * G->adjoint();
    }
    return q;
}

LocalDetector::LocalDetector(int node, MatC q_tilde, double pfa)
    : node_(node), q_tilde_(std::move(q_tilde)), llt_(q_tilde_) {
    if (llt_.info() != Eigen::Success)
        throw std::runtime_error("LocalDetector: covariance not positive definite");
    // Q~ = L L^H  =>  U = L^{-H} satisfies U U^H = Q~^{-1}
    MatC lower = llt_.matrixL();
    u_ = lower.adjoint()
             .triangularView<Eigen::Upper>()
             .solve(MatC::Identity(q_tilde_.rows(), q_tilde_.cols()));
    zeta_ = threshold_from_pfa(pfa);
}

namespace {

// numerator trace tr(Z~ W^H B^H Q~^{-1}) and denominator tr(B W_hat B^H Q~^{-1})
void glrt_traces(const MatC& z_tilde, const PrecoderSet& ps, const MatC& B_hat,
                 const LocalDetector& det, Complex& num, double& den) {
    MatC qinv_b = det.solve(B_hat); // Q~^{-1} B
    num = (z_tilde * ps.W.adjoint() * qinv_b.adjoint()).trace();
    den = (B_hat * ps.W_hat * qinv_b.adjoint()).trace().real();
}

} // namespace

double local_glrt(const MatC& z_tilde, const PrecoderSet& ps, const MatC& B_hat,
                  const LocalDetector& det) {
    Complex num;
    double den;
    glrt_traces(z_tilde, ps, B_hat, det, num, den);
    if (!(den > 0.0)) throw std::runtime_error("local_glrt: degenerate detector (zero beam energy)");
    return 2.0 * std::norm(num) / den;
}

GridGlrtResult local_glrt_grid(const MatC& z_tilde, const PrecoderSet& ps,
                               const LocalDetector& det, int m_tx, double delta,
                               double grid_step_rad) {
    if (!(grid_step_rad > 0.0)) throw std::invalid_argument("local_glrt_grid: bad grid step");
    const int n_rx = static_cast<int>(z_tilde.rows());
    // statistic = 2 |b^H(phi) M a(theta)|^2 / (a^H W_hat a * b^H Q~^{-1} b)
    // with M = Q~^{-1} Z~ W^H precomputed once.
    MatC M = det.solve(z_tilde) * ps.W.adjoint(); // N x M_tx

    std::vector<double> angles;
    for (double ang = -M_PI + grid_step_rad; ang <= M_PI + 1e-12; ang += grid_step_rad)
        angles.push_back(ang);

    std::vector<VecC> a_grid(angles.size());
    std::vector<double> a_energy(angles.size());
    for (std::size_t t = 0; t < angles.size(); ++t) {
        a_grid[t] = steering(angles[t], m_tx, delta);
        a_energy[t] = (a_grid[t].dot(ps.W_hat * a_grid[t])).real();
    }

    GridGlrtResult best;
    best.statistic = -1.0;
    for (double phi : angles) {
        VecC b = steering(phi, n_rx, delta);
        VecC qinv_b = det.solve(b);
        double b_energy = b.dot(qinv_b).real();
        Eigen::RowVectorXcd bM = b.adjoint() * M;
        for (std::size_t t = 0; t < angles.size(); ++t) {
            double den = a_energy[t] * b_energy;
            if (!(den > 0.0)) continue;
            double stat = 2.0 * std::norm((bM * a_grid[t])(0)) / den;
            if (stat > best.statistic) {
                best.statistic = stat;
                best.phi_hat = phi;
                best.theta_hat = angles[t];
            }
        }
    }
    if (best.statistic < 0.0) throw std::runtime_error("local_glrt_grid: empty grid");
    return best;
}

Complex mle_alpha_local(const MatC& z_tilde, const MatC& B_hat, const PrecoderSet& ps,
                        const LocalDetector& det, int L) {
    MatC d = B_hat * ps.W; // N x (K+1), the stacked steering response
    MatC qinv_d = det.solve(d);
    Complex num = (qinv_d.conjugate().cwiseProduct(z_tilde)).sum(); // d^H C^{-1} z~
    double den = (qinv_d.conjugate().cwiseProduct(d)).sum().real();
    if (!(den > 0.0)) throw std::runtime_error("mle_alpha_local: zero steering energy");
    return num / (std::sqrt(static_cast<double>(L)) * den);
}

double noncentrality_local(const PrecoderSet& ps, const MatC& B_hat, const LocalDetector& det,
                           int L, double sigma_rcs2) {
    MatC qinv_b = det.solve(B_hat);
    double tr = (B_hat * ps.W_hat * qinv_b.adjoint()).trace().real();
    return sigma_rcs2 * static_cast<double>(L) * tr;
}

bool local_decision(double statistic, double zeta) { return statistic >= zeta; }

} // namespace iaps
