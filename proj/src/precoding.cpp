#include "iaps/precoding.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace iaps {

namespace {

// first entry with magnitude above tol is rotated to the nonnegative real axis
void fix_phase(VecC& v) {
    const double tol = 1e-14 * v.norm();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        double mag = std::abs(v(i));
        if (mag > tol) {
            v *= std::conj(v(i)) / mag;
            return;
        }
    }
}

VecC normalized_fixed(VecC v) {
    double n = v.norm();
    if (!(n > 0.0)) throw std::runtime_error("precoding: zero-norm precoder");
    v /= n;
    fix_phase(v);
    return v;
}

} // namespace

PrecoderSet make_precoder_set(const MatC& w_tilde, const VecD& p) {
    if (w_tilde.cols() != p.size()) throw std::invalid_argument("make_precoder_set: dimension mismatch");
    if ((p.array() < 0.0).any()) throw std::invalid_argument("make_precoder_set: negative power");
    PrecoderSet ps;
    ps.w_tilde = w_tilde;
    ps.p = p;
    ps.W = w_tilde;
    for (Eigen::Index k = 0; k < p.size(); ++k) ps.W.col(k) *= std::sqrt(p(k));
    ps.W_hat = ps.W * ps.W.adjoint();
    return ps;
}

MatC rzf(const MatC& H, double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("rzf: negative lambda");
    const Eigen::Index M = H.rows(), K = H.cols();
    MatC gram = H * H.adjoint() + lambda * MatC::Identity(M, M);
    MatC w_bar;
    if (lambda > 0.0) {
        w_bar = gram.ldlt().solve(H);
    } else {
        Eigen::FullPivLU<MatC> lu(gram);
        if (!lu.isInvertible())
            throw std::runtime_error("rzf: singular system at lambda = 0 (rank-deficient H)");
        w_bar = lu.solve(H);
    }
    MatC out(M, K);
    for (Eigen::Index k = 0; k < K; ++k) out.col(k) = normalized_fixed(w_bar.col(k));
    return out;
}

VecC zfr(const MatC& H, const VecC& a_theta, ZfrMode mode) {
    const Eigen::Index M = H.rows(), K = H.cols();
    if (a_theta.size() != M) throw std::invalid_argument("zfr: dimension mismatch");
    if (K >= M) throw std::invalid_argument("zfr: K < M required");

    VecC w_bar;
    if (mode == ZfrMode::projection) {
        if (H.isZero(0.0)) {
            w_bar = a_theta;
        } else {
            MatC gram = H.adjoint() * H; // K x K
            Eigen::LDLT<MatC> ldlt(gram);
            if (ldlt.info() != Eigen::Success)
                throw std::runtime_error("zfr: rank-deficient channel matrix");
            w_bar = a_theta - H * ldlt.solve(H.adjoint() * a_theta);
        }
        if (w_bar.norm() <= 1e-10 * a_theta.norm())
            throw std::runtime_error("zfr: degenerate geometry, a(theta) lies in span(H)");
    } else {
        MatC sys = MatC::Identity(M, M) - H * H.adjoint();
        Eigen::FullPivLU<MatC> lu(sys);
        lu.setThreshold(1e-12);
        if (lu.isInvertible()) {
            w_bar = lu.solve(a_theta);
        } else {
            // Tikhonov ladder until the shifted system becomes solvable
            double eps = 1e-12 * std::max(1.0, H.squaredNorm());
            for (;;) {
                Eigen::FullPivLU<MatC> lu2(sys + eps * MatC::Identity(M, M));
                if (lu2.isInvertible()) {
                    w_bar = lu2.solve(a_theta);
                    break;
                }
                eps *= 100.0;
                if (eps > 1e6) throw std::runtime_error("zfr: literal system unsolvable");
            }
        }
        if (w_bar.norm() <= 1e-14 * a_theta.norm())
            throw std::runtime_error("zfr: degenerate literal solution");
    }
    return normalized_fixed(std::move(w_bar));
}

double sinr(const MatC& H, const PrecoderSet& ps, int k, double sigma_nc2) {
    const int K = static_cast<int>(H.cols());
    if (k < 1 || k > K) throw std::invalid_argument("sinr: k must lie in 1..K");
    VecC h = H.col(k - 1);
    double signal = ps.p(k) * std::norm(h.dot(ps.w_tilde.col(k)));
    double denom = sigma_nc2;
    for (int j = 0; j < ps.streams(); ++j) {
        if (j == k) continue;
        denom += ps.p(j) * std::norm(h.dot(ps.w_tilde.col(j)));
    }
    return signal / denom;
}

VecD beam_gain(const PrecoderSet& ps, const VecC& a_theta) {
    VecD c(ps.streams());
    for (int j = 0; j < ps.streams(); ++j) c(j) = std::norm(a_theta.dot(ps.w_tilde.col(j)));
    return c;
}

void precoders_to_csv(const PrecoderSet& ps, std::ostream& out) {
    out << "stream,row,p_mw,re,im\n";
    char buf[160];
    for (int k = 0; k < ps.streams(); ++k)
        for (Eigen::Index i = 0; i < ps.w_tilde.rows(); ++i) {
            std::snprintf(buf, sizeof buf, "%d,%ld,%.17g,%.17g,%.17g\n", k, static_cast<long>(i),
                          ps.p(k), ps.w_tilde(i, k).real(), ps.w_tilde(i, k).imag());
            out << buf;
        }
}

} // namespace iaps
