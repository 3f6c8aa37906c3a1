#include "iaps/detect_fusion.hpp"

#include "iaps/chi2.hpp"

#include <cmath>
#include <stdexcept>

namespace iaps {

StackedModel build_stacked_model(const ChannelSet& ch) {
    StackedModel m;
    m.B.reserve(ch.b1_phi.size() + 1);
    m.B.push_back(ch.b0_theta * ch.a_theta.adjoint());
    for (const auto& b1 : ch.b1_phi) m.B.push_back(b1 * ch.a_theta.adjoint());
    return m;
}

MatC make_symbols(int streams, int L, RngStream& rng, SymbolNormalization norm) {
    if (L < streams && norm == SymbolNormalization::exact)
        throw std::invalid_argument("make_symbols: exact normalization needs L >= streams");
    MatC S = rng.cgaussian_matrix(streams, L);
    if (norm == SymbolNormalization::exact) {
        // Gram-Schmidt on rows, then scale by sqrt(L) so S S^H = L I exactly
        for (int i = 0; i < streams; ++i) {
            for (int j = 0; j < i; ++j) S.row(i) -= (S.row(j).conjugate() * S.row(i).transpose())(0) * S.row(j);
            double n = S.row(i).norm();
            if (n < 1e-12) throw std::runtime_error("make_symbols: degenerate draw");
            S.row(i) /= n;
        }
        S *= std::sqrt(static_cast<double>(L));
    }
    return S;
}

std::vector<MatC> response_signals(const StackedModel& model, const MatC& X) {
    std::vector<MatC> out;
    out.reserve(model.B.size());
    for (const auto& B : model.B) out.push_back(B * X);
    return out;
}

Observations simulate_observation(const std::vector<MatC>& signal, const std::optional<VecC>& alpha,
                                  const std::vector<MatC>* clutter_G, const MatC& X,
                                  double sigma_ns2, RngStream& rng) {
    if (alpha && static_cast<std::size_t>(alpha->size()) != signal.size())
        throw std::invalid_argument("simulate_observation: alpha/receiver count mismatch");
    Observations obs;
    obs.z.reserve(signal.size());
    for (std::size_t r = 0; r < signal.size(); ++r) {
        MatC z = rng.cgaussian_matrix(signal[r].rows(), signal[r].cols(), sigma_ns2);
        if (alpha) z += (*alpha)(static_cast<Eigen::Index>(r)) * signal[r];
        if (clutter_G && r >= 1) {
            const MatC& G = (*clutter_G)[r - 1];
            if (G.cols() != X.rows()) throw std::invalid_argument("simulate_observation: clutter dims");
            z += G * X;
        }
        obs.z.push_back(std::move(z));
    }
    return obs;
}

namespace {

// per-node correlations g_r = sum_l A_r[l]^H z_r[l] and energies n_r = ||A_r||_F^2
void node_accumulators(const Observations& obs, const std::vector<MatC>& signal, VecC& g, VecD& n) {
    const auto R1 = static_cast<Eigen::Index>(signal.size());
    if (obs.z.size() != signal.size()) throw std::invalid_argument("fusion: observation/signal mismatch");
    g.resize(R1);
    n.resize(R1);
    for (Eigen::Index r = 0; r < R1; ++r) {
        if (obs.z[r].rows() != signal[r].rows() || obs.z[r].cols() != signal[r].cols())
            throw std::invalid_argument("fusion: slot dimension mismatch");
        g(r) = (signal[r].conjugate().cwiseProduct(obs.z[r])).sum();
        n(r) = signal[r].squaredNorm();
    }
}

void check_normal_matrix(const VecD& n) {
    double lo = n.minCoeff(), hi = n.maxCoeff();
    if (!(lo > 0.0)) throw std::runtime_error("fusion: singular normal matrix (zero signal energy)");
    if (hi / lo >= 1e12) throw std::runtime_error("fusion: normal matrix condition number above 1e12");
}

} // namespace

VecC estimate_alpha(const Observations& obs, const std::vector<MatC>& signal) {
    VecC g;
    VecD n;
    node_accumulators(obs, signal, g, n);
    check_normal_matrix(n);
    return g.array() / n.array().cast<Complex>();
}

double glrt_statistic(const Observations& obs, const std::vector<MatC>& signal, double sigma_ns2) {
    VecC g;
    VecD n;
    node_accumulators(obs, signal, g, n);
    check_normal_matrix(n);
    double quad = 0.0;
    for (Eigen::Index r = 0; r < g.size(); ++r) quad += std::norm(g(r)) / n(r);
    return 2.0 * quad / sigma_ns2;
}

double conditional_noncentrality(const std::vector<MatC>& signal, const VecC& alpha,
                                 double sigma_ns2) {
    double acc = 0.0;
    for (std::size_t r = 0; r < signal.size(); ++r)
        acc += std::norm(alpha(static_cast<Eigen::Index>(r))) * signal[r].squaredNorm();
    return 2.0 * acc / sigma_ns2;
}

double noncentrality_fusion(const PrecoderSet& ps, const std::vector<MatC>& B, int L,
                            double sigma_rcs2, double sigma_ns2, RhoNormalization norm) {
    double trace_sum = 0.0;
    int total_rx = 0;
    for (const auto& Br : B) {
        trace_sum += (Br * ps.W_hat * Br.adjoint()).trace().real();
        total_rx += static_cast<int>(Br.rows());
    }
    double rho = L * sigma_rcs2 * trace_sum / sigma_ns2;
    if (norm == RhoNormalization::scalar_energy) rho /= static_cast<double>(total_rx);
    return rho;
}

double analytic_pd_fusion(double rho, double pfa) {
    return noncentral_chi2_sf_2dof(threshold_from_pfa(pfa), rho);
}

double h0_threshold_exact(int receivers, double pfa) {
    if (receivers < 1) throw std::invalid_argument("h0_threshold_exact: receivers >= 1");
    if (!(pfa > 0.0 && pfa < 1.0)) throw std::domain_error("h0_threshold_exact: pfa in (0,1)");
    double lo = 0.0, hi = 2.0 * receivers + 20.0 * std::sqrt(4.0 * receivers) + 60.0;
    while (central_chi2_sf_even(receivers, hi) > pfa) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (central_chi2_sf_even(receivers, mid) > pfa)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

FusionReport run_fusion_trial(const StackedModel& model, const PrecoderSet& ps, const MatC& S,
                              const std::optional<VecC>& alpha, double sigma_rcs2,
                              double sigma_ns2, double pfa, RngStream& rng) {
    MatC X = ps.W * S;
    auto signal = response_signals(model, X);
    Observations obs = simulate_observation(signal, alpha, nullptr, X, sigma_ns2, rng);
    FusionReport rep;
    rep.alpha_hat = estimate_alpha(obs, signal);
    rep.statistic = glrt_statistic(obs, signal, sigma_ns2);
    rep.threshold = h0_threshold_exact(model.receivers(), pfa);
    rep.decision = rep.statistic >= rep.threshold;
    rep.rho = noncentrality_fusion(ps, model.B, static_cast<int>(S.cols()), sigma_rcs2, sigma_ns2);
    rep.pd = analytic_pd_fusion(rep.rho, pfa);
    return rep;
}

} // namespace iaps
