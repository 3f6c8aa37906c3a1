#pragma once

#include "iaps/precoding.hpp"
#include "iaps/rng.hpp"
#include "iaps/scenario.hpp"
#include "iaps/types.hpp"

#include <optional>
#include <vector>

namespace iaps {

// Unlimited-backhaul pipeline: the central controller stacks the BS and RAP
// observations, estimates the sensing gains by least squares and thresholds
// the GLRT deviance.

// Rank-one response matrices: B[0] = b0(theta) a(theta)^H, B[r] = b1(phi_r) a(theta)^H.
struct StackedModel {
    std::vector<MatC> B; // r = 0..R
    int receivers() const { return static_cast<int>(B.size()); }
    int total_rx() const {
        int n = 0;
        for (const auto& b : B) n += static_cast<int>(b.rows());
        return n;
    }
};

StackedModel build_stacked_model(const ChannelSet& ch);

enum class SymbolNormalization {
    exact, // rows orthonormalized so S S^H = L I exactly
    raw    // i.i.d. CN(0,1) entries
};

// (K+1) x L white Gaussian symbol matrix.
MatC make_symbols(int streams, int L, RngStream& rng,
                  SymbolNormalization norm = SymbolNormalization::exact);

// Known signal part per node: A_r = B_r X with X = W S (columns are the
// per-slot vectors A_r[l]).
std::vector<MatC> response_signals(const StackedModel& model, const MatC& X);

struct Observations {
    std::vector<MatC> z; // per node, N_r x L
};

// H1 when alpha is set: z_r = alpha_r A_r (+ G_r X when clutter is passed) + noise;
// H0 otherwise. The target-free term is omitted in the fusion pipeline (the
// CC cancels it), so pass clutter_G only for local-detector simulations.
Observations simulate_observation(const std::vector<MatC>& signal, const std::optional<VecC>& alpha,
                                  const std::vector<MatC>* clutter_G, const MatC& X,
                                  double sigma_ns2, RngStream& rng);

// Least-squares gain estimate (sum_l A^H A)^{-1} (sum_l A^H z); the stacked
// normal matrix is block-diagonal so it reduces to per-node ratios. Throws on
// a singular or badly conditioned (>= 1e12) normal matrix.
VecC estimate_alpha(const Observations& obs, const std::vector<MatC>& signal);

// GLRT deviance 2 ln(Lambda) = (2/sigma^2) (sum z^H A)(sum A^H A)^{-1}(sum A^H z),
// scaled so the H0 law is exactly central chi-square with 2(R+1) DoF.
double glrt_statistic(const Observations& obs, const std::vector<MatC>& signal, double sigma_ns2);

// Noncentrality of the statistic conditioned on a gain realization:
// (2/sigma^2) sum_r |alpha_r|^2 ||A_r||_F^2.
double conditional_noncentrality(const std::vector<MatC>& signal, const VecC& alpha,
                                 double sigma_ns2);

enum class RhoNormalization {
    per_antenna,  // rho = L sigma_rcs^2 / sigma^2 * sum_r tr(B_r W_hat B_r^H)
    scalar_energy // additionally divided by (N0 + R N1), the total noise energy form
};

// Analytic noncentrality of the fused detector.
double noncentrality_fusion(const PrecoderSet& ps, const std::vector<MatC>& B, int L,
                            double sigma_rcs2, double sigma_ns2,
                            RhoNormalization norm = RhoNormalization::per_antenna);

// Detection probability through the 2-DoF noncentral map at the pfa threshold.
double analytic_pd_fusion(double rho, double pfa);

// Exact H0 threshold for the deviance over `receivers` complex gains:
// the 1-pfa quantile of chi-square with 2*receivers DoF.
double h0_threshold_exact(int receivers, double pfa);

struct FusionReport {
    double statistic = 0.0;
    double threshold = 0.0; // exact H0 quantile used for the decision
    bool decision = false;
    double rho = 0.0; // analytic noncentrality of the ensemble
    double pd = 0.0;  // detection probability through the 2-DoF map
    VecC alpha_hat;
};

FusionReport run_fusion_trial(const StackedModel& model, const PrecoderSet& ps, const MatC& S,
                              const std::optional<VecC>& alpha, double sigma_rcs2,
                              double sigma_ns2, double pfa, RngStream& rng);

} // namespace iaps
