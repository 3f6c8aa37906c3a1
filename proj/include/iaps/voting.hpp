#pragma once

#include <cstdint>
#include <vector>

namespace iaps {

// Fusion-center voting: R+1 one-bit decisions, declare a target when at
// least kappa are positive (ties resolve to H1).

// Exact binomial coefficient; n <= 64 stays in integer arithmetic, larger n
// falls back to log space.
double binomial_coefficient(int n, int k);

// Probability of error at the fusion center with equal priors:
// 1/2 + 1/2 sum_{i<kappa} C(R+1,i) [pd^i(1-pd)^{R+1-i} - pfa^i(1-pfa)^{R+1-i}].
double error_prob(int kappa, double pd_hat, double pfa_hat, int R);

// ln(pfa/pd) / ln((1-pd)/(1-pfa)); requires pd, pfa in (0,1), pd != pfa.
double beta(double pd_hat, double pfa_hat);

// min(R+1, ceil((R+1)/(1+beta))); requires pd_hat > pfa_hat.
int optimal_kappa(double pd_hat, double pfa_hat, int R);

// Voted decision: 1 iff at least kappa of the bits are set.
bool fuse(const std::vector<bool>& bits, int kappa);

// P(sum of R+1 i.i.d. Bernoulli(p) >= kappa): detection probability of the
// voting rule when every node operates at p.
double voted_tail(int kappa, double p, int R);

} // namespace iaps
