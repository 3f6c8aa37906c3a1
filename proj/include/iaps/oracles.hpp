#pragma once

#include "iaps/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

// Independent reference implementations used to cross-check the main library.
// Nothing here calls into the implementation paths under test: the survival
// function is numerical quadrature of the density, voting probabilities are
// exhaustive enumeration, and the LP references are grid/vertex searches.
namespace iaps::oracle {

// P(X > xi) for the noncentral chi-square with 2 DoF, by composite
// Gauss-Legendre quadrature of the density f(x) = 0.5 exp(-(x+rho)/2) I0(sqrt(rho x)).
double noncentral_chi2_sf_quadrature(double xi, double rho);

// Expected value of the 2-DoF noncentral survival function when the
// noncentrality is exponential with the given mean (Swerling-I marginal),
// by quadrature over the mixing density.
double swerling1_pd_quadrature(double xi, double mean_rho);

// Regularized incomplete beta function I_x(a, b) by quadrature.
double regularized_beta_quadrature(double x, double a, double b);

// Probability of error at the fusion center by exhaustive enumeration of all
// 2^(R+1) vote patterns under both hypotheses (equal priors, ties to H1).
double vote_error_enumeration(int kappa, double pd, double pfa, int R);

// P(sum of independent Bernoulli(probs) >= kappa), exact DP.
double poisson_binomial_tail(const std::vector<double>& probs, int kappa);

struct LpPoint {
    VecD x;
    double objective = 0.0;
    bool feasible = false;
};

// max c'x s.t. A x <= b, x >= 0, sum(x) <= budget, by exhaustive enumeration
// of basic feasible points (all ways of making n constraints active).
LpPoint lp_vertex_maximize(const VecD& c, const MatD& A, const VecD& b, double budget);

// Same problem by brute-force grid search with the given step (small n only).
LpPoint lp_grid_maximize(const VecD& c, const MatD& A, const VecD& b, double budget, double step);

// Two-stage grid search: coarse pass over the whole box, then a fine pass
// (coarse_step / refine_factor) on a one-coarse-cell window around the best
// coarse point.
LpPoint lp_grid_maximize_refined(const VecD& c, const MatD& A, const VecD& b, double budget,
                                 double coarse_step, int refine_factor);

// min sum(x) s.t. A x <= b, x >= 0 for rows of the power-control form
// (own-gain on the diagonal): componentwise-minimal fixed point iteration.
LpPoint power_control_fixed_point(const MatD& A, const VecD& b);

// FNV-1a 64-bit checksum of a byte string (oracle tables carry their own).
std::uint64_t fnv1a64(const std::string& bytes);

} // namespace iaps::oracle
