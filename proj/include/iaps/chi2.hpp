#pragma once

#include <span>
#include <vector>

namespace iaps {

// Central/noncentral chi-square kernel with 2 degrees of freedom: threshold
// selection from a false-alarm target and the detection-probability map.

// Inverse CDF of central chi2_2 at 1 - pfa; closed form -2 ln(pfa).
double threshold_from_pfa(double pfa);

// CDF of central chi2_2: 1 - exp(-x/2).
double central_chi2_cdf_2dof(double x);

// Survival function of the noncentral chi2 with 2 DoF and noncentrality rho,
// i.e. P(X > xi) = Q_1(sqrt(rho), sqrt(xi)) (first-order Marcum Q).
// Series over Poisson-weighted Erlang tails, absolute error <= 1e-12.
double noncentral_chi2_sf_2dof(double xi, double rho);

// Survival function of the central chi-square with 2*half_dof DoF (Erlang
// tail); used to calibrate empirical thresholds for multi-gain detectors.
double central_chi2_sf_even(int half_dof, double x);

struct EmpiricalRates {
    double pfa = 0.0;
    double pfa_se = 0.0;
    double pd = 0.0;
    double pd_se = 0.0;
};

// Fraction of statistics exceeding xi per hypothesis, with binomial standard
// errors. Both sample sets must be nonempty.
EmpiricalRates empirical_pfa_pd(std::span<const double> h0_stats,
                                std::span<const double> h1_stats, double xi);

} // namespace iaps
