#include "iaps/chi2.hpp"

#include <cmath>
#include <stdexcept>

namespace iaps {

double threshold_from_pfa(double pfa) {
    if (!(pfa > 0.0) || !(pfa < 1.0)) throw std::domain_error("threshold_from_pfa: pfa must lie in (0,1)");
    return -2.0 * std::log(pfa);
}

double central_chi2_cdf_2dof(double x) {
    if (x < 0.0) throw std::domain_error("central_chi2_cdf_2dof: negative argument");
    return -std::expm1(-0.5 * x);
}

namespace {

// Erlang(m) survival at y: exp(-y) * sum_{j<m} y^j / j!, evaluated in log
// space so y up to ~700 stays finite.
double erlang_sf(int m, double y) {
    double log_term = -y; // j = 0
    double sum = std::exp(log_term);
    for (int j = 1; j < m; ++j) {
        log_term += std::log(y) - std::log(static_cast<double>(j));
        sum += std::exp(log_term);
    }
    return sum;
}

} // namespace

double central_chi2_sf_even(int half_dof, double x) {
    if (half_dof < 1) throw std::domain_error("central_chi2_sf_even: half_dof >= 1");
    if (x < 0.0) throw std::domain_error("central_chi2_sf_even: negative argument");
    return erlang_sf(half_dof, 0.5 * x);
}

double noncentral_chi2_sf_2dof(double xi, double rho) {
    if (xi < 0.0 || rho < 0.0) throw std::domain_error("noncentral_chi2_sf_2dof: negative argument");
    if (xi == 0.0) return 1.0;

    const double lam = 0.5 * rho; // Poisson mixing rate
    const double y = 0.5 * xi;

    if (lam == 0.0) return std::exp(-y);

    // Start at the Poisson mode and sweep both directions; all terms are
    // positive so the truncation error is bounded by the unaccumulated
    // Poisson mass (each Erlang tail is <= 1).
    const int k0 = static_cast<int>(lam);
    double log_pois_k0 = -lam + k0 * std::log(lam) - std::lgamma(k0 + 1.0);
    double pois = std::exp(log_pois_k0);
    double tail = erlang_sf(k0 + 1, y);

    double sum = pois * tail;
    double pois_mass = pois;

    // inner Erlang increment e_k = exp(-y) y^k / k!
    double log_e = -y + (k0 + 1) * std::log(y) - std::lgamma(k0 + 2.0);

    // forward k0+1, k0+2, ...: past the Poisson mode the terms decay at
    // least geometrically, so the truncated mass is bounded by a few times
    // the last term
    {
        double p = pois;
        double t = tail;
        double le = log_e;
        for (int k = k0 + 1; k < k0 + 100000; ++k) {
            p *= lam / k;
            t += std::exp(le);
            le += std::log(y) - std::log(static_cast<double>(k + 1));
            sum += p * t;
            pois_mass += p;
            if (k >= 2.0 * lam && p < 0.5e-16) break;
        }
    }
    // backward k0-1, ..., 0
    {
        double p = pois;
        double t = tail;
        double le = -y + k0 * std::log(y) - std::lgamma(k0 + 1.0);
        for (int k = k0 - 1; k >= 0; --k) {
            p *= (k + 1) / lam;
            t -= std::exp(le);
            le -= std::log(y) - std::log(static_cast<double>(k + 1));
            if (t < 0.0) t = 0.0;
            sum += p * t;
            pois_mass += p;
        }
    }
    if (sum > 1.0) sum = 1.0;
    return sum;
}

EmpiricalRates empirical_pfa_pd(std::span<const double> h0_stats,
                                std::span<const double> h1_stats, double xi) {
    if (h0_stats.empty() || h1_stats.empty())
        throw std::invalid_argument("empirical_pfa_pd: empty sample set");
    auto rate = [xi](std::span<const double> s) {
        std::size_t n = 0;
        for (double v : s) n += (v >= xi);
        return static_cast<double>(n) / static_cast<double>(s.size());
    };
    EmpiricalRates r;
    r.pfa = rate(h0_stats);
    r.pd = rate(h1_stats);
    r.pfa_se = std::sqrt(r.pfa * (1.0 - r.pfa) / static_cast<double>(h0_stats.size()));
    r.pd_se = std::sqrt(r.pd * (1.0 - r.pd) / static_cast<double>(h1_stats.size()));
    return r;
}

} // namespace iaps
