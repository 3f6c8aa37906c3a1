#include "iaps/voting.hpp"

#include <cmath>
#include <stdexcept>

namespace iaps {

double binomial_coefficient(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    if (n <= 64) {
        // exact multiplicative recurrence; intermediates need 128 bits even
        // though C(64,32) itself fits in 64
        unsigned __int128 num = 1;
        k = std::min(k, n - k);
        for (int i = 0; i < k; ++i)
            num = num * static_cast<unsigned>(n - i) / static_cast<unsigned>(i + 1);
        return static_cast<double>(num);
    }
    return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

namespace {

// CDF at kappa-1 of Binomial(R+1, p)
double binom_cdf_below(int kappa, double p, int R) {
    const int n = R + 1;
    double sum = 0.0;
    for (int i = 0; i < kappa; ++i)
        sum += binomial_coefficient(n, i) * std::pow(p, i) * std::pow(1.0 - p, n - i);
    return sum;
}

} // namespace

double error_prob(int kappa, double pd_hat, double pfa_hat, int R) {
    if (kappa < 1 || kappa > R + 1) throw std::domain_error("error_prob: kappa out of range");
    return 0.5 + 0.5 * (binom_cdf_below(kappa, pd_hat, R) - binom_cdf_below(kappa, pfa_hat, R));
}

double beta(double pd_hat, double pfa_hat) {
    if (!(pd_hat > 0.0 && pd_hat < 1.0) || !(pfa_hat > 0.0 && pfa_hat < 1.0))
        throw std::domain_error("beta: probabilities must lie in (0,1)");
    if (pd_hat == pfa_hat) throw std::domain_error("beta: undefined at pd == pfa");
    return std::log(pfa_hat / pd_hat) / std::log((1.0 - pd_hat) / (1.0 - pfa_hat));
}

int optimal_kappa(double pd_hat, double pfa_hat, int R) {
    if (!(pd_hat > pfa_hat)) throw std::domain_error("optimal_kappa: requires pd_hat > pfa_hat");
    double b = beta(pd_hat, pfa_hat);
    double raw = (R + 1) / (1.0 + b);
    int kappa = static_cast<int>(std::ceil(raw));
    if (kappa < 1) kappa = 1;
    return std::min(R + 1, kappa);
}

bool fuse(const std::vector<bool>& bits, int kappa) {
    int sum = 0;
    for (bool b : bits) sum += b;
    return sum >= kappa;
}

double voted_tail(int kappa, double p, int R) {
    return 1.0 - binom_cdf_below(kappa, p, R);
}

} // namespace iaps
