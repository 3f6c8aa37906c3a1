#include "iaps/oracles.hpp"

#include <cmath>
#include <string>

namespace iaps::oracle {

namespace {

struct GaussLegendre {
    std::vector<double> nodes, weights; // on [-1, 1]
    explicit GaussLegendre(int n) {
        nodes.resize(n);
        weights.resize(n);
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }
};

template <typename F>
double integrate(F&& f, double lo, double hi, int panels) {
    static const GaussLegendre gl(20);
    double total = 0.0;
    double h = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
        double a = lo + p * h, mid = a + 0.5 * h, half = 0.5 * h;
        double acc = 0.0;
        for (std::size_t i = 0; i < gl.nodes.size(); ++i)
            acc += gl.weights[i] * f(mid + half * gl.nodes[i]);
        total += acc * half;
    }
    return total;
}

double ncx2_density_2dof(double x, double rho) {
    if (x < 0.0) return 0.0;
    return 0.5 * std::exp(-0.5 * (x + rho)) * std::cyl_bessel_i(0.0, std::sqrt(rho * x));
}

} // namespace

double noncentral_chi2_sf_quadrature(double xi, double rho) {
    if (xi <= 0.0) return 1.0;
    double cdf = integrate([rho](double x) { return ncx2_density_2dof(x, rho); }, 0.0, xi, 16);
    return 1.0 - cdf;
}

double swerling1_pd_quadrature(double xi, double mean_rho) {
    if (mean_rho <= 0.0) return noncentral_chi2_sf_quadrature(xi, 0.0);
    double hi = mean_rho * 60.0;
    return integrate(
        [&](double lam) {
            return std::exp(-lam / mean_rho) / mean_rho * noncentral_chi2_sf_quadrature(xi, lam);
        },
        0.0, hi, 96);
}

double regularized_beta_quadrature(double x, double a, double b) {
    double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    double integral = integrate(
        [&](double t) { return std::pow(t, a - 1.0) * std::pow(1.0 - t, b - 1.0); }, 0.0, x, 64);
    return integral / std::exp(log_beta);
}

double vote_error_enumeration(int kappa, double pd, double pfa, int R) {
    const int n = R + 1;
    double p_detect_h1 = 0.0; // P(sum >= kappa | H1)
    double p_detect_h0 = 0.0;
    for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
        int ones = __builtin_popcountll(mask);
        double w1 = 1.0, w0 = 1.0;
        for (int r = 0; r < n; ++r) {
            bool bit = (mask >> r) & 1ULL;
            w1 *= bit ? pd : (1.0 - pd);
            w0 *= bit ? pfa : (1.0 - pfa);
        }
        if (ones >= kappa) {
            p_detect_h1 += w1;
            p_detect_h0 += w0;
        }
    }
    // equal priors: error = 1/2 P(miss|H1) + 1/2 P(alarm|H0)
    return 0.5 * (1.0 - p_detect_h1) + 0.5 * p_detect_h0;
}

double poisson_binomial_tail(const std::vector<double>& probs, int kappa) {
    std::vector<double> dist(probs.size() + 1, 0.0);
    dist[0] = 1.0;
    for (std::size_t r = 0; r < probs.size(); ++r) {
        for (std::size_t k = r + 1; k > 0; --k)
            dist[k] = dist[k] * (1.0 - probs[r]) + dist[k - 1] * probs[r];
        dist[0] *= 1.0 - probs[r];
    }
    double tail = 0.0;
    for (std::size_t k = std::max(kappa, 0); k < dist.size(); ++k) tail += dist[k];
    return tail;
}

namespace {

bool point_feasible(const VecD& x, const MatD& A, const VecD& b, double budget, double tol) {
    if ((x.array() < -tol).any()) return false;
    if (x.sum() > budget + tol) return false;
    // row-relative slack test: rows can live on wildly different scales
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        double lhs = A.row(i).dot(x);
        double scale = A.row(i).cwiseAbs().dot(x.cwiseAbs()) + std::abs(b(i));
        if (lhs > b(i) + 1e-9 * scale) return false;
    }
    return true;
}

} // namespace

LpPoint lp_vertex_maximize(const VecD& c, const MatD& A, const VecD& b, double budget) {
    const int n = static_cast<int>(c.size());
    const int m = static_cast<int>(A.rows());
    // full constraint stack G x <= h: [A; 1'; -I]
    MatD G(m + 1 + n, n);
    VecD h(m + 1 + n);
    G.topRows(m) = A;
    h.head(m) = b;
    G.row(m).setOnes();
    h(m) = budget;
    G.bottomRows(n) = -MatD::Identity(n, n);
    h.tail(n).setZero();

    const double scale = std::max(1.0, budget);
    const double tol = 1e-9 * scale;
    LpPoint best;

    const int total = m + 1 + n;
    std::vector<int> idx(n);
    // enumerate all n-subsets of the constraints
    auto recurse = [&](auto&& self, int depth, int start) -> void {
        if (depth == n) {
            MatD Gs(n, n);
            VecD hs(n);
            for (int i = 0; i < n; ++i) {
                Gs.row(i) = G.row(idx[i]);
                hs(i) = h(idx[i]);
            }
            Eigen::FullPivLU<MatD> lu(Gs);
            if (!lu.isInvertible()) return;
            VecD x = lu.solve(hs);
            if (!point_feasible(x, A, b, budget, tol)) return;
            double obj = c.dot(x);
            if (!best.feasible || obj > best.objective) {
                best.feasible = true;
                best.objective = obj;
                best.x = x;
            }
            return;
        }
        for (int i = start; i < total; ++i) {
            idx[depth] = i;
            self(self, depth + 1, i + 1);
        }
    };
    recurse(recurse, 0, 0);
    return best;
}

LpPoint lp_grid_maximize(const VecD& c, const MatD& A, const VecD& b, double budget, double step) {
    const int n = static_cast<int>(c.size());
    LpPoint best;
    VecD x = VecD::Zero(n);
    const double tol = 1e-12 * std::max(1.0, budget);
    auto visit = [&](auto&& self, int depth, double remaining) -> void {
        if (depth == n) {
            if (point_feasible(x, A, b, budget, tol)) {
                double obj = c.dot(x);
                if (!best.feasible || obj > best.objective) {
                    best.feasible = true;
                    best.objective = obj;
                    best.x = x;
                }
            }
            return;
        }
        for (double v = 0.0; v <= remaining + 0.5 * step; v += step) {
            x(depth) = std::min(v, remaining);
            self(self, depth + 1, remaining - x(depth));
        }
        x(depth) = 0.0;
    };
    visit(visit, 0, budget);
    return best;
}

LpPoint lp_grid_maximize_refined(const VecD& c, const MatD& A, const VecD& b, double budget,
                                 double coarse_step, int refine_factor) {
    const int n = static_cast<int>(c.size());
    LpPoint coarse = lp_grid_maximize(c, A, b, budget, coarse_step);
    if (!coarse.feasible) return coarse;
    const double fine = coarse_step / refine_factor;
    const double tol = 1e-12 * std::max(1.0, budget);
    LpPoint best = coarse;
    // window of +-n coarse cells: snapping each of the other variables can
    // shift the budget-absorbing one by up to (n-1) cells
    const double window = n * coarse_step;
    VecD lo(n), hi(n);
    for (int j = 0; j < n; ++j) {
        lo(j) = std::max(0.0, coarse.x(j) - window);
        hi(j) = std::min(budget, coarse.x(j) + window);
    }
    VecD x = lo;
    auto visit = [&](auto&& self, int depth) -> void {
        if (depth == n) {
            if (point_feasible(x, A, b, budget, tol)) {
                double obj = c.dot(x);
                if (obj > best.objective) {
                    best.objective = obj;
                    best.x = x;
                }
            }
            return;
        }
        for (double v = lo(depth); v <= hi(depth) + 0.5 * fine; v += fine) {
            x(depth) = v;
            self(self, depth + 1);
        }
        x(depth) = lo(depth);
    };
    visit(visit, 0);
    return best;
}

LpPoint power_control_fixed_point(const MatD& A, const VecD& b) {
    const int n = static_cast<int>(A.rows());
    LpPoint out;
    VecD x = VecD::Zero(n);
    for (int it = 0; it < 100000; ++it) {
        VecD next(n);
        for (int k = 0; k < n; ++k) {
            double own = -A(k, k);
            if (own <= 0.0) return out; // not of power-control form
            double interference = A.row(k).dot(x) - A(k, k) * x(k);
            next(k) = std::max(0.0, (interference - b(k)) / own);
        }
        double delta = (next - x).cwiseAbs().maxCoeff();
        x = next;
        if (!x.allFinite() || x.maxCoeff() > 1e18) return out; // diverging => infeasible
        if (delta < 1e-13 * std::max(1.0, x.maxCoeff())) {
            out.feasible = true;
            out.x = x;
            out.objective = x.sum();
            return out;
        }
    }
    return out;
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace iaps::oracle
