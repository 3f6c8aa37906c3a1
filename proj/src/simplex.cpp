#include "iaps/simplex.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace iaps {

namespace {

constexpr double kPivTol = 1e-11;
constexpr int kMaxIters = 100000;

// Tableau layout: m structural rows + 1 objective row; columns are
// [x(n) | slack(m) | artificial(na) | rhs].
struct Tableau {
    MatD t;
    std::vector<int> basis;
    int n = 0, m = 0, na = 0;

    int cols() const { return n + m + na + 1; }
    int rhs_col() const { return n + m + na; }

    // Bland: entering = smallest-index column with negative reduced cost.
    int entering(int limit_col, double tol) const {
        for (int j = 0; j < limit_col; ++j)
            if (t(m, j) < -tol) return j;
        return -1;
    }

    // Min-ratio leaving row; ties broken by smallest basic index (Bland).
    int leaving(int col, double tol) const {
        int row = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i) {
            double a = t(i, col);
            if (a <= tol) continue;
            double ratio = t(i, rhs_col()) / a;
            if (ratio < best - 1e-15 || (std::abs(ratio - best) <= 1e-15 && (row < 0 || basis[i] < basis[row]))) {
                best = ratio;
                row = i;
            }
        }
        return row;
    }

    void pivot(int row, int col) {
        t.row(row) /= t(row, col);
        for (int i = 0; i <= m; ++i) {
            if (i == row) continue;
            double f = t(i, col);
            if (f != 0.0) t.row(i) -= f * t.row(row);
        }
        basis[row] = col;
    }

    // returns false on iteration blowup
    bool optimize(int limit_col, double tol, int& iters, bool& unbounded) {
        unbounded = false;
        while (true) {
            int col = entering(limit_col, tol);
            if (col < 0) return true;
            int row = leaving(col, kPivTol);
            if (row < 0) {
                unbounded = true;
                return true;
            }
            pivot(row, col);
            if (++iters > kMaxIters) return false;
        }
    }
};

} // namespace

LpResult solve_lp_min(const VecD& c, const MatD& A, const VecD& b) {
    const int n = static_cast<int>(c.size());
    const int m = static_cast<int>(A.rows());
    if (A.cols() != n || b.size() != m) throw std::invalid_argument("solve_lp_min: dimension mismatch");

    LpResult res;
    res.x = VecD::Zero(n);

    // equilibrate rows, then columns (variable substitution x_j = x'_j / s_j)
    // so badly scaled instances pivot against O(1) entries
    MatD As = A;
    VecD bs = b;
    for (int i = 0; i < m; ++i) {
        double s = std::max(As.row(i).cwiseAbs().maxCoeff(), std::abs(bs(i)));
        if (s > 0.0) {
            As.row(i) /= s;
            bs(i) /= s;
        }
    }
    VecD col_scale = VecD::Ones(n);
    for (int j = 0; j < n; ++j) {
        double s = m > 0 ? As.col(j).cwiseAbs().maxCoeff() : 0.0;
        if (s > 0.0) {
            col_scale(j) = s;
            As.col(j) /= s;
        }
    }
    VecD cs = c.cwiseQuotient(col_scale);
    double cscale = cs.cwiseAbs().maxCoeff();
    if (cscale > 0.0) cs /= cscale;

    // negate rows with negative rhs; those rows get artificials
    std::vector<int> sign(m, 1);
    int na = 0;
    for (int i = 0; i < m; ++i)
        if (bs(i) < 0.0) {
            sign[i] = -1;
            ++na;
        }

    Tableau tb;
    tb.n = n;
    tb.m = m;
    tb.na = na;
    tb.t = MatD::Zero(m + 1, tb.cols());
    tb.basis.assign(m, -1);

    int art = 0;
    for (int i = 0; i < m; ++i) {
        tb.t.block(i, 0, 1, n) = sign[i] * As.row(i);
        tb.t(i, n + i) = sign[i]; // slack
        tb.t(i, tb.rhs_col()) = sign[i] * bs(i);
        if (sign[i] < 0) {
            tb.t(i, n + m + art) = 1.0;
            tb.basis[i] = n + m + art;
            ++art;
        } else {
            tb.basis[i] = n + i;
        }
    }

    const double tol = 1e-10;

    // phase 1: minimize sum of artificials
    if (na > 0) {
        for (int j = n + m; j < n + m + na; ++j) tb.t(m, j) = 1.0;
        for (int i = 0; i < m; ++i)
            if (tb.basis[i] >= n + m) tb.t.row(m) -= tb.t.row(i);
        bool unbounded = false;
        if (!tb.optimize(n + m, tol, res.iterations, unbounded)) return res; // degenerate (cycling guardrail)
        double phase1 = -tb.t(m, tb.rhs_col());
        if (phase1 > 1e-8) {
            res.status = LpStatus::infeasible;
            return res;
        }
        // drive leftover artificials out of the basis where possible
        for (int i = 0; i < m; ++i) {
            if (tb.basis[i] < n + m) continue;
            for (int j = 0; j < n + m; ++j)
                if (std::abs(tb.t(i, j)) > kPivTol) {
                    tb.pivot(i, j);
                    break;
                }
        }
    }

    // phase 2 objective row: reduced costs of cs over the current basis
    tb.t.row(m).setZero();
    tb.t.block(m, 0, 1, n) = cs.transpose();
    for (int i = 0; i < m; ++i) {
        int bj = tb.basis[i];
        if (bj < n && cs(bj) != 0.0) tb.t.row(m) -= cs(bj) * tb.t.row(i);
        if (bj >= n + m) tb.t(m, bj) = 0.0; // basic artificial pinned at zero stays out
    }

    bool unbounded = false;
    if (!tb.optimize(n + m, tol, res.iterations, unbounded)) return res;
    if (unbounded) {
        res.status = LpStatus::unbounded;
        return res;
    }

    for (int i = 0; i < m; ++i)
        if (tb.basis[i] < n) res.x(tb.basis[i]) = tb.t(i, tb.rhs_col()) / col_scale(tb.basis[i]);
    // clip the tiny negatives that tableau arithmetic can leave behind
    res.x = res.x.cwiseMax(0.0);
    res.objective = c.dot(res.x);
    res.status = LpStatus::optimal;
    return res;
}

void lp_to_text(const VecD& c, const MatD& A, const VecD& b, std::ostream& out) {
    out << "iaps-lp 1\n" << c.size() << ' ' << A.rows() << '\n';
    char buf[64];
    auto put = [&](double v, char sep) {
        std::snprintf(buf, sizeof buf, "%.17g%c", v, sep);
        out << buf;
    };
    for (Eigen::Index j = 0; j < c.size(); ++j) put(c(j), j + 1 == c.size() ? '\n' : ' ');
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j) put(A(i, j), j + 1 == A.cols() ? '\n' : ' ');
    for (Eigen::Index i = 0; i < b.size(); ++i) put(b(i), i + 1 == b.size() ? '\n' : ' ');
}

void lp_from_text(std::istream& in, VecD& c, MatD& A, VecD& b) {
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "iaps-lp" || version != 1) throw std::runtime_error("lp_from_text: bad header");
    Eigen::Index n = 0, m = 0;
    in >> n >> m;
    c.resize(n);
    A.resize(m, n);
    b.resize(m);
    for (Eigen::Index j = 0; j < n; ++j) in >> c(j);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < n; ++j) in >> A(i, j);
    for (Eigen::Index i = 0; i < m; ++i) in >> b(i);
    if (!in) throw std::runtime_error("lp_from_text: truncated instance");
}

} // namespace iaps
