#include "iaps/power_alloc.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace iaps {

double QosRow::slack(const VecD& p) const {
    double lhs = rho_sq(k) * p(k) / gamma_lin;
    double rhs = sigma_nc2;
    for (Eigen::Index j = 0; j < rho_sq.size(); ++j)
        if (j != k) rhs += rho_sq(j) * p(j);
    return lhs - rhs;
}

std::vector<QosRow> build_qos_rows(const MatC& H, const MatC& w_tilde, double gamma_db,
                                   double sigma_nc2) {
    const int K = static_cast<int>(H.cols());
    if (w_tilde.cols() != K + 1) throw std::invalid_argument("build_qos_rows: expected K+1 precoders");
    std::vector<QosRow> rows(K);
    for (int k = 1; k <= K; ++k) {
        QosRow& row = rows[k - 1];
        row.k = k;
        row.gamma_lin = db_to_linear(gamma_db);
        row.sigma_nc2 = sigma_nc2;
        row.rho_sq.resize(K + 1);
        for (int j = 0; j <= K; ++j) row.rho_sq(j) = std::norm(H.col(k - 1).dot(w_tilde.col(j)));
        row.feasible = row.rho_sq(k) > 0.0;
    }
    return rows;
}

namespace {

// Assemble the QoS rows as A p <= b over the selected variables.
// keep[j] = true means p_j is a free variable; fixed values enter b.
void assemble(const std::vector<QosRow>& rows, const std::vector<bool>& keep, const VecD& fixed,
              MatD& A, VecD& b) {
    const int total = static_cast<int>(keep.size());
    std::vector<int> col_of(total, -1);
    int n = 0;
    for (int j = 0; j < total; ++j)
        if (keep[j]) col_of[j] = n++;
    A = MatD::Zero(static_cast<int>(rows.size()), n);
    b = VecD::Zero(static_cast<int>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const QosRow& row = rows[i];
        double rhs = -row.sigma_nc2;
        for (int j = 0; j < total; ++j) {
            double coeff = (j == row.k) ? -row.rho_sq(j) / row.gamma_lin : row.rho_sq(j);
            if (keep[j])
                A(static_cast<int>(i), col_of[j]) = coeff;
            else
                rhs -= coeff * fixed(j);
        }
        b(static_cast<int>(i)) = rhs;
    }
}

// relative duality gap via an explicit solve of the dual LP
double duality_gap(const VecD& c, const MatD& A, const VecD& b, double primal_obj) {
    LpResult dual = solve_lp_min(b, -A.transpose(), c);
    if (dual.status != LpStatus::optimal) return std::numeric_limits<double>::infinity();
    return std::abs(primal_obj + dual.objective) / std::max(1.0, std::abs(primal_obj));
}

VecD qos_slacks_and_budget(const std::vector<QosRow>& rows, const VecD& p, double p_max) {
    VecD s(rows.size() + 1);
    for (std::size_t i = 0; i < rows.size(); ++i) s(static_cast<int>(i)) = rows[i].slack(p);
    s(static_cast<int>(rows.size())) = p_max - p.sum();
    return s;
}

} // namespace

AllocationResult solve_p2(const std::vector<QosRow>& rows, const VecD& c, double p_max_mw,
                          bool with_sensing) {
    const int total = static_cast<int>(c.size());
    AllocationResult out;
    out.p = VecD::Zero(total);
    for (const QosRow& row : rows)
        if (!row.feasible) {
            out.status = AllocStatus::infeasible;
            return out;
        }

    std::vector<bool> keep(total, true);
    if (!with_sensing) keep[0] = false;
    VecD fixed = VecD::Zero(total);

    MatD A;
    VecD b;
    assemble(rows, keep, fixed, A, b);
    const int n = static_cast<int>(A.cols());

    // budget row
    MatD Ab(A.rows() + 1, n);
    VecD bb(b.size() + 1);
    Ab.topRows(A.rows()) = A;
    Ab.row(A.rows()).setOnes();
    bb.head(b.size()) = b;
    bb(b.size()) = p_max_mw;

    VecD cv(n);
    {
        int col = 0;
        for (int j = 0; j < total; ++j)
            if (keep[j]) cv(col++) = -c(j); // maximize
    }

    LpResult lp = solve_lp_min(cv, Ab, bb);
    out.iterations = lp.iterations;
    if (lp.status == LpStatus::infeasible) {
        out.status = AllocStatus::infeasible;
        return out;
    }
    if (lp.status != LpStatus::optimal) {
        out.status = AllocStatus::degenerate;
        return out;
    }
    {
        int col = 0;
        for (int j = 0; j < total; ++j) out.p(j) = keep[j] ? lp.x(col++) : fixed(j);
    }
    out.objective = c.dot(out.p);
    out.gap = duality_gap(cv, Ab, bb, lp.objective);
    out.slacks = qos_slacks_and_budget(rows, out.p, p_max_mw);
    out.status = out.gap <= 1e-6 ? AllocStatus::optimal : AllocStatus::degenerate;
    return out;
}

AllocationResult solve_pa(const std::vector<QosRow>& rows, double p0_fixed) {
    if (p0_fixed < 0.0) throw std::invalid_argument("solve_pa: negative p0");
    const int total = static_cast<int>(rows.empty() ? 1 : rows.front().rho_sq.size());
    AllocationResult out;
    out.p = VecD::Zero(total);
    out.p(0) = p0_fixed;
    for (const QosRow& row : rows)
        if (!row.feasible) {
            out.status = AllocStatus::infeasible;
            return out;
        }
    if (rows.empty()) {
        out.status = AllocStatus::optimal;
        return out;
    }

    std::vector<bool> keep(total, true);
    keep[0] = false;
    VecD fixed = VecD::Zero(total);
    fixed(0) = p0_fixed;

    MatD A;
    VecD b;
    assemble(rows, keep, fixed, A, b);
    VecD cv = VecD::Ones(A.cols());

    LpResult lp = solve_lp_min(cv, A, b);
    out.iterations = lp.iterations;
    if (lp.status == LpStatus::infeasible) {
        out.status = AllocStatus::infeasible;
        return out;
    }
    if (lp.status != LpStatus::optimal) {
        out.status = AllocStatus::degenerate;
        return out;
    }
    for (int j = 1; j < total; ++j) out.p(j) = lp.x(j - 1);
    out.objective = lp.x.sum();
    out.gap = duality_gap(cv, A, b, lp.objective);
    VecD s(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) s(static_cast<int>(i)) = rows[i].slack(out.p);
    out.slacks = s;
    out.status = out.gap <= 1e-6 ? AllocStatus::optimal : AllocStatus::degenerate;
    return out;
}

AllocationResult algorithm1(const std::vector<QosRow>& rows, double p_max_mw, double step_frac) {
    if (!(step_frac > 0.0 && step_frac < 1.0))
        throw std::invalid_argument("algorithm1: step_frac must lie in (0,1)");
    const double step = step_frac * p_max_mw;
    double p0_prev = p_max_mw;
    double p_sum = p0_prev;
    AllocationResult last;
    int iters = 0;
    while (p_sum >= p_max_mw) {
        double p0 = p0_prev - step;
        if (p0 < -1e-12 * p_max_mw) {
            AllocationResult out;
            out.p = VecD::Zero(rows.empty() ? 1 : rows.front().rho_sq.size());
            out.status = AllocStatus::infeasible;
            out.iterations = iters;
            return out;
        }
        p0 = std::max(p0, 0.0);
        last = solve_pa(rows, p0);
        ++iters;
        p_sum = last.status == AllocStatus::optimal ? last.p.sum()
                                                    : std::numeric_limits<double>::infinity();
        p0_prev = p0;
    }
    last.iterations = iters;
    return last;
}

GridUpperBound grid_upper_bound(const std::vector<QosRow>& rows, double p_max_mw, int grid_points,
                                const std::function<double(const VecD&)>& pd_of_p) {
    if (grid_points < 2) throw std::invalid_argument("grid_upper_bound: need at least 2 grid points");
    GridUpperBound best;
    best.pd_star = -1.0;
    for (int g = 0; g < grid_points; ++g) {
        double p0 = p_max_mw * g / (grid_points - 1);
        AllocationResult r = solve_pa(rows, p0);
        if (r.status != AllocStatus::optimal) continue;
        if (r.p.sum() > p_max_mw * (1.0 + 1e-9)) continue;
        ++best.feasible_points;
        double pd = pd_of_p(r.p);
        if (pd > best.pd_star) {
            best.pd_star = pd;
            best.p0_star = p0;
            best.p_star = r.p;
        }
    }
    return best;
}

std::vector<StepStat> stepsize_tradeoff(const std::vector<QosRow>& rows, double p_max_mw,
                                        const std::vector<double>& steps,
                                        const std::function<double(const VecD&)>& rho_total_of_p) {
    std::vector<StepStat> out;
    out.reserve(steps.size());
    for (double step : steps) {
        StepStat st;
        st.step_frac = step;
        auto t0 = std::chrono::steady_clock::now();
        AllocationResult r = algorithm1(rows, p_max_mw, step);
        auto t1 = std::chrono::steady_clock::now();
        st.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        st.iterations = r.iterations;
        st.status = r.status;
        st.rho_total_db = r.status == AllocStatus::optimal ? linear_to_db(rho_total_of_p(r.p))
                                                           : std::numeric_limits<double>::quiet_NaN();
        out.push_back(st);
    }
    return out;
}

} // namespace iaps
