#pragma once

#include "iaps/simplex.hpp"
#include "iaps/types.hpp"

#include <functional>
#include <vector>

namespace iaps {

// One per-UE QoS constraint in squared form:
//   sum_{j != k} rho_sq[j] p_j + sigma_nc2 <= p_k rho_sq[k] / gamma_lin,
// equivalent to the second-order-cone form because both sides are nonnegative.
struct QosRow {
    int k = 0;      // UE index, 1-based; rho_sq index 0 is the sensing stream
    VecD rho_sq;    // |h_k^H w_j|^2 for j = 0..K
    double gamma_lin = 1.0;
    double sigma_nc2 = 0.0;
    bool feasible = true; // false when the own-gain vanishes

    // constraint slack at p (>= 0 when satisfied)
    double slack(const VecD& p) const;
};

std::vector<QosRow> build_qos_rows(const MatC& H, const MatC& w_tilde, double gamma_db,
                                   double sigma_nc2);

enum class AllocStatus { optimal, infeasible, degenerate };

struct AllocationResult {
    VecD p;                 // K+1 stream powers, mW (index 0 = sensing)
    AllocStatus status = AllocStatus::degenerate;
    double objective = 0.0; // P2: sum c_k p_k; PA: sum_{k>=1} p_k
    VecD slacks;            // per-QoS-row slack, then the budget slack
    double gap = 0.0;       // relative duality gap certificate
    int iterations = 0;
};

// P2: maximize sum_k c_k p_k subject to the QoS rows, ||p||_1 <= p_max, p >= 0.
// Solved as a linear program (the rows are linear in p after squaring).
// with_sensing = false pins p_0 = 0 and drops the sensing objective term.
AllocationResult solve_p2(const std::vector<QosRow>& rows, const VecD& c, double p_max_mw,
                          bool with_sensing = true);

// Inner problem of the heuristic: minimize sum_{k>=1} p_k under the QoS rows
// with p_0 held fixed.
AllocationResult solve_pa(const std::vector<QosRow>& rows, double p0_fixed);

// Heuristic power allocation: start p0' = P_max, decrement by
// step_frac * P_max, solve the minimum-power inner problem, stop at the first
// iterate with ||p||_1 <= P_max.
AllocationResult algorithm1(const std::vector<QosRow>& rows, double p_max_mw, double step_frac);

struct GridUpperBound {
    double p0_star = 0.0;
    VecD p_star;
    double pd_star = 0.0;
    int feasible_points = 0;
};

// Exhaustive search over p_0 on a uniform grid; the objective callback maps a
// full power vector to the figure of merit (average detection probability).
GridUpperBound grid_upper_bound(const std::vector<QosRow>& rows, double p_max_mw, int grid_points,
                                const std::function<double(const VecD&)>& pd_of_p);

struct StepStat {
    double step_frac = 0.0;
    int iterations = 0;
    double wall_ms = 0.0;
    double rho_total_db = 0.0;
    AllocStatus status = AllocStatus::degenerate;
};

std::vector<StepStat> stepsize_tradeoff(const std::vector<QosRow>& rows, double p_max_mw,
                                        const std::vector<double>& steps,
                                        const std::function<double(const VecD&)>& rho_total_of_p);

} // namespace iaps
