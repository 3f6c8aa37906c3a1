#pragma once

#include "iaps/types.hpp"

#include <iosfwd>
#include <string>

namespace iaps {

enum class LpStatus { optimal, infeasible, unbounded, degenerate };

struct LpResult {
    VecD x;
    double objective = 0.0;
    LpStatus status = LpStatus::degenerate;
    int iterations = 0;
};

// min c'x subject to A x <= b, x >= 0.
// Dense two-phase tableau simplex with Bland's rule (deterministic).
// Rows are equilibrated internally; negative right-hand sides are handled by
// phase-1 artificials.
LpResult solve_lp_min(const VecD& c, const MatD& A, const VecD& b);

// Plain-text serialization of an LP instance for offline debugging.
// Format: header line "iaps-lp 1", then "n m", the n objective coefficients,
// m rows of n matrix coefficients, and the m right-hand sides.
void lp_to_text(const VecD& c, const MatD& A, const VecD& b, std::ostream& out);
void lp_from_text(std::istream& in, VecD& c, MatD& A, VecD& b);

} // namespace iaps
