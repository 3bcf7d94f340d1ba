#pragma once

#include <Eigen/Dense>
#include <vector>

#include "islanding/milp.hpp"

namespace islanding::milp::detail {

// Computational form: min cost'x  s.t.  A x = b,  lower <= x <= upper.
// Columns: [0, n_struct) structural, [n_struct, n_struct+m) slacks,
// [n_struct+m, n_struct+2m) artificials (phase-1 only, fixed to 0 afterwards).
struct StandardForm {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    Eigen::VectorXd cost;  // minimization sense
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    int m = 0;
    int n_struct = 0;

    int n_total() const { return n_struct + 2 * m; }
    int slack_begin() const { return n_struct; }
    int artificial_begin() const { return n_struct + m; }
};

// Builds the computational form; a Maximize objective is negated
// (flip the sign of the optimal value to recover the model objective).
StandardForm build_standard_form(const MilpModel& model);

enum class VarStatus : unsigned char { Basic, AtLower, AtUpper, Free };

struct Basis {
    std::vector<int> basic;           // m entries
    std::vector<VarStatus> status;    // n_total entries
    bool empty() const { return basic.empty(); }
};

enum class LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    Numerical,  // warm start failed; retry cold
};

struct LpResult {
    LpStatus status = LpStatus::Numerical;
    double objective = 0.0;  // cost'x in minimization sense, no constant
    Eigen::VectorXd x;       // full column vector (n_total)
    Basis basis;
    long iterations = 0;
};

// Two-phase primal simplex from scratch.
LpResult solve_lp_cold(const StandardForm& sf, long iteration_limit);

// Re-optimizes after bound changes starting from a previously optimal basis
// (dual simplex). Returns Numerical when the start basis cannot be used;
// the caller should fall back to solve_lp_cold.
LpResult solve_lp_warm(const StandardForm& sf, const Basis& start, long iteration_limit);

}  // namespace islanding::milp::detail
