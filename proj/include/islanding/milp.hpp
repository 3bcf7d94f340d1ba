#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "islanding/errors.hpp"

namespace islanding::milp {

enum class VarKind { Continuous, Binary };

struct VariableRef {
    int index = -1;
    bool valid() const { return index >= 0; }
};

struct LinearTerm {
    VariableRef var;
    double coefficient = 0.0;
};

enum class ConstraintSense { LessEqual, Equal, GreaterEqual };

struct LinearConstraint {
    std::vector<LinearTerm> terms;  // normalized: ascending index, merged duplicates
    ConstraintSense sense = ConstraintSense::LessEqual;
    double rhs = 0.0;
};

enum class ObjectiveSense { Minimize, Maximize };

// Declarative MILP description. Variables are registered first; constraints
// and the objective may only reference registered handles.
class MilpModel {
public:
    VariableRef add_variable(VarKind kind, double lower, double upper,
                             std::string name = "");
    VariableRef add_continuous(double lower, double upper, std::string name = "") {
        return add_variable(VarKind::Continuous, lower, upper, std::move(name));
    }
    VariableRef add_binary(std::string name = "") {
        return add_variable(VarKind::Binary, 0.0, 1.0, std::move(name));
    }

    // Tightens a variable to a single value (within its declared bounds).
    void fix(VariableRef var, double value);
    void set_bounds(VariableRef var, double lower, double upper);

    void add_constraint(std::vector<LinearTerm> terms, ConstraintSense sense, double rhs);
    void set_objective(std::vector<LinearTerm> terms, ObjectiveSense sense,
                       double constant = 0.0);

    int variable_count() const { return static_cast<int>(kinds_.size()); }
    int constraint_count() const { return static_cast<int>(constraints_.size()); }
    VarKind kind(VariableRef v) const { return kinds_[check(v)]; }
    double lower(VariableRef v) const { return lowers_[check(v)]; }
    double upper(VariableRef v) const { return uppers_[check(v)]; }
    const std::string& name(VariableRef v) const { return names_[check(v)]; }
    const std::vector<LinearConstraint>& constraints() const { return constraints_; }
    const std::vector<LinearTerm>& objective_terms() const { return objective_; }
    ObjectiveSense objective_sense() const { return sense_; }
    double objective_constant() const { return objective_constant_; }

    std::vector<int> binary_indices() const;

private:
    int check(VariableRef v) const;
    std::vector<LinearTerm> normalize(std::vector<LinearTerm> terms) const;

    std::vector<VarKind> kinds_;
    std::vector<double> lowers_, uppers_;
    std::vector<std::string> names_;
    std::vector<LinearConstraint> constraints_;
    std::vector<LinearTerm> objective_;
    ObjectiveSense sense_ = ObjectiveSense::Minimize;
    double objective_constant_ = 0.0;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit };

std::string to_string(SolveStatus status);

struct MilpSolution {
    SolveStatus status = SolveStatus::Infeasible;
    double objective_value = 0.0;
    Eigen::VectorXd assignment;  // per variable index; binaries rounded
    long nodes_explored = 0;
    long simplex_iterations = 0;
    // (global lower bound, incumbent) samples, recorded when requested.
    std::vector<std::pair<double, double>> bound_trace;

    double value(VariableRef v) const { return assignment[v.index]; }
};

struct SolveLimits {
    long max_nodes = 2'000'000;
    long max_lp_iterations = 200'000;  // per LP solve
    bool record_bound_trace = false;
    // Optional feasible assignment used as the initial incumbent. Ignored
    // (with no error) if it fails certification.
    std::optional<Eigen::VectorXd> warm_start;
};

// Exhaustive LP-based branch and bound over the binary variables.
// Deterministic: identical inputs give bit-identical outputs.
MilpSolution solve(const MilpModel& model, const SolveLimits& limits = {});

// Same model with binary kinds relaxed to continuous [0,1].
MilpSolution solve_lp_relaxation(const MilpModel& model, const SolveLimits& limits = {});

// Re-checks an assignment against bounds, integrality and all constraints.
// Returns human-readable violation descriptions; empty means certified.
std::vector<std::string> certify_solution(const MilpModel& model,
                                          const Eigen::VectorXd& assignment,
                                          double feasibility_tol = 1e-7,
                                          double integrality_tol = 1e-6);

// Line-oriented LP-format dump for cross-checking against external solvers.
void write_lp_format(const MilpModel& model, std::ostream& out);

// Backend contract: an implementation (in-process or out-of-process) that
// solves models built through MilpModel. Results must pass certify_solution.
class MilpBackend {
public:
    virtual ~MilpBackend() = default;
    virtual MilpSolution solve(const MilpModel& model, const SolveLimits& limits) = 0;
};

class BranchAndBoundBackend final : public MilpBackend {
public:
    MilpSolution solve(const MilpModel& model, const SolveLimits& limits) override;
};

}  // namespace islanding::milp
