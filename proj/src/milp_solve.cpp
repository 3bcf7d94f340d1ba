#include <cmath>
#include <limits>
#include <memory>
#include <queue>
#include <sstream>
#include <vector>

#include "islanding/milp.hpp"
#include "simplex.hpp"

namespace islanding::milp {

namespace {

constexpr double kIntegralityTol = 1e-6;
constexpr double kExactIntegral = 1e-12;
constexpr double kPruneTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

double model_objective(const MilpModel& model, const Eigen::VectorXd& x) {
    double v = model.objective_constant();
    for (const auto& t : model.objective_terms()) v += t.coefficient * x[t.var.index];
    return v;
}

struct Node {
    double bound = -kInf;  // inherited LP bound (minimization sense)
    long seq = 0;
    std::vector<std::pair<int, signed char>> fixings;  // binary index -> value
    std::shared_ptr<const detail::Basis> parent_basis;
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;  // smallest bound first
        return a.seq > b.seq;                              // then insertion order
    }
};

void throw_if_uncertified(const MilpModel& model, const Eigen::VectorXd& assignment) {
    auto violations = certify_solution(model, assignment);
    if (!violations.empty()) {
        std::ostringstream msg;
        msg << "solution failed feasibility certification:";
        for (const auto& v : violations) msg << "\n  " << v;
        throw SimplexNumericalError(msg.str());
    }
}

MilpSolution finish_lp_only(const MilpModel& model, const detail::LpResult& lp,
                            bool certify) {
    MilpSolution out;
    out.simplex_iterations = lp.iterations;
    out.nodes_explored = 1;
    switch (lp.status) {
        case detail::LpStatus::Optimal: out.status = SolveStatus::Optimal; break;
        case detail::LpStatus::Infeasible: out.status = SolveStatus::Infeasible; break;
        case detail::LpStatus::Unbounded: out.status = SolveStatus::Unbounded; break;
        case detail::LpStatus::IterationLimit:
            out.status = SolveStatus::IterationLimit;
            break;
        case detail::LpStatus::Numerical:
            throw SimplexNumericalError("simplex failed to converge from a cold start");
    }
    if (out.status == SolveStatus::Optimal) {
        out.assignment = lp.x.head(model.variable_count());
        out.objective_value = model_objective(model, out.assignment);
        if (certify) throw_if_uncertified(model, out.assignment);
    }
    return out;
}

}  // namespace

MilpSolution solve_lp_relaxation(const MilpModel& model, const SolveLimits& limits) {
    detail::StandardForm sf = detail::build_standard_form(model);
    detail::LpResult lp = detail::solve_lp_cold(sf, limits.max_lp_iterations);
    MilpSolution out = finish_lp_only(model, lp, false);
    if (out.status == SolveStatus::Optimal) {
        auto violations = certify_solution(model, out.assignment, 1e-7, kInf);
        if (!violations.empty())
            throw SimplexNumericalError("LP relaxation failed certification: " +
                                        violations.front());
    }
    return out;
}

MilpSolution solve(const MilpModel& model, const SolveLimits& limits) {
    detail::StandardForm sf = detail::build_standard_form(model);
    const std::vector<int> binaries = model.binary_indices();

    if (binaries.empty()) {
        detail::LpResult lp = detail::solve_lp_cold(sf, limits.max_lp_iterations);
        return finish_lp_only(model, lp, true);
    }

    // minimization-internal incumbent (structural costs only, no constant)
    double incumbent_obj = kInf;
    Eigen::VectorXd incumbent_x;
    bool have_incumbent = false;

    MilpSolution out;

    if (limits.warm_start && limits.warm_start->size() == model.variable_count()) {
        if (certify_solution(model, *limits.warm_start).empty()) {
            incumbent_x = *limits.warm_start;
            for (int b : binaries) incumbent_x[b] = std::round(incumbent_x[b]);
            incumbent_obj = sf.cost.head(sf.n_struct).dot(incumbent_x);
            have_incumbent = true;
        }
    }

    const Eigen::VectorXd base_lower = sf.lower;
    const Eigen::VectorXd base_upper = sf.upper;
    auto apply_fixings = [&](const std::vector<std::pair<int, signed char>>& fixings) {
        for (int b : binaries) {
            sf.lower[b] = base_lower[b];
            sf.upper[b] = base_upper[b];
        }
        for (auto [var, value] : fixings) {
            sf.lower[var] = value;
            sf.upper[var] = value;
        }
    };

    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    open.push(Node{});
    long seq = 1;
    long nodes = 0;
    bool hit_node_limit = false;

    while (!open.empty()) {
        Node node = open.top();
        open.pop();
        if (have_incumbent && node.bound >= incumbent_obj - kPruneTol) continue;
        if (nodes >= limits.max_nodes) {
            hit_node_limit = true;
            break;
        }
        ++nodes;

        apply_fixings(node.fixings);

        detail::LpResult lp;
        if (node.parent_basis) {
            lp = detail::solve_lp_warm(sf, *node.parent_basis, limits.max_lp_iterations);
            if (lp.status == detail::LpStatus::Numerical ||
                lp.status == detail::LpStatus::IterationLimit)
                lp = detail::solve_lp_cold(sf, limits.max_lp_iterations);
        } else {
            lp = detail::solve_lp_cold(sf, limits.max_lp_iterations);
        }
        out.simplex_iterations += lp.iterations;

        if (lp.status == detail::LpStatus::Infeasible) continue;
        if (lp.status == detail::LpStatus::Unbounded) {
            out.status = SolveStatus::Unbounded;
            out.nodes_explored = nodes;
            return out;
        }
        if (lp.status == detail::LpStatus::IterationLimit) {
            hit_node_limit = true;
            break;
        }
        if (lp.status == detail::LpStatus::Numerical)
            throw SimplexNumericalError("simplex failed to converge from a cold start");

        const double bound = lp.objective;
        if (limits.record_bound_trace) {
            double global_lb = open.empty() ? bound : std::min(bound, open.top().bound);
            out.bound_trace.emplace_back(global_lb,
                                         have_incumbent ? incumbent_obj : kInf);
        }
        if (have_incumbent && bound >= incumbent_obj - kPruneTol) continue;

        // most fractional binary, ties to the lowest index
        int branch_var = -1;
        double worst_frac = 0.0;
        for (int b : binaries) {
            double frac = std::abs(lp.x[b] - std::round(lp.x[b]));
            if (frac > worst_frac + 1e-12) {
                worst_frac = frac;
                branch_var = b;
            }
        }

        if (worst_frac <= kIntegralityTol) {
            Eigen::VectorXd candidate;
            double candidate_obj = 0.0;
            bool candidate_ok = false;
            if (worst_frac <= kExactIntegral) {
                candidate = lp.x.head(sf.n_struct);
                candidate_obj = bound;
                candidate_ok = true;
            } else {
                // re-solve with the binaries pinned at their rounded values so the
                // continuous part is consistent with the reported integer point
                for (int b : binaries) {
                    double v = std::round(lp.x[b]);
                    sf.lower[b] = v;
                    sf.upper[b] = v;
                }
                detail::LpResult completion =
                    detail::solve_lp_warm(sf, lp.basis, limits.max_lp_iterations);
                if (completion.status == detail::LpStatus::Numerical)
                    completion = detail::solve_lp_cold(sf, limits.max_lp_iterations);
                out.simplex_iterations += completion.iterations;
                if (completion.status == detail::LpStatus::Optimal) {
                    candidate = completion.x.head(sf.n_struct);
                    candidate_obj = completion.objective;
                    candidate_ok = true;
                }
            }
            if (candidate_ok) {
                for (int b : binaries) candidate[b] = std::round(candidate[b]);
                if (!have_incumbent || candidate_obj < incumbent_obj - 1e-12) {
                    incumbent_obj = candidate_obj;
                    incumbent_x = candidate;
                    have_incumbent = true;
                }
                continue;
            }
            // completion infeasible: the near-integral point is not genuinely
            // feasible, so branch on the least integral binary anyway
            for (int b : binaries) {
                double frac = std::abs(lp.x[b] - std::round(lp.x[b]));
                if (frac > worst_frac + 1e-15) {
                    worst_frac = frac;
                    branch_var = b;
                }
            }
            if (branch_var < 0) branch_var = binaries.front();
        }

        auto basis = std::make_shared<const detail::Basis>(std::move(lp.basis));
        for (signed char value : {0, 1}) {
            Node child;
            child.bound = bound;
            child.seq = seq++;
            child.fixings = node.fixings;
            child.fixings.emplace_back(branch_var, value);
            child.parent_basis = basis;
            open.push(std::move(child));
        }
    }

    out.nodes_explored = nodes;
    if (hit_node_limit)
        out.status = SolveStatus::IterationLimit;
    else
        out.status = have_incumbent ? SolveStatus::Optimal : SolveStatus::Infeasible;

    if (have_incumbent) {
        out.assignment = incumbent_x;
        out.objective_value = model_objective(model, out.assignment);
        if (out.status == SolveStatus::Optimal)
            throw_if_uncertified(model, out.assignment);
    }
    return out;
}

MilpSolution BranchAndBoundBackend::solve(const MilpModel& model,
                                          const SolveLimits& limits) {
    return milp::solve(model, limits);
}

}  // namespace islanding::milp
