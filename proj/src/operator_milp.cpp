#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "islanding/oracles.hpp"

namespace islanding {

namespace {

using milp::ConstraintSense;
using milp::LinearTerm;
using milp::MilpModel;
using milp::VariableRef;

struct BestResponseModel {
    MilpModel model;
    // fixed_island[i] >= 0 pins substation i to that island (coherent groups)
    std::vector<int> fixed_island;
    // assign[i][k]: x variable, invalid when pinned
    std::vector<std::vector<VariableRef>> assign;
    // membership[e][k]: w variable, invalid when the line cannot join island k
    std::vector<std::vector<VariableRef>> membership;
    std::vector<char> live;  // line can still be kept
    std::vector<VariableRef> dispatch;   // per substation, invalid without a generator
    std::vector<VariableRef> angle;      // per substation
    std::vector<VariableRef> post_flow;  // per line, invalid when dead
};

// z^o_e as a linear expression: the sum of the line's membership variables.
std::vector<LinearTerm> kept_expression(const BestResponseModel& built, int e,
                                        double coefficient) {
    std::vector<LinearTerm> terms;
    for (const auto& var : built.membership[e])
        if (var.valid()) terms.push_back({var, coefficient});
    return terms;
}

BestResponseModel build_best_response(const PowerNetwork& network,
                                      const CoherencyConfig& coherency,
                                      const FlowState& flows,
                                      const AdversaryAction& adversary) {
    const int n = network.substation_count();
    const int L = network.line_count();
    const int K = coherency.group_count();

    BestResponseModel built;
    built.fixed_island.assign(n, -1);
    for (int k = 0; k < K; ++k)
        for (int id : coherency.groups[k])
            built.fixed_island[network.substation_index(id)] = k;

    std::vector<char> adversary_tripped(L, 0);
    for (int e : adversary.tripped) adversary_tripped[e] = 1;

    // a substation can join island k unless it is pinned elsewhere
    auto may_join = [&](int i, int k) {
        return built.fixed_island[i] < 0 || built.fixed_island[i] == k;
    };

    built.live.assign(L, 0);
    for (int e = 0; e < L; ++e) {
        if (adversary_tripped[e]) continue;
        int i = network.line_from_index(e);
        int j = network.line_to_index(e);
        for (int k = 0; k < K; ++k)
            if (may_join(i, k) && may_join(j, k)) built.live[e] = 1;
    }

    MilpModel& model = built.model;

    // island assignment binaries first: branching prefers them on ties
    built.assign.assign(n, std::vector<VariableRef>(K));
    for (int i = 0; i < n; ++i) {
        if (built.fixed_island[i] >= 0) continue;
        for (int k = 0; k < K; ++k)
            built.assign[i][k] = model.add_binary(
                "x_" + std::to_string(network.substation_id(i)) + "_" + std::to_string(k));
    }

    built.membership.assign(L, std::vector<VariableRef>(K));
    for (int e = 0; e < L; ++e) {
        if (!built.live[e]) continue;
        int i = network.line_from_index(e);
        int j = network.line_to_index(e);
        for (int k = 0; k < K; ++k) {
            if (!may_join(i, k) || !may_join(j, k)) continue;
            built.membership[e][k] =
                model.add_binary("w_" + std::to_string(e) + "_" + std::to_string(k));
        }
    }

    Eigen::VectorXd gen_min = network.aggregate_gen_min();
    Eigen::VectorXd gen_max = network.aggregate_gen_max();
    built.dispatch.assign(n, VariableRef{});
    built.angle.assign(n, VariableRef{});
    for (int i = 0; i < n; ++i) {
        if (network.hosts_generator(i))
            built.dispatch[i] = model.add_continuous(
                gen_min[i], gen_max[i], "g_" + std::to_string(network.substation_id(i)));
        built.angle[i] = model.add_continuous(
            network.substations()[i].angle_min_rad, network.substations()[i].angle_max_rad,
            "theta_" + std::to_string(network.substation_id(i)));
    }

    built.post_flow.assign(L, VariableRef{});
    for (int e = 0; e < L; ++e)
        if (built.live[e])
            built.post_flow[e] = model.add_continuous(network.lines()[e].flow_min_mw,
                                                      network.lines()[e].flow_max_mw,
                                                      "flow_" + std::to_string(e));

    const double connectivity_big_m = static_cast<double>(n);
    // f_{i,j,k}: directed connectivity flow, one pair per live line and island
    std::vector<std::vector<std::vector<VariableRef>>> aux_flow(
        L, std::vector<std::vector<VariableRef>>(2, std::vector<VariableRef>(K)));
    for (int e = 0; e < L; ++e) {
        if (!built.live[e]) continue;
        for (int d = 0; d < 2; ++d)
            for (int k = 0; k < K; ++k)
                aux_flow[e][d][k] = model.add_continuous(
                    0.0, connectivity_big_m,
                    "f_" + std::to_string(e) + "_" + std::to_string(d) + "_" +
                        std::to_string(k));
    }

    // each free substation joins at most one island
    for (int i = 0; i < n; ++i) {
        if (built.fixed_island[i] >= 0) continue;
        std::vector<LinearTerm> row;
        for (int k = 0; k < K; ++k) row.push_back({built.assign[i][k], 1.0});
        model.add_constraint(row, ConstraintSense::LessEqual, 1.0);
    }

    // a line joins island k only when both endpoints do
    for (int e = 0; e < L; ++e) {
        if (!built.live[e]) continue;
        int i = network.line_from_index(e);
        int j = network.line_to_index(e);
        for (int k = 0; k < K; ++k) {
            const VariableRef w = built.membership[e][k];
            if (!w.valid()) continue;
            if (built.fixed_island[i] < 0)
                model.add_constraint({{w, 1.0}, {built.assign[i][k], -1.0}},
                                     ConstraintSense::LessEqual, 0.0);
            if (built.fixed_island[j] < 0)
                model.add_constraint({{w, 1.0}, {built.assign[j][k], -1.0}},
                                     ConstraintSense::LessEqual, 0.0);
        }
    }

    // partition consistency: a kept line forbids island-membership asymmetry
    // between its endpoints (binary-equivalent tightening of the LP bound)
    for (int e = 0; e < L; ++e) {
        if (!built.live[e]) continue;
        int ends[2] = {network.line_from_index(e), network.line_to_index(e)};
        for (int side = 0; side < 2; ++side) {
            int i = ends[side], j = ends[1 - side];
            for (int k = 0; k < K; ++k) {
                int fi = built.fixed_island[i], fj = built.fixed_island[j];
                bool i_is_one = fi == k, i_is_zero = fi >= 0 && fi != k;
                if (i_is_zero) continue;  // row is dominated by z <= 1
                std::vector<LinearTerm> row = kept_expression(built, e, 1.0);
                double rhs = 1.0;
                int endpoint_terms = 0;
                if (i_is_one) {
                    rhs -= 1.0;
                } else {
                    row.push_back({built.assign[i][k], 1.0});
                    ++endpoint_terms;
                }
                if (fj == k) {
                    rhs += 1.0;
                } else if (fj < 0) {
                    row.push_back({built.assign[j][k], -1.0});
                    ++endpoint_terms;
                }
                if (rhs >= 2.0) continue;                      // cannot bind
                if (endpoint_terms == 0 && rhs >= 1.0) continue;  // implied z <= 1
                model.add_constraint(row, ConstraintSense::LessEqual, rhs);
            }
        }
    }

    // connectivity flow: capacity tied to the line being kept at all
    for (int e = 0; e < L; ++e) {
        if (!built.live[e]) continue;
        for (int d = 0; d < 2; ++d) {
            for (int k = 0; k < K; ++k) {
                std::vector<LinearTerm> row = kept_expression(built, e, -connectivity_big_m);
                row.push_back({aux_flow[e][d][k], 1.0});
                model.add_constraint(row, ConstraintSense::LessEqual, 0.0);
            }
        }
    }

    // connectivity flow conservation: the island reference sources one unit
    // per member; every member consumes one
    for (int k = 0; k < K; ++k) {
        const int ref = network.substation_index(coherency.reference_generator[k]);
        for (int i = 0; i < n; ++i) {
            std::vector<LinearTerm> row;
            double rhs = 0.0;
            if (i == ref) {
                // source term: the island population
                for (int jj = 0; jj < n; ++jj) {
                    if (built.fixed_island[jj] >= 0) {
                        if (built.fixed_island[jj] == k) rhs -= 1.0;
                    } else {
                        row.push_back({built.assign[jj][k], 1.0});
                    }
                }
            }
            if (built.fixed_island[i] >= 0) {
                if (built.fixed_island[i] == k) rhs += 1.0;
            } else {
                row.push_back({built.assign[i][k], -1.0});
            }
            for (int e : network.incident_line_indices(i)) {
                if (!built.live[e]) continue;
                const bool is_from = network.line_from_index(e) == i;
                // direction 0 runs from->to, direction 1 runs to->from
                const VariableRef incoming = is_from ? aux_flow[e][1][k] : aux_flow[e][0][k];
                const VariableRef outgoing = is_from ? aux_flow[e][0][k] : aux_flow[e][1][k];
                row.push_back({incoming, 1.0});
                row.push_back({outgoing, -1.0});
            }
            if (row.empty() && rhs == 0.0) continue;
            model.add_constraint(row, ConstraintSense::Equal, rhs);
        }
    }

    // DC flow holds on kept lines; relaxed via a per-line big-M otherwise
    const double theta_span = [&] {
        double lo = network.substations()[0].angle_min_rad;
        double hi = network.substations()[0].angle_max_rad;
        for (const auto& s : network.substations()) {
            lo = std::min(lo, s.angle_min_rad);
            hi = std::max(hi, s.angle_max_rad);
        }
        return hi - lo;
    }();
    for (int e = 0; e < L; ++e) {
        if (!built.live[e]) continue;
        int i = network.line_from_index(e);
        int j = network.line_to_index(e);
        const double susceptance_mw = network.base_mva() * network.lines()[e].susceptance_pu;
        const double big_m = susceptance_mw * theta_span;

        std::vector<LinearTerm> upper = kept_expression(built, e, big_m);
        upper.push_back({built.angle[i], susceptance_mw});
        upper.push_back({built.angle[j], -susceptance_mw});
        upper.push_back({built.post_flow[e], -1.0});
        model.add_constraint(upper, ConstraintSense::LessEqual, big_m);

        std::vector<LinearTerm> lower = kept_expression(built, e, -big_m);
        lower.push_back({built.angle[i], susceptance_mw});
        lower.push_back({built.angle[j], -susceptance_mw});
        lower.push_back({built.post_flow[e], -1.0});
        model.add_constraint(lower, ConstraintSense::GreaterEqual, -big_m);

        // tripped lines carry no flow; kept lines respect their capacity
        std::vector<LinearTerm> cap_hi = kept_expression(built, e,
                                                         -network.lines()[e].flow_max_mw);
        cap_hi.push_back({built.post_flow[e], 1.0});
        model.add_constraint(cap_hi, ConstraintSense::LessEqual, 0.0);

        std::vector<LinearTerm> cap_lo = kept_expression(built, e,
                                                         -network.lines()[e].flow_min_mw);
        cap_lo.push_back({built.post_flow[e], 1.0});
        model.add_constraint(cap_lo, ConstraintSense::GreaterEqual, 0.0);
    }

    // post-islanding power balance at every substation
    for (int i = 0; i < n; ++i) {
        std::vector<LinearTerm> row;
        for (int e : network.incident_line_indices(i)) {
            if (!built.live[e]) continue;
            const double sign = network.line_to_index(e) == i ? 1.0 : -1.0;
            row.push_back({built.post_flow[e], sign});
        }
        if (built.dispatch[i].valid()) row.push_back({built.dispatch[i], 1.0});
        model.add_constraint(row, ConstraintSense::Equal,
                             network.substations()[i].load_mw);
    }

    // minimize the weight of lines that end up tripped by anyone
    double constant = 0.0;
    std::vector<LinearTerm> objective;
    for (int e = 0; e < L; ++e) {
        const double weight = line_weight(network, flows, e);
        constant += weight;
        if (!built.live[e]) continue;
        for (const auto& term : kept_expression(built, e, -weight))
            objective.push_back(term);
    }
    model.set_objective(objective, milp::ObjectiveSense::Minimize, constant);
    return built;
}

}  // namespace

OperatorAction operator_best_response(const PowerNetwork& network,
                                      const CoherencyConfig& coherency,
                                      const FlowState& flows,
                                      const AdversaryAction& adversary,
                                      const OracleOptions& options) {
    validate_coherency(network, coherency);
    {
        auto attack_violations =
            validate_adversary_action(network, adversary, network.substation_count());
        if (!attack_violations.empty())
            throw MalformedCase("improper adversary action: " + attack_violations.front());
    }

    BestResponseModel built = build_best_response(network, coherency, flows, adversary);
    milp::MilpSolution solution = milp::solve(built.model, options.limits);
    if (solution.status == milp::SolveStatus::Infeasible)
        throw InfeasiblePartition(
            "no proper islanding exists against the given adversary action");
    if (solution.status != milp::SolveStatus::Optimal)
        throw SolverFailure("operator best response returned " +
                            milp::to_string(solution.status));

    const int n = network.substation_count();
    const int L = network.line_count();
    const int K = coherency.group_count();

    OperatorAction action;
    action.island_of_substation.assign(n, -1);
    for (int i = 0; i < n; ++i) {
        if (built.fixed_island[i] >= 0) {
            action.island_of_substation[i] = built.fixed_island[i];
            continue;
        }
        for (int k = 0; k < K; ++k)
            if (built.assign[i][k].valid() && solution.value(built.assign[i][k]) > 0.5)
                action.island_of_substation[i] = k;
    }
    action.island_of_line.assign(L, -1);
    action.kept.assign(L, 0);
    for (int e = 0; e < L; ++e) {
        for (int k = 0; k < K; ++k) {
            const VariableRef w = built.membership[e][k];
            if (w.valid() && solution.value(w) > 0.5) {
                action.island_of_line[e] = k;
                action.kept[e] = 1;
            }
        }
    }
    action.dispatch_mw = Eigen::VectorXd::Zero(n);
    action.angle_rad = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        if (built.dispatch[i].valid())
            action.dispatch_mw[i] = solution.value(built.dispatch[i]);
        action.angle_rad[i] = solution.value(built.angle[i]);
    }
    action.post_flow_mw = Eigen::VectorXd::Zero(L);
    for (int e = 0; e < L; ++e)
        if (action.kept[e]) action.post_flow_mw[e] = solution.value(built.post_flow[e]);
    action.responded_to = adversary;
    return action;
}

}  // namespace islanding
