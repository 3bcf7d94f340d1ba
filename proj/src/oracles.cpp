#include "islanding/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

namespace islanding {

namespace {

// Probability that each line is kept by the operator under the mixed strategy.
Eigen::VectorXd keep_probability(const PowerNetwork& network,
                                 const OperatorMixedStrategy& mixed) {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(network.line_count());
    for (const auto& [action, prob] : mixed.support)
        for (int e = 0; e < network.line_count(); ++e)
            if (action.kept[e]) m[e] += prob;
    return m;
}

void check_budget(const PowerNetwork& network, int budget) {
    if (budget < 0 || budget > network.substation_count())
        throw MalformedCase("adversary budget " + std::to_string(budget) +
                            " outside [0, " + std::to_string(network.substation_count()) +
                            "]");
}

}  // namespace

std::vector<int> OperatorAction::tripped_lines() const {
    std::vector<int> out;
    for (int e = 0; e < static_cast<int>(kept.size()); ++e)
        if (!kept[e]) out.push_back(e);
    return out;
}

AdversaryAction make_canonical_adversary(const PowerNetwork& network,
                                         std::vector<int> compromised_ids) {
    std::sort(compromised_ids.begin(), compromised_ids.end());
    compromised_ids.erase(std::unique(compromised_ids.begin(), compromised_ids.end()),
                          compromised_ids.end());
    AdversaryAction action;
    action.tripped = incident_lines(network, compromised_ids);
    action.compromised_ids = std::move(compromised_ids);
    return action;
}

std::vector<std::string> validate_adversary_action(const PowerNetwork& network,
                                                   const AdversaryAction& action,
                                                   int budget) {
    std::vector<std::string> violations;
    if (static_cast<int>(action.compromised_ids.size()) > budget)
        violations.push_back("condition (i): " +
                             std::to_string(action.compromised_ids.size()) +
                             " compromised substations exceed budget " +
                             std::to_string(budget));
    std::vector<int> reachable = incident_lines(network, action.compromised_ids);
    std::set<int> allowed(reachable.begin(), reachable.end());
    for (int e : action.tripped) {
        if (e < 0 || e >= network.line_count())
            throw UnknownLine("tripped line index " + std::to_string(e) + " out of range");
        if (!allowed.count(e)) {
            const auto& line = network.lines()[e];
            violations.push_back("condition (ii): tripped line (" +
                                 std::to_string(line.from_id) + "," +
                                 std::to_string(line.to_id) +
                                 ") touches no compromised substation");
        }
    }
    return violations;
}

OperatorAction intact_operator_action(const PowerNetwork& network, const FlowState& flows) {
    OperatorAction action;
    action.island_of_substation.assign(network.substation_count(), 0);
    action.island_of_line.assign(network.line_count(), 0);
    action.kept.assign(network.line_count(), 1);
    action.dispatch_mw = flows.dispatch_mw;
    action.angle_rad = flows.angle_rad;
    action.post_flow_mw = flows.line_flow_mw;
    return action;
}

OperatorMixedStrategy pure_strategy(OperatorAction action) {
    OperatorMixedStrategy mixed;
    mixed.support.emplace_back(std::move(action), 1.0);
    return mixed;
}

void validate_mixed_strategy(const OperatorMixedStrategy& mixed) {
    if (mixed.support.empty()) throw MalformedCase("mixed strategy has empty support");
    double total = 0.0;
    std::set<std::vector<char>> seen;
    for (const auto& [action, prob] : mixed.support) {
        if (prob < -1e-12)
            throw MalformedCase("mixed strategy carries a negative probability");
        total += prob;
        if (!seen.insert(action.kept).second)
            throw MalformedCase("mixed strategy support repeats a kept-line vector");
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw MalformedCase("mixed strategy probabilities sum to " + std::to_string(total));
}

double expected_disruption(const PowerNetwork& network, const FlowState& flows,
                           const OperatorMixedStrategy& mixed,
                           const AdversaryAction& adversary) {
    validate_mixed_strategy(mixed);
    std::vector<char> adversary_tripped(network.line_count(), 0);
    for (int e : adversary.tripped) adversary_tripped[e] = 1;

    double value = 0.0;
    for (const auto& [action, prob] : mixed.support) {
        double disrupted = 0.0;
        for (int e = 0; e < network.line_count(); ++e)
            if (adversary_tripped[e] || !action.kept[e])
                disrupted += line_weight(network, flows, e);
        value += prob * disrupted;
    }
    return value;
}

namespace {

// Shared builder for the exact best response: minimize the kept-probability
// weighted coverage the attack leaves standing.
struct ExactAdversaryModel {
    milp::MilpModel model;
    std::vector<milp::VariableRef> compromise;  // y per substation index
};

ExactAdversaryModel build_exact_adversary(const PowerNetwork& network,
                                          const Eigen::VectorXd& cost, int budget) {
    ExactAdversaryModel out;
    const int n = network.substation_count();
    std::vector<milp::LinearTerm> budget_row;
    for (int i = 0; i < n; ++i) {
        out.compromise.push_back(out.model.add_binary(
            "y_" + std::to_string(network.substation_id(i))));
        budget_row.push_back({out.compromise.back(), 1.0});
    }
    out.model.add_constraint(budget_row, milp::ConstraintSense::LessEqual, budget);

    std::vector<milp::LinearTerm> objective;
    for (int e = 0; e < network.line_count(); ++e) {
        if (cost[e] <= 1e-12) continue;  // tripping it changes nothing
        auto keep = out.model.add_binary("z_" + std::to_string(e));
        int i = network.line_from_index(e);
        int j = network.line_to_index(e);
        out.model.add_constraint(
            {{keep, 1.0}, {out.compromise[i], 1.0}, {out.compromise[j], 1.0}},
            milp::ConstraintSense::GreaterEqual, 1.0);
        objective.push_back({keep, cost[e]});
    }
    out.model.set_objective(objective, milp::ObjectiveSense::Minimize);
    return out;
}

AdversaryAction extract_adversary(const PowerNetwork& network,
                                  const ExactAdversaryModel& built,
                                  const milp::MilpSolution& solution) {
    std::vector<int> ids;
    for (int i = 0; i < network.substation_count(); ++i)
        if (solution.value(built.compromise[i]) > 0.5)
            ids.push_back(network.substation_id(i));
    return make_canonical_adversary(network, ids);
}

}  // namespace

AdversaryAction adversary_best_response_exact(const PowerNetwork& network,
                                              const FlowState& flows,
                                              const OperatorMixedStrategy& mixed,
                                              int budget, const OracleOptions& options) {
    validate_mixed_strategy(mixed);
    check_budget(network, budget);

    Eigen::VectorXd cost =
        line_weights(network, flows).cwiseProduct(keep_probability(network, mixed));
    ExactAdversaryModel built = build_exact_adversary(network, cost, budget);
    milp::MilpSolution solution = milp::solve(built.model, options.limits);
    if (solution.status != milp::SolveStatus::Optimal)
        throw SolverFailure("adversary best response returned " +
                            milp::to_string(solution.status));
    return extract_adversary(network, built, solution);
}

AdversaryAction adversary_best_response_greedy(const PowerNetwork& network,
                                               const FlowState& flows,
                                               const OperatorMixedStrategy& mixed,
                                               int budget) {
    validate_mixed_strategy(mixed);
    check_budget(network, budget);

    Eigen::VectorXd cost =
        line_weights(network, flows).cwiseProduct(keep_probability(network, mixed));
    const int n = network.substation_count();

    std::vector<char> covered(network.line_count(), 0);
    auto marginal_gain = [&](int sub_index) {
        double gain = 0.0;
        for (int e : network.incident_line_indices(sub_index))
            if (!covered[e]) gain += cost[e];
        return gain;
    };

    // lazy evaluation: stale upper bounds in a max-heap, (gain desc, id asc)
    struct Entry {
        double gain;
        int id;
        int sub_index;
        int round;
    };
    auto cmp = [](const Entry& a, const Entry& b) {
        if (a.gain != b.gain) return a.gain < b.gain;
        return a.id > b.id;
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> heap(cmp);
    for (int i = 0; i < n; ++i)
        heap.push({marginal_gain(i), network.substation_id(i), i, 0});

    std::vector<int> chosen;
    int round = 0;
    while (static_cast<int>(chosen.size()) < budget && !heap.empty()) {
        Entry top = heap.top();
        heap.pop();
        if (top.round != round) {
            top.gain = marginal_gain(top.sub_index);
            top.round = round;
            heap.push(top);
            continue;
        }
        chosen.push_back(top.id);
        for (int e : network.incident_line_indices(top.sub_index)) covered[e] = 1;
        ++round;
    }
    return make_canonical_adversary(network, chosen);
}

std::vector<AdversaryAction> top_k_adversary_actions(const PowerNetwork& network,
                                                     const FlowState& flows, int k,
                                                     int budget,
                                                     const OracleOptions& options) {
    if (k < 1) throw MalformedCase("top-k count must be at least 1");
    check_budget(network, budget);

    const Eigen::VectorXd cost = line_weights(network, flows);  // do-nothing operator
    std::vector<AdversaryAction> actions;
    while (static_cast<int>(actions.size()) < k) {
        ExactAdversaryModel built = build_exact_adversary(network, cost, budget);
        // exclude every compromised set already returned
        for (const auto& prior : actions) {
            std::set<int> in_set(prior.compromised_ids.begin(),
                                 prior.compromised_ids.end());
            std::vector<milp::LinearTerm> cut;
            for (int i = 0; i < network.substation_count(); ++i) {
                bool inside = in_set.count(network.substation_id(i)) > 0;
                cut.push_back({built.compromise[i], inside ? 1.0 : -1.0});
            }
            built.model.add_constraint(cut, milp::ConstraintSense::LessEqual,
                                       static_cast<double>(in_set.size()) - 1.0);
        }
        milp::MilpSolution solution = milp::solve(built.model, options.limits);
        if (solution.status == milp::SolveStatus::Infeasible) break;  // exhausted
        if (solution.status != milp::SolveStatus::Optimal)
            throw SolverFailure("top-k adversary enumeration returned " +
                                milp::to_string(solution.status));
        actions.push_back(extract_adversary(network, built, solution));
    }
    return actions;
}

std::vector<std::string> validate_operator_action(const PowerNetwork& network,
                                                  const CoherencyConfig& coherency,
                                                  const OperatorAction& action,
                                                  const AdversaryAction& adversary) {
    std::vector<std::string> violations;
    const int n = network.substation_count();
    const int L = network.line_count();
    const int K = coherency.group_count();

    if (static_cast<int>(action.island_of_substation.size()) != n ||
        static_cast<int>(action.island_of_line.size()) != L ||
        static_cast<int>(action.kept.size()) != L || action.dispatch_mw.size() != n ||
        action.angle_rad.size() != n || action.post_flow_mw.size() != L) {
        violations.push_back("malformed action: field sizes do not match the network");
        return violations;
    }

    const double tol = 1e-6;

    // (i) islands are disjoint and structurally consistent
    for (int e = 0; e < L; ++e) {
        int k = action.island_of_line[e];
        if ((k >= 0) != (action.kept[e] != 0)) {
            violations.push_back("condition (i): line " + std::to_string(e) +
                                 " kept flag disagrees with its island assignment");
            continue;
        }
        if (k < 0) continue;
        if (k >= K) {
            violations.push_back("condition (i): line " + std::to_string(e) +
                                 " assigned to island " + std::to_string(k) +
                                 " which does not exist");
            continue;
        }
        int i = network.line_from_index(e);
        int j = network.line_to_index(e);
        if (action.island_of_substation[i] != k || action.island_of_substation[j] != k)
            violations.push_back("condition (i): line " + std::to_string(e) +
                                 " in island " + std::to_string(k) +
                                 " has an endpoint outside that island");
    }
    for (int i = 0; i < n; ++i) {
        int k = action.island_of_substation[i];
        if (k >= K)
            violations.push_back("condition (i): substation " +
                                 std::to_string(network.substation_id(i)) +
                                 " assigned to island " + std::to_string(k) +
                                 " which does not exist");
    }

    // (ii) coherent groups sit whole inside their island, reference included
    for (int k = 0; k < K; ++k) {
        for (int id : coherency.groups[k]) {
            int idx = network.substation_index(id);
            if (action.island_of_substation[idx] != k)
                violations.push_back("condition (ii): substation " + std::to_string(id) +
                                     " of coherent group " + std::to_string(k) +
                                     " is not in island " + std::to_string(k));
        }
    }

    // (iii) each island's kept-line subgraph is connected
    for (int k = 0; k < K; ++k) {
        std::vector<int> members;
        for (int i = 0; i < n; ++i)
            if (action.island_of_substation[i] == k) members.push_back(i);
        if (members.empty()) continue;
        int ref = network.substation_index(coherency.reference_generator[k]);
        std::set<int> seen{ref};
        std::queue<int> frontier;
        frontier.push(ref);
        while (!frontier.empty()) {
            int u = frontier.front();
            frontier.pop();
            for (int e : network.incident_line_indices(u)) {
                if (action.island_of_line[e] != k) continue;
                int v = network.line_from_index(e) == u ? network.line_to_index(e)
                                                        : network.line_from_index(e);
                if (seen.insert(v).second) frontier.push(v);
            }
        }
        for (int i : members)
            if (!seen.count(i))
                violations.push_back("condition (iii): substation " +
                                     std::to_string(network.substation_id(i)) +
                                     " is disconnected from the reference of island " +
                                     std::to_string(k));
    }

    // (iv) generation and voltage angles within bounds
    Eigen::VectorXd gen_min = network.aggregate_gen_min();
    Eigen::VectorXd gen_max = network.aggregate_gen_max();
    for (int i = 0; i < n; ++i) {
        double g = action.dispatch_mw[i];
        if (g < gen_min[i] - tol || g > gen_max[i] + tol)
            violations.push_back("condition (iv): dispatch at substation " +
                                 std::to_string(network.substation_id(i)) +
                                 " violates generation capacity");
        double theta = action.angle_rad[i];
        if (theta < network.substations()[i].angle_min_rad - tol ||
            theta > network.substations()[i].angle_max_rad + tol)
            violations.push_back("condition (iv): voltage angle at substation " +
                                 std::to_string(network.substation_id(i)) +
                                 " violates its bounds");
    }

    // (v) post-islanding flows follow the DC equation and line capacities
    for (int e = 0; e < L; ++e) {
        const auto& line = network.lines()[e];
        double flow = action.post_flow_mw[e];
        if (!action.kept[e]) {
            if (std::abs(flow) > tol)
                violations.push_back("condition (v): tripped line " + std::to_string(e) +
                                     " carries nonzero flow");
            continue;
        }
        int i = network.line_from_index(e);
        int j = network.line_to_index(e);
        double expected = network.base_mva() * line.susceptance_pu *
                          (action.angle_rad[i] - action.angle_rad[j]);
        if (std::abs(expected - flow) > tol)
            violations.push_back("condition (v): kept line " + std::to_string(e) +
                                 " flow disagrees with the DC equation");
        if (flow < line.flow_min_mw - tol || flow > line.flow_max_mw + tol)
            violations.push_back("condition (v): kept line " + std::to_string(e) +
                                 " exceeds its capacity");
    }

    // (vi) power balance at every substation
    for (int i = 0; i < n; ++i) {
        double inflow = 0.0;
        for (int e : network.incident_line_indices(i)) {
            double p = action.post_flow_mw[e];
            inflow += network.line_to_index(e) == i ? p : -p;
        }
        double residual = inflow + action.dispatch_mw[i] - network.substations()[i].load_mw;
        if (std::abs(residual) > tol)
            violations.push_back("condition (vi): power balance violated at substation " +
                                 std::to_string(network.substation_id(i)) + " by " +
                                 std::to_string(residual) + " MW");
    }

    // ordering coupling: the operator cannot reopen an adversary-tripped line
    for (int e : adversary.tripped)
        if (e >= 0 && e < L && action.kept[e])
            violations.push_back("coupling (z^o <= z^a): line " + std::to_string(e) +
                                 " kept although the adversary tripped it");

    return violations;
}

}  // namespace islanding
