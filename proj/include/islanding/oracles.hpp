#pragma once

#include <string>
#include <vector>

#include "islanding/grid.hpp"
#include "islanding/milp.hpp"

namespace islanding {

// Compromised substation set plus the lines tripped from it. Canonical
// actions trip every incident line; ids and indices are kept sorted.
struct AdversaryAction {
    std::vector<int> compromised_ids;  // substation ids
    std::vector<int> tripped;          // line indices

    bool operator==(const AdversaryAction& other) const {
        return compromised_ids == other.compromised_ids;
    }
};

// The empty attack: nothing compromised, nothing tripped.
inline AdversaryAction no_adversary() { return {}; }

// Canonical action for a compromised set: tripped = all incident lines.
AdversaryAction make_canonical_adversary(const PowerNetwork& network,
                                         std::vector<int> compromised_ids);

// Checks the feasibility conditions of an attack against a budget:
// (i) |compromised| <= budget, (ii) tripped lines touch a compromised
// substation. Returns one message per violated condition.
std::vector<std::string> validate_adversary_action(const PowerNetwork& network,
                                                   const AdversaryAction& action,
                                                   int budget);

// Islanding decision with its post-islanding operating point.
struct OperatorAction {
    std::vector<int> island_of_substation;  // island index per substation, -1 unassigned
    std::vector<int> island_of_line;        // island index per line, -1 not kept
    std::vector<char> kept;                 // z^o per line: 1 kept, 0 tripped
    Eigen::VectorXd dispatch_mw;            // per substation
    Eigen::VectorXd angle_rad;              // per substation
    Eigen::VectorXd post_flow_mw;           // per line, zero on tripped lines
    AdversaryAction responded_to;           // attack this action was computed against

    std::vector<int> tripped_lines() const;
    bool same_trips(const OperatorAction& other) const { return kept == other.kept; }
};

// The do-nothing action: everything kept in one island at the initial point.
OperatorAction intact_operator_action(const PowerNetwork& network, const FlowState& flows);

struct OperatorMixedStrategy {
    std::vector<std::pair<OperatorAction, double>> support;
};

// Degenerate distribution on one action.
OperatorMixedStrategy pure_strategy(OperatorAction action);

// Throws MalformedCase unless probabilities are nonnegative, sum to one,
// and support actions are pairwise distinct by their kept-line vectors.
void validate_mixed_strategy(const OperatorMixedStrategy& mixed);

struct OracleOptions {
    milp::SolveLimits limits;
};

// Minimum-disruption proper islanding against a fixed attack (MILP).
// Throws InfeasiblePartition when no proper strategy exists.
OperatorAction operator_best_response(const PowerNetwork& network,
                                      const CoherencyConfig& coherency,
                                      const FlowState& flows,
                                      const AdversaryAction& adversary,
                                      const OracleOptions& options = {});

// Replays the properness conditions (i)-(vi) plus the cannot-reopen
// coupling against the attack the action responds to. Empty result means
// the action is proper; entries name the violated condition.
std::vector<std::string> validate_operator_action(const PowerNetwork& network,
                                                  const CoherencyConfig& coherency,
                                                  const OperatorAction& action,
                                                  const AdversaryAction& adversary);

// Exact expected-disruption maximizer over <=budget compromised sets (MILP;
// result canonicalized to trip every incident line).
AdversaryAction adversary_best_response_exact(const PowerNetwork& network,
                                              const FlowState& flows,
                                              const OperatorMixedStrategy& mixed,
                                              int budget,
                                              const OracleOptions& options = {});

// Lazy greedy on the same objective; factor (1 - 1/e) of the exact optimum.
AdversaryAction adversary_best_response_greedy(const PowerNetwork& network,
                                               const FlowState& flows,
                                               const OperatorMixedStrategy& mixed,
                                               int budget);

// Probability-weighted disruption of the union of adversary- and
// operator-tripped lines; a line tripped by both counts once.
double expected_disruption(const PowerNetwork& network, const FlowState& flows,
                           const OperatorMixedStrategy& mixed,
                           const AdversaryAction& adversary);

// k distinct attacks with the largest disruption against the do-nothing
// operator, nonincreasing; fewer when the feasible set is exhausted.
std::vector<AdversaryAction> top_k_adversary_actions(const PowerNetwork& network,
                                                     const FlowState& flows, int k,
                                                     int budget,
                                                     const OracleOptions& options = {});

}  // namespace islanding
