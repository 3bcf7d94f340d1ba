#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "islanding/errors.hpp"

namespace islanding {

/// Default voltage-angle window used when a case file supplies no bounds.
inline constexpr double kDefaultAngleBoundRad = 0.6;

struct Substation {
    int id = 0;               // bus identifier from the case data
    double load_mw = 0.0;     // d_i
    double angle_min_rad = -kDefaultAngleBoundRad;
    double angle_max_rad = kDefaultAngleBoundRad;
};

struct Generator {
    int substation_id = 0;
    double gen_min_mw = 0.0;
    double gen_max_mw = 0.0;
    double initial_dispatch_mw = 0.0;
};

struct TransmissionLine {
    int from_id = 0;
    int to_id = 0;
    double susceptance_pu = 0.0;  // S_{i,j} > 0, per unit
    double flow_min_mw = 0.0;     // <= 0
    double flow_max_mw = 0.0;     // >= 0
};

// Static grid model. Construct through make_power_network() (or a parser),
// which validates the invariants and freezes the index maps; treat instances
// as immutable afterwards.
class PowerNetwork {
public:
    PowerNetwork() = default;

    const std::vector<Substation>& substations() const { return substations_; }
    const std::vector<Generator>& generators() const { return generators_; }
    const std::vector<TransmissionLine>& lines() const { return lines_; }
    double base_mva() const { return base_mva_; }

    int substation_count() const { return static_cast<int>(substations_.size()); }
    int line_count() const { return static_cast<int>(lines_.size()); }

    // id <-> dense index translation
    int substation_index(int id) const;
    bool has_substation(int id) const { return sub_index_.count(id) > 0; }
    int substation_id(int index) const { return substations_[index].id; }

    // Lines are stored once per unordered pair, oriented from->to.
    int line_index(int from_id, int to_id) const;  // throws UnknownLine
    std::optional<int> find_line(int from_id, int to_id) const;
    int line_from_index(int line) const { return line_endpoints_[line].first; }
    int line_to_index(int line) const { return line_endpoints_[line].second; }

    // Indices of lines incident to a substation (by dense substation index).
    const std::vector<int>& incident_line_indices(int sub_index) const {
        return incident_[sub_index];
    }

    // Generator indices hosted at a substation (dense index); empty if none.
    const std::vector<int>& generators_at(int sub_index) const {
        return gens_at_[sub_index];
    }
    bool hosts_generator(int sub_index) const { return !gens_at_[sub_index].empty(); }

    // Aggregate generation bounds / initial dispatch per substation (MW).
    Eigen::VectorXd aggregate_gen_min() const;
    Eigen::VectorXd aggregate_gen_max() const;
    Eigen::VectorXd aggregate_dispatch() const;
    Eigen::VectorXd loads() const;

    friend PowerNetwork make_power_network(std::vector<Substation> substations,
                                           std::vector<Generator> generators,
                                           std::vector<TransmissionLine> lines,
                                           double base_mva);

private:
    std::vector<Substation> substations_;
    std::vector<Generator> generators_;
    std::vector<TransmissionLine> lines_;
    double base_mva_ = 100.0;

    std::unordered_map<int, int> sub_index_;
    std::unordered_map<long long, int> line_index_;          // packed (min,max) id pair
    std::vector<std::pair<int, int>> line_endpoints_;        // dense sub indices
    std::vector<std::vector<int>> incident_;
    std::vector<std::vector<int>> gens_at_;
};

// Validates invariants (unique ids, no dangling references, simple connected
// graph), merges parallel branches, and builds the index structures.
PowerNetwork make_power_network(std::vector<Substation> substations,
                                std::vector<Generator> generators,
                                std::vector<TransmissionLine> lines,
                                double base_mva);

// Generator coherent groups. groups[k] lists substation ids; reference_generator[k]
// is the reference bus of group k and must be a member of groups[k].
struct CoherencyConfig {
    std::vector<std::vector<int>> groups;
    std::vector<int> reference_generator;

    int group_count() const { return static_cast<int>(groups.size()); }
};

// Throws if the config violates its invariants against the given network.
void validate_coherency(const PowerNetwork& network, const CoherencyConfig& coherency);

// A DC operating point. Flows are stored once per line, oriented from->to;
// the reverse direction is the negation.
struct FlowState {
    Eigen::VectorXd line_flow_mw;  // per line index
    Eigen::VectorXd angle_rad;     // per substation index
    Eigen::VectorXd dispatch_mw;   // per substation index (aggregated)

    double flow(int line_index) const { return line_flow_mw[line_index]; }
};

// Solves the susceptance-weighted Laplacian system for the initial operating
// point. `slack_id` must host a generator; it absorbs any dispatch/load
// mismatch up to 0.5% of total load (beyond that: ImbalancedCase).
FlowState dc_power_flow(const PowerNetwork& network, int slack_id);

// Signed flow from `from_id` toward `to_id`; the reverse query is the exact
// negation (flows are stored once, oriented).
double directed_flow(const PowerNetwork& network, const FlowState& flows, int from_id,
                     int to_id);

// Pre-disturbance flow magnitude of one line, in MW.
double line_weight(const PowerNetwork& network, const FlowState& flows, int line_index);
double line_weight(const PowerNetwork& network, const FlowState& flows,
                   const TransmissionLine& line);

// Per-line weights for all lines as a vector.
Eigen::VectorXd line_weights(const PowerNetwork& network, const FlowState& flows);

// Total weight of a tripped-line set (indices into network.lines()).
double disruption(const PowerNetwork& network, const FlowState& flows,
                  const std::vector<int>& tripped);

double total_line_weight(const PowerNetwork& network, const FlowState& flows);

// Lines with at least one endpoint in `compromised_ids`. Result is sorted.
std::vector<int> incident_lines(const PowerNetwork& network,
                                const std::vector<int>& compromised_ids);

}  // namespace islanding
