#include "islanding/grid.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

namespace islanding {

namespace {

long long pack_pair(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<long long>(a) << 32) | static_cast<unsigned int>(b);
}

}  // namespace

int PowerNetwork::substation_index(int id) const {
    auto it = sub_index_.find(id);
    if (it == sub_index_.end())
        throw UnknownSubstation("unknown substation id " + std::to_string(id));
    return it->second;
}

int PowerNetwork::line_index(int from_id, int to_id) const {
    auto it = line_index_.find(pack_pair(from_id, to_id));
    if (it == line_index_.end())
        throw UnknownLine("unknown line (" + std::to_string(from_id) + "," +
                          std::to_string(to_id) + ")");
    return it->second;
}

std::optional<int> PowerNetwork::find_line(int from_id, int to_id) const {
    auto it = line_index_.find(pack_pair(from_id, to_id));
    if (it == line_index_.end()) return std::nullopt;
    return it->second;
}

Eigen::VectorXd PowerNetwork::aggregate_gen_min() const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(substation_count());
    for (const auto& g : generators_) v[sub_index_.at(g.substation_id)] += g.gen_min_mw;
    return v;
}

Eigen::VectorXd PowerNetwork::aggregate_gen_max() const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(substation_count());
    for (const auto& g : generators_) v[sub_index_.at(g.substation_id)] += g.gen_max_mw;
    return v;
}

Eigen::VectorXd PowerNetwork::aggregate_dispatch() const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(substation_count());
    for (const auto& g : generators_)
        v[sub_index_.at(g.substation_id)] += g.initial_dispatch_mw;
    return v;
}

Eigen::VectorXd PowerNetwork::loads() const {
    Eigen::VectorXd v(substation_count());
    for (int i = 0; i < substation_count(); ++i) v[i] = substations_[i].load_mw;
    return v;
}

PowerNetwork make_power_network(std::vector<Substation> substations,
                                std::vector<Generator> generators,
                                std::vector<TransmissionLine> lines,
                                double base_mva) {
    if (base_mva <= 0.0) throw MalformedCase("base MVA must be positive");
    if (substations.empty()) throw MalformedCase("network has no substations");

    PowerNetwork net;
    net.base_mva_ = base_mva;

    for (const auto& s : substations) {
        if (net.sub_index_.count(s.id))
            throw InconsistentTopology("duplicate substation id " + std::to_string(s.id));
        if (s.load_mw < 0.0)
            throw MalformedCase("negative load at substation " + std::to_string(s.id));
        if (s.angle_min_rad > s.angle_max_rad)
            throw MalformedCase("empty angle window at substation " + std::to_string(s.id));
        net.sub_index_[s.id] = static_cast<int>(net.substations_.size());
        net.substations_.push_back(s);
    }

    for (const auto& g : generators) {
        if (!net.sub_index_.count(g.substation_id))
            throw InconsistentTopology("generator references missing substation " +
                                       std::to_string(g.substation_id));
        if (g.gen_min_mw < 0.0 || g.gen_min_mw > g.gen_max_mw)
            throw MalformedCase("invalid generation bounds at substation " +
                                std::to_string(g.substation_id));
        if (g.initial_dispatch_mw < g.gen_min_mw - 1e-9 ||
            g.initial_dispatch_mw > g.gen_max_mw + 1e-9)
            throw MalformedCase("initial dispatch outside generation bounds at substation " +
                                std::to_string(g.substation_id));
        net.generators_.push_back(g);
    }

    // Merge parallel branches: susceptances and flow limits add.
    for (const auto& l : lines) {
        if (l.from_id == l.to_id)
            throw InconsistentTopology("self-loop at substation " + std::to_string(l.from_id));
        if (!net.sub_index_.count(l.from_id) || !net.sub_index_.count(l.to_id))
            throw InconsistentTopology("line (" + std::to_string(l.from_id) + "," +
                                       std::to_string(l.to_id) +
                                       ") references a missing substation");
        if (l.susceptance_pu <= 0.0)
            throw ZeroReactance("line (" + std::to_string(l.from_id) + "," +
                                std::to_string(l.to_id) + ") has non-positive susceptance");
        if (l.flow_min_mw > 0.0 || l.flow_max_mw < 0.0)
            throw MalformedCase("flow limits of line (" + std::to_string(l.from_id) + "," +
                                std::to_string(l.to_id) + ") must bracket zero");

        auto key = pack_pair(l.from_id, l.to_id);
        auto it = net.line_index_.find(key);
        if (it == net.line_index_.end()) {
            net.line_index_[key] = static_cast<int>(net.lines_.size());
            net.lines_.push_back(l);
        } else {
            TransmissionLine& merged = net.lines_[it->second];
            merged.susceptance_pu += l.susceptance_pu;
            merged.flow_min_mw += l.flow_min_mw;
            merged.flow_max_mw += l.flow_max_mw;
        }
    }

    const int n = net.substation_count();
    net.incident_.assign(n, {});
    net.gens_at_.assign(n, {});
    net.line_endpoints_.reserve(net.lines_.size());
    for (int e = 0; e < net.line_count(); ++e) {
        int fi = net.sub_index_.at(net.lines_[e].from_id);
        int ti = net.sub_index_.at(net.lines_[e].to_id);
        net.line_endpoints_.emplace_back(fi, ti);
        net.incident_[fi].push_back(e);
        net.incident_[ti].push_back(e);
    }
    for (int gi = 0; gi < static_cast<int>(net.generators_.size()); ++gi)
        net.gens_at_[net.sub_index_.at(net.generators_[gi].substation_id)].push_back(gi);

    // Connectivity of (B, L).
    if (n > 1) {
        std::vector<char> seen(n, 0);
        std::queue<int> q;
        q.push(0);
        seen[0] = 1;
        int reached = 1;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int e : net.incident_[u]) {
                int v = net.line_endpoints_[e].first == u ? net.line_endpoints_[e].second
                                                          : net.line_endpoints_[e].first;
                if (!seen[v]) {
                    seen[v] = 1;
                    ++reached;
                    q.push(v);
                }
            }
        }
        if (reached != n) throw InconsistentTopology("network graph is not connected");
    }

    return net;
}

void validate_coherency(const PowerNetwork& network, const CoherencyConfig& coherency) {
    if (coherency.groups.empty())
        throw MalformedCase("coherency config needs at least one group");
    if (coherency.reference_generator.size() != coherency.groups.size())
        throw MalformedCase("coherency config needs one reference generator per group");

    std::set<int> seen;
    for (int k = 0; k < coherency.group_count(); ++k) {
        const auto& group = coherency.groups[k];
        if (group.empty())
            throw MalformedCase("coherency group " + std::to_string(k) + " is empty");
        bool ref_in_group = false;
        for (int id : group) {
            int idx = network.substation_index(id);  // throws UnknownSubstation
            if (!network.hosts_generator(idx))
                throw MalformedCase("coherency group member " + std::to_string(id) +
                                    " hosts no generator");
            if (!seen.insert(id).second)
                throw MalformedCase("substation " + std::to_string(id) +
                                    " appears in more than one coherency group");
            if (id == coherency.reference_generator[k]) ref_in_group = true;
        }
        if (!ref_in_group)
            throw MalformedCase("reference generator " +
                                std::to_string(coherency.reference_generator[k]) +
                                " is not a member of group " + std::to_string(k));
    }
}

FlowState dc_power_flow(const PowerNetwork& network, int slack_id) {
    const int n = network.substation_count();
    const int slack = network.substation_index(slack_id);
    if (!network.hosts_generator(slack))
        throw SingularSystem("slack substation " + std::to_string(slack_id) +
                             " hosts no generator");

    Eigen::VectorXd dispatch = network.aggregate_dispatch();
    Eigen::VectorXd load = network.loads();

    const double total_load = load.sum();
    const double mismatch = dispatch.sum() - total_load;
    const double tolerance = 0.005 * std::max(total_load, 1.0);
    if (std::abs(mismatch) > tolerance)
        throw ImbalancedCase("dispatch/load mismatch of " + std::to_string(mismatch) +
                             " MW exceeds 0.5% of total load");
    dispatch[slack] -= mismatch;  // slack absorbs losses in the case data

    // Per-unit susceptance Laplacian, reduced at the slack.
    const double base = network.base_mva();
    Eigen::MatrixXd laplacian = Eigen::MatrixXd::Zero(n, n);
    for (int e = 0; e < network.line_count(); ++e) {
        int i = network.line_from_index(e);
        int j = network.line_to_index(e);
        double s = network.lines()[e].susceptance_pu;
        laplacian(i, i) += s;
        laplacian(j, j) += s;
        laplacian(i, j) -= s;
        laplacian(j, i) -= s;
    }

    Eigen::VectorXd injection = (dispatch - load) / base;

    std::vector<int> keep;
    keep.reserve(n - 1);
    for (int i = 0; i < n; ++i)
        if (i != slack) keep.push_back(i);

    Eigen::MatrixXd reduced(n - 1, n - 1);
    Eigen::VectorXd rhs(n - 1);
    for (int a = 0; a < n - 1; ++a) {
        rhs[a] = injection[keep[a]];
        for (int b = 0; b < n - 1; ++b) reduced(a, b) = laplacian(keep[a], keep[b]);
    }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(reduced);
    if (n > 1 && !lu.isInvertible())
        throw SingularSystem("reduced susceptance Laplacian is singular");
    Eigen::VectorXd theta_reduced = lu.solve(rhs);

    FlowState state;
    state.angle_rad = Eigen::VectorXd::Zero(n);
    for (int a = 0; a < n - 1; ++a) state.angle_rad[keep[a]] = theta_reduced[a];

    state.line_flow_mw.resize(network.line_count());
    for (int e = 0; e < network.line_count(); ++e) {
        int i = network.line_from_index(e);
        int j = network.line_to_index(e);
        state.line_flow_mw[e] = base * network.lines()[e].susceptance_pu *
                                (state.angle_rad[i] - state.angle_rad[j]);
    }
    state.dispatch_mw = dispatch;
    return state;
}

double directed_flow(const PowerNetwork& network, const FlowState& flows, int from_id,
                     int to_id) {
    int e = network.line_index(from_id, to_id);
    double p = flows.line_flow_mw[e];
    return network.lines()[e].from_id == from_id ? p : -p;
}

double line_weight(const PowerNetwork& network, const FlowState& flows, int line_index) {
    if (line_index < 0 || line_index >= network.line_count())
        throw UnknownLine("line index " + std::to_string(line_index) + " out of range");
    return std::abs(flows.line_flow_mw[line_index]);
}

double line_weight(const PowerNetwork& network, const FlowState& flows,
                   const TransmissionLine& line) {
    return line_weight(network, flows, network.line_index(line.from_id, line.to_id));
}

Eigen::VectorXd line_weights(const PowerNetwork& network, const FlowState& flows) {
    return flows.line_flow_mw.cwiseAbs();
}

double disruption(const PowerNetwork& network, const FlowState& flows,
                  const std::vector<int>& tripped) {
    double total = 0.0;
    for (int e : tripped) total += line_weight(network, flows, e);
    return total;
}

double total_line_weight(const PowerNetwork& network, const FlowState& flows) {
    return flows.line_flow_mw.cwiseAbs().sum();
}

std::vector<int> incident_lines(const PowerNetwork& network,
                                const std::vector<int>& compromised_ids) {
    std::set<int> result;
    for (int id : compromised_ids) {
        int idx = network.substation_index(id);
        for (int e : network.incident_line_indices(idx)) result.insert(e);
    }
    return {result.begin(), result.end()};
}

}  // namespace islanding
