#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "islanding/grid.hpp"

namespace islanding::testing {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("test fixture missing: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string data_path(const std::string& rel) {
    return std::string(ISLANDING_DATA_DIR) + "/" + rel;
}

// 1 generator at bus 1, 100 MW load at bus 2, one line of 10 pu.
inline PowerNetwork two_bus() {
    return make_power_network(
        {{1, 0.0, -0.6, 0.6}, {2, 100.0, -0.6, 0.6}},
        {{1, 0.0, 200.0, 100.0}},
        {{1, 2, 10.0, -500.0, 500.0}}, 100.0);
}

// Symmetric triangle: 90 MW injected at bus 1, 45 MW drawn at buses 2 and 3.
inline PowerNetwork triangle() {
    return make_power_network(
        {{1, 0.0, -0.6, 0.6}, {2, 45.0, -0.6, 0.6}, {3, 45.0, -0.6, 0.6}},
        {{1, 0.0, 200.0, 90.0}},
        {{1, 2, 5.0, -500.0, 500.0},
         {2, 3, 5.0, -500.0, 500.0},
         {1, 3, 5.0, -500.0, 500.0}},
        100.0);
}

// Hub bus 1 with `leaves` load buses hanging off it.
inline PowerNetwork star(int leaves) {
    std::vector<Substation> subs{{1, 0.0, -0.6, 0.6}};
    std::vector<TransmissionLine> lines;
    double load = 20.0;
    for (int i = 0; i < leaves; ++i) {
        subs.push_back({2 + i, load, -0.6, 0.6});
        lines.push_back({1, 2 + i, 4.0 + i, -500.0, 500.0});
    }
    std::vector<Generator> gens{{1, 0.0, 1000.0, load * leaves}};
    return make_power_network(subs, gens, lines, 100.0);
}

// Connected random network with balanced dispatch; suitable for dc_power_flow.
// Substation ids are 1..n; generators sit at `gen_count` distinct buses.
inline PowerNetwork random_network(std::mt19937_64& rng, int min_n = 4, int max_n = 10,
                                   int gen_count = 2, double extra_edge_prob = 0.35) {
    std::uniform_int_distribution<int> n_dist(min_n, max_n);
    const int n = n_dist(rng);
    gen_count = std::min(gen_count, n);

    std::uniform_real_distribution<double> load_dist(0.0, 100.0);
    std::uniform_real_distribution<double> sus_dist(2.0, 20.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<Substation> subs;
    double total_load = 0.0;
    for (int i = 1; i <= n; ++i) {
        double load = load_dist(rng);
        total_load += load;
        subs.push_back({i, load, -1.5, 1.5});
    }

    std::vector<TransmissionLine> lines;
    for (int i = 2; i <= n; ++i) {
        std::uniform_int_distribution<int> parent(1, i - 1);
        lines.push_back({parent(rng), i, sus_dist(rng), -5000.0, 5000.0});
    }
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j)
            if (unit(rng) < extra_edge_prob)
                lines.push_back({i, j, sus_dist(rng), -5000.0, 5000.0});

    // generators at the first gen_count buses, dispatch split evenly
    std::vector<Generator> gens;
    for (int g = 0; g < gen_count; ++g)
        gens.push_back({1 + g, 0.0, total_load * 2.0 + 10.0, total_load / gen_count});

    return make_power_network(subs, gens, lines, 100.0);
}

}  // namespace islanding::testing
