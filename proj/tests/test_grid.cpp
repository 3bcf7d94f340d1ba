#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "islanding/grid.hpp"
#include "islanding/matpower.hpp"
#include "islanding/network_json.hpp"
#include "support/test_networks.hpp"

using namespace islanding;
namespace itest = islanding::testing;

namespace {

const char* kTwoBusCase = R"(
function mpc = case2
mpc.baseMVA = 100;
mpc.bus = [
    1 3 0   0 0 0 1 1 0 345 1 1.1 0.9;
    2 1 100 0 0 0 1 1 0 345 1 1.1 0.9;
];
mpc.gen = [
    1 100 0 300 -300 1 100 1 200 0 0 0 0 0 0 0 0 0 0 0 0;
];
mpc.branch = [
    1 2 0.01 0.1 0 250 250 250 0 0 1 -360 360;
];
)";

// Test-local dense elimination, independent of the library's solver path.
std::vector<double> gaussian_solve(std::vector<std::vector<double>> a,
                                   std::vector<double> rhs) {
    const int n = static_cast<int>(rhs.size());
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        std::swap(a[col], a[pivot]);
        std::swap(rhs[col], rhs[pivot]);
        REQUIRE(std::abs(a[col][col]) > 1e-12);
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            double f = a[r][col] / a[col][col];
            for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = rhs[i] / a[i][i];
    return x;
}

double balance_residual(const PowerNetwork& net, const FlowState& flows, int sub_index) {
    double inflow = 0.0;
    int id = net.substation_id(sub_index);
    for (int e : net.incident_line_indices(sub_index)) {
        const auto& line = net.lines()[e];
        int other = line.from_id == id ? line.to_id : line.from_id;
        inflow += directed_flow(net, flows, other, id);
    }
    return inflow + flows.dispatch_mw[sub_index] - net.substations()[sub_index].load_mw;
}

}  // namespace

TEST_CASE("minimal two-bus case parses with direct field mapping") {
    PowerNetwork net = parse_matpower_case(kTwoBusCase);
    CHECK(net.substation_count() == 2);
    CHECK(net.line_count() == 1);
    CHECK(net.generators().size() == 1);
    CHECK(net.lines()[0].susceptance_pu == doctest::Approx(10.0));
    CHECK(net.substations()[1].load_mw == doctest::Approx(100.0));
    CHECK(net.lines()[0].flow_max_mw == doctest::Approx(250.0));
}

TEST_CASE("IEEE 9-bus case has expected counts") {
    PowerNetwork net = parse_matpower_case(itest::read_file(itest::data_path("cases/case9.m")));
    CHECK(net.substation_count() == 9);
    CHECK(net.line_count() == 9);
    CHECK(net.generators().size() == 3);
}

TEST_CASE("branch referencing a missing bus is rejected") {
    std::string text = kTwoBusCase;
    auto pos = text.find("1 2 0.01");
    text.replace(pos, 3, "1 99");
    CHECK_THROWS_AS(parse_matpower_case(text), InconsistentTopology);
}

TEST_CASE("malformed cases are diagnosed") {
    SUBCASE("missing matrix") {
        std::string text = kTwoBusCase;
        text.replace(text.find("mpc.branch"), 10, "mpc.broken");
        CHECK_THROWS_AS(parse_matpower_case(text), MalformedCase);
    }
    SUBCASE("short gen row") {
        std::string text = R"(
mpc.baseMVA = 100;
mpc.bus = [ 1 3 0 0 0 0 1 1 0 345 1 1.1 0.9; 2 1 10 0 0 0 1 1 0 345 1 1.1 0.9; ];
mpc.gen = [ 1 10 0 300; ];
mpc.branch = [ 1 2 0.01 0.1 0 250 250 250 0 0 1 -360 360; ];
)";
        CHECK_THROWS_AS(parse_matpower_case(text), MalformedCase);
    }
    SUBCASE("zero reactance") {
        std::string text = kTwoBusCase;
        text.replace(text.find("0.01 0.1"), 8, "0.01 0.0");
        CHECK_THROWS_AS(parse_matpower_case(text), ZeroReactance);
    }
}

TEST_CASE("out-of-service branches are dropped and parallel branches merge") {
    std::string text = R"(
mpc.baseMVA = 100;
mpc.bus = [
    1 3 0   0 0 0 1 1 0 345 1 1.1 0.9;
    2 1 100 0 0 0 1 1 0 345 1 1.1 0.9;
];
mpc.gen = [ 1 100 0 300 -300 1 100 1 200 0 0 0 0 0 0 0 0 0 0 0 0; ];
mpc.branch = [
    1 2 0.01 0.2 0 100 0 0 0 0 1 -360 360;
    2 1 0.01 0.2 0 100 0 0 0 0 1 -360 360;
    1 2 0.01 0.5 0 100 0 0 0 0 0 -360 360;
];
)";
    PowerNetwork net = parse_matpower_case(text);
    CHECK(net.line_count() == 1);
    CHECK(net.lines()[0].susceptance_pu == doctest::Approx(10.0));
    CHECK(net.lines()[0].flow_max_mw == doctest::Approx(200.0));
}

TEST_CASE("two-bus DC flow matches the closed form") {
    PowerNetwork net = itest::two_bus();
    FlowState flows = dc_power_flow(net, 1);
    CHECK(flows.line_flow_mw[0] == doctest::Approx(100.0).epsilon(1e-10));
    CHECK(flows.angle_rad[net.substation_index(2)] == doctest::Approx(-0.1).epsilon(1e-10));
    CHECK(flows.angle_rad[net.substation_index(1)] == 0.0);
}

TEST_CASE("symmetric triangle splits evenly") {
    PowerNetwork net = itest::triangle();
    FlowState flows = dc_power_flow(net, 1);
    CHECK(directed_flow(net, flows, 1, 2) == doctest::Approx(45.0).epsilon(1e-10));
    CHECK(directed_flow(net, flows, 1, 3) == doctest::Approx(45.0).epsilon(1e-10));
    CHECK(directed_flow(net, flows, 2, 3) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("IEEE 9-bus flows match an independent elimination oracle") {
    PowerNetwork net = parse_matpower_case(itest::read_file(itest::data_path("cases/case9.m")));
    FlowState flows = dc_power_flow(net, 1);

    const int n = net.substation_count();
    const int slack = net.substation_index(1);
    std::vector<std::vector<double>> lap(n, std::vector<double>(n, 0.0));
    for (const auto& line : net.lines()) {
        int i = net.substation_index(line.from_id);
        int j = net.substation_index(line.to_id);
        lap[i][i] += line.susceptance_pu;
        lap[j][j] += line.susceptance_pu;
        lap[i][j] -= line.susceptance_pu;
        lap[j][i] -= line.susceptance_pu;
    }
    Eigen::VectorXd injection =
        (net.aggregate_dispatch() - net.loads()) / net.base_mva();

    std::vector<std::vector<double>> reduced;
    std::vector<double> rhs;
    std::vector<int> keep;
    for (int i = 0; i < n; ++i)
        if (i != slack) keep.push_back(i);
    for (int a : keep) {
        std::vector<double> row;
        for (int b : keep) row.push_back(lap[a][b]);
        reduced.push_back(row);
        rhs.push_back(injection[a]);
    }
    std::vector<double> theta_red = gaussian_solve(reduced, rhs);
    std::vector<double> theta(n, 0.0);
    for (size_t k = 0; k < keep.size(); ++k) theta[keep[k]] = theta_red[k];

    for (int e = 0; e < net.line_count(); ++e) {
        const auto& line = net.lines()[e];
        double expected = net.base_mva() * line.susceptance_pu *
                          (theta[net.substation_index(line.from_id)] -
                           theta[net.substation_index(line.to_id)]);
        CHECK(std::abs(flows.line_flow_mw[e] - expected) <= 1e-8);
    }
}

TEST_CASE("parsed IEEE cases balance to 1e-8 MW at every substation") {
    for (const char* name : {"cases/case9.m", "cases/case14.m", "cases/case30.m"}) {
        PowerNetwork net = parse_matpower_case(itest::read_file(itest::data_path(name)));
        FlowState flows = dc_power_flow(net, net.generators().front().substation_id);
        for (int i = 0; i < net.substation_count(); ++i)
            CHECK(std::abs(balance_residual(net, flows, i)) <= 1e-8);
    }
}

TEST_CASE("reverse flow queries negate exactly") {
    PowerNetwork net = parse_matpower_case(itest::read_file(itest::data_path("cases/case9.m")));
    FlowState flows = dc_power_flow(net, 1);
    for (const auto& line : net.lines()) {
        double fwd = directed_flow(net, flows, line.from_id, line.to_id);
        double rev = directed_flow(net, flows, line.to_id, line.from_id);
        CHECK(fwd + rev == 0.0);  // exact, not approximate
    }
}

TEST_CASE("line weight collapses to |P| under antisymmetry") {
    PowerNetwork net = itest::two_bus();
    FlowState flows = dc_power_flow(net, 1);
    CHECK(line_weight(net, flows, 0) == doctest::Approx(100.0));

    FlowState zero = flows;
    zero.line_flow_mw[0] = 0.0;
    CHECK(line_weight(net, zero, 0) == 0.0);

    PowerNetwork nine =
        parse_matpower_case(itest::read_file(itest::data_path("cases/case9.m")));
    FlowState nine_flows = dc_power_flow(nine, 1);
    for (int e = 0; e < nine.line_count(); ++e)
        CHECK(line_weight(nine, nine_flows, e) ==
              doctest::Approx(std::abs(nine_flows.line_flow_mw[e])));
}

TEST_CASE("disruption sums tripped-line weights") {
    PowerNetwork net = itest::triangle();
    FlowState flows = dc_power_flow(net, 1);

    CHECK(disruption(net, flows, {}) == 0.0);

    std::vector<int> all{0, 1, 2};
    CHECK(disruption(net, flows, all) ==
          doctest::Approx(total_line_weight(net, flows)));

    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<int> subset;
        double expected = 0.0;
        for (int e = 0; e < 3; ++e) {
            if (rng() & 1) {
                subset.push_back(e);
                expected += std::abs(flows.line_flow_mw[e]);
            }
        }
        CHECK(disruption(net, flows, subset) == doctest::Approx(expected));
    }
}

TEST_CASE("disruption is monotone and modular") {
    PowerNetwork net = parse_matpower_case(itest::read_file(itest::data_path("cases/case9.m")));
    FlowState flows = dc_power_flow(net, 1);
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        std::set<int> s1, s2;
        for (int e = 0; e < net.line_count(); ++e) {
            if (rng() & 1) s1.insert(e);
            if (rng() & 1) s2.insert(e);
        }
        std::set<int> uni = s1, inter;
        uni.insert(s2.begin(), s2.end());
        for (int e : s1)
            if (s2.count(e)) inter.insert(e);

        auto vec = [](const std::set<int>& s) { return std::vector<int>(s.begin(), s.end()); };
        double d1 = disruption(net, flows, vec(s1));
        double d2 = disruption(net, flows, vec(s2));
        double du = disruption(net, flows, vec(uni));
        double di = disruption(net, flows, vec(inter));

        CHECK(d1 <= du + 1e-12);  // monotone under inclusion
        CHECK(du + di == doctest::Approx(d1 + d2).epsilon(1e-12));
    }
}

TEST_CASE("incident lines match a per-line endpoint scan") {
    PowerNetwork star = itest::star(5);
    FlowState unused = dc_power_flow(star, 1);
    (void)unused;

    CHECK(incident_lines(star, {}).empty());
    CHECK(incident_lines(star, {1}).size() == static_cast<size_t>(star.line_count()));

    PowerNetwork nine =
        parse_matpower_case(itest::read_file(itest::data_path("cases/case9.m")));
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<int> picked;
        for (const auto& s : nine.substations())
            if (rng() % 3 == 0) picked.push_back(s.id);

        std::set<int> expected;
        for (int e = 0; e < nine.line_count(); ++e) {
            const auto& line = nine.lines()[e];
            for (int id : picked)
                if (line.from_id == id || line.to_id == id) expected.insert(e);
        }
        std::vector<int> got = incident_lines(nine, picked);
        CHECK(got == std::vector<int>(expected.begin(), expected.end()));
    }

    CHECK_THROWS_AS(incident_lines(nine, {404}), UnknownSubstation);
}

TEST_CASE("network JSON round trip is identical") {
    PowerNetwork net = parse_matpower_case(itest::read_file(itest::data_path("cases/case14.m")));
    PowerNetwork back = parse_network_json(network_to_json(net).dump());

    REQUIRE(back.substation_count() == net.substation_count());
    REQUIRE(back.line_count() == net.line_count());
    REQUIRE(back.generators().size() == net.generators().size());
    for (int i = 0; i < net.substation_count(); ++i) {
        CHECK(back.substations()[i].id == net.substations()[i].id);
        CHECK(back.substations()[i].load_mw == net.substations()[i].load_mw);
        CHECK(back.substations()[i].angle_min_rad == net.substations()[i].angle_min_rad);
        CHECK(back.substations()[i].angle_max_rad == net.substations()[i].angle_max_rad);
    }
    for (size_t g = 0; g < net.generators().size(); ++g) {
        CHECK(back.generators()[g].substation_id == net.generators()[g].substation_id);
        CHECK(back.generators()[g].gen_min_mw == net.generators()[g].gen_min_mw);
        CHECK(back.generators()[g].gen_max_mw == net.generators()[g].gen_max_mw);
        CHECK(back.generators()[g].initial_dispatch_mw ==
              net.generators()[g].initial_dispatch_mw);
    }
    for (int e = 0; e < net.line_count(); ++e) {
        CHECK(back.lines()[e].from_id == net.lines()[e].from_id);
        CHECK(back.lines()[e].to_id == net.lines()[e].to_id);
        CHECK(back.lines()[e].susceptance_pu == net.lines()[e].susceptance_pu);
        CHECK(back.lines()[e].flow_min_mw == net.lines()[e].flow_min_mw);
        CHECK(back.lines()[e].flow_max_mw == net.lines()[e].flow_max_mw);
    }
}

TEST_CASE("power flow error paths") {
    SUBCASE("imbalance beyond the rebalance window") {
        PowerNetwork net = make_power_network(
            {{1, 0.0, -0.6, 0.6}, {2, 100.0, -0.6, 0.6}},
            {{1, 0.0, 300.0, 150.0}},
            {{1, 2, 10.0, -500.0, 500.0}}, 100.0);
        CHECK_THROWS_AS(dc_power_flow(net, 1), ImbalancedCase);
    }
    SUBCASE("slack must host a generator") {
        PowerNetwork net = itest::two_bus();
        CHECK_THROWS_AS(dc_power_flow(net, 2), SingularSystem);
    }
    SUBCASE("small imbalance is absorbed by the slack") {
        PowerNetwork net = make_power_network(
            {{1, 0.0, -0.6, 0.6}, {2, 1000.0, -0.6, 0.6}},
            {{1, 0.0, 2000.0, 1004.0}},
            {{1, 2, 10.0, -5000.0, 5000.0}}, 100.0);
        FlowState flows = dc_power_flow(net, 1);
        CHECK(flows.dispatch_mw[net.substation_index(1)] == doctest::Approx(1000.0));
        CHECK(std::abs(balance_residual(net, flows, 0)) <= 1e-8);
    }
}

TEST_CASE("disconnected topology is rejected at construction") {
    CHECK_THROWS_AS(make_power_network({{1, 0.0, -0.6, 0.6},
                                        {2, 10.0, -0.6, 0.6},
                                        {3, 0.0, -0.6, 0.6},
                                        {4, 10.0, -0.6, 0.6}},
                                       {{1, 0.0, 50.0, 20.0}},
                                       {{1, 2, 5.0, -100.0, 100.0},
                                        {3, 4, 5.0, -100.0, 100.0}},
                                       100.0),
                    InconsistentTopology);
}

TEST_CASE("coherency validation names the violated invariant") {
    PowerNetwork net = parse_matpower_case(itest::read_file(itest::data_path("cases/case9.m")));

    CoherencyConfig good{{{1, 2}, {3}}, {1, 3}};
    CHECK_NOTHROW(validate_coherency(net, good));

    CoherencyConfig overlapping{{{1, 2}, {2, 3}}, {1, 3}};
    CHECK_THROWS_AS(validate_coherency(net, overlapping), MalformedCase);

    CoherencyConfig load_bus{{{1, 5}}, {1}};
    CHECK_THROWS_AS(validate_coherency(net, load_bus), MalformedCase);

    CoherencyConfig foreign_ref{{{1, 2}, {3}}, {1, 2}};
    CHECK_THROWS_AS(validate_coherency(net, foreign_ref), MalformedCase);
}
