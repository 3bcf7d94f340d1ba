#include "islanding/network_json.hpp"

namespace islanding {

using nlohmann::json;

json network_to_json(const PowerNetwork& network) {
    json subs = json::array();
    for (const auto& s : network.substations()) {
        subs.push_back({{"id", s.id},
                        {"load_mw", s.load_mw},
                        {"angle_min_rad", s.angle_min_rad},
                        {"angle_max_rad", s.angle_max_rad}});
    }
    json gens = json::array();
    for (const auto& g : network.generators()) {
        gens.push_back({{"substation_id", g.substation_id},
                        {"gen_min_mw", g.gen_min_mw},
                        {"gen_max_mw", g.gen_max_mw},
                        {"initial_dispatch_mw", g.initial_dispatch_mw}});
    }
    json lines = json::array();
    for (const auto& l : network.lines()) {
        lines.push_back({{"from_id", l.from_id},
                         {"to_id", l.to_id},
                         {"susceptance_pu", l.susceptance_pu},
                         {"flow_min_mw", l.flow_min_mw},
                         {"flow_max_mw", l.flow_max_mw}});
    }
    return json{{"base_mva", network.base_mva()},
                {"substations", subs},
                {"generators", gens},
                {"lines", lines}};
}

PowerNetwork parse_network_json(const json& j) {
    try {
        std::vector<Substation> subs;
        for (const auto& s : j.at("substations")) {
            Substation sub;
            sub.id = s.at("id").get<int>();
            sub.load_mw = s.at("load_mw").get<double>();
            sub.angle_min_rad = s.value("angle_min_rad", -kDefaultAngleBoundRad);
            sub.angle_max_rad = s.value("angle_max_rad", kDefaultAngleBoundRad);
            subs.push_back(sub);
        }
        std::vector<Generator> gens;
        for (const auto& g : j.value("generators", json::array())) {
            Generator gen;
            gen.substation_id = g.at("substation_id").get<int>();
            gen.gen_min_mw = g.at("gen_min_mw").get<double>();
            gen.gen_max_mw = g.at("gen_max_mw").get<double>();
            gen.initial_dispatch_mw = g.at("initial_dispatch_mw").get<double>();
            gens.push_back(gen);
        }
        std::vector<TransmissionLine> lines;
        for (const auto& l : j.at("lines")) {
            TransmissionLine line;
            line.from_id = l.at("from_id").get<int>();
            line.to_id = l.at("to_id").get<int>();
            line.susceptance_pu = l.at("susceptance_pu").get<double>();
            line.flow_min_mw = l.at("flow_min_mw").get<double>();
            line.flow_max_mw = l.at("flow_max_mw").get<double>();
            lines.push_back(line);
        }
        return make_power_network(std::move(subs), std::move(gens), std::move(lines),
                                  j.at("base_mva").get<double>());
    } catch (const json::exception& e) {
        throw MalformedCase(std::string("invalid network JSON: ") + e.what());
    }
}

PowerNetwork parse_network_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw MalformedCase("network JSON does not parse");
    return parse_network_json(j);
}

json coherency_to_json(const CoherencyConfig& coherency) {
    return json{{"groups", coherency.groups},
                {"reference_generators", coherency.reference_generator}};
}

CoherencyConfig coherency_from_json(const json& j) {
    try {
        CoherencyConfig c;
        c.groups = j.at("groups").get<std::vector<std::vector<int>>>();
        c.reference_generator = j.at("reference_generators").get<std::vector<int>>();
        return c;
    } catch (const json::exception& e) {
        throw MalformedCase(std::string("invalid coherency JSON: ") + e.what());
    }
}

}  // namespace islanding
