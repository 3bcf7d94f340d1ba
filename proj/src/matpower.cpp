#include "islanding/matpower.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "islanding/network_json.hpp"

namespace islanding {

namespace {

using Matrix = std::vector<std::vector<double>>;

std::string strip_comments(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool in_comment = false;
    for (char c : text) {
        if (c == '%') in_comment = true;
        if (c == '\n') in_comment = false;
        out.push_back(in_comment ? ' ' : c);
    }
    return out;
}

// Finds "mpc.<name>" at a token boundary, returns position after the name.
size_t find_field(const std::string& text, const std::string& name) {
    const std::string needle = "mpc." + name;
    size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        size_t after = pos + needle.size();
        char c = after < text.size() ? text[after] : ' ';
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return after;
        pos = after;
    }
    return std::string::npos;
}

size_t skip_space(const std::string& text, size_t pos) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    return pos;
}

double parse_scalar_field(const std::string& text, const std::string& name) {
    size_t pos = find_field(text, name);
    if (pos == std::string::npos) throw MalformedCase("missing mpc." + name);
    pos = skip_space(text, pos);
    if (pos >= text.size() || text[pos] != '=')
        throw MalformedCase("expected '=' after mpc." + name);
    pos = skip_space(text, pos + 1);
    const char* begin = text.c_str() + pos;
    char* end = nullptr;
    double value = std::strtod(begin, &end);
    if (end == begin) throw MalformedCase("could not parse value of mpc." + name);
    return value;
}

std::vector<double> parse_row(const std::string& row, const std::string& name) {
    std::vector<double> values;
    const char* p = row.c_str();
    const char* stop = p + row.size();
    while (p < stop) {
        while (p < stop && (std::isspace(static_cast<unsigned char>(*p)) || *p == ',')) ++p;
        if (p >= stop) break;
        char* end = nullptr;
        double v = std::strtod(p, &end);
        if (end == p)
            throw MalformedCase("unparsable entry in mpc." + name + " row: '" + row + "'");
        values.push_back(v);
        p = end;
    }
    return values;
}

Matrix parse_matrix_field(const std::string& text, const std::string& name) {
    size_t pos = find_field(text, name);
    if (pos == std::string::npos) throw MalformedCase("missing matrix mpc." + name);
    pos = skip_space(text, pos);
    if (pos >= text.size() || text[pos] != '=')
        throw MalformedCase("expected '=' after mpc." + name);
    pos = skip_space(text, pos + 1);
    if (pos >= text.size() || text[pos] != '[')
        throw MalformedCase("expected '[' to open mpc." + name);
    size_t close = text.find(']', pos + 1);
    if (close == std::string::npos)
        throw MalformedCase("unterminated matrix mpc." + name);

    std::string body = text.substr(pos + 1, close - pos - 1);
    for (char& c : body)
        if (c == '\n' || c == '\r') c = ';';

    Matrix rows;
    std::stringstream ss(body);
    std::string row_text;
    while (std::getline(ss, row_text, ';')) {
        std::vector<double> row = parse_row(row_text, name);
        if (row.empty()) continue;
        if (!rows.empty() && row.size() != rows.front().size())
            throw MalformedCase("inconsistent column count in mpc." + name);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw MalformedCase("matrix mpc." + name + " is empty");
    return rows;
}

}  // namespace

PowerNetwork parse_matpower_case(const std::string& raw) {
    const std::string text = strip_comments(raw);

    const double base_mva = parse_scalar_field(text, "baseMVA");
    if (base_mva <= 0.0) throw MalformedCase("baseMVA must be positive");

    Matrix bus = parse_matrix_field(text, "bus");
    Matrix gen = parse_matrix_field(text, "gen");
    Matrix branch = parse_matrix_field(text, "branch");

    if (bus.front().size() < 3)
        throw MalformedCase("mpc.bus needs at least BUS_I, BUS_TYPE, PD columns");
    if (gen.front().size() < 10)
        throw MalformedCase("mpc.gen needs at least 10 columns (through PMIN)");
    if (branch.front().size() < 11)
        throw MalformedCase("mpc.branch needs at least 11 columns (through BR_STATUS)");

    std::vector<Substation> substations;
    substations.reserve(bus.size());
    for (const auto& row : bus) {
        Substation s;
        s.id = static_cast<int>(row[0]);
        s.load_mw = row[2];
        if (s.load_mw < 0.0)
            throw MalformedCase("negative PD at bus " + std::to_string(s.id));
        substations.push_back(s);
    }

    std::vector<Generator> generators;
    generators.reserve(gen.size());
    for (const auto& row : gen) {
        Generator g;
        g.substation_id = static_cast<int>(row[0]);
        g.initial_dispatch_mw = row[1];
        g.gen_max_mw = row[8];
        g.gen_min_mw = row[9];
        generators.push_back(g);
    }

    const double angle_span = 2.0 * kDefaultAngleBoundRad;
    std::vector<TransmissionLine> lines;
    lines.reserve(branch.size());
    for (const auto& row : branch) {
        if (row[10] == 0.0) continue;  // out of service
        TransmissionLine l;
        l.from_id = static_cast<int>(row[0]);
        l.to_id = static_cast<int>(row[1]);
        double reactance = row[3];
        if (reactance == 0.0)
            throw ZeroReactance("branch (" + std::to_string(l.from_id) + "," +
                                std::to_string(l.to_id) + ") has zero reactance");
        l.susceptance_pu = 1.0 / std::abs(reactance);
        double rate_a = row[5];
        if (rate_a <= 0.0)
            rate_a = base_mva * l.susceptance_pu * angle_span;  // unlimited per MATPOWER
        l.flow_max_mw = rate_a;
        l.flow_min_mw = -rate_a;
        lines.push_back(l);
    }

    return make_power_network(std::move(substations), std::move(generators),
                              std::move(lines), base_mva);
}

PowerNetwork parse_matpower_case(std::istream& in) {
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_matpower_case(ss.str());
}

PowerNetwork load_case_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MalformedCase("case file not found: " + path);
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
        std::stringstream ss;
        ss << in.rdbuf();
        return parse_network_json(ss.str());
    }
    return parse_matpower_case(in);
}

}  // namespace islanding
