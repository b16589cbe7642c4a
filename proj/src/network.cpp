#include "gridsplit/network.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "gridsplit/error.hpp"
#include "json_util.hpp"

namespace gridsplit {

using detail::Json;

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::invalid_argument: return "invalid_argument";
        case ErrorKind::parse: return "parse";
        case ErrorKind::validation: return "validation";
        case ErrorKind::unsupported: return "unsupported";
        case ErrorKind::numerical: return "numerical";
        case ErrorKind::infeasible: return "infeasible";
    }
    return "unknown";
}

std::string_view to_string(BusKind kind) noexcept {
    switch (kind) {
        case BusKind::slack: return "slack";
        case BusKind::pv: return "PV";
        case BusKind::pq: return "PQ";
    }
    return "PQ";
}

BusKind bus_kind_from_string(std::string_view text) {
    std::string lower(text);
    std::ranges::transform(lower, lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "slack") return BusKind::slack;
    if (lower == "pv") return BusKind::pv;
    if (lower == "pq") return BusKind::pq;
    throw Error(ErrorKind::parse, "unknown bus kind '" + std::string(text) + "'");
}

CaseFormat case_format_from_tag(std::string_view tag) {
    if (tag == "json" || tag == "native" || tag == "gridsplit") return CaseFormat::native_json;
    if (tag == "matpower" || tag == "m") return CaseFormat::matpower;
    throw Error(ErrorKind::unsupported, "unsupported case format '" + std::string(tag) + "'");
}

CaseFormat infer_case_format(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".m") return CaseFormat::matpower;
    if (ext == ".json") return CaseFormat::native_json;
    throw Error(ErrorKind::unsupported,
                "cannot infer case format from '" + path.string() + "'; pass a format tag");
}

std::unordered_map<BusId, std::size_t> bus_positions(const NetworkCase& network) {
    std::unordered_map<BusId, std::size_t> positions;
    positions.reserve(network.buses.size());
    for (std::size_t i = 0; i < network.buses.size(); ++i) {
        positions.emplace(network.buses[i].id, i);
    }
    return positions;
}

namespace {

std::optional<long long> as_integer(const std::string& text) {
    if (text.empty()) return std::nullopt;
    long long value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

std::string format_number(double value) {
    std::ostringstream out;
    out << value;
    return out.str();
}

// Minimal union-find over positions.
class DisjointSets {
  public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

  private:
    std::vector<std::size_t> parent_;
};

}  // namespace

bool zone_less(const ZoneId& a, const ZoneId& b) {
    const auto ia = as_integer(a);
    const auto ib = as_integer(b);
    if (ia && ib) return *ia != *ib ? *ia < *ib : a < b;
    if (ia != ib && (ia || ib)) return ia.has_value();
    return a < b;
}

std::vector<ZoneId> ordered_zones(const NetworkCase& network) {
    std::set<ZoneId> zones;
    for (const auto& bus : network.buses) zones.insert(bus.zone);
    for (const auto& [zone, label] : network.zone_names) zones.insert(zone);
    std::vector<ZoneId> ordered(zones.begin(), zones.end());
    std::ranges::sort(ordered, zone_less);
    return ordered;
}

std::vector<Finding> validate(const NetworkCase& network) {
    std::vector<Finding> findings;
    auto add = [&findings](std::string code, std::string message) {
        findings.push_back({std::move(code), std::move(message)});
    };

    if (!(network.base_mva > 0.0)) add("base-mva", "base_mva must be positive");
    if (network.buses.empty()) add("no-buses", "case has no buses");

    std::unordered_map<BusId, std::size_t> positions;
    for (std::size_t i = 0; i < network.buses.size(); ++i) {
        const auto& bus = network.buses[i];
        if (!positions.emplace(bus.id, i).second) {
            add("duplicate-bus", "bus " + std::to_string(bus.id) + " defined more than once");
        }
        if (bus.zone.empty()) add("missing-zone", "bus " + std::to_string(bus.id) + " has no zone");
        if (!(bus.base_kv > 0.0)) {
            add("base-kv", "bus " + std::to_string(bus.id) + " base_kv must be positive");
        }
        if (bus.v_min > bus.v_max) {
            add("voltage-limits", "bus " + std::to_string(bus.id) + " has v_min > v_max");
        }
        if (!(bus.v_mag > 0.0)) add("voltage", "bus " + std::to_string(bus.id) + " v_mag must be positive");
    }
    auto known = [&positions](BusId id) { return positions.contains(id); };

    for (std::size_t i = 0; i < network.branches.size(); ++i) {
        const auto& br = network.branches[i];
        const auto tag = "branch " + std::to_string(i);
        for (BusId end : {br.from_bus, br.to_bus}) {
            if (!known(end)) add("dangling-bus", tag + " references undefined bus " + std::to_string(end));
        }
        if (br.from_bus == br.to_bus) add("self-loop", tag + " connects bus " + std::to_string(br.from_bus) + " to itself");
        if (!br.is_hvdc && br.x == 0.0) add("zero-reactance", tag + " has x = 0");
        if (!br.is_hvdc && !(br.tap > 0.0)) add("tap", tag + " tap ratio must be positive");
        if (br.rating_mva < 0.0) add("negative-rating", tag + " has negative rating_mva");
    }
    for (std::size_t i = 0; i < network.generators.size(); ++i) {
        const auto& gen = network.generators[i];
        const auto tag = "generator " + std::to_string(i);
        if (!known(gen.bus)) add("dangling-bus", tag + " references undefined bus " + std::to_string(gen.bus));
        if (gen.in_service && !(gen.p_min <= gen.p_gen && gen.p_gen <= gen.p_max)) {
            add("gen-limits", tag + " p_gen outside [p_min, p_max]");
        }
        if (gen.q_min > gen.q_max) add("gen-limits", tag + " has q_min > q_max");
    }
    for (std::size_t i = 0; i < network.loads.size(); ++i) {
        const auto& load = network.loads[i];
        const auto tag = "load " + std::to_string(i);
        if (!known(load.bus)) add("dangling-bus", tag + " references undefined bus " + std::to_string(load.bus));
        if (load.p_load < 0.0) add("load-negative", tag + " has negative p_load");
        if (!(load.sheddable_fraction >= 0.0 && load.sheddable_fraction <= 1.0)) {
            add("sheddable-fraction", tag + " sheddable_fraction outside [0, 1]");
        }
    }
    for (std::size_t i = 0; i < network.shunts.size(); ++i) {
        if (!known(network.shunts[i].bus)) {
            add("dangling-bus", "shunt " + std::to_string(i) + " references undefined bus " +
                                    std::to_string(network.shunts[i].bus));
        }
    }

    std::set<ZoneId> zones;
    for (const auto& bus : network.buses) zones.insert(bus.zone);
    for (const auto& zone : network.external_zones) {
        if (!zones.contains(zone) && !network.zone_names.contains(zone)) {
            add("external-zone", "external zone '" + zone + "' does not exist");
        }
    }
    if (!network.external_zones.empty() && zones.contains(std::string("X")) &&
        !network.external_zones.contains("X")) {
        add("reserved-zone", "zone id 'X' is reserved for the external vertex");
    }

    // One slack per AC-connected group of buses.
    if (findings.empty()) {
        DisjointSets sets(network.buses.size());
        for (const auto& br : network.branches) {
            if (br.in_service && !br.is_hvdc) sets.unite(positions.at(br.from_bus), positions.at(br.to_bus));
        }
        std::map<std::size_t, std::vector<BusId>> slacks;
        std::map<std::size_t, BusId> first_bus;
        for (std::size_t i = 0; i < network.buses.size(); ++i) {
            const auto root = sets.find(i);
            first_bus.try_emplace(root, network.buses[i].id);
            if (network.buses[i].kind == BusKind::slack) slacks[root].push_back(network.buses[i].id);
        }
        for (const auto& [root, bus] : first_bus) {
            const auto count = slacks.contains(root) ? slacks[root].size() : 0;
            if (count != 1) {
                add("slack-count", "subnetwork containing bus " + std::to_string(bus) + " has " +
                                       std::to_string(count) + " slack buses (need exactly 1)");
            }
        }
    }
    return findings;
}

void require_valid(const NetworkCase& network) {
    const auto findings = validate(network);
    if (findings.empty()) return;
    std::string message = "case failed validation:";
    for (const auto& f : findings) message += "\n  [" + f.code + "] " + f.message;
    throw Error(ErrorKind::validation, message);
}

namespace {

template <typename T>
T get_or(const Json& object, const char* key, T fallback) {
    const auto it = object.find(key);
    if (it == object.end() || it->is_null()) return fallback;
    return it->template get<T>();
}

ZoneId zone_from_json(const Json& value) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_number_integer()) return std::to_string(value.get<long long>());
    if (value.is_number()) return format_number(value.get<double>());
    throw Error(ErrorKind::parse, "zone ids must be strings or numbers");
}

}  // namespace

NetworkCase parse_case_json(std::string_view text) {
    NetworkCase network;
    try {
        const Json doc = Json::parse(text.begin(), text.end());
        if (!doc.is_object()) throw Error(ErrorKind::parse, "case document must be a JSON object");
        const auto schema = doc.find("schema");
        if (schema == doc.end()) throw Error(ErrorKind::parse, "missing 'schema' (expected gridsplit-case/1)");
        if (schema->get<std::string>() != case_schema) {
            throw Error(ErrorKind::unsupported, "unsupported case schema '" + schema->get<std::string>() + "'");
        }
        network.base_mva = doc.at("base_mva").get<double>();
        for (const auto& b : doc.at("buses")) {
            Bus bus;
            bus.id = b.at("id").get<BusId>();
            bus.zone = b.contains("zone") ? zone_from_json(b.at("zone")) : ZoneId{};
            bus.kind = bus_kind_from_string(get_or<std::string>(b, "kind", "PQ"));
            bus.base_kv = get_or(b, "base_kv", 1.0);
            bus.v_mag = get_or(b, "v_mag", 1.0);
            bus.v_ang = get_or(b, "v_ang", 0.0);
            bus.v_min = get_or(b, "v_min", 0.9);
            bus.v_max = get_or(b, "v_max", 1.1);
            network.buses.push_back(std::move(bus));
        }
        for (const auto& b : doc.at("branches")) {
            Branch br;
            br.from_bus = b.at("from_bus").get<BusId>();
            br.to_bus = b.at("to_bus").get<BusId>();
            br.is_hvdc = get_or(b, "is_hvdc", false);
            br.r = get_or(b, "r", 0.0);
            br.x = br.is_hvdc ? get_or(b, "x", 0.0) : b.at("x").get<double>();
            br.b_shunt = get_or(b, "b_shunt", 0.0);
            br.tap = get_or(b, "tap", 1.0);
            br.rating_mva = get_or(b, "rating_mva", 0.0);
            br.dc_setpoint_mw = get_or(b, "dc_setpoint_mw", 0.0);
            br.in_service = get_or(b, "in_service", true);
            network.branches.push_back(br);
        }
        if (const auto it = doc.find("generators"); it != doc.end()) {
            for (const auto& g : *it) {
                Generator gen;
                gen.bus = g.at("bus").get<BusId>();
                gen.p_gen = get_or(g, "p_gen", 0.0);
                gen.q_gen = get_or(g, "q_gen", 0.0);
                gen.p_min = get_or(g, "p_min", 0.0);
                gen.p_max = get_or(g, "p_max", gen.p_gen);
                gen.q_min = get_or(g, "q_min", -9999.0);
                gen.q_max = get_or(g, "q_max", 9999.0);
                gen.in_service = get_or(g, "in_service", true);
                network.generators.push_back(gen);
            }
        }
        if (const auto it = doc.find("loads"); it != doc.end()) {
            for (const auto& l : *it) {
                Load load;
                load.bus = l.at("bus").get<BusId>();
                load.p_load = get_or(l, "p_load", 0.0);
                load.q_load = get_or(l, "q_load", 0.0);
                load.sheddable_fraction = get_or(l, "sheddable_fraction", 1.0);
                network.loads.push_back(load);
            }
        }
        if (const auto it = doc.find("shunts"); it != doc.end()) {
            for (const auto& s : *it) {
                Shunt shunt;
                shunt.bus = s.at("bus").get<BusId>();
                shunt.g_mw = get_or(s, "g_mw", 0.0);
                shunt.b_mvar = get_or(s, "b_mvar", 0.0);
                shunt.switched = get_or(s, "switched", false);
                network.shunts.push_back(shunt);
            }
        }
        if (const auto it = doc.find("zones"); it != doc.end()) {
            for (const auto& [zone, label] : it->items()) network.zone_names[zone] = label.get<std::string>();
        }
        if (const auto it = doc.find("external_zones"); it != doc.end()) {
            for (const auto& zone : *it) network.external_zones.insert(zone_from_json(zone));
        }
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::parse, std::string("malformed case JSON: ") + e.what());
    }
    for (const auto& bus : network.buses) {
        if (!bus.zone.empty()) network.zone_names.try_emplace(bus.zone, bus.zone);
    }
    return network;
}

namespace {

// Strips MATLAB comments ('%' to end of line, outside quotes).
std::string strip_comments(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool in_comment = false;
    bool in_quote = false;
    for (char c : text) {
        if (c == '\n') {
            in_comment = false;
            in_quote = false;
            out.push_back(c);
            continue;
        }
        if (in_comment) continue;
        if (c == '\'') in_quote = !in_quote;
        if (c == '%' && !in_quote) {
            in_comment = true;
            continue;
        }
        out.push_back(c);
    }
    return out;
}

using Matrix = std::vector<std::vector<double>>;

Matrix parse_matrix_body(std::string_view body, const std::string& name) {
    Matrix rows;
    std::vector<double> row;
    std::string token;
    auto flush_token = [&] {
        if (token.empty()) return;
        char* end = nullptr;
        const double value = std::strtod(token.c_str(), &end);
        if (end != token.c_str() + token.size()) {
            throw Error(ErrorKind::parse, "bad number '" + token + "' in mpc." + name);
        }
        row.push_back(value);
        token.clear();
    };
    auto flush_row = [&] {
        flush_token();
        if (!row.empty()) rows.push_back(std::move(row));
        row.clear();
    };
    for (char c : body) {
        if (c == ';' || c == '\n') {
            flush_row();
        } else if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
            flush_token();
        } else {
            token.push_back(c);
        }
    }
    flush_row();
    return rows;
}

}  // namespace

NetworkCase parse_matpower(std::string_view raw, std::vector<std::string>* warnings) {
    auto warn = [warnings](std::string message) {
        if (warnings) warnings->push_back(std::move(message));
    };
    const std::string text = strip_comments(raw);

    std::optional<double> base_mva;
    std::map<std::string, Matrix> matrices;
    std::size_t pos = 0;
    while ((pos = text.find("mpc.", pos)) != std::string::npos) {
        std::size_t name_end = pos + 4;
        while (name_end < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[name_end])) || text[name_end] == '_')) {
            ++name_end;
        }
        const std::string name = text.substr(pos + 4, name_end - pos - 4);
        const auto eq = text.find('=', name_end);
        if (eq == std::string::npos) break;
        std::size_t value_start = eq + 1;
        while (value_start < text.size() && std::isspace(static_cast<unsigned char>(text[value_start]))) {
            ++value_start;
        }
        if (value_start >= text.size()) break;
        const char opener = text[value_start];
        if (opener == '[' || opener == '{') {
            const char closer = opener == '[' ? ']' : '}';
            const auto close = text.find(closer, value_start);
            if (close == std::string::npos) throw Error(ErrorKind::parse, "unterminated mpc." + name);
            if (opener == '[' && (name == "bus" || name == "gen" || name == "branch")) {
                matrices[name] = parse_matrix_body(
                    std::string_view(text).substr(value_start + 1, close - value_start - 1), name);
            } else {
                warn("ignored MATPOWER table mpc." + name);
            }
            pos = close + 1;
        } else {
            const auto semi = text.find_first_of(";\n", value_start);
            const std::string value = text.substr(value_start, semi - value_start);
            if (name == "baseMVA") {
                char* end = nullptr;
                base_mva = std::strtod(value.c_str(), &end);
                if (end == value.c_str()) throw Error(ErrorKind::parse, "bad mpc.baseMVA");
            } else if (name == "version") {
                if (value.find('2') == std::string::npos) {
                    throw Error(ErrorKind::unsupported, "only MATPOWER case format version 2 is supported");
                }
            }
            pos = semi == std::string::npos ? text.size() : semi;
        }
    }
    if (!base_mva) throw Error(ErrorKind::parse, "MATPOWER case lacks mpc.baseMVA");
    for (const char* required : {"bus", "gen", "branch"}) {
        if (!matrices.contains(required)) {
            throw Error(ErrorKind::parse, std::string("MATPOWER case lacks mpc.") + required);
        }
    }

    auto require_columns = [](const Matrix& m, std::size_t n, const char* name) {
        for (const auto& row : m) {
            if (row.size() < n) {
                throw Error(ErrorKind::parse, std::string("mpc.") + name + " row has fewer than " +
                                                  std::to_string(n) + " columns");
            }
        }
    };
    const auto& bus_m = matrices["bus"];
    const auto& gen_m = matrices["gen"];
    const auto& branch_m = matrices["branch"];
    require_columns(bus_m, 13, "bus");
    require_columns(gen_m, 10, "gen");
    require_columns(branch_m, 11, "branch");

    NetworkCase network;
    network.base_mva = *base_mva;
    std::set<BusId> isolated;
    bool defaulted_kv = false;
    constexpr double deg = std::numbers::pi / 180.0;
    for (const auto& row : bus_m) {
        const auto id = static_cast<BusId>(row[0]);
        const int type = static_cast<int>(row[1]);
        if (type == 4) {
            isolated.insert(id);
            continue;
        }
        Bus bus;
        bus.id = id;
        bus.kind = type == 3 ? BusKind::slack : type == 2 ? BusKind::pv : BusKind::pq;
        bus.zone = format_number(row[6]);
        bus.v_mag = row[7];
        bus.v_ang = row[8] * deg;
        bus.base_kv = row[9];
        if (!(bus.base_kv > 0.0)) {
            bus.base_kv = 1.0;
            defaulted_kv = true;
        }
        bus.v_max = row[11];
        bus.v_min = row[12];
        network.buses.push_back(bus);
        if (row[2] != 0.0 || row[3] != 0.0) network.loads.push_back({id, row[2], row[3], 1.0});
        if (row[4] != 0.0 || row[5] != 0.0) network.shunts.push_back({id, row[4], row[5], false});
    }
    if (defaulted_kv) warn("buses with baseKV = 0 were given base_kv = 1");
    if (!isolated.empty()) warn(std::to_string(isolated.size()) + " isolated buses (type 4) dropped");

    const auto positions = bus_positions(network);
    for (const auto& row : gen_m) {
        const auto bus_id = static_cast<BusId>(row[0]);
        if (isolated.contains(bus_id)) continue;
        Generator gen;
        gen.bus = bus_id;
        gen.p_gen = row[1];
        gen.q_gen = row[2];
        gen.q_max = row[3];
        gen.q_min = row[4];
        gen.in_service = row[7] > 0.0;
        gen.p_max = row[8];
        gen.p_min = row[9];
        network.generators.push_back(gen);
        if (gen.in_service) {
            if (const auto it = positions.find(bus_id); it != positions.end()) {
                auto& bus = network.buses[it->second];
                if (bus.kind != BusKind::pq) bus.v_mag = row[5];
            }
        }
    }
    bool shifted = false;
    for (const auto& row : branch_m) {
        Branch br;
        br.from_bus = static_cast<BusId>(row[0]);
        br.to_bus = static_cast<BusId>(row[1]);
        br.r = row[2];
        br.x = row[3];
        br.b_shunt = row[4];
        br.rating_mva = row[5];
        br.tap = row[8] == 0.0 ? 1.0 : row[8];
        br.in_service = row[10] > 0.0 && !isolated.contains(br.from_bus) && !isolated.contains(br.to_bus);
        if (row[9] != 0.0) shifted = true;
        network.branches.push_back(br);
    }
    if (shifted) warn("phase-shift angles are not modelled and were ignored");

    for (const auto& bus : network.buses) network.zone_names.try_emplace(bus.zone, bus.zone);
    return network;
}

std::map<BusId, ZoneId> parse_zone_map(std::string_view text) {
    std::map<BusId, ZoneId> zones;
    try {
        const Json doc = Json::parse(text.begin(), text.end());
        if (!doc.is_object()) throw Error(ErrorKind::parse, "zone sidecar must be a JSON object");
        for (const auto& [key, value] : doc.items()) {
            const auto id = as_integer(key);
            if (!id) throw Error(ErrorKind::parse, "zone sidecar key '" + key + "' is not a bus id");
            zones[static_cast<BusId>(*id)] = zone_from_json(value);
        }
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::parse, std::string("malformed zone sidecar: ") + e.what());
    }
    return zones;
}

void apply_zone_map(NetworkCase& network, const std::map<BusId, ZoneId>& zones) {
    const auto positions = bus_positions(network);
    for (const auto& [bus, zone] : zones) {
        const auto it = positions.find(bus);
        if (it == positions.end()) {
            throw Error(ErrorKind::validation, "zone sidecar references undefined bus " + std::to_string(bus));
        }
        network.buses[it->second].zone = zone;
    }
    std::map<ZoneId, std::string> names;
    for (const auto& bus : network.buses) {
        const auto old = network.zone_names.find(bus.zone);
        names.try_emplace(bus.zone, old != network.zone_names.end() ? old->second : bus.zone);
    }
    for (const auto& zone : network.external_zones) {
        if (const auto old = network.zone_names.find(zone); old != network.zone_names.end()) {
            names.try_emplace(zone, old->second);
        }
    }
    network.zone_names = std::move(names);
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::invalid_argument, "cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

NetworkCase load_case(const std::filesystem::path& path, CaseFormat format,
                      const std::optional<std::filesystem::path>& zone_sidecar,
                      std::vector<std::string>* warnings) {
    const auto text = read_text_file(path);
    NetworkCase network = format == CaseFormat::matpower ? parse_matpower(text, warnings) : parse_case_json(text);
    if (zone_sidecar) apply_zone_map(network, parse_zone_map(read_text_file(*zone_sidecar)));
    return network;
}

NetworkCase parse_case(const std::filesystem::path& path, CaseFormat format,
                       const std::optional<std::filesystem::path>& zone_sidecar,
                       std::vector<std::string>* warnings) {
    NetworkCase network = load_case(path, format, zone_sidecar, warnings);
    require_valid(network);
    return network;
}

std::string to_json(const NetworkCase& network) {
    Json doc;
    doc["schema"] = case_schema;
    doc["base_mva"] = network.base_mva;
    Json buses = Json::array();
    for (const auto& bus : network.buses) {
        buses.push_back({{"id", bus.id},
                         {"zone", bus.zone},
                         {"kind", to_string(bus.kind)},
                         {"base_kv", bus.base_kv},
                         {"v_mag", bus.v_mag},
                         {"v_ang", bus.v_ang},
                         {"v_min", bus.v_min},
                         {"v_max", bus.v_max}});
    }
    doc["buses"] = std::move(buses);
    Json branches = Json::array();
    for (const auto& br : network.branches) {
        branches.push_back({{"from_bus", br.from_bus},
                            {"to_bus", br.to_bus},
                            {"r", br.r},
                            {"x", br.x},
                            {"b_shunt", br.b_shunt},
                            {"tap", br.tap},
                            {"rating_mva", br.rating_mva},
                            {"is_hvdc", br.is_hvdc},
                            {"dc_setpoint_mw", br.dc_setpoint_mw},
                            {"in_service", br.in_service}});
    }
    doc["branches"] = std::move(branches);
    Json gens = Json::array();
    for (const auto& g : network.generators) {
        gens.push_back({{"bus", g.bus},
                        {"p_gen", g.p_gen},
                        {"q_gen", g.q_gen},
                        {"p_min", g.p_min},
                        {"p_max", g.p_max},
                        {"q_min", g.q_min},
                        {"q_max", g.q_max},
                        {"in_service", g.in_service}});
    }
    doc["generators"] = std::move(gens);
    Json loads = Json::array();
    for (const auto& l : network.loads) {
        loads.push_back({{"bus", l.bus},
                         {"p_load", l.p_load},
                         {"q_load", l.q_load},
                         {"sheddable_fraction", l.sheddable_fraction}});
    }
    doc["loads"] = std::move(loads);
    Json shunts = Json::array();
    for (const auto& s : network.shunts) {
        shunts.push_back({{"bus", s.bus}, {"g_mw", s.g_mw}, {"b_mvar", s.b_mvar}, {"switched", s.switched}});
    }
    doc["shunts"] = std::move(shunts);
    Json zones = Json::object();
    for (const auto& zone : ordered_zones(network)) {
        const auto it = network.zone_names.find(zone);
        zones[zone] = it != network.zone_names.end() ? it->second : zone;
    }
    doc["zones"] = std::move(zones);
    Json external = Json::array();
    std::vector<ZoneId> ext(network.external_zones.begin(), network.external_zones.end());
    std::ranges::sort(ext, zone_less);
    for (const auto& zone : ext) external.push_back(zone);
    doc["external_zones"] = std::move(external);
    return detail::dump(doc);
}

std::vector<BranchIndex> tie_lines(const NetworkCase& network, const ZoneId& zone_a, const ZoneId& zone_b) {
    const auto zones = ordered_zones(network);
    for (const auto* zone : {&zone_a, &zone_b}) {
        if (std::ranges::find(zones, *zone) == zones.end()) {
            throw Error(ErrorKind::invalid_argument, "unknown zone '" + *zone + "'");
        }
    }
    const auto positions = bus_positions(network);
    std::vector<BranchIndex> ties;
    if (zone_a == zone_b) return ties;
    for (BranchIndex i = 0; i < network.branches.size(); ++i) {
        const auto& br = network.branches[i];
        if (!br.in_service) continue;
        const auto& zf = network.buses[positions.at(br.from_bus)].zone;
        const auto& zt = network.buses[positions.at(br.to_bus)].zone;
        if ((zf == zone_a && zt == zone_b) || (zf == zone_b && zt == zone_a)) ties.push_back(i);
    }
    return ties;
}

}  // namespace gridsplit
