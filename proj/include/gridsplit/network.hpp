#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gridsplit {

using BusId = int;
using ZoneId = std::string;

enum class BusKind { slack, pv, pq };

std::string_view to_string(BusKind kind) noexcept;
BusKind bus_kind_from_string(std::string_view text);

struct Bus {
    BusId id = 0;
    ZoneId zone;
    BusKind kind = BusKind::pq;
    double base_kv = 1.0;
    double v_mag = 1.0;  // p.u.; voltage setpoint for slack and PV buses
    double v_ang = 0.0;  // rad
    double v_min = 0.9;
    double v_max = 1.1;
};

// Per-unit quantities are on the case MVA base. HVDC links carry only a fixed
// MW transfer from `from_bus` to `to_bus`; their impedance fields are unused.
struct Branch {
    BusId from_bus = 0;
    BusId to_bus = 0;
    double r = 0.0;
    double x = 0.0;
    double b_shunt = 0.0;
    double tap = 1.0;
    double rating_mva = 0.0;  // 0 means unrated
    bool is_hvdc = false;
    double dc_setpoint_mw = 0.0;
    bool in_service = true;
};

struct Generator {
    BusId bus = 0;
    double p_gen = 0.0;
    double q_gen = 0.0;
    double p_min = 0.0;
    double p_max = 0.0;
    double q_min = 0.0;
    double q_max = 0.0;
    bool in_service = true;
};

struct Load {
    BusId bus = 0;
    double p_load = 0.0;
    double q_load = 0.0;
    double sheddable_fraction = 1.0;
};

// Admittance to ground: g_mw consumed and b_mvar injected at 1.0 p.u.
struct Shunt {
    BusId bus = 0;
    double g_mw = 0.0;
    double b_mvar = 0.0;
    bool switched = false;
};

struct NetworkCase {
    double base_mva = 100.0;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Generator> generators;
    std::vector<Load> loads;
    std::vector<Shunt> shunts;
    std::map<ZoneId, std::string> zone_names;
    std::set<ZoneId> external_zones;
};

// Branches are identified by their position in NetworkCase::branches.
using BranchIndex = std::size_t;

struct Finding {
    std::string code;
    std::string message;
};

enum class CaseFormat { native_json, matpower };

CaseFormat case_format_from_tag(std::string_view tag);
CaseFormat infer_case_format(const std::filesystem::path& path);

inline constexpr std::string_view case_schema = "gridsplit-case/1";

// Bus id -> position in NetworkCase::buses.
std::unordered_map<BusId, std::size_t> bus_positions(const NetworkCase& network);

// Structural checks. An empty result means the case satisfies every invariant.
std::vector<Finding> validate(const NetworkCase& network);

// Throws Error(validation) listing every finding when validate() is non-empty.
void require_valid(const NetworkCase& network);

NetworkCase parse_case_json(std::string_view text);

// MATPOWER version-2 text case. Only baseMVA, bus, gen and branch matrices
// are read; other tables are skipped with a warning. Bus zones default to the
// area column. `warnings` may be null.
NetworkCase parse_matpower(std::string_view text, std::vector<std::string>* warnings = nullptr);

// Sidecar `{ "<bus_id>": "<zone_id>" }`.
std::map<BusId, ZoneId> parse_zone_map(std::string_view text);

// Overrides bus zones with the sidecar and rebuilds zone_names for zones that
// have no label yet. Buses absent from the map keep their zone.
void apply_zone_map(NetworkCase& network, const std::map<BusId, ZoneId>& zones);

// Reads and applies the optional sidecar without structural validation.
NetworkCase load_case(const std::filesystem::path& path, CaseFormat format,
                      const std::optional<std::filesystem::path>& zone_sidecar = std::nullopt,
                      std::vector<std::string>* warnings = nullptr);

// load_case followed by require_valid.
NetworkCase parse_case(const std::filesystem::path& path, CaseFormat format,
                       const std::optional<std::filesystem::path>& zone_sidecar = std::nullopt,
                       std::vector<std::string>* warnings = nullptr);

std::string to_json(const NetworkCase& network);

// Zones in deterministic order: integer-like ids numerically, then the rest
// lexicographically.
std::vector<ZoneId> ordered_zones(const NetworkCase& network);
bool zone_less(const ZoneId& a, const ZoneId& b);

// In-service branches with one endpoint in each zone, HVDC included (check
// Branch::is_hvdc to filter). Throws on an unknown zone.
std::vector<BranchIndex> tie_lines(const NetworkCase& network, const ZoneId& zone_a,
                                   const ZoneId& zone_b);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace gridsplit
