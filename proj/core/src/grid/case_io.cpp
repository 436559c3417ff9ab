#include <string>

#include "detail/json_util.hpp"
#include "kanopf/grid/power_system.hpp"

namespace kanopf::grid {

namespace {

using detail::Json;
using namespace detail;

std::string item_path(const std::string& key, std::size_t k) { return "/" + key + "/" + std::to_string(k); }

int int_id(const Json& j, const char* key, const std::string& path) {
    const long long v = integer(j, key, path);
    if (v < 0 || v > 1'000'000'000) throw ConfigError(path + "/" + key + ": id out of range");
    return static_cast<int>(v);
}

BusType bus_type(const std::string& s, const std::string& path) {
    if (s == "slack") return BusType::slack;
    if (s == "pv") return BusType::pv;
    if (s == "pq") return BusType::pq;
    throw ConfigError(path + "/type: expected slack, pv or pq");
}

const char* bus_type_name(BusType t) {
    switch (t) {
        case BusType::slack: return "slack";
        case BusType::pv: return "pv";
        case BusType::pq: return "pq";
    }
    return "pq";
}

TargetKind target_kind(const std::string& s, const std::string& path) {
    if (s == "load") return TargetKind::load_factor;
    if (s == "res") return TargetKind::res_factor;
    if (s == "outage") return TargetKind::branch_outage;
    throw ConfigError(path + "/kind: expected load, res or outage");
}

const char* target_kind_name(TargetKind k) {
    switch (k) {
        case TargetKind::load_factor: return "load";
        case TargetKind::res_factor: return "res";
        case TargetKind::branch_outage: return "outage";
    }
    return "load";
}

}  // namespace

PowerSystem parse_case(const std::string& text, const std::string& origin) {
    const Json root = parse_json(text, origin);
    try {
        const std::string p;
        reject_unknown_keys(root, {"schema_version", "name", "base_mva", "cost_units", "ac_buses", "ac_branches",
                                   "dc_buses", "dc_branches", "converters", "generators", "res_units",
                                   "uncertainty"},
                            p);
        if (integer(root, "schema_version", p) != 1) throw ConfigError("/schema_version: unsupported version");
        PowerSystem sys;
        sys.name = string_or(root, "name", "", p);
        sys.base_mva = number_or(root, "base_mva", 100.0, p);

        const Json& buses = array(root, "ac_buses", p);
        for (std::size_t k = 0; k < buses.size(); ++k) {
            const Json& j = buses[k];
            const std::string q = item_path("ac_buses", k);
            reject_unknown_keys(j, {"id", "type", "v_min", "v_max", "p_load", "q_load", "v_setpoint"}, q);
            AcBus b;
            b.id = int_id(j, "id", q);
            b.type = bus_type(string(j, "type", q), q);
            b.v_min = number_or(j, "v_min", b.v_min, q);
            b.v_max = number_or(j, "v_max", b.v_max, q);
            b.p_load = number_or(j, "p_load", 0.0, q);
            b.q_load = number_or(j, "q_load", 0.0, q);
            b.v_setpoint = number_or(j, "v_setpoint", 1.0, q);
            sys.ac_buses.push_back(b);
        }
        if (root.contains("ac_branches")) {
            const Json& arr = array(root, "ac_branches", p);
            for (std::size_t k = 0; k < arr.size(); ++k) {
                const Json& j = arr[k];
                const std::string q = item_path("ac_branches", k);
                reject_unknown_keys(j, {"id", "from", "to", "r", "x", "s_max", "in_service"}, q);
                AcBranch br;
                br.id = int_id(j, "id", q);
                br.from = int_id(j, "from", q);
                br.to = int_id(j, "to", q);
                br.r = number(j, "r", q);
                br.x = number(j, "x", q);
                br.s_max = number(j, "s_max", q);
                br.in_service = boolean_or(j, "in_service", true, q);
                sys.ac_branches.push_back(br);
            }
        }
        if (root.contains("dc_buses")) {
            const Json& arr = array(root, "dc_buses", p);
            for (std::size_t k = 0; k < arr.size(); ++k) {
                const Json& j = arr[k];
                const std::string q = item_path("dc_buses", k);
                reject_unknown_keys(j, {"id", "v_min", "v_max"}, q);
                DcBus b;
                b.id = int_id(j, "id", q);
                b.v_min = number_or(j, "v_min", b.v_min, q);
                b.v_max = number_or(j, "v_max", b.v_max, q);
                sys.dc_buses.push_back(b);
            }
        }
        if (root.contains("dc_branches")) {
            const Json& arr = array(root, "dc_branches", p);
            for (std::size_t k = 0; k < arr.size(); ++k) {
                const Json& j = arr[k];
                const std::string q = item_path("dc_branches", k);
                reject_unknown_keys(j, {"id", "from", "to", "r", "p_max"}, q);
                DcBranch br;
                br.id = int_id(j, "id", q);
                br.from = int_id(j, "from", q);
                br.to = int_id(j, "to", q);
                br.r = number(j, "r", q);
                br.p_max = number(j, "p_max", q);
                sys.dc_branches.push_back(br);
            }
        }
        if (root.contains("converters")) {
            const Json& arr = array(root, "converters", p);
            for (std::size_t k = 0; k < arr.size(); ++k) {
                const Json& j = arr[k];
                const std::string q = item_path("converters", k);
                reject_unknown_keys(j, {"id", "ac_bus", "dc_bus", "p_max", "loss", "control", "v_dc_setpoint",
                                        "p_dc_setpoint"},
                                    q);
                Converter c;
                c.id = int_id(j, "id", q);
                c.ac_bus = int_id(j, "ac_bus", q);
                c.dc_bus = int_id(j, "dc_bus", q);
                c.p_max = number(j, "p_max", q);
                if (j.contains("loss")) {
                    const Json& loss = j.at("loss");
                    reject_unknown_keys(loss, {"a", "b", "c"}, q + "/loss");
                    c.loss_a = number_or(loss, "a", 0.0, q + "/loss");
                    c.loss_b = number_or(loss, "b", 0.0, q + "/loss");
                    c.loss_c = number_or(loss, "c", 0.0, q + "/loss");
                }
                const std::string control = string_or(j, "control", "p_dc", q);
                if (control == "dc_slack") {
                    c.dc_slack = true;
                } else if (control != "p_dc") {
                    throw ConfigError(q + "/control: expected dc_slack or p_dc");
                }
                c.v_dc_setpoint = number_or(j, "v_dc_setpoint", 1.0, q);
                c.p_dc_setpoint = number_or(j, "p_dc_setpoint", 0.0, q);
                sys.converters.push_back(c);
            }
        }
        const Json& gens = array(root, "generators", p);
        for (std::size_t k = 0; k < gens.size(); ++k) {
            const Json& j = gens[k];
            const std::string q = item_path("generators", k);
            reject_unknown_keys(j, {"id", "bus", "p_min", "p_max", "q_min", "q_max", "cost", "p_setpoint"}, q);
            Generator g;
            g.id = int_id(j, "id", q);
            g.bus = int_id(j, "bus", q);
            g.p_min = number_or(j, "p_min", 0.0, q);
            g.p_max = number(j, "p_max", q);
            g.q_min = number_or(j, "q_min", g.q_min, q);
            g.q_max = number_or(j, "q_max", g.q_max, q);
            const Json& cost = member(j, "cost", q);
            reject_unknown_keys(cost, {"c0", "c1", "c2"}, q + "/cost");
            g.c0 = number_or(cost, "c0", 0.0, q + "/cost");
            g.c1 = number_or(cost, "c1", 0.0, q + "/cost");
            g.c2 = number_or(cost, "c2", 0.0, q + "/cost");
            g.p_setpoint = number_or(j, "p_setpoint", 0.0, q);
            sys.generators.push_back(g);
        }
        if (root.contains("res_units")) {
            const Json& arr = array(root, "res_units", p);
            for (std::size_t k = 0; k < arr.size(); ++k) {
                const Json& j = arr[k];
                const std::string q = item_path("res_units", k);
                reject_unknown_keys(j, {"id", "bus", "capacity", "output"}, q);
                ResUnit r;
                r.id = int_id(j, "id", q);
                r.bus = int_id(j, "bus", q);
                r.capacity = number(j, "capacity", q);
                r.output = number_or(j, "output", r.capacity, q);
                sys.res_units.push_back(r);
            }
        }
        if (root.contains("uncertainty")) {
            const Json& arr = array(root, "uncertainty", p);
            for (std::size_t k = 0; k < arr.size(); ++k) {
                const Json& j = arr[k];
                const std::string q = item_path("uncertainty", k);
                reject_unknown_keys(j, {"name", "target", "distribution"}, q);
                ScenarioTarget t;
                t.name = string(j, "name", q);
                const Json& target = member(j, "target", q);
                reject_unknown_keys(target, {"kind", "id"}, q + "/target");
                t.kind = target_kind(string(target, "kind", q + "/target"), q + "/target");
                t.id = int_id(target, "id", q + "/target");
                t.distribution = distribution_from_json(member(j, "distribution", q), q + "/distribution");
                sys.scenario_map.push_back(t);
            }
        }
        validate(sys);
        return sys;
    } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
    } catch (const ConnectivityError& e) {
        throw ConnectivityError(origin + ": " + e.what());
    }
}

PowerSystem load_case(const std::filesystem::path& path) {
    return parse_case(detail::read_text_file(path.string()), path.string());
}

std::string case_to_string(const PowerSystem& sys) {
    Json root;
    root["schema_version"] = 1;
    root["name"] = sys.name;
    root["base_mva"] = sys.base_mva;
    root["cost_units"] = "$/h with P in p.u.";
    Json buses = Json::array();
    for (const auto& b : sys.ac_buses) {
        buses.push_back({{"id", b.id},
                         {"type", bus_type_name(b.type)},
                         {"v_min", b.v_min},
                         {"v_max", b.v_max},
                         {"p_load", b.p_load},
                         {"q_load", b.q_load},
                         {"v_setpoint", b.v_setpoint}});
    }
    root["ac_buses"] = buses;
    Json branches = Json::array();
    for (const auto& br : sys.ac_branches) {
        branches.push_back({{"id", br.id},
                            {"from", br.from},
                            {"to", br.to},
                            {"r", br.r},
                            {"x", br.x},
                            {"s_max", br.s_max},
                            {"in_service", br.in_service}});
    }
    root["ac_branches"] = branches;
    Json dc_buses = Json::array();
    for (const auto& b : sys.dc_buses) dc_buses.push_back({{"id", b.id}, {"v_min", b.v_min}, {"v_max", b.v_max}});
    root["dc_buses"] = dc_buses;
    Json dc_branches = Json::array();
    for (const auto& br : sys.dc_branches) {
        dc_branches.push_back({{"id", br.id}, {"from", br.from}, {"to", br.to}, {"r", br.r}, {"p_max", br.p_max}});
    }
    root["dc_branches"] = dc_branches;
    Json convs = Json::array();
    for (const auto& c : sys.converters) {
        convs.push_back({{"id", c.id},
                         {"ac_bus", c.ac_bus},
                         {"dc_bus", c.dc_bus},
                         {"p_max", c.p_max},
                         {"loss", {{"a", c.loss_a}, {"b", c.loss_b}, {"c", c.loss_c}}},
                         {"control", c.dc_slack ? "dc_slack" : "p_dc"},
                         {"v_dc_setpoint", c.v_dc_setpoint},
                         {"p_dc_setpoint", c.p_dc_setpoint}});
    }
    root["converters"] = convs;
    Json gens = Json::array();
    for (const auto& g : sys.generators) {
        gens.push_back({{"id", g.id},
                        {"bus", g.bus},
                        {"p_min", g.p_min},
                        {"p_max", g.p_max},
                        {"q_min", g.q_min},
                        {"q_max", g.q_max},
                        {"cost", {{"c0", g.c0}, {"c1", g.c1}, {"c2", g.c2}}},
                        {"p_setpoint", g.p_setpoint}});
    }
    root["generators"] = gens;
    Json res = Json::array();
    for (const auto& r : sys.res_units) {
        res.push_back({{"id", r.id}, {"bus", r.bus}, {"capacity", r.capacity}, {"output", r.output}});
    }
    root["res_units"] = res;
    Json unc = Json::array();
    for (const auto& t : sys.scenario_map) {
        unc.push_back({{"name", t.name},
                       {"target", {{"kind", target_kind_name(t.kind)}, {"id", t.id}}},
                       {"distribution", distribution_to_json(t.distribution)}});
    }
    root["uncertainty"] = unc;
    return root.dump(2) + "\n";
}

void save_case(const PowerSystem& sys, const std::filesystem::path& path) {
    detail::write_text_file(path.string(), case_to_string(sys));
}

}  // namespace kanopf::grid
