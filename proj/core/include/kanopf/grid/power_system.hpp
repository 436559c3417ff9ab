#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "kanopf/distribution_spec.hpp"

namespace kanopf::grid {

enum class BusType { slack, pv, pq };

struct AcBus {
    int id = 0;
    BusType type = BusType::pq;
    double v_min = 0.9;
    double v_max = 1.1;
    double p_load = 0.0;  ///< p.u.
    double q_load = 0.0;  ///< p.u.
    double v_setpoint = 1.0;  ///< used by slack and PV buses
};

struct AcBranch {
    int id = 0;
    int from = 0;
    int to = 0;
    double r = 0.0;
    double x = 0.1;
    double s_max = 1.0;
    bool in_service = true;
};

struct DcBus {
    int id = 0;
    double v_min = 0.9;
    double v_max = 1.1;
};

struct DcBranch {
    int id = 0;
    int from = 0;
    int to = 0;
    double r = 0.01;
    double p_max = 1.0;
};

/// Voltage-source converter between an AC and a DC bus. Power balance:
/// P_ac + P_dc + (a + b·|P_ac| + c·P_ac²) = 0, with P_ac and P_dc the
/// injections into the AC and DC networks. Converters run at unity power
/// factor. A DC-slack converter holds its DC bus at `v_dc_setpoint`; the
/// others inject the DC-side setpoint P_dc.
struct Converter {
    int id = 0;
    int ac_bus = 0;
    int dc_bus = 0;
    double p_max = 1.0;
    double loss_a = 0.0;
    double loss_b = 0.0;
    double loss_c = 0.0;
    bool dc_slack = false;
    double v_dc_setpoint = 1.0;
    double p_dc_setpoint = 0.0;

    double loss(double p_ac) const noexcept;
};

struct Generator {
    int id = 0;
    int bus = 0;
    double p_min = 0.0;
    double p_max = 1.0;
    double q_min = -1.0;
    double q_max = 1.0;
    double c0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double p_setpoint = 0.0;

    double cost(double p) const noexcept { return c0 + c1 * p + c2 * p * p; }
};

/// Non-dispatchable renewable unit injecting `output` p.u. at unity power factor.
struct ResUnit {
    int id = 0;
    int bus = 0;
    double capacity = 0.0;
    double output = 0.0;
};

enum class TargetKind { load_factor, res_factor, branch_outage };

/// One uncertainty dimension: the quantity it drives and its declared
/// distribution (sampling lives in kanopf::stochastic).
struct ScenarioTarget {
    std::string name;
    TargetKind kind = TargetKind::load_factor;
    int id = 0;  ///< AC bus id, RES id or AC branch id
    DistributionSpec distribution;
};

struct PowerSystem {
    std::string name;
    double base_mva = 100.0;
    std::vector<AcBus> ac_buses;
    std::vector<AcBranch> ac_branches;
    std::vector<DcBus> dc_buses;
    std::vector<DcBranch> dc_branches;
    std::vector<Converter> converters;
    std::vector<Generator> generators;
    std::vector<ResUnit> res_units;
    std::vector<ScenarioTarget> scenario_map;

    int ac_index(int bus_id) const;  ///< throws SpecError for unknown ids
    int dc_index(int bus_id) const;
    int generator_index(int gen_id) const;
    int branch_index(int branch_id) const;
    int converter_index(int conv_id) const;
    int res_index(int res_id) const;
    int slack_index() const;
    /// Generator balancing the slack bus: lowest-id generator on it.
    int slack_generator() const;

    double total_load() const;
    double total_generation_capacity() const;
};

/// Throws ConfigError / ConnectivityError describing the first violated
/// invariant (unique ids, endpoints, one slack bus, limits, connectivity
/// of AC + DC + converter graph, one DC-slack converter per DC island,
/// AC network connected through AC branches).
void validate(const PowerSystem& sys);

/// True when AC buses, DC buses and converters form one connected graph
/// over in-service branches.
bool is_connected(const PowerSystem& sys);

/// Scales loads, sets RES output and applies outage flags. Loads at bus b
/// are multiplied by the load factor for b; RES output is
/// capacity·clamp(factor, 0, 1); an outage factor >= 0.5 takes the branch
/// out of service and re-validates connectivity.
PowerSystem apply_scenario(const PowerSystem& sys, std::span<const double> xi);

/// Case file (JSON, schema_version 1).
PowerSystem load_case(const std::filesystem::path& path);
PowerSystem parse_case(const std::string& text, const std::string& origin = "<case>");
std::string case_to_string(const PowerSystem& sys);
void save_case(const PowerSystem& sys, const std::filesystem::path& path);

/// The bundled 5-bus hybrid AC/DC case: 5 AC buses, 2 generators, one
/// solar unit and a 3-terminal DC overlay. Parameters are documented in
/// docs/case5.md and shipped as core/data/case5_acdc.json.
PowerSystem builtin_case5();

}  // namespace kanopf::grid
