#include "kanopf/grid/power_system.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "kanopf/errors.hpp"

namespace kanopf::grid {

double Converter::loss(double p_ac) const noexcept {
    return loss_a + loss_b * std::abs(p_ac) + loss_c * p_ac * p_ac;
}

namespace {

template <typename T>
int find_id(const std::vector<T>& items, int id, const char* what) {
    for (std::size_t k = 0; k < items.size(); ++k) {
        if (items[k].id == id) return static_cast<int>(k);
    }
    throw SpecError(std::string("unknown ") + what + " id " + std::to_string(id));
}

template <typename T>
void check_unique(const std::vector<T>& items, const char* what) {
    std::set<int> seen;
    for (const auto& item : items) {
        if (!seen.insert(item.id).second) {
            throw ConfigError(std::string("duplicate ") + what + " id " + std::to_string(item.id));
        }
    }
}

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }
    std::size_t find(std::size_t a) {
        while (parent_[a] != a) {
            parent_[a] = parent_[parent_[a]];
            a = parent_[a];
        }
        return a;
    }
    void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

private:
    std::vector<std::size_t> parent_;
};

std::string bus_label(const char* what, int id) { return std::string(what) + " " + std::to_string(id); }

}  // namespace

int PowerSystem::ac_index(int bus_id) const { return find_id(ac_buses, bus_id, "AC bus"); }
int PowerSystem::dc_index(int bus_id) const { return find_id(dc_buses, bus_id, "DC bus"); }
int PowerSystem::generator_index(int gen_id) const { return find_id(generators, gen_id, "generator"); }
int PowerSystem::branch_index(int branch_id) const { return find_id(ac_branches, branch_id, "AC branch"); }
int PowerSystem::converter_index(int conv_id) const { return find_id(converters, conv_id, "converter"); }
int PowerSystem::res_index(int res_id) const { return find_id(res_units, res_id, "RES unit"); }

int PowerSystem::slack_index() const {
    for (std::size_t k = 0; k < ac_buses.size(); ++k) {
        if (ac_buses[k].type == BusType::slack) return static_cast<int>(k);
    }
    throw ConfigError("system has no slack bus");
}

int PowerSystem::slack_generator() const {
    const int slack_bus = ac_buses[static_cast<std::size_t>(slack_index())].id;
    int best = -1;
    for (std::size_t g = 0; g < generators.size(); ++g) {
        if (generators[g].bus != slack_bus) continue;
        if (best < 0 || generators[g].id < generators[static_cast<std::size_t>(best)].id) best = static_cast<int>(g);
    }
    if (best < 0) throw ConfigError("slack bus has no generator");
    return best;
}

double PowerSystem::total_load() const {
    double s = 0.0;
    for (const auto& b : ac_buses) s += b.p_load;
    return s;
}

double PowerSystem::total_generation_capacity() const {
    double s = 0.0;
    for (const auto& g : generators) s += g.p_max;
    return s;
}

bool is_connected(const PowerSystem& sys) {
    const std::size_t n_ac = sys.ac_buses.size();
    const std::size_t n = n_ac + sys.dc_buses.size();
    if (n == 0) return false;
    DisjointSets sets(n);
    for (const auto& br : sys.ac_branches) {
        if (!br.in_service) continue;
        sets.unite(static_cast<std::size_t>(sys.ac_index(br.from)), static_cast<std::size_t>(sys.ac_index(br.to)));
    }
    for (const auto& br : sys.dc_branches) {
        sets.unite(n_ac + static_cast<std::size_t>(sys.dc_index(br.from)),
                   n_ac + static_cast<std::size_t>(sys.dc_index(br.to)));
    }
    for (const auto& c : sys.converters) {
        sets.unite(static_cast<std::size_t>(sys.ac_index(c.ac_bus)), n_ac + static_cast<std::size_t>(sys.dc_index(c.dc_bus)));
    }
    const std::size_t root = sets.find(0);
    for (std::size_t k = 1; k < n; ++k) {
        if (sets.find(k) != root) return false;
    }
    return true;
}

void validate(const PowerSystem& sys) {
    if (!(sys.base_mva > 0.0)) throw ConfigError("base_mva must be positive");
    if (sys.ac_buses.empty()) throw ConfigError("system needs at least one AC bus");
    check_unique(sys.ac_buses, "AC bus");
    check_unique(sys.ac_branches, "AC branch");
    check_unique(sys.dc_buses, "DC bus");
    check_unique(sys.dc_branches, "DC branch");
    check_unique(sys.converters, "converter");
    check_unique(sys.generators, "generator");
    check_unique(sys.res_units, "RES unit");

    const auto slack_count = std::count_if(sys.ac_buses.begin(), sys.ac_buses.end(),
                                           [](const AcBus& b) { return b.type == BusType::slack; });
    if (slack_count != 1) {
        throw ConfigError("system needs exactly one slack bus, found " + std::to_string(slack_count));
    }
    for (const auto& b : sys.ac_buses) {
        if (!(b.v_min < b.v_max)) throw ConfigError(bus_label("AC bus", b.id) + ": v_min must be below v_max");
        if (!std::isfinite(b.p_load) || !std::isfinite(b.q_load) || !(b.v_setpoint > 0.0)) {
            throw ConfigError(bus_label("AC bus", b.id) + ": invalid load or voltage setpoint");
        }
        if (b.type != BusType::pq) {
            const bool has_gen = std::any_of(sys.generators.begin(), sys.generators.end(),
                                             [&](const Generator& g) { return g.bus == b.id; });
            if (!has_gen) throw ConfigError(bus_label("AC bus", b.id) + ": slack/PV bus without a generator");
        }
    }
    for (const auto& br : sys.ac_branches) {
        sys.ac_index(br.from);
        sys.ac_index(br.to);
        if (br.from == br.to) throw ConfigError(bus_label("AC branch", br.id) + ": endpoints coincide");
        if (!(br.r >= 0.0) || !(br.x > 0.0)) {
            throw ConfigError(bus_label("AC branch", br.id) + ": need r >= 0 and x > 0");
        }
        if (!(br.s_max > 0.0)) throw ConfigError(bus_label("AC branch", br.id) + ": s_max must be positive");
    }
    for (const auto& b : sys.dc_buses) {
        if (!(b.v_min < b.v_max)) throw ConfigError(bus_label("DC bus", b.id) + ": v_min must be below v_max");
    }
    for (const auto& br : sys.dc_branches) {
        sys.dc_index(br.from);
        sys.dc_index(br.to);
        if (br.from == br.to) throw ConfigError(bus_label("DC branch", br.id) + ": endpoints coincide");
        if (!(br.r > 0.0)) throw ConfigError(bus_label("DC branch", br.id) + ": resistance must be positive");
        if (!(br.p_max > 0.0)) throw ConfigError(bus_label("DC branch", br.id) + ": p_max must be positive");
    }
    for (const auto& c : sys.converters) {
        sys.ac_index(c.ac_bus);
        sys.dc_index(c.dc_bus);
        if (!(c.loss_a >= 0.0 && c.loss_b >= 0.0 && c.loss_c >= 0.0)) {
            throw ConfigError(bus_label("converter", c.id) + ": loss coefficients must be non-negative");
        }
        if (!(c.p_max > 0.0)) throw ConfigError(bus_label("converter", c.id) + ": p_max must be positive");
        if (c.dc_slack && !(c.v_dc_setpoint > 0.0)) {
            throw ConfigError(bus_label("converter", c.id) + ": DC voltage setpoint must be positive");
        }
    }
    for (const auto& g : sys.generators) {
        const auto& bus = sys.ac_buses[static_cast<std::size_t>(sys.ac_index(g.bus))];
        if (bus.type == BusType::pq) throw ConfigError(bus_label("generator", g.id) + ": must sit on a slack or PV bus");
        if (!(g.p_min <= g.p_max) || !(g.q_min <= g.q_max)) {
            throw ConfigError(bus_label("generator", g.id) + ": need p_min <= p_max and q_min <= q_max");
        }
        if (!std::isfinite(g.c0) || !std::isfinite(g.c1) || !std::isfinite(g.c2)) {
            throw ConfigError(bus_label("generator", g.id) + ": non-finite cost coefficient");
        }
    }
    for (const auto& r : sys.res_units) {
        sys.ac_index(r.bus);
        if (!(r.capacity >= 0.0)) throw ConfigError(bus_label("RES unit", r.id) + ": capacity must be non-negative");
    }
    for (const auto& t : sys.scenario_map) {
        switch (t.kind) {
            case TargetKind::load_factor: sys.ac_index(t.id); break;
            case TargetKind::res_factor: sys.res_index(t.id); break;
            case TargetKind::branch_outage: sys.branch_index(t.id); break;
        }
    }

    if (!is_connected(sys)) throw ConnectivityError("network is not connected");

    // Formulation requirements: every DC island has exactly one DC-slack
    // converter, and the AC buses form one island through AC branches.
    const std::size_t n_dc = sys.dc_buses.size();
    if (n_dc > 0) {
        DisjointSets dc(n_dc);
        for (const auto& br : sys.dc_branches) {
            dc.unite(static_cast<std::size_t>(sys.dc_index(br.from)), static_cast<std::size_t>(sys.dc_index(br.to)));
        }
        std::vector<int> slack_per_island(n_dc, 0);
        for (const auto& c : sys.converters) {
            if (c.dc_slack) ++slack_per_island[dc.find(static_cast<std::size_t>(sys.dc_index(c.dc_bus)))];
        }
        for (std::size_t k = 0; k < n_dc; ++k) {
            if (dc.find(k) != k) continue;
            if (slack_per_island[k] != 1) {
                throw ConfigError("DC island containing DC bus " + std::to_string(sys.dc_buses[k].id) +
                                  " needs exactly one DC-slack converter, found " +
                                  std::to_string(slack_per_island[k]));
            }
        }
    }
    DisjointSets ac(sys.ac_buses.size());
    for (const auto& br : sys.ac_branches) {
        if (br.in_service) {
            ac.unite(static_cast<std::size_t>(sys.ac_index(br.from)), static_cast<std::size_t>(sys.ac_index(br.to)));
        }
    }
    for (std::size_t k = 1; k < sys.ac_buses.size(); ++k) {
        if (ac.find(k) != ac.find(0)) {
            throw ConnectivityError("AC bus " + std::to_string(sys.ac_buses[k].id) +
                                    " is islanded from the slack bus on the AC network");
        }
    }
}

PowerSystem apply_scenario(const PowerSystem& sys, std::span<const double> xi) {
    if (xi.size() != sys.scenario_map.size()) {
        throw ShapeError("apply_scenario: scenario has " + std::to_string(xi.size()) + " entries, system maps " +
                         std::to_string(sys.scenario_map.size()));
    }
    PowerSystem out = sys;
    bool outage = false;
    for (std::size_t k = 0; k < xi.size(); ++k) {
        const double f = xi[k];
        if (!std::isfinite(f)) throw DomainError("apply_scenario: non-finite scenario entry " + std::to_string(k));
        const ScenarioTarget& t = sys.scenario_map[k];
        switch (t.kind) {
            case TargetKind::load_factor: {
                auto& bus = out.ac_buses[static_cast<std::size_t>(out.ac_index(t.id))];
                bus.p_load *= f;
                bus.q_load *= f;
                break;
            }
            case TargetKind::res_factor: {
                auto& res = out.res_units[static_cast<std::size_t>(out.res_index(t.id))];
                res.output = res.capacity * std::clamp(f, 0.0, 1.0);
                break;
            }
            case TargetKind::branch_outage:
                if (f >= 0.5) {
                    out.ac_branches[static_cast<std::size_t>(out.branch_index(t.id))].in_service = false;
                    outage = true;
                }
                break;
        }
    }
    if (outage) validate(out);
    return out;
}

}  // namespace kanopf::grid
