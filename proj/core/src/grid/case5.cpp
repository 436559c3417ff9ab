#include "kanopf/grid/power_system.hpp"

namespace kanopf::grid {

PowerSystem builtin_case5() {
    PowerSystem sys;
    sys.name = "case5_acdc";
    sys.base_mva = 100.0;

    sys.ac_buses = {
        {1, BusType::slack, 0.9, 1.1, 0.0, 0.0, 1.06},
        {2, BusType::pv, 0.9, 1.1, 0.20, 0.10, 1.00},
        {3, BusType::pq, 0.9, 1.1, 0.45, 0.15, 1.00},
        {4, BusType::pq, 0.9, 1.1, 0.40, 0.05, 1.00},
        {5, BusType::pq, 0.9, 1.1, 0.60, 0.10, 1.00},
    };
    sys.ac_branches = {
        {1, 1, 2, 0.02, 0.06, 2.0, true},
        {2, 1, 3, 0.08, 0.24, 2.0, true},
        {3, 2, 3, 0.06, 0.18, 2.0, true},
        {4, 2, 4, 0.06, 0.18, 2.0, true},
        {5, 2, 5, 0.04, 0.12, 2.0, true},
        {6, 3, 4, 0.01, 0.03, 2.0, true},
        {7, 4, 5, 0.08, 0.24, 2.0, true},
    };
    sys.dc_buses = {
        {1, 0.9, 1.1},
        {2, 0.9, 1.1},
        {3, 0.9, 1.1},
    };
    sys.dc_branches = {
        {1, 1, 2, 0.052, 1.0},
        {2, 2, 3, 0.052, 1.0},
        {3, 1, 3, 0.073, 1.0},
    };
    sys.converters = {
        {1, 2, 1, 1.0, 0.011, 0.0, 0.0046, true, 1.0, 0.0},
        {2, 3, 2, 1.0, 0.011, 0.0, 0.0046, false, 1.0, -0.1},
        {3, 5, 3, 1.0, 0.011, 0.0, 0.0046, false, 1.0, -0.2},
    };
    sys.generators = {
        {1, 1, 0.0, 2.5, -3.0, 3.0, 0.0, 2000.0, 300.0, 0.0},
        {2, 2, 0.0, 1.5, -3.0, 3.0, 0.0, 1500.0, 500.0, 0.8},
    };
    sys.res_units = {{1, 5, 0.5, 0.25}};

    const auto load = DistributionSpec::gaussian(1.0, 0.1, 0.7, 1.3);
    sys.scenario_map = {
        {"load_bus2", TargetKind::load_factor, 2, load},
        {"load_bus3", TargetKind::load_factor, 3, load},
        {"load_bus4", TargetKind::load_factor, 4, load},
        {"load_bus5", TargetKind::load_factor, 5, load},
        {"solar_bus5", TargetKind::res_factor, 1, DistributionSpec::beta_dist(2.0, 2.0, 1.0)},
    };
    return sys;
}

}  // namespace kanopf::grid
