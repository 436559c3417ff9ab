#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kanopf/grid/power_system.hpp"
#include "kanopf/kan/network.hpp"
#include "kanopf/kan/train.hpp"
#include "kanopf/opf/opf.hpp"
#include "kanopf/stochastic/uncertainty.hpp"

namespace kanopf::pipeline {

/// Sub-seeds derived from the global seed: seed + stage constant.
struct SeedPlan {
    std::uint64_t train_scenarios = 0;  ///< + 0x1001
    std::uint64_t test_scenarios = 0;   ///< + 0x2002
    std::uint64_t init = 0;             ///< + 0x3003
    std::uint64_t batches = 0;          ///< + 0x4004

    static SeedPlan from(std::uint64_t seed);
};

struct SweepSettings {
    std::vector<std::size_t> train_sizes;
    std::vector<std::vector<int>> widths;  ///< full width lists, one per configuration
};

struct PipelineConfig {
    std::string case_ref;  ///< "builtin:case5" or a path relative to the config file
    grid::PowerSystem system;
    opf::OutputSpec outputs;
    std::size_t n_train = 4000;
    std::size_t n_test = 2000;
    std::vector<int> widths;
    kan::InitConfig init;  ///< seed filled from SeedPlan::init
    kan::TrainConfig train;  ///< seed filled from SeedPlan::batches
    /// Same-G grid refit cadence used when no explicit schedule is given;
    /// 0 disables periodic refits.
    std::size_t grid_refit_every = 200;
    SweepSettings sweep;
    int histogram_bins = 40;
    int cdf_points = 201;
    double ci_level = 0.95;
    int activation_points = 101;
    std::filesystem::path output_dir = "run";
    std::uint64_t seed = 0;
    unsigned threads = 0;

    SeedPlan seeds() const { return SeedPlan::from(seed); }
    stochastic::UncertaintyModel uncertainty() const { return stochastic::UncertaintyModel::from_system(system); }
    /// Re-derives the seed-dependent fields after changing `seed`.
    void set_seed(std::uint64_t s);
    /// Refits at every multiple of grid_refit_every below train.steps,
    /// keeping init.grid_intervals.
    void set_periodic_grid_refits();
};

/// Parses and validates a configuration (JSON, schema_version 1). Errors
/// are ConfigError naming the file and the JSON path (or line:column for
/// syntax errors). Relative paths resolve against `base_dir`.
PipelineConfig parse_config(const std::string& text, const std::string& origin,
                            const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

/// Defaults for the bundled case: outputs objective, gen_p:1, gen_p:2,
/// widths [5, 5, 5, 3], G = 3, 3000 Adam steps at 0.01 with a grid refit
/// every 200 steps.
PipelineConfig default_config();

}  // namespace kanopf::pipeline
