#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "kanopf/kan/interpret.hpp"
#include "kanopf/kan/train.hpp"
#include "kanopf/pipeline/config.hpp"
#include "kanopf/pipeline/model_file.hpp"
#include "kanopf/pipeline/table_io.hpp"
#include "kanopf/stochastic/monte_carlo.hpp"

namespace kanopf::pipeline {

/// Progress messages (with wall-clock times) go to `log` when given; files
/// never contain timestamps.
struct CommandContext {
    std::ostream* log = nullptr;
};

struct GeneratedData {
    kan::Dataset data;
    DatasetMeta meta;
};

/// Samples n scenarios with `seed`, solves them and packages the result.
GeneratedData generate_dataset(const PipelineConfig& config, std::size_t n, std::uint64_t seed,
                               const CommandContext& ctx = {});

struct GenDataResult {
    std::filesystem::path train_path;
    std::filesystem::path test_path;
    GeneratedData train;
    GeneratedData test;
};

/// <out>/train.csv and <out>/test.csv plus metadata sidecars.
GenDataResult cmd_gen_data(const PipelineConfig& config, const CommandContext& ctx = {});

struct TrainOutcome {
    ModelFile model;
    kan::TrainReport report;
    std::vector<double> test_rmse_per_output;  ///< standardized
};

/// Standardizes targets on `train`, initialises grids from the training
/// inputs, trains, and evaluates per-output standardized test RMSE.
TrainOutcome train_surrogate(const PipelineConfig& config, const std::vector<int>& widths, const kan::Dataset& train,
                             const kan::Dataset& test, const CommandContext& ctx = {});

TextTable loss_curve_table(const kan::TrainReport& report);

/// Writes <out>/model.json and <out>/loss_curve.csv.
TrainOutcome cmd_train(const PipelineConfig& config, const std::filesystem::path& train_path,
                       const std::filesystem::path& test_path, const CommandContext& ctx = {});

struct SweepCell {
    std::size_t train_size = 0;
    std::vector<int> widths;
    bool ok = false;
    std::string status;
    double final_train_rmse = 0.0;
    double final_test_rmse = 0.0;
    double best_test_rmse = 0.0;
    std::vector<double> test_rmse_per_output;
};

/// Generates max(train_sizes) training rows and n_test test rows once
/// (<out>/sweep/), trains every (size, widths) cell on the first `size`
/// rows and writes <out>/sweep/sweep.csv. A failing cell is recorded and
/// the sweep continues.
std::vector<SweepCell> cmd_sweep(const PipelineConfig& config, const CommandContext& ctx = {});

/// Surrogate vs Monte Carlo on the test dataset. Writes
/// <out>/compare/report.json, pdf_<output>.csv and cdf_<output>.csv.
/// Throws SpecError when the model's outputs differ from the config's.
stochastic::ComparisonReport cmd_compare(const PipelineConfig& config, const std::filesystem::path& model_path,
                                         const std::filesystem::path& test_path, const CommandContext& ctx = {});

struct ActivationExport {
    std::vector<std::filesystem::path> tables;
    std::vector<double> sup_difference;  ///< per edge, row-major: max |φ_after - φ_before|
};

/// One table per edge of `layer` (x, phi_before, phi_after) under
/// <out>/activations/, plus layer<l>_summary.csv. Before-values come from
/// the model's recorded initialisation.
ActivationExport cmd_export_activations(const PipelineConfig& config, const std::filesystem::path& model_path,
                                        std::size_t layer, const std::filesystem::path& data_path,
                                        const CommandContext& ctx = {});

struct SymbolicRow {
    std::size_t layer = 0;
    int out = 0;
    int in = 0;
    double importance = 0.0;
    kan::SymbolicFit fit;
};

/// Best candidate per kept edge, sorted by importance (descending), in
/// <out>/symbolic.csv; edges with zero weights are listed in
/// <out>/symbolic_skipped.csv.
std::vector<SymbolicRow> cmd_symbolic(const PipelineConfig& config, const std::filesystem::path& model_path,
                                      const std::filesystem::path& data_path, const CommandContext& ctx = {});

struct PruneOutcome {
    kan::PruneMask mask;
    std::vector<int> disconnected_outputs;
    std::filesystem::path model_path;
};

/// Drops edges scoring below `threshold`, writes <out>/model_pruned.json
/// and <out>/prune.csv.
PruneOutcome cmd_prune(const PipelineConfig& config, const std::filesystem::path& model_path,
                       const std::filesystem::path& data_path, double threshold, const CommandContext& ctx = {});

/// File-name-safe form of an output selector ("gen_p:1" -> "gen_p_1").
std::string safe_name(const std::string& selector);

}  // namespace kanopf::pipeline
