#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "kanopf/kan/dataset.hpp"
#include "kanopf/kan/network.hpp"
#include "kanopf/opf/opf.hpp"
#include "kanopf/stochastic/uncertainty.hpp"

namespace kanopf::stochastic {

struct ScenarioFailure {
    std::size_t index = 0;
    std::string reason;
};

struct MonteCarloOptions {
    unsigned threads = 0;  ///< 0: hardware concurrency
    double max_failure_fraction = 0.05;
    opf::OpfOptions opf;
};

struct MonteCarloResult {
    kan::Dataset data;                 ///< converged scenarios, in scenario order
    std::vector<std::size_t> indices;  ///< scenario index of each row
    std::vector<ScenarioFailure> failures;
};

/// Solves the OPF for every scenario. Results land in per-scenario slots,
/// so the output does not depend on thread scheduling. Throws NumericError
/// when more than max_failure_fraction of the scenarios fail.
MonteCarloResult run_monte_carlo(const grid::PowerSystem& sys, const ScenarioSet& set, const opf::OutputSpec& spec,
                                 const MonteCarloOptions& options = {});

/// Ŷ = de-standardized network output for every input row.
kan::Dataset propagate_surrogate(const kan::KanNetwork& net, const kan::Standardizer& standardizer,
                                 const kan::RowMatrix& inputs, const std::vector<std::string>& feature_names,
                                 const std::vector<std::string>& target_names);

struct OutputComparison {
    std::string name;
    double rmse = 0.0;               ///< pointwise, paired rows
    double rmse_standardized = 0.0;  ///< rmse / baseline population std (rmse when that std is 0)
    double ks = 0.0;
    double wasserstein = 0.0;
    double mean_surrogate = 0.0;
    double mean_baseline = 0.0;
    double variance_surrogate = 0.0;
    double variance_baseline = 0.0;
    double ci_low_surrogate = 0.0;
    double ci_high_surrogate = 0.0;
    double ci_low_baseline = 0.0;
    double ci_high_baseline = 0.0;
    double baseline_min = 0.0;
    double baseline_max = 0.0;
};

struct ComparisonReport {
    std::vector<OutputComparison> outputs;
    std::size_t samples = 0;
    double ci_level = 0.95;
};

/// Paired comparison of two datasets over the same scenarios. Throws
/// SpecError when target names, row counts or scenario inputs differ.
ComparisonReport compare(const kan::Dataset& surrogate, const kan::Dataset& baseline, double ci_level = 0.95);

}  // namespace kanopf::stochastic
