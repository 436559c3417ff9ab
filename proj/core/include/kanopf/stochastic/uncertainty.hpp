#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kanopf/distribution_spec.hpp"
#include "kanopf/grid/power_system.hpp"
#include "kanopf/kan/dataset.hpp"

namespace kanopf::stochastic {

struct UncertainDimension {
    std::string name;
    DistributionSpec distribution;
};

/// Marginal distributions of ξ, one per dimension, sampled independently.
struct UncertaintyModel {
    std::vector<UncertainDimension> dimensions;

    /// One dimension per entry of the system's scenario map, same order.
    static UncertaintyModel from_system(const grid::PowerSystem& sys);

    std::size_t size() const noexcept { return dimensions.size(); }
    std::vector<std::string> names() const;
    /// Throws ConfigError on empty models, non-finite or inverted bounds,
    /// negative std, non-positive beta shapes or p outside [0, 1].
    void validate() const;
    std::uint64_t fingerprint() const;
};

/// N scenarios (rows) drawn from one stream.
struct ScenarioSet {
    kan::RowMatrix values;
    std::vector<std::string> names;
    std::uint64_t seed = 0;
    std::uint64_t model_fingerprint = 0;
    std::size_t clamped = 0;  ///< truncated-gaussian draws that exhausted their retries

    std::size_t size() const noexcept { return static_cast<std::size_t>(values.rows()); }
    std::span<const double> row(std::size_t r) const {
        return {values.data() + r * static_cast<std::size_t>(values.cols()), static_cast<std::size_t>(values.cols())};
    }
};

/// Draws n scenarios with kanopf::Rng(seed), row by row and dimension by
/// dimension. Truncated gaussians are redrawn up to 100 times and then
/// clamped into [lower, upper].
ScenarioSet sample_scenarios(const UncertaintyModel& model, std::size_t n, std::uint64_t seed);

}  // namespace kanopf::stochastic
