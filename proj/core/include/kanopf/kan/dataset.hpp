#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace kanopf::kan {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Supervised pairs (ξ, Y), one scenario per row.
struct Dataset {
    RowMatrix inputs;
    RowMatrix targets;
    std::vector<std::string> feature_names;
    std::vector<std::string> target_names;

    std::size_t rows() const noexcept { return static_cast<std::size_t>(inputs.rows()); }
    int input_dim() const noexcept { return static_cast<int>(inputs.cols()); }
    int target_dim() const noexcept { return static_cast<int>(targets.cols()); }

    std::span<const double> input_row(std::size_t r) const {
        return {inputs.data() + r * static_cast<std::size_t>(inputs.cols()), static_cast<std::size_t>(inputs.cols())};
    }
    std::span<const double> target_row(std::size_t r) const {
        return {targets.data() + r * static_cast<std::size_t>(targets.cols()), static_cast<std::size_t>(targets.cols())};
    }
    std::span<const double> input_span() const noexcept {
        return {inputs.data(), static_cast<std::size_t>(inputs.size())};
    }

    /// Throws ShapeError/DomainError unless rows match, N >= 1, names match
    /// column counts (when given) and every value is finite.
    void validate() const;

    /// First n rows.
    Dataset head(std::size_t n) const;
};

/// Per-target z-score computed on training data and stored with the model.
struct Standardizer {
    std::vector<double> means;
    std::vector<double> stds;

    static Standardizer fit(const RowMatrix& targets);
    /// Identity transform for `dim` targets.
    static Standardizer identity(int dim);

    RowMatrix transform(const RowMatrix& targets) const;
    RowMatrix inverse(const RowMatrix& standardized) const;
    std::vector<double> inverse(std::span<const double> standardized) const;
};

}  // namespace kanopf::kan
