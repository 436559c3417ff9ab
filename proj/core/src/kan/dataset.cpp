#include "kanopf/kan/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kanopf/errors.hpp"

namespace kanopf::kan {

void Dataset::validate() const {
    if (inputs.rows() < 1) throw ShapeError("Dataset: need at least one row");
    if (inputs.rows() != targets.rows()) {
        throw ShapeError("Dataset: " + std::to_string(inputs.rows()) + " input rows vs " +
                         std::to_string(targets.rows()) + " target rows");
    }
    if (!feature_names.empty() && feature_names.size() != static_cast<std::size_t>(inputs.cols())) {
        throw ShapeError("Dataset: feature name count does not match input columns");
    }
    if (!target_names.empty() && target_names.size() != static_cast<std::size_t>(targets.cols())) {
        throw ShapeError("Dataset: target name count does not match target columns");
    }
    if (!inputs.allFinite() || !targets.allFinite()) throw DomainError("Dataset: non-finite value");
}

Dataset Dataset::head(std::size_t n) const {
    if (n > rows()) {
        throw ShapeError("Dataset::head: requested " + std::to_string(n) + " rows of " + std::to_string(rows()));
    }
    Dataset out;
    const auto k = static_cast<Eigen::Index>(n);
    out.inputs = inputs.topRows(k);
    out.targets = targets.topRows(k);
    out.feature_names = feature_names;
    out.target_names = target_names;
    return out;
}

Standardizer Standardizer::fit(const RowMatrix& targets) {
    if (targets.rows() < 1) throw ShapeError("Standardizer: empty target matrix");
    Standardizer s;
    const double n = static_cast<double>(targets.rows());
    for (Eigen::Index c = 0; c < targets.cols(); ++c) {
        double mean = 0.0;
        for (Eigen::Index r = 0; r < targets.rows(); ++r) mean += targets(r, c);
        mean /= n;
        double var = 0.0;
        for (Eigen::Index r = 0; r < targets.rows(); ++r) {
            const double d = targets(r, c) - mean;
            var += d * d;
        }
        var /= n;
        double sd = std::sqrt(var);
        // A constant target keeps unit scale so it round-trips exactly.
        if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) sd = 1.0;
        s.means.push_back(mean);
        s.stds.push_back(sd);
    }
    return s;
}

Standardizer Standardizer::identity(int dim) {
    Standardizer s;
    s.means.assign(static_cast<std::size_t>(dim), 0.0);
    s.stds.assign(static_cast<std::size_t>(dim), 1.0);
    return s;
}

RowMatrix Standardizer::transform(const RowMatrix& targets) const {
    if (static_cast<std::size_t>(targets.cols()) != means.size()) {
        throw ShapeError("Standardizer: column count mismatch");
    }
    RowMatrix out(targets.rows(), targets.cols());
    for (Eigen::Index r = 0; r < targets.rows(); ++r) {
        for (Eigen::Index c = 0; c < targets.cols(); ++c) {
            const auto k = static_cast<std::size_t>(c);
            out(r, c) = (targets(r, c) - means[k]) / stds[k];
        }
    }
    return out;
}

RowMatrix Standardizer::inverse(const RowMatrix& standardized) const {
    if (static_cast<std::size_t>(standardized.cols()) != means.size()) {
        throw ShapeError("Standardizer: column count mismatch");
    }
    RowMatrix out(standardized.rows(), standardized.cols());
    for (Eigen::Index r = 0; r < standardized.rows(); ++r) {
        for (Eigen::Index c = 0; c < standardized.cols(); ++c) {
            const auto k = static_cast<std::size_t>(c);
            out(r, c) = standardized(r, c) * stds[k] + means[k];
        }
    }
    return out;
}

std::vector<double> Standardizer::inverse(std::span<const double> standardized) const {
    if (standardized.size() != means.size()) throw ShapeError("Standardizer: length mismatch");
    std::vector<double> out(standardized.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = standardized[k] * stds[k] + means[k];
    return out;
}

}  // namespace kanopf::kan
