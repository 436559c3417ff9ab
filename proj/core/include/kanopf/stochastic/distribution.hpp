#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace kanopf::stochastic {

/// Weighted sample set, sorted ascending, weights normalized to sum 1.
class EmpiricalDistribution {
public:
    explicit EmpiricalDistribution(std::span<const double> samples);
    EmpiricalDistribution(std::span<const double> samples, std::span<const double> weights);

    const std::vector<double>& values() const noexcept { return values_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    std::size_t size() const noexcept { return values_.size(); }
    double min() const noexcept { return values_.front(); }
    double max() const noexcept { return values_.back(); }

    /// Right-continuous empirical CDF.
    double cdf(double x) const noexcept;
    /// Weighted generalization of linear interpolation between order
    /// statistics: sample i sits at position (C_i - w_i) / (1 - w_last),
    /// with C_i the cumulative weight. Reduces to (i / (n - 1)) for
    /// uniform weights.
    double quantile(double p) const;

private:
    std::vector<double> values_;
    std::vector<double> weights_;
    std::vector<double> cumulative_;
};

struct Histogram {
    std::vector<double> edges;      ///< bins + 1 entries
    std::vector<double> densities;  ///< bins entries
};

/// Equal-width bins spanning [min, max]; the last bin is closed. When all
/// samples coincide at v, returns one bin of width w = 4·eps·max(1, |v|)
/// centred on v with density 1/w.
Histogram pdf_histogram(const EmpiricalDistribution& d, int bins);

/// Densities on caller-supplied increasing edges (last bin closed); mass
/// outside [edges.front(), edges.back()] is dropped.
std::vector<double> histogram_densities(const EmpiricalDistribution& d, std::span<const double> edges);

struct Moments {
    double mean = 0.0;
    double variance = 0.0;  ///< unbiased (n - 1 divisor for uniform weights)
};

Moments moments(const EmpiricalDistribution& d);

/// Empirical percentile interval at (1 - level)/2 and 1 - (1 - level)/2.
std::pair<double, double> confidence_interval(const EmpiricalDistribution& d, double level);

/// sup |F1 - F2| over all sample points of both sets.
double ks_statistic(const EmpiricalDistribution& a, const EmpiricalDistribution& b);
/// ∫ |F1 - F2| dx, integrated exactly over the merged step grid.
double wasserstein1(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

}  // namespace kanopf::stochastic
