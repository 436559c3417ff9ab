#include "kanopf/stochastic/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "kanopf/errors.hpp"

namespace kanopf::stochastic {

namespace {

std::vector<double> uniform_weights(std::size_t n) { return std::vector<double>(n, 1.0); }

}  // namespace

EmpiricalDistribution::EmpiricalDistribution(std::span<const double> samples)
    : EmpiricalDistribution(samples, uniform_weights(samples.size())) {}

EmpiricalDistribution::EmpiricalDistribution(std::span<const double> samples, std::span<const double> weights) {
    if (samples.empty()) throw DomainError("empirical distribution needs at least one sample");
    if (weights.size() != samples.size()) throw ShapeError("empirical distribution: weight count mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i])) throw DomainError("empirical distribution: non-finite sample");
        if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
            throw DomainError("empirical distribution: weights must be finite and non-negative");
        }
        total += weights[i];
    }
    if (!(total > 0.0)) throw DomainError("empirical distribution: weights sum to zero");
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return samples[a] < samples[b]; });
    values_.reserve(order.size());
    weights_.reserve(order.size());
    cumulative_.reserve(order.size());
    double c = 0.0;
    for (std::size_t k : order) {
        values_.push_back(samples[k]);
        weights_.push_back(weights[k] / total);
        c += weights[k] / total;
        cumulative_.push_back(c);
    }
    cumulative_.back() = 1.0;
}

double EmpiricalDistribution::cdf(double x) const noexcept {
    const auto it = std::upper_bound(values_.begin(), values_.end(), x);
    if (it == values_.begin()) return 0.0;
    return cumulative_[static_cast<std::size_t>(it - values_.begin()) - 1];
}

double EmpiricalDistribution::quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile: p must lie in [0, 1]");
    const std::size_t n = values_.size();
    const double denom = 1.0 - weights_.back();
    if (n == 1 || !(denom > 0.0)) return values_.back();
    auto position = [&](std::size_t i) { return (cumulative_[i] - weights_[i]) / denom; };
    if (p <= position(0)) return values_.front();
    for (std::size_t i = 1; i < n; ++i) {
        const double hi = position(i);
        if (p <= hi) {
            const double lo = position(i - 1);
            const double t = hi > lo ? (p - lo) / (hi - lo) : 1.0;
            return values_[i - 1] + t * (values_[i] - values_[i - 1]);
        }
    }
    return values_.back();
}

Histogram pdf_histogram(const EmpiricalDistribution& d, int bins) {
    if (bins < 1) throw DomainError("pdf_histogram: bins must be at least 1");
    if (d.size() < 2) throw DomainError("pdf_histogram: needs at least two samples");
    Histogram h;
    const double lo = d.min();
    const double hi = d.max();
    if (lo == hi) {
        const double w = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(lo));
        h.edges = {lo - 0.5 * w, lo + 0.5 * w};
        h.densities = {1.0 / (h.edges[1] - h.edges[0])};
        return h;
    }
    const auto nb = static_cast<std::size_t>(bins);
    const double width = (hi - lo) / static_cast<double>(nb);
    h.edges.resize(nb + 1);
    for (std::size_t i = 0; i < nb; ++i) h.edges[i] = lo + static_cast<double>(i) * width;
    h.edges[nb] = hi;
    h.densities = histogram_densities(d, h.edges);
    return h;
}

std::vector<double> histogram_densities(const EmpiricalDistribution& d, std::span<const double> edges) {
    if (edges.size() < 2) throw DomainError("histogram_densities: needs at least two edges");
    for (std::size_t i = 1; i < edges.size(); ++i) {
        if (!(edges[i] > edges[i - 1])) throw DomainError("histogram_densities: edges must increase");
    }
    const std::size_t nb = edges.size() - 1;
    std::vector<double> mass(nb, 0.0);
    const auto& v = d.values();
    const auto& w = d.weights();
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (v[k] < edges.front() || v[k] > edges.back()) continue;
        // Samples on an interior edge belong to the bin on its right.
        const auto it = std::upper_bound(edges.begin(), edges.end(), v[k]);
        const auto b = static_cast<std::size_t>(it - edges.begin()) - 1;
        mass[std::min(b, nb - 1)] += w[k];
    }
    std::vector<double> density(nb);
    for (std::size_t i = 0; i < nb; ++i) density[i] = mass[i] / (edges[i + 1] - edges[i]);
    return density;
}

Moments moments(const EmpiricalDistribution& d) {
    Moments m;
    const auto& v = d.values();
    const auto& w = d.weights();
    double sum_w2 = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        m.mean += w[k] * v[k];
        sum_w2 += w[k] * w[k];
    }
    double ss = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) ss += w[k] * (v[k] - m.mean) * (v[k] - m.mean);
    const double denom = 1.0 - sum_w2;
    m.variance = denom > 0.0 ? ss / denom : 0.0;
    return m;
}

std::pair<double, double> confidence_interval(const EmpiricalDistribution& d, double level) {
    if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence_interval: level must lie in (0, 1)");
    const double tail = 0.5 * (1.0 - level);
    return {d.quantile(tail), d.quantile(1.0 - tail)};
}

namespace {

// Visits the merged sorted support, calling f(x, F_a(x), F_b(x)).
template <typename F>
void merged_walk(const EmpiricalDistribution& a, const EmpiricalDistribution& b, F&& f) {
    const auto& va = a.values();
    const auto& vb = b.values();
    std::size_t i = 0, j = 0;
    double fa = 0.0, fb = 0.0;
    while (i < va.size() || j < vb.size()) {
        const double x = (j >= vb.size() || (i < va.size() && va[i] <= vb[j])) ? va[i] : vb[j];
        while (i < va.size() && va[i] == x) fa += a.weights()[i++];
        while (j < vb.size() && vb[j] == x) fb += b.weights()[j++];
        if (i == va.size()) fa = 1.0;
        if (j == vb.size()) fb = 1.0;
        f(x, fa, fb);
    }
}

}  // namespace

double ks_statistic(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
    double ks = 0.0;
    merged_walk(a, b, [&](double, double fa, double fb) { ks = std::max(ks, std::abs(fa - fb)); });
    return std::min(ks, 1.0);
}

double wasserstein1(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
    double w = 0.0;
    bool first = true;
    double prev_x = 0.0, prev_gap = 0.0;
    merged_walk(a, b, [&](double x, double fa, double fb) {
        if (!first) w += prev_gap * (x - prev_x);
        first = false;
        prev_x = x;
        prev_gap = std::abs(fa - fb);
    });
    return w;
}

}  // namespace kanopf::stochastic
