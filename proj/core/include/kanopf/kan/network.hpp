#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "kanopf/kan/spline.hpp"

namespace kanopf::kan {

/// SiLU base function x / (1 + e^-x) and its derivative.
double silu(double x) noexcept;
double silu_derivative(double x) noexcept;

/// One learnable edge: φ(x) = w_b·silu(x) + w_s·Σ c_i B_i(x).
struct SplineEdge {
    SplineGrid grid;
    std::vector<double> coeffs;
    double base_weight = 0.0;
    double spline_weight = 0.0;

    explicit SplineEdge(SplineGrid g)
        : grid(std::move(g)), coeffs(static_cast<std::size_t>(grid.basis_count()), 0.0) {}
    SplineEdge(SplineGrid g, std::vector<double> c, double w_b, double w_s);

    /// Σ c_i B_i(x), without the spline weight.
    double spline(double x) const { return spline_value(grid, coeffs, x); }
};

double edge_activation(const SplineEdge& edge, double x);

/// Dense layer of edges; output j is the plain sum Σ_i φ_{j,i}(x_i).
class KanLayer {
public:
    KanLayer(int n_in, int n_out, std::vector<SplineEdge> edges);
    /// All edges share `grid` and have zero weights and coefficients.
    KanLayer(int n_in, int n_out, const SplineGrid& grid);

    int n_in() const noexcept { return n_in_; }
    int n_out() const noexcept { return n_out_; }
    const SplineEdge& edge(int out, int in) const { return edges_[index(out, in)]; }
    SplineEdge& edge(int out, int in) { return edges_[index(out, in)]; }
    std::span<const SplineEdge> edges() const noexcept { return edges_; }
    std::span<SplineEdge> edges() noexcept { return edges_; }

private:
    std::size_t index(int out, int in) const;

    int n_in_;
    int n_out_;
    std::vector<SplineEdge> edges_;  // row-major, n_out x n_in
};

std::vector<double> layer_forward(const KanLayer& layer, std::span<const double> x);

class KanNetwork {
public:
    explicit KanNetwork(std::vector<KanLayer> layers);

    /// Network whose every edge has zero weights, with one grid per layer.
    static KanNetwork zeros(std::span<const int> widths, const SplineGrid& grid);

    std::span<const int> widths() const noexcept { return widths_; }
    int input_dim() const noexcept { return widths_.front(); }
    int output_dim() const noexcept { return widths_.back(); }
    std::size_t depth() const noexcept { return layers_.size(); }
    const KanLayer& layer(std::size_t l) const { return layers_.at(l); }
    KanLayer& layer(std::size_t l) { return layers_.at(l); }
    std::span<const KanLayer> layers() const noexcept { return layers_; }

    std::size_t edge_count() const noexcept;

    /// Flat parameter layout: for each layer, for each edge (row-major),
    /// [c_0 .. c_{G+k-1}, w_b, w_s].
    std::size_t parameter_count() const noexcept;
    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> params);

private:
    std::vector<KanLayer> layers_;
    std::vector<int> widths_;
};

std::vector<double> network_forward(const KanNetwork& net, std::span<const double> xi);

/// Per-edge keep flags, one matrix per layer (row-major n_out x n_in).
struct PruneMask {
    std::vector<std::vector<bool>> keep;

    static PruneMask all(const KanNetwork& net, bool value);
    bool kept(std::size_t layer, int out, int in, int n_in) const {
        return keep[layer][static_cast<std::size_t>(out * n_in + in)];
    }
    std::size_t kept_count() const;
};

/// Dropped edges get w_b = w_s = 0; kept edges are untouched.
KanNetwork apply_prune_mask(const KanNetwork& net, const PruneMask& mask);

/// Random initialisation settings.
///
/// Coefficients are N(0, noise_scale^2); w_s = 1; w_b = base_scale / sqrt(n_in).
struct InitConfig {
    int grid_intervals = 5;
    int degree = 3;
    double noise_scale = 0.05;
    double base_scale = 1.0;
    std::uint64_t seed = 0;
};

using Domain = std::pair<double, double>;

/// Random network. Edges leaving input i of layer l use the grid domain
/// domains[l][i] ([-1, 1] when `domains` is empty). Draw order is fixed, so
/// the same seed gives the same coefficients regardless of the domains.
KanNetwork initialize_network(std::span<const int> widths, const InitConfig& config,
                              std::span<const std::vector<Domain>> domains = {});

/// Per-layer, per-input-node domains: observed min/max of the inputs each
/// layer sees on `samples` (row-major, N x widths[0]), widened by `margin`
/// of the range on both sides. Layer l's ranges come from propagating the
/// samples through layers 0..l-1 of `net`.
std::vector<std::vector<Domain>> observed_domains(const KanNetwork& net,
                                                  std::span<const double> samples,
                                                  double margin = 0.1);

/// Initialisation whose grids cover the data: layer 0 takes the observed
/// input ranges (±10%), each later layer the ranges produced by the
/// already-initialised layers before it. `domains_out` receives the
/// domains used so the network can be recreated later.
KanNetwork initialize_network_from_samples(std::span<const int> widths, const InitConfig& config,
                                           std::span<const double> samples,
                                           std::vector<std::vector<Domain>>* domains_out = nullptr);

}  // namespace kanopf::kan
