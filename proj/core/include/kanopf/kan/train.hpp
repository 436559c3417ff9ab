#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "kanopf/kan/dataset.hpp"
#include "kanopf/kan/network.hpp"

namespace kanopf::kan {

struct GridUpdate {
    std::size_t step = 0;
    int new_intervals = 0;
};

struct TrainConfig {
    std::size_t steps = 1000;
    double learning_rate = 0.01;
    std::size_t batch_size = 0;  ///< 0 means full batch
    double l1_penalty = 0.0;
    double entropy_penalty = 0.0;
    std::uint64_t seed = 0;
    /// At each listed step (before the update) every edge grid is refit to
    /// the observed activation ranges with the given interval count.
    std::vector<GridUpdate> grid_update_schedule;
    /// Test RMSE cadence in steps; the final step is always evaluated.
    std::size_t eval_every = 50;

    /// Throws ConfigError on out-of-range fields.
    void validate() const;
};

struct TrainReport {
    std::vector<double> train_loss;        ///< one per step: batch loss before the update
    std::vector<std::size_t> eval_steps;   ///< steps at which test RMSE was taken
    std::vector<double> test_rmse;         ///< aligned with eval_steps
    double final_train_rmse = 0.0;
    std::size_t parameter_count = 0;
    std::size_t ridge_fallbacks = 0;
    double wall_seconds = 0.0;
};

struct TrainResult {
    KanNetwork net;
    TrainReport report;
};

struct Regularization {
    double l1 = 0.0;
    double entropy = 0.0;
};

/// Mean over samples and outputs of the squared error.
double mse_loss(const KanNetwork& net, const Dataset& batch);

/// RMSE over all samples and outputs.
double rmse(const KanNetwork& net, const Dataset& data);

/// Per-output RMSE.
std::vector<double> rmse_per_output(const KanNetwork& net, const Dataset& data);

/// λ·Σ_edges mean|φ| + entropy·Σ_layers H(layer), where H is the Shannon
/// entropy of the layer's per-edge mean |φ| normalised to sum to one.
/// `inputs` is row-major N x N_0.
double regularization_loss(const KanNetwork& net, std::span<const double> inputs, const Regularization& reg);

struct LossAndGradient {
    double loss = 0.0;            ///< mse + regularization
    double mse = 0.0;
    double regularization = 0.0;
    std::vector<double> gradient; ///< KanNetwork::parameters() layout
};

/// Exact gradient of mse + regularization with respect to every c_i, w_b,
/// w_s. The |·| subgradient at 0 is taken as 0. Summation order is fixed.
LossAndGradient loss_and_gradient(const KanNetwork& net, std::span<const double> inputs,
                                  std::span<const double> targets, std::size_t rows, const Regularization& reg);

/// Gradient of the total loss on `batch` using the penalties in `config`.
std::vector<double> gradients(const KanNetwork& net, const Dataset& batch, const TrainConfig& config);

/// Adam training (β1 0.9, β2 0.999, ε 1e-8). Deterministic for a given
/// config. Throws TrainingDivergedError carrying the step on a non-finite
/// loss.
TrainResult train(KanNetwork net, const Dataset& data, const Dataset& test, const TrainConfig& config);

struct GridRefit {
    KanNetwork net;
    std::size_t ridge_fallbacks = 0;  ///< edges whose least-squares fit needed ridge
};

/// Replaces every edge grid by one spanning the edge's observed input
/// range on `sample_inputs` (±10%) with `intervals` intervals and
/// least-squares refits the coefficients to the old activation on those
/// samples. Weights are kept. Requires intervals >= 1.
GridRefit refit_grids(const KanNetwork& net, int intervals, std::span<const double> sample_inputs);

/// Grid refinement: refit_grids with new_G strictly above the current G
/// of every edge. Throws DomainError otherwise.
GridRefit extend_grid(const KanNetwork& net, int new_intervals, std::span<const double> sample_inputs);

/// Mean |φ| of each edge over the samples, one row-major matrix per layer.
std::vector<std::vector<double>> importance_scores(const KanNetwork& net, std::span<const double> sample_inputs);

/// Drops exactly the edges with importance score < threshold.
PruneMask prune_by_threshold(const KanNetwork& net, std::span<const double> sample_inputs, double threshold);

/// Final-layer output indices left without any kept incoming path.
std::vector<int> disconnected_outputs(const KanNetwork& net, const PruneMask& mask);

}  // namespace kanopf::kan
