#include "kanopf/kan/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "kanopf/errors.hpp"
#include "kanopf/random.hpp"

namespace kanopf::kan {

void TrainConfig::validate() const {
    if (steps < 1) throw ConfigError("TrainConfig: steps must be positive");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
        throw ConfigError("TrainConfig: learning_rate must lie in (0, 1]");
    }
    if (!(l1_penalty >= 0.0) || !(entropy_penalty >= 0.0)) {
        throw ConfigError("TrainConfig: penalties must be non-negative");
    }
    for (std::size_t k = 0; k < grid_update_schedule.size(); ++k) {
        if (grid_update_schedule[k].new_intervals < 1) {
            throw ConfigError("TrainConfig: grid update " + std::to_string(k) + " needs new_G >= 1");
        }
        if (k > 0 && grid_update_schedule[k].step <= grid_update_schedule[k - 1].step) {
            throw ConfigError("TrainConfig: grid update steps must be strictly increasing");
        }
    }
}

namespace {

constexpr int kMaxBasis = 17;

struct EdgeEval {
    int first = 0;
    bool inside = false;
    double spline = 0.0;
    double phi = 0.0;
};

/// Per-sample scratch space for one network shape.
class Workspace {
public:
    explicit Workspace(const KanNetwork& net) {
        const auto widths = net.widths();
        acts.resize(widths.size());
        grads.resize(widths.size());
        for (std::size_t l = 0; l < widths.size(); ++l) {
            acts[l].assign(static_cast<std::size_t>(widths[l]), 0.0);
            grads[l].assign(static_cast<std::size_t>(widths[l]), 0.0);
        }
        for (const auto& layer : net.layers()) {
            const std::size_t edges = layer.edges().size();
            evals.emplace_back(edges);
            basis.emplace_back(edges * kMaxBasis, 0.0);
            dbasis.emplace_back(edges * kMaxBasis, 0.0);
            base.emplace_back(static_cast<std::size_t>(layer.n_in()), 0.0);
            dbase.emplace_back(static_cast<std::size_t>(layer.n_in()), 0.0);
            // Edges in one column usually share a grid; remember which ones do.
            std::vector<char> shared(edges, 0);
            for (int j = 1; j < layer.n_out(); ++j) {
                for (int i = 0; i < layer.n_in(); ++i) {
                    shared[static_cast<std::size_t>(j * layer.n_in() + i)] =
                        layer.edge(j, i).grid == layer.edge(0, i).grid ? 1 : 0;
                }
            }
            shares_grid.push_back(std::move(shared));
        }
    }

    void forward(const KanNetwork& net, std::span<const double> x, bool need_input_derivs) {
        std::copy(x.begin(), x.end(), acts[0].begin());
        for (std::size_t l = 0; l < net.depth(); ++l) {
            const KanLayer& layer = net.layer(l);
            const int n_in = layer.n_in();
            const int n_out = layer.n_out();
            auto& out = acts[l + 1];
            std::fill(out.begin(), out.end(), 0.0);
            const bool derivs = need_input_derivs && l > 0;
            for (int i = 0; i < n_in; ++i) {
                const double xi = acts[l][static_cast<std::size_t>(i)];
                if (!std::isfinite(xi)) throw DomainError("forward: non-finite activation");
                base[l][static_cast<std::size_t>(i)] = silu(xi);
                if (derivs) dbase[l][static_cast<std::size_t>(i)] = silu_derivative(xi);
            }
            for (int j = 0; j < n_out; ++j) {
                for (int i = 0; i < n_in; ++i) {
                    const auto e = static_cast<std::size_t>(j * n_in + i);
                    const SplineEdge& edge = layer.edge(j, i);
                    const int k = edge.grid.degree();
                    double* vals = &basis[l][e * kMaxBasis];
                    double* dvals = &dbasis[l][e * kMaxBasis];
                    EdgeEval& ev = evals[l][e];
                    if (shares_grid[l][e]) {
                        const auto e0 = static_cast<std::size_t>(i);
                        const EdgeEval& src = evals[l][e0];
                        ev.first = src.first;
                        ev.inside = src.inside;
                        std::copy_n(&basis[l][e0 * kMaxBasis], k + 1, vals);
                        if (derivs) std::copy_n(&dbasis[l][e0 * kMaxBasis], k + 1, dvals);
                    } else {
                        const LocalBasis lb = local_basis(
                            edge.grid, acts[l][static_cast<std::size_t>(i)],
                            std::span<double>(vals, static_cast<std::size_t>(k + 1)),
                            derivs ? std::span<double>(dvals, static_cast<std::size_t>(k + 1)) : std::span<double>{});
                        ev.first = lb.first;
                        ev.inside = lb.inside;
                    }
                    double spline = 0.0;
                    if (ev.inside) {
                        const int count = edge.grid.basis_count();
                        for (int r = 0; r <= k; ++r) {
                            const int idx = ev.first + r;
                            if (idx >= 0 && idx < count) spline += edge.coeffs[static_cast<std::size_t>(idx)] * vals[r];
                        }
                    }
                    ev.spline = spline;
                    double phi = 0.0;
                    if (edge.base_weight != 0.0) phi += edge.base_weight * base[l][static_cast<std::size_t>(i)];
                    if (edge.spline_weight != 0.0) phi += edge.spline_weight * spline;
                    ev.phi = phi;
                }
            }
            for (int j = 0; j < n_out; ++j) {
                double sum = 0.0;
                for (int i = 0; i < n_in; ++i) sum += evals[l][static_cast<std::size_t>(j * n_in + i)].phi;
                out[static_cast<std::size_t>(j)] = sum;
            }
        }
    }

    std::span<const double> output() const { return acts.back(); }

    std::vector<std::vector<double>> acts;
    std::vector<std::vector<double>> grads;
    std::vector<std::vector<EdgeEval>> evals;
    std::vector<std::vector<double>> basis;
    std::vector<std::vector<double>> dbasis;
    std::vector<std::vector<double>> base;
    std::vector<std::vector<double>> dbase;
    std::vector<std::vector<char>> shares_grid;
};

void check_shapes(const KanNetwork& net, std::size_t in_size, std::size_t target_size, std::size_t rows,
                  const char* what) {
    if (rows == 0) throw ShapeError(std::string(what) + ": empty batch");
    if (in_size != rows * static_cast<std::size_t>(net.input_dim())) {
        throw ShapeError(std::string(what) + ": input matrix does not match network input width " +
                         std::to_string(net.input_dim()));
    }
    if (target_size != rows * static_cast<std::size_t>(net.output_dim())) {
        throw ShapeError(std::string(what) + ": target matrix does not match network output width " +
                         std::to_string(net.output_dim()));
    }
}

// Per-edge mean |φ| over the rows.
std::vector<std::vector<double>> mean_abs_activations(const KanNetwork& net, Workspace& ws,
                                                      std::span<const double> inputs, std::size_t rows) {
    const auto n0 = static_cast<std::size_t>(net.input_dim());
    std::vector<std::vector<double>> sums;
    for (const auto& layer : net.layers()) sums.emplace_back(layer.edges().size(), 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        ws.forward(net, inputs.subspan(r * n0, n0), false);
        for (std::size_t l = 0; l < net.depth(); ++l) {
            for (std::size_t e = 0; e < sums[l].size(); ++e) sums[l][e] += std::abs(ws.evals[l][e].phi);
        }
    }
    for (auto& layer : sums) {
        for (double& s : layer) s /= static_cast<double>(rows);
    }
    return sums;
}

double entropy_of(std::span<const double> scores, double* total_out = nullptr) {
    const double total = std::accumulate(scores.begin(), scores.end(), 0.0);
    if (total_out) *total_out = total;
    if (!(total > 0.0)) return 0.0;
    double h = 0.0;
    for (double s : scores) {
        if (s > 0.0) {
            const double p = s / total;
            h -= p * std::log(p);
        }
    }
    return h;
}

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

double mse_loss(const KanNetwork& net, const Dataset& batch) {
    check_shapes(net, static_cast<std::size_t>(batch.inputs.size()), static_cast<std::size_t>(batch.targets.size()),
                 batch.rows(), "mse_loss");
    Workspace ws(net);
    double sum = 0.0;
    for (std::size_t r = 0; r < batch.rows(); ++r) {
        ws.forward(net, batch.input_row(r), false);
        const auto y = batch.target_row(r);
        const auto yhat = ws.output();
        for (std::size_t k = 0; k < y.size(); ++k) {
            const double d = yhat[k] - y[k];
            sum += d * d;
        }
    }
    return sum / (static_cast<double>(batch.rows()) * net.output_dim());
}

double rmse(const KanNetwork& net, const Dataset& data) { return std::sqrt(mse_loss(net, data)); }

std::vector<double> rmse_per_output(const KanNetwork& net, const Dataset& data) {
    check_shapes(net, static_cast<std::size_t>(data.inputs.size()), static_cast<std::size_t>(data.targets.size()),
                 data.rows(), "rmse_per_output");
    Workspace ws(net);
    std::vector<double> sums(static_cast<std::size_t>(net.output_dim()), 0.0);
    for (std::size_t r = 0; r < data.rows(); ++r) {
        ws.forward(net, data.input_row(r), false);
        const auto y = data.target_row(r);
        const auto yhat = ws.output();
        for (std::size_t k = 0; k < y.size(); ++k) {
            const double d = yhat[k] - y[k];
            sums[k] += d * d;
        }
    }
    for (double& s : sums) s = std::sqrt(s / static_cast<double>(data.rows()));
    return sums;
}

double regularization_loss(const KanNetwork& net, std::span<const double> inputs, const Regularization& reg) {
    const auto n0 = static_cast<std::size_t>(net.input_dim());
    if (inputs.empty() || inputs.size() % n0 != 0) {
        throw ShapeError("regularization_loss: inputs do not match network input width");
    }
    if (reg.l1 == 0.0 && reg.entropy == 0.0) return 0.0;
    Workspace ws(net);
    const auto scores = mean_abs_activations(net, ws, inputs, inputs.size() / n0);
    double total = 0.0;
    for (const auto& layer : scores) {
        double layer_sum = 0.0;
        const double h = entropy_of(layer, &layer_sum);
        total += reg.l1 * layer_sum + reg.entropy * h;
    }
    return total;
}

LossAndGradient loss_and_gradient(const KanNetwork& net, std::span<const double> inputs,
                                  std::span<const double> targets, std::size_t rows, const Regularization& reg) {
    check_shapes(net, inputs.size(), targets.size(), rows, "loss_and_gradient");
    const auto n0 = static_cast<std::size_t>(net.input_dim());
    const auto m = static_cast<std::size_t>(net.output_dim());
    const double n = static_cast<double>(rows);

    Workspace ws(net);
    LossAndGradient out;
    out.gradient.assign(net.parameter_count(), 0.0);

    // Parameter offsets of each edge's coefficient block.
    std::vector<std::vector<std::size_t>> offsets;
    {
        std::size_t pos = 0;
        for (const auto& layer : net.layers()) {
            std::vector<std::size_t> offs;
            for (const auto& e : layer.edges()) {
                offs.push_back(pos);
                pos += e.coeffs.size() + 2;
            }
            offsets.push_back(std::move(offs));
        }
    }

    // d(regularization)/dφ_e(x_n) = rho_e · sign(φ_e(x_n)).
    std::vector<std::vector<double>> rho;
    for (const auto& layer : net.layers()) rho.emplace_back(layer.edges().size(), 0.0);
    const bool regularize = reg.l1 != 0.0 || reg.entropy != 0.0;
    if (regularize) {
        const auto scores = mean_abs_activations(net, ws, inputs, rows);
        for (std::size_t l = 0; l < scores.size(); ++l) {
            double layer_sum = 0.0;
            const double h = entropy_of(scores[l], &layer_sum);
            out.regularization += reg.l1 * layer_sum + reg.entropy * h;
            for (std::size_t e = 0; e < scores[l].size(); ++e) {
                double dh = 0.0;
                if (scores[l][e] > 0.0 && layer_sum > 0.0) {
                    dh = -(std::log(scores[l][e] / layer_sum) + h) / layer_sum;
                }
                rho[l][e] = (reg.l1 + reg.entropy * dh) / n;
            }
        }
    }

    const double scale = 2.0 / (n * static_cast<double>(m));
    double sq_sum = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        ws.forward(net, inputs.subspan(r * n0, n0), true);
        const auto y = targets.subspan(r * m, m);
        auto& g_top = ws.grads.back();
        const auto yhat = ws.output();
        for (std::size_t k = 0; k < m; ++k) {
            const double d = yhat[k] - y[k];
            sq_sum += d * d;
            g_top[k] = scale * d;
        }
        for (std::size_t l = net.depth(); l-- > 0;) {
            const KanLayer& layer = net.layer(l);
            const int n_in = layer.n_in();
            const auto& g_out = ws.grads[l + 1];
            auto& g_in = ws.grads[l];
            std::fill(g_in.begin(), g_in.end(), 0.0);
            for (int j = 0; j < layer.n_out(); ++j) {
                for (int i = 0; i < n_in; ++i) {
                    const auto e = static_cast<std::size_t>(j * n_in + i);
                    const EdgeEval& ev = ws.evals[l][e];
                    double g = g_out[static_cast<std::size_t>(j)];
                    if (regularize) g += rho[l][e] * sign_of(ev.phi);
                    if (g == 0.0) continue;
                    const SplineEdge& edge = layer.edge(j, i);
                    const int k = edge.grid.degree();
                    const int count = edge.grid.basis_count();
                    const std::size_t off = offsets[l][e];
                    const double* vals = &ws.basis[l][e * kMaxBasis];
                    const double* dvals = &ws.dbasis[l][e * kMaxBasis];
                    double dspline = 0.0;
                    if (ev.inside) {
                        for (int q = 0; q <= k; ++q) {
                            const int idx = ev.first + q;
                            if (idx < 0 || idx >= count) continue;
                            out.gradient[off + static_cast<std::size_t>(idx)] += g * edge.spline_weight * vals[q];
                            if (l > 0) dspline += edge.coeffs[static_cast<std::size_t>(idx)] * dvals[q];
                        }
                    }
                    const auto ii = static_cast<std::size_t>(i);
                    out.gradient[off + static_cast<std::size_t>(count)] += g * ws.base[l][ii];
                    out.gradient[off + static_cast<std::size_t>(count) + 1] += g * ev.spline;
                    if (l > 0) {
                        g_in[ii] += g * (edge.base_weight * ws.dbase[l][ii] + edge.spline_weight * dspline);
                    }
                }
            }
        }
    }
    out.mse = sq_sum / (n * static_cast<double>(m));
    out.loss = out.mse + out.regularization;
    return out;
}

std::vector<double> gradients(const KanNetwork& net, const Dataset& batch, const TrainConfig& config) {
    return loss_and_gradient(net, batch.input_span(),
                             {batch.targets.data(), static_cast<std::size_t>(batch.targets.size())}, batch.rows(),
                             {config.l1_penalty, config.entropy_penalty})
        .gradient;
}

TrainResult train(KanNetwork net, const Dataset& data, const Dataset& test, const TrainConfig& config) {
    config.validate();
    data.validate();
    if (data.input_dim() != net.input_dim() || data.target_dim() != net.output_dim()) {
        throw ShapeError("train: dataset widths (" + std::to_string(data.input_dim()) + ", " +
                         std::to_string(data.target_dim()) + ") do not match network (" +
                         std::to_string(net.input_dim()) + ", " + std::to_string(net.output_dim()) + ")");
    }
    const bool has_test = test.rows() > 0;
    if (has_test) {
        test.validate();
        if (test.input_dim() != net.input_dim() || test.target_dim() != net.output_dim()) {
            throw ShapeError("train: test dataset widths do not match network");
        }
    }

    const auto start = std::chrono::steady_clock::now();
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;
    const Regularization reg{config.l1_penalty, config.entropy_penalty};

    TrainResult result{net, {}};
    TrainReport& report = result.report;
    report.train_loss.reserve(config.steps);

    Rng rng(config.seed);
    const std::size_t n = data.rows();
    const bool full_batch = config.batch_size == 0 || config.batch_size >= n;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t cursor = n;  // forces a shuffle on first use
    std::vector<double> batch_in;
    std::vector<double> batch_out;

    std::vector<double> params = net.parameters();
    std::vector<double> m1(params.size(), 0.0);
    std::vector<double> m2(params.size(), 0.0);
    std::size_t t = 0;
    std::size_t next_update = 0;

    for (std::size_t step = 0; step < config.steps; ++step) {
        while (next_update < config.grid_update_schedule.size() &&
               config.grid_update_schedule[next_update].step == step) {
            GridRefit refit = refit_grids(net, config.grid_update_schedule[next_update].new_intervals,
                                          data.input_span());
            net = std::move(refit.net);
            report.ridge_fallbacks += refit.ridge_fallbacks;
            params = net.parameters();
            m1.assign(params.size(), 0.0);
            m2.assign(params.size(), 0.0);
            t = 0;
            ++next_update;
        }

        LossAndGradient lg;
        if (full_batch) {
            lg = loss_and_gradient(net, data.input_span(),
                                   {data.targets.data(), static_cast<std::size_t>(data.targets.size())}, n, reg);
        } else {
            batch_in.clear();
            batch_out.clear();
            for (std::size_t b = 0; b < config.batch_size; ++b) {
                if (cursor >= n) {
                    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
                    cursor = 0;
                }
                const std::size_t row = order[cursor++];
                const auto in = data.input_row(row);
                const auto out = data.target_row(row);
                batch_in.insert(batch_in.end(), in.begin(), in.end());
                batch_out.insert(batch_out.end(), out.begin(), out.end());
            }
            lg = loss_and_gradient(net, batch_in, batch_out, config.batch_size, reg);
        }
        const bool finite = std::isfinite(lg.loss) &&
                            std::all_of(lg.gradient.begin(), lg.gradient.end(), [](double g) { return std::isfinite(g); });
        if (!finite) {
            throw TrainingDivergedError("training diverged at step " + std::to_string(step), step);
        }
        report.train_loss.push_back(lg.loss);

        ++t;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        for (std::size_t p = 0; p < params.size(); ++p) {
            const double g = lg.gradient[p];
            m1[p] = beta1 * m1[p] + (1.0 - beta1) * g;
            m2[p] = beta2 * m2[p] + (1.0 - beta2) * g * g;
            params[p] -= config.learning_rate * (m1[p] / bc1) / (std::sqrt(m2[p] / bc2) + eps);
        }
        net.set_parameters(params);

        const bool last = step + 1 == config.steps;
        const bool due = config.eval_every > 0 && (step + 1) % config.eval_every == 0;
        if (has_test && (due || last)) {
            const double test_rmse = rmse(net, test);
            if (!std::isfinite(test_rmse)) {
                throw TrainingDivergedError("test loss became non-finite at step " + std::to_string(step), step);
            }
            report.eval_steps.push_back(step + 1);
            report.test_rmse.push_back(test_rmse);
        }
    }

    report.final_train_rmse = rmse(net, data);
    report.parameter_count = net.parameter_count();
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.net = std::move(net);
    return result;
}

}  // namespace kanopf::kan
