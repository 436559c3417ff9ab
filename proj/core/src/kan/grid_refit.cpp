#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "kanopf/errors.hpp"
#include "kanopf/kan/train.hpp"

namespace kanopf::kan {

namespace {

// Weight of the coefficient smoothness penalty relative to the mean
// squared column norm of the design matrix.
constexpr double kSmoothing = 1e-6;

// Weight of the per-edge match relative to the per-node match.
constexpr double kEdgeWeight = 1.0;

RowMatrix propagate(const KanLayer& layer, const RowMatrix& in) {
    RowMatrix out(in.rows(), layer.n_out());
    for (Eigen::Index r = 0; r < in.rows(); ++r) {
        const auto y =
            layer_forward(layer, std::span<const double>(in.data() + r * in.cols(), static_cast<std::size_t>(in.cols())));
        for (int j = 0; j < layer.n_out(); ++j) out(r, j) = y[static_cast<std::size_t>(j)];
    }
    return out;
}

// Inputs seen by every layer of `net` on the sample rows: layer_inputs[l]
// is rows x widths[l], row-major.
std::vector<RowMatrix> layer_inputs(const KanNetwork& net, std::span<const double> samples) {
    const auto n0 = static_cast<std::size_t>(net.input_dim());
    if (samples.empty() || samples.size() % n0 != 0) {
        throw ShapeError("sample matrix does not match network input width " + std::to_string(n0));
    }
    const auto rows = static_cast<Eigen::Index>(samples.size() / n0);
    std::vector<RowMatrix> out;
    out.emplace_back(Eigen::Map<const RowMatrix>(samples.data(), rows, static_cast<Eigen::Index>(n0)));
    for (const auto& layer : net.layers()) out.push_back(propagate(layer, out.back()));
    return out;
}

}  // namespace

GridRefit refit_grids(const KanNetwork& net, int intervals, std::span<const double> sample_inputs) {
    const auto old_inputs = layer_inputs(net, sample_inputs);

    // Layers are refit front to back. Layer l is fit on the inputs produced
    // by the already refit layers < l, against the old activations on the
    // old inputs, so upstream fit errors are absorbed where possible.
    GridRefit result{net, 0};
    RowMatrix x = old_inputs[0];
    for (std::size_t l = 0; l < net.depth(); ++l) {
        const KanLayer& old_layer = net.layer(l);
        KanLayer& new_layer = result.net.layer(l);
        const RowMatrix& x_old = old_inputs[l];
        const auto domains = observed_domains(result.net, sample_inputs, 0.1)[l];
        const Eigen::Index rows = x.rows();
        const int n_in = old_layer.n_in();

        // Every edge leaving input i gets the same grid and design matrix.
        std::vector<SplineGrid> grids;
        std::vector<Eigen::MatrixXd> designs;
        std::vector<bool> full_rank;
        double lambda = 0.0;
        for (int i = 0; i < n_in; ++i) {
            const Domain d = domains[static_cast<std::size_t>(i)];
            const int degree = old_layer.edge(0, i).grid.degree();
            for (int j = 0; j < old_layer.n_out(); ++j) {
                if (old_layer.edge(j, i).grid.degree() != degree) {
                    throw DomainError("refit_grids: edges sharing an input must share a spline degree");
                }
            }
            grids.emplace_back(d.first, d.second, intervals, degree);
            const int cols = grids.back().basis_count();
            Eigen::MatrixXd design(rows, cols);
            for (Eigen::Index r = 0; r < rows; ++r) {
                const auto b = bspline_basis(x(r, i), grids.back());
                for (int c = 0; c < cols; ++c) design(r, c) = b[static_cast<std::size_t>(c)];
            }
            full_rank.push_back(Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(design).rank() == cols);
            if (!full_rank.back()) result.ridge_fallbacks += static_cast<std::size_t>(old_layer.n_out());
            lambda = std::max(lambda, design.colwise().squaredNorm().sum() / cols);
            designs.push_back(std::move(design));
        }
        lambda *= kSmoothing;
        const double w = std::sqrt(lambda);

        for (int j = 0; j < old_layer.n_out(); ++j) {
            // Spline values per edge that reproduce the old activation given
            // the new input.
            std::vector<Eigen::VectorXd> edge_targets;
            Eigen::VectorXd node_target = Eigen::VectorXd::Zero(rows);
            for (int i = 0; i < n_in; ++i) {
                const SplineEdge& e = old_layer.edge(j, i);
                Eigen::VectorXd t(rows);
                for (Eigen::Index r = 0; r < rows; ++r) {
                    const double old_value = e.base_weight * silu(x_old(r, i)) + e.spline_weight * e.spline(x_old(r, i));
                    if (e.spline_weight == 0.0) {
                        t(r) = e.spline(x(r, i));
                    } else {
                        t(r) = (old_value - e.base_weight * silu(x(r, i))) / e.spline_weight;
                        node_target(r) += e.spline_weight * t(r);
                    }
                }
                edge_targets.push_back(std::move(t));
            }

            // Least squares over all edges into node j: the node sum matches
            // the old node value and each edge matches its own target on
            // every sample, and a small second-difference penalty keeps
            // coefficients of weakly supported basis functions bounded.
            // Linear functions carry no penalty. Edges with a zero spline
            // weight only enter through their own rows.
            Eigen::Index n_rows = rows;
            Eigen::Index n_cols = 0;
            std::vector<Eigen::Index> offset;
            for (int i = 0; i < n_in; ++i) {
                const auto cols = designs[static_cast<std::size_t>(i)].cols();
                offset.push_back(n_cols);
                n_cols += cols;
                n_rows += rows + std::max<Eigen::Index>(cols - 2, 0) + (full_rank[static_cast<std::size_t>(i)] ? 0 : cols);
            }
            Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n_rows, n_cols);
            Eigen::VectorXd y = Eigen::VectorXd::Zero(n_rows);
            y.head(rows) = node_target;
            Eigen::Index row = rows;
            for (int i = 0; i < n_in; ++i) {
                const auto& B = designs[static_cast<std::size_t>(i)];
                const auto& t = edge_targets[static_cast<std::size_t>(i)];
                const Eigen::Index o = offset[static_cast<std::size_t>(i)];
                const Eigen::Index cols = B.cols();
                const double ws = old_layer.edge(j, i).spline_weight;
                const double mu = ws == 0.0 ? 1.0 : kEdgeWeight;
                if (ws != 0.0) A.block(0, o, rows, cols) = ws * B;
                A.block(row, o, rows, cols) = mu * B;
                y.segment(row, rows) = mu * t;
                row += rows;
                for (Eigen::Index m = 0; m + 2 < cols; ++m, ++row) {
                    A(row, o + m) = w;
                    A(row, o + m + 1) = -2.0 * w;
                    A(row, o + m + 2) = w;
                }
                if (!full_rank[static_cast<std::size_t>(i)]) {
                    A.block(row, o, cols, cols).diagonal().setConstant(w);
                    row += cols;
                }
            }
            const Eigen::VectorXd coeffs = A.colPivHouseholderQr().solve(y);
            for (int i = 0; i < n_in; ++i) {
                const SplineEdge& e = old_layer.edge(j, i);
                const auto cols = designs[static_cast<std::size_t>(i)].cols();
                const double* c0 = coeffs.data() + offset[static_cast<std::size_t>(i)];
                new_layer.edge(j, i) = SplineEdge(grids[static_cast<std::size_t>(i)], std::vector<double>(c0, c0 + cols),
                                                  e.base_weight, e.spline_weight);
            }
        }
        x = propagate(new_layer, x);
    }
    return result;
}

GridRefit extend_grid(const KanNetwork& net, int new_intervals, std::span<const double> sample_inputs) {
    for (const auto& layer : net.layers()) {
        for (const auto& e : layer.edges()) {
            if (new_intervals <= e.grid.num_intervals()) {
                throw DomainError("extend_grid: new G " + std::to_string(new_intervals) +
                                  " must exceed current G " + std::to_string(e.grid.num_intervals()));
            }
        }
    }
    return refit_grids(net, new_intervals, sample_inputs);
}

std::vector<std::vector<double>> importance_scores(const KanNetwork& net, std::span<const double> sample_inputs) {
    const auto inputs = layer_inputs(net, sample_inputs);
    std::vector<std::vector<double>> scores;
    for (std::size_t l = 0; l < net.depth(); ++l) {
        const KanLayer& layer = net.layer(l);
        const RowMatrix& x = inputs[l];
        std::vector<double> s(layer.edges().size(), 0.0);
        for (int j = 0; j < layer.n_out(); ++j) {
            for (int i = 0; i < layer.n_in(); ++i) {
                double sum = 0.0;
                for (Eigen::Index r = 0; r < x.rows(); ++r) sum += std::abs(edge_activation(layer.edge(j, i), x(r, i)));
                s[static_cast<std::size_t>(j * layer.n_in() + i)] = sum / static_cast<double>(x.rows());
            }
        }
        scores.push_back(std::move(s));
    }
    return scores;
}

PruneMask prune_by_threshold(const KanNetwork& net, std::span<const double> sample_inputs, double threshold) {
    if (!(threshold >= 0.0)) throw DomainError("prune_by_threshold: threshold must be >= 0");
    const auto scores = importance_scores(net, sample_inputs);
    PruneMask mask;
    for (const auto& layer : scores) {
        std::vector<bool> keep(layer.size());
        for (std::size_t e = 0; e < layer.size(); ++e) keep[e] = !(layer[e] < threshold);
        mask.keep.push_back(std::move(keep));
    }
    return mask;
}

std::vector<int> disconnected_outputs(const KanNetwork& net, const PruneMask& mask) {
    if (mask.keep.size() != net.depth()) throw ShapeError("disconnected_outputs: layer count mismatch");
    std::vector<bool> reachable(static_cast<std::size_t>(net.input_dim()), true);
    for (std::size_t l = 0; l < net.depth(); ++l) {
        const KanLayer& layer = net.layer(l);
        if (mask.keep[l].size() != layer.edges().size()) throw ShapeError("disconnected_outputs: edge count mismatch");
        std::vector<bool> next(static_cast<std::size_t>(layer.n_out()), false);
        for (int j = 0; j < layer.n_out(); ++j) {
            for (int i = 0; i < layer.n_in(); ++i) {
                if (reachable[static_cast<std::size_t>(i)] && mask.kept(l, j, i, layer.n_in())) {
                    next[static_cast<std::size_t>(j)] = true;
                }
            }
        }
        reachable = std::move(next);
    }
    std::vector<int> out;
    for (std::size_t j = 0; j < reachable.size(); ++j) {
        if (!reachable[j]) out.push_back(static_cast<int>(j));
    }
    return out;
}

}  // namespace kanopf::kan
