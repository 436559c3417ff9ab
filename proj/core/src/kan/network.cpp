#include "kanopf/kan/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kanopf/errors.hpp"
#include "kanopf/random.hpp"

namespace kanopf::kan {

double silu(double x) noexcept { return x / (1.0 + std::exp(-x)); }

double silu_derivative(double x) noexcept {
    const double s = 1.0 / (1.0 + std::exp(-x));
    return s * (1.0 + x * (1.0 - s));
}

SplineEdge::SplineEdge(SplineGrid g, std::vector<double> c, double w_b, double w_s)
    : grid(std::move(g)), coeffs(std::move(c)), base_weight(w_b), spline_weight(w_s) {
    if (coeffs.size() != static_cast<std::size_t>(grid.basis_count())) {
        throw ShapeError("SplineEdge: expected " + std::to_string(grid.basis_count()) +
                         " coefficients, got " + std::to_string(coeffs.size()));
    }
    const bool finite = std::isfinite(w_b) && std::isfinite(w_s) &&
                        std::all_of(coeffs.begin(), coeffs.end(), [](double v) { return std::isfinite(v); });
    if (!finite) throw DomainError("SplineEdge: non-finite parameter");
}

double edge_activation(const SplineEdge& edge, double x) {
    if (!std::isfinite(x)) throw DomainError("edge_activation: non-finite input");
    double out = 0.0;
    if (edge.base_weight != 0.0) out += edge.base_weight * silu(x);
    if (edge.spline_weight != 0.0) out += edge.spline_weight * edge.spline(x);
    return out;
}

KanLayer::KanLayer(int n_in, int n_out, std::vector<SplineEdge> edges)
    : n_in_(n_in), n_out_(n_out), edges_(std::move(edges)) {
    if (n_in < 1 || n_out < 1) throw ShapeError("KanLayer: dimensions must be positive");
    if (edges_.size() != static_cast<std::size_t>(n_in) * static_cast<std::size_t>(n_out)) {
        throw ShapeError("KanLayer: expected " + std::to_string(n_in * n_out) + " edges, got " +
                         std::to_string(edges_.size()));
    }
}

KanLayer::KanLayer(int n_in, int n_out, const SplineGrid& grid)
    : KanLayer(n_in, n_out,
               std::vector<SplineEdge>(static_cast<std::size_t>(std::max(n_in, 0) * std::max(n_out, 0)),
                                       SplineEdge(grid))) {}

std::size_t KanLayer::index(int out, int in) const {
    if (out < 0 || out >= n_out_ || in < 0 || in >= n_in_) {
        throw ShapeError("KanLayer: edge index (" + std::to_string(out) + ", " + std::to_string(in) +
                         ") out of range");
    }
    return static_cast<std::size_t>(out * n_in_ + in);
}

std::vector<double> layer_forward(const KanLayer& layer, std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(layer.n_in())) {
        throw ShapeError("layer_forward: expected input of length " + std::to_string(layer.n_in()) +
                         ", got " + std::to_string(x.size()));
    }
    std::vector<double> out(static_cast<std::size_t>(layer.n_out()), 0.0);
    for (int j = 0; j < layer.n_out(); ++j) {
        double sum = 0.0;
        for (int i = 0; i < layer.n_in(); ++i) sum += edge_activation(layer.edge(j, i), x[i]);
        out[j] = sum;
    }
    return out;
}

KanNetwork::KanNetwork(std::vector<KanLayer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw ShapeError("KanNetwork: need at least one layer");
    widths_.push_back(layers_.front().n_in());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        if (layers_[l].n_in() != widths_.back()) {
            throw ShapeError("KanNetwork: layer " + std::to_string(l) + " expects " +
                             std::to_string(layers_[l].n_in()) + " inputs but previous width is " +
                             std::to_string(widths_.back()));
        }
        widths_.push_back(layers_[l].n_out());
    }
}

KanNetwork KanNetwork::zeros(std::span<const int> widths, const SplineGrid& grid) {
    if (widths.size() < 2) throw ShapeError("KanNetwork: widths needs at least two entries");
    std::vector<KanLayer> layers;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) layers.emplace_back(widths[l], widths[l + 1], grid);
    return KanNetwork(std::move(layers));
}

std::size_t KanNetwork::edge_count() const noexcept {
    std::size_t n = 0;
    for (const auto& layer : layers_) n += layer.edges().size();
    return n;
}

std::size_t KanNetwork::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& layer : layers_) {
        for (const auto& e : layer.edges()) n += e.coeffs.size() + 2;
    }
    return n;
}

std::vector<double> KanNetwork::parameters() const {
    std::vector<double> p;
    p.reserve(parameter_count());
    for (const auto& layer : layers_) {
        for (const auto& e : layer.edges()) {
            p.insert(p.end(), e.coeffs.begin(), e.coeffs.end());
            p.push_back(e.base_weight);
            p.push_back(e.spline_weight);
        }
    }
    return p;
}

void KanNetwork::set_parameters(std::span<const double> params) {
    if (params.size() != parameter_count()) {
        throw ShapeError("set_parameters: expected " + std::to_string(parameter_count()) +
                         " values, got " + std::to_string(params.size()));
    }
    std::size_t pos = 0;
    for (auto& layer : layers_) {
        for (auto& e : layer.edges()) {
            std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(pos), e.coeffs.size(), e.coeffs.begin());
            pos += e.coeffs.size();
            e.base_weight = params[pos++];
            e.spline_weight = params[pos++];
        }
    }
}

std::vector<double> network_forward(const KanNetwork& net, std::span<const double> xi) {
    if (xi.size() != static_cast<std::size_t>(net.input_dim())) {
        throw ShapeError("network_forward: expected input of length " + std::to_string(net.input_dim()) +
                         ", got " + std::to_string(xi.size()));
    }
    std::vector<double> x(xi.begin(), xi.end());
    for (const auto& layer : net.layers()) x = layer_forward(layer, x);
    return x;
}

PruneMask PruneMask::all(const KanNetwork& net, bool value) {
    PruneMask m;
    for (const auto& layer : net.layers()) m.keep.emplace_back(layer.edges().size(), value);
    return m;
}

std::size_t PruneMask::kept_count() const {
    std::size_t n = 0;
    for (const auto& layer : keep) n += static_cast<std::size_t>(std::count(layer.begin(), layer.end(), true));
    return n;
}

KanNetwork apply_prune_mask(const KanNetwork& net, const PruneMask& mask) {
    if (mask.keep.size() != net.depth()) throw ShapeError("apply_prune_mask: layer count mismatch");
    KanNetwork out = net;
    for (std::size_t l = 0; l < net.depth(); ++l) {
        auto edges = out.layer(l).edges();
        if (mask.keep[l].size() != edges.size()) {
            throw ShapeError("apply_prune_mask: edge count mismatch in layer " + std::to_string(l));
        }
        for (std::size_t e = 0; e < edges.size(); ++e) {
            if (!mask.keep[l][e]) {
                edges[e].base_weight = 0.0;
                edges[e].spline_weight = 0.0;
            }
        }
    }
    return out;
}

KanNetwork initialize_network(std::span<const int> widths, const InitConfig& config,
                              std::span<const std::vector<Domain>> domains) {
    if (widths.size() < 2) throw ShapeError("initialize_network: widths needs at least two entries");
    if (std::any_of(widths.begin(), widths.end(), [](int w) { return w < 1; })) {
        throw ShapeError("initialize_network: widths must be positive");
    }
    if (!domains.empty() && domains.size() != widths.size() - 1) {
        throw ShapeError("initialize_network: need one domain list per layer");
    }
    Rng rng(config.seed);
    std::vector<KanLayer> layers;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const int n_in = widths[l];
        const int n_out = widths[l + 1];
        if (!domains.empty() && domains[l].size() != static_cast<std::size_t>(n_in)) {
            throw ShapeError("initialize_network: layer " + std::to_string(l) + " needs " +
                             std::to_string(n_in) + " domains");
        }
        const double w_b = config.base_scale / std::sqrt(static_cast<double>(n_in));
        std::vector<SplineEdge> edges;
        edges.reserve(static_cast<std::size_t>(n_in * n_out));
        for (int j = 0; j < n_out; ++j) {
            for (int i = 0; i < n_in; ++i) {
                const Domain d = domains.empty() ? Domain{-1.0, 1.0} : domains[l][static_cast<std::size_t>(i)];
                SplineGrid grid(d.first, d.second, config.grid_intervals, config.degree);
                std::vector<double> coeffs(static_cast<std::size_t>(grid.basis_count()));
                for (double& c : coeffs) c = config.noise_scale * rng.normal();
                edges.emplace_back(std::move(grid), std::move(coeffs), w_b, 1.0);
            }
        }
        layers.emplace_back(n_in, n_out, std::move(edges));
    }
    return KanNetwork(std::move(layers));
}

namespace {

Domain widen(double lo, double hi, double margin) {
    double range = hi - lo;
    if (!(range > 0.0)) {
        const double pad = std::max(1e-3, 1e-3 * std::abs(lo));
        return {lo - pad, hi + pad};
    }
    return {lo - margin * range, hi + margin * range};
}

}  // namespace

std::vector<std::vector<Domain>> observed_domains(const KanNetwork& net, std::span<const double> samples,
                                                  double margin) {
    const auto n_in = static_cast<std::size_t>(net.input_dim());
    if (samples.empty() || samples.size() % n_in != 0) {
        throw ShapeError("observed_domains: sample matrix does not match input width");
    }
    const std::size_t rows = samples.size() / n_in;
    std::vector<std::vector<double>> current(rows);
    for (std::size_t r = 0; r < rows; ++r) current[r].assign(samples.begin() + static_cast<std::ptrdiff_t>(r * n_in),
                                                             samples.begin() + static_cast<std::ptrdiff_t>((r + 1) * n_in));
    std::vector<std::vector<Domain>> out;
    for (const auto& layer : net.layers()) {
        std::vector<Domain> doms;
        for (int i = 0; i < layer.n_in(); ++i) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (const auto& row : current) {
                lo = std::min(lo, row[i]);
                hi = std::max(hi, row[i]);
            }
            doms.push_back(widen(lo, hi, margin));
        }
        out.push_back(std::move(doms));
        for (auto& row : current) row = layer_forward(layer, row);
    }
    return out;
}

KanNetwork initialize_network_from_samples(std::span<const int> widths, const InitConfig& config,
                                           std::span<const double> samples,
                                           std::vector<std::vector<Domain>>* domains_out) {
    KanNetwork net = initialize_network(widths, config);
    std::vector<std::vector<Domain>> domains;
    // Layer l's domain only depends on layers < l, so one pass per layer settles them.
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        auto observed = observed_domains(net, samples);
        for (std::size_t m = 0; m <= l; ++m) {
            if (m < domains.size()) continue;
            domains.push_back(observed[m]);
        }
        auto full = domains;
        for (std::size_t m = domains.size(); m + 1 < widths.size(); ++m) {
            full.emplace_back(static_cast<std::size_t>(widths[m]), Domain{-1.0, 1.0});
        }
        net = initialize_network(widths, config, full);
    }
    if (domains_out) *domains_out = domains;
    return net;
}

}  // namespace kanopf::kan
