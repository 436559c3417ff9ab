#include "kanopf/kan/interpret.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "kanopf/errors.hpp"

namespace kanopf::kan {

std::vector<Domain> observed_input_ranges(const KanNetwork& net, std::size_t layer,
                                          std::span<const double> sample_inputs) {
    if (layer >= net.depth()) {
        throw DomainError("layer " + std::to_string(layer) + " out of range (network has " +
                          std::to_string(net.depth()) + " layers)");
    }
    const auto n0 = static_cast<std::size_t>(net.input_dim());
    if (sample_inputs.empty()) throw DomainError("snapshot_activations: empty sample set");
    if (sample_inputs.size() % n0 != 0) throw ShapeError("snapshot_activations: sample width mismatch");
    const std::size_t rows = sample_inputs.size() / n0;
    const int width = net.layer(layer).n_in();
    std::vector<Domain> ranges(static_cast<std::size_t>(width),
                               {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()});
    for (std::size_t r = 0; r < rows; ++r) {
        std::vector<double> x(sample_inputs.begin() + static_cast<std::ptrdiff_t>(r * n0),
                              sample_inputs.begin() + static_cast<std::ptrdiff_t>((r + 1) * n0));
        for (std::size_t l = 0; l < layer; ++l) x = layer_forward(net.layer(l), x);
        for (int i = 0; i < width; ++i) {
            auto& d = ranges[static_cast<std::size_t>(i)];
            d.first = std::min(d.first, x[static_cast<std::size_t>(i)]);
            d.second = std::max(d.second, x[static_cast<std::size_t>(i)]);
        }
    }
    return ranges;
}

std::vector<ActivationSnapshot> snapshot_activations(const KanNetwork& net, std::size_t layer,
                                                     std::span<const Domain> input_ranges, int n_points,
                                                     SnapshotTag tag) {
    if (layer >= net.depth()) throw DomainError("snapshot_activations: layer out of range");
    if (n_points < 2) throw DomainError("snapshot_activations: need at least two points");
    const KanLayer& lay = net.layer(layer);
    if (input_ranges.size() != static_cast<std::size_t>(lay.n_in())) {
        throw ShapeError("snapshot_activations: need one range per input node");
    }
    std::vector<ActivationSnapshot> out;
    for (int j = 0; j < lay.n_out(); ++j) {
        for (int i = 0; i < lay.n_in(); ++i) {
            Domain d = input_ranges[static_cast<std::size_t>(i)];
            if (!(d.second > d.first)) {
                const double pad = std::max(1e-6, 1e-6 * std::abs(d.first));
                d = {d.first - pad, d.second + pad};
            }
            ActivationSnapshot snap;
            snap.layer = layer;
            snap.out = j;
            snap.in = i;
            snap.tag = tag;
            snap.x.resize(static_cast<std::size_t>(n_points));
            snap.values.resize(static_cast<std::size_t>(n_points));
            for (int p = 0; p < n_points; ++p) {
                const double x = p + 1 == n_points ? d.second
                                                   : d.first + (d.second - d.first) * p / (n_points - 1);
                snap.x[static_cast<std::size_t>(p)] = x;
                snap.values[static_cast<std::size_t>(p)] = edge_activation(lay.edge(j, i), x);
            }
            out.push_back(std::move(snap));
        }
    }
    return out;
}

std::vector<ActivationSnapshot> snapshot_activations(const KanNetwork& net, std::size_t layer,
                                                     std::span<const double> sample_inputs, int n_points,
                                                     SnapshotTag tag) {
    const auto ranges = observed_input_ranges(net, layer, sample_inputs);
    return snapshot_activations(net, layer, ranges, n_points, tag);
}

std::string_view candidate_name(Candidate c) noexcept {
    switch (c) {
        case Candidate::linear: return "linear";
        case Candidate::quadratic: return "quadratic";
        case Candidate::cubic: return "cubic";
        case Candidate::sine: return "sine";
        case Candidate::exponential: return "exponential";
        case Candidate::logarithm: return "logarithm";
        case Candidate::absolute: return "absolute-value";
        case Candidate::hyperbolic_tangent: return "hyperbolic-tangent";
        case Candidate::square_root: return "square-root";
    }
    return "unknown";
}

namespace {

// g(z), or NaN outside the candidate's domain.
double apply(Candidate c, double z) {
    switch (c) {
        case Candidate::linear: return z;
        case Candidate::quadratic: return z * z;
        case Candidate::cubic: return z * z * z;
        case Candidate::sine: return std::sin(z);
        case Candidate::exponential: return z > 700.0 ? std::numeric_limits<double>::quiet_NaN() : std::exp(z);
        case Candidate::logarithm: return z > 0.0 ? std::log(z) : std::numeric_limits<double>::quiet_NaN();
        case Candidate::absolute: return std::abs(z);
        case Candidate::hyperbolic_tangent: return std::tanh(z);
        case Candidate::square_root: return z >= 0.0 ? std::sqrt(z) : std::numeric_limits<double>::quiet_NaN();
    }
    return std::numeric_limits<double>::quiet_NaN();
}

struct Trial {
    double alpha = 0.0;
    double beta = 0.0;
    double c = 0.0;
    double d = 0.0;
    double r2 = -std::numeric_limits<double>::infinity();
    bool valid = false;
};

// (c, d) by least squares for fixed (alpha, beta) on normalised inputs u.
Trial evaluate(Candidate cand, std::span<const double> u, std::span<const double> y, double y_mean, double sst,
               double alpha, double beta) {
    Trial t{alpha, beta};
    const std::size_t n = u.size();
    std::vector<double> z(n);
    double z_mean = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        z[p] = apply(cand, alpha * u[p] + beta);
        if (!std::isfinite(z[p])) return t;
        z_mean += z[p];
    }
    z_mean /= static_cast<double>(n);
    double szz = 0.0;
    double szy = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        const double dz = z[p] - z_mean;
        szz += dz * dz;
        szy += dz * (y[p] - y_mean);
    }
    t.c = szz > 0.0 ? szy / szz : 0.0;
    t.d = y_mean - t.c * z_mean;
    double sse = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        const double e = y[p] - (t.c * z[p] + t.d);
        sse += e * e;
    }
    if (sst > 0.0) {
        t.r2 = 1.0 - sse / sst;
    } else {
        t.r2 = sse == 0.0 ? 1.0 : -std::numeric_limits<double>::infinity();
    }
    t.valid = std::isfinite(t.c) && std::isfinite(t.d) && !std::isnan(t.r2);
    return t;
}

void check_series(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ShapeError("symbolic fit: x and y lengths differ");
    if (x.size() < 10) throw DomainError("symbolic fit: need at least 10 points");
    for (std::size_t p = 0; p < x.size(); ++p) {
        if (!std::isfinite(x[p]) || !std::isfinite(y[p])) throw DomainError("symbolic fit: non-finite sample");
    }
}

}  // namespace

double SymbolicFit::operator()(double x) const { return c * apply(candidate, a * x + b) + d; }

SymbolicFit fit_candidate(std::span<const double> x, std::span<const double> y, Candidate candidate) {
    check_series(x, y);
    const std::size_t n = x.size();
    const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
    const double center = 0.5 * (*lo_it + *hi_it);
    double half = 0.5 * (*hi_it - *lo_it);
    if (!(half > 0.0)) half = 1.0;
    std::vector<double> u(n);
    for (std::size_t p = 0; p < n; ++p) u[p] = (x[p] - center) / half;
    const double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sst = 0.0;
    for (double v : y) sst += (v - y_mean) * (v - y_mean);

    Trial best;
    if (candidate == Candidate::linear) {
        best = evaluate(candidate, u, y, y_mean, sst, 1.0, 0.0);
    } else {
        constexpr std::array<double, 5> scales = {0.25, 0.5, 1.0, 2.0, 4.0};
        constexpr int offsets = 11;
        constexpr double offset_span = 2.0;
        for (double sign : {1.0, -1.0}) {
            for (double s : scales) {
                for (int k = 0; k < offsets; ++k) {
                    const double beta = -offset_span + 2.0 * offset_span * k / (offsets - 1);
                    const Trial t = evaluate(candidate, u, y, y_mean, sst, sign * s, beta);
                    if (t.valid && t.r2 > best.r2) best = t;
                }
            }
        }
        if (best.valid) {
            const double beta_step0 = 2.0 * offset_span / (offsets - 1);
            for (int round = 0; round < 2; ++round) {
                double da = 0.5 * std::abs(best.alpha);
                double db = beta_step0;
                for (int halving = 0; halving < 16; ++halving) {
                    const Trial center_trial = best;
                    for (int ia = -1; ia <= 1; ++ia) {
                        for (int ib = -1; ib <= 1; ++ib) {
                            if (ia == 0 && ib == 0) continue;
                            const Trial t = evaluate(candidate, u, y, y_mean, sst, center_trial.alpha + ia * da,
                                                     center_trial.beta + ib * db);
                            if (t.valid && t.r2 > best.r2) best = t;
                        }
                    }
                    da *= 0.5;
                    db *= 0.5;
                }
            }
        }
    }

    SymbolicFit fit;
    fit.candidate = candidate;
    fit.valid = best.valid;
    if (!best.valid) {
        fit.r_squared = -std::numeric_limits<double>::infinity();
        return fit;
    }
    // Back to raw x: alpha·u + beta = (alpha/half)·x + (beta - alpha·center/half).
    fit.a = best.alpha / half;
    fit.b = best.beta - best.alpha * center / half;
    fit.c = best.c;
    fit.d = best.d;
    fit.r_squared = std::min(best.r2, 1.0);
    return fit;
}

std::vector<SymbolicFit> fit_all_candidates(std::span<const double> x, std::span<const double> y) {
    std::vector<SymbolicFit> fits;
    for (Candidate c : kCandidateLibrary) fits.push_back(fit_candidate(x, y, c));
    return fits;
}

SymbolicFit fit_symbolic(std::span<const double> x, std::span<const double> y) {
    const auto fits = fit_all_candidates(x, y);
    SymbolicFit best = fits.front();
    for (const auto& f : fits) {
        if (f.valid && (!best.valid || f.r_squared > best.r_squared)) best = f;
    }
    return best;
}

SymbolicFit fit_symbolic(const ActivationSnapshot& snapshot) { return fit_symbolic(snapshot.x, snapshot.values); }

}  // namespace kanopf::kan
