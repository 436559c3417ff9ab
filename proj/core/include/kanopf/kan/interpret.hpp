#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "kanopf/kan/network.hpp"

namespace kanopf::kan {

enum class SnapshotTag { before, after };

/// φ_{j,i} of one edge sampled on a uniform, strictly increasing x grid.
struct ActivationSnapshot {
    std::size_t layer = 0;
    int out = 0;
    int in = 0;
    std::vector<double> x;
    std::vector<double> values;
    SnapshotTag tag = SnapshotTag::after;
};

/// One snapshot per edge of `layer`, each over the observed range of its
/// input node on `sample_inputs` (row-major N x N_0). Throws DomainError on
/// empty samples.
std::vector<ActivationSnapshot> snapshot_activations(const KanNetwork& net, std::size_t layer,
                                                     std::span<const double> sample_inputs, int n_points,
                                                     SnapshotTag tag = SnapshotTag::after);

/// Same, over explicit per-input ranges; lets before/after snapshots share
/// one x grid.
std::vector<ActivationSnapshot> snapshot_activations(const KanNetwork& net, std::size_t layer,
                                                     std::span<const Domain> input_ranges, int n_points,
                                                     SnapshotTag tag = SnapshotTag::after);

/// Observed [min, max] of every input node of `layer` on the samples.
std::vector<Domain> observed_input_ranges(const KanNetwork& net, std::size_t layer,
                                          std::span<const double> sample_inputs);

enum class Candidate {
    linear,
    quadratic,
    cubic,
    sine,
    exponential,
    logarithm,
    absolute,
    hyperbolic_tangent,
    square_root,
};

inline constexpr std::array<Candidate, 9> kCandidateLibrary = {
    Candidate::linear,   Candidate::quadratic,   Candidate::cubic,
    Candidate::sine,     Candidate::exponential, Candidate::logarithm,
    Candidate::absolute, Candidate::hyperbolic_tangent, Candidate::square_root,
};

std::string_view candidate_name(Candidate c) noexcept;

/// c·g(a·x + b) + d with the goodness of fit on the snapshot points.
struct SymbolicFit {
    Candidate candidate = Candidate::linear;
    double a = 1.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;
    double r_squared = 0.0;
    bool valid = false;  ///< false when no (a, b) kept g inside its domain

    double operator()(double x) const;
};

/// Best fit of one candidate: coarse (a, b) grid, closed-form (c, d), then
/// two rounds of neighbourhood-halving refinement of (a, b).
SymbolicFit fit_candidate(std::span<const double> x, std::span<const double> y, Candidate candidate);

/// Fits of all nine candidates, in library order.
std::vector<SymbolicFit> fit_all_candidates(std::span<const double> x, std::span<const double> y);

/// Highest-r² candidate. Requires at least 10 points; a constant series
/// yields linear with c = 0 and r² = 1.
SymbolicFit fit_symbolic(std::span<const double> x, std::span<const double> y);
SymbolicFit fit_symbolic(const ActivationSnapshot& snapshot);

}  // namespace kanopf::kan
