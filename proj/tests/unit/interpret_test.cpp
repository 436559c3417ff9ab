#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "kanopf/errors.hpp"
#include "kanopf/kan/interpret.hpp"
#include "support.hpp"

using namespace kanopf;
using kan::Candidate;
using kan::KanLayer;
using kan::KanNetwork;
using kan::SplineGrid;

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1.0);
    return v;
}

template <class F>
std::vector<double> map_values(const std::vector<double>& x, F f) {
    std::vector<double> y;
    for (double v : x) y.push_back(f(v));
    return y;
}

}  // namespace

TEST(Snapshot, ZeroEdge) {
    const std::vector<int> w = {2, 1};
    const auto net = KanNetwork::zeros(w, SplineGrid(-1, 1, 5, 3));
    const auto snaps = kan::snapshot_activations(net, 0, test::uniform_samples(20, -1, 1, 1), 11);
    ASSERT_EQ(snaps.size(), 2u);
    for (const auto& s : snaps) for (double v : s.values) EXPECT_EQ(v, 0.0);
}

TEST(Snapshot, IdentityEdgeThreePoints) {
    const KanNetwork net({KanLayer(1, 1, {test::identity_edge()})});
    const std::vector<double> samples = {-1.0, 0.3, 1.0};
    const auto s = kan::snapshot_activations(net, 0, samples, 3)[0];
    EXPECT_EQ(s.x, (std::vector<double>{-1.0, 0.0, 1.0}));
    EXPECT_NEAR(s.values[0], -1.0, 2e-3);
    EXPECT_NEAR(s.values[1], 0.0, 2e-3);
    EXPECT_NEAR(s.values[2], 1.0, 2e-3);
}

TEST(Snapshot, BeforeAfterShareGridAndArePureReads) {
    kan::InitConfig c;
    c.seed = 4;
    const std::vector<int> w = {2, 3, 1};
    const auto before = kan::initialize_network(w, c);
    auto after = before;
    for (auto& e : after.layer(0).edges()) e.coeffs[2] += 0.5;
    const auto x = test::uniform_samples(40, -1, 1, 2);
    const auto ranges = kan::observed_input_ranges(after, 0, x);
    const auto y0 = kan::network_forward(after, std::vector<double>{0.1, 0.2});
    const auto a = kan::snapshot_activations(before, 0, ranges, 25, kan::SnapshotTag::before);
    const auto b = kan::snapshot_activations(after, 0, ranges, 25, kan::SnapshotTag::after);
    EXPECT_EQ(kan::network_forward(after, std::vector<double>{0.1, 0.2}), y0);
    ASSERT_EQ(a.size(), 6u);
    for (std::size_t e = 0; e < a.size(); ++e) {
        EXPECT_EQ(a[e].x, b[e].x);
        EXPECT_NE(a[e].values, b[e].values);
        EXPECT_EQ(a[e].tag, kan::SnapshotTag::before);
        for (std::size_t i = 1; i < a[e].x.size(); ++i) EXPECT_LT(a[e].x[i - 1], a[e].x[i]);
    }
}

TEST(Snapshot, Errors) {
    kan::InitConfig c;
    const std::vector<int> w = {2, 1};
    const auto net = kan::initialize_network(w, c);
    EXPECT_THROW(kan::snapshot_activations(net, 0, std::vector<double>{}, 5), DomainError);
    EXPECT_THROW(kan::snapshot_activations(net, 1, std::vector<double>{0.0, 1.0}, 5), DomainError);
}

TEST(SnapshotHiddenLayer, UsesPropagatedRanges) {
    kan::InitConfig c;
    c.seed = 8;
    const std::vector<int> w = {2, 2, 1};
    const auto net = kan::initialize_network(w, c);
    const auto x = test::uniform_samples(50, -1, 1, 3);
    const auto snaps = kan::snapshot_activations(net, 1, x, 9);
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t r = 0; r < 25; ++r) {
        const auto h = kan::layer_forward(net.layer(0), std::span<const double>(x.data() + 2 * r, 2));
        lo = std::min(lo, h[0]);
        hi = std::max(hi, h[0]);
    }
    EXPECT_DOUBLE_EQ(snaps[0].x.front(), lo);
    EXPECT_DOUBLE_EQ(snaps[0].x.back(), hi);
}

TEST(Symbolic, Linear) {
    const auto x = linspace(-2, 3, 50);
    const auto f = kan::fit_symbolic(x, map_values(x, [](double v) { return 2 * v + 1; }));
    EXPECT_EQ(f.candidate, Candidate::linear);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-9);
    for (double v : {-1.0, 0.5, 2.0}) EXPECT_NEAR(f(v), 2 * v + 1, 1e-8);
}

TEST(Symbolic, Sine) {
    const auto x = linspace(-std::numbers::pi, std::numbers::pi, 100);
    const auto f = kan::fit_symbolic(x, map_values(x, [](double v) { return std::sin(v); }));
    EXPECT_EQ(f.candidate, Candidate::sine);
    EXPECT_GT(f.r_squared, 0.999);
}

TEST(Symbolic, AbsoluteBeatsQuadratic) {
    const auto x = linspace(-1, 1, 101);
    const auto y = map_values(x, [](double v) { return std::abs(v); });
    const auto all = kan::fit_all_candidates(x, y);
    const auto& abs_fit = all[static_cast<std::size_t>(Candidate::absolute)];
    const auto& quad_fit = all[static_cast<std::size_t>(Candidate::quadratic)];
    EXPECT_GT(abs_fit.r_squared, quad_fit.r_squared);
    EXPECT_EQ(kan::fit_symbolic(x, y).candidate, Candidate::absolute);
}

TEST(Symbolic, ConstantSeries) {
    const auto x = linspace(0, 1, 20);
    const auto f = kan::fit_symbolic(x, std::vector<double>(20, 3.5));
    EXPECT_EQ(f.candidate, Candidate::linear);
    EXPECT_EQ(f.c, 0.0);
    EXPECT_EQ(f.r_squared, 1.0);
    EXPECT_DOUBLE_EQ(f.d, 3.5);
}

TEST(Symbolic, TooFewPoints) {
    const auto x = linspace(0, 1, 9);
    EXPECT_THROW(kan::fit_symbolic(x, x), DomainError);
}

TEST(SymbolicProperty, AffineInvariance) {
    const auto x = linspace(-1.5, 2.0, 80);
    const std::vector<std::vector<double>> series = {
        map_values(x, [](double v) { return std::tanh(2 * v); }), map_values(x, [](double v) { return std::exp(0.7 * v); }),
        map_values(x, [](double v) { return v * v * v - v; }), map_values(x, [](double v) { return std::sqrt(v + 2.0); })};
    for (const auto& y : series) {
        const auto base = kan::fit_symbolic(x, y);
        for (auto [alpha, beta] : {std::pair{-2.0, 0.5}, std::pair{3.0, -7.0}, std::pair{0.25, 1.0}}) {
            const auto f = kan::fit_symbolic(x, map_values(y, [&](double v) { return alpha * v + beta; }));
            EXPECT_EQ(f.candidate, base.candidate);
            EXPECT_NEAR(f.r_squared, base.r_squared, 1e-9);
        }
    }
}

TEST(SymbolicProperty, ReturnsArgmax) {
    const auto x = linspace(-1, 2, 60);
    for (const auto& y : {map_values(x, [](double v) { return std::log(v + 1.5); }),
                          map_values(x, [](double v) { return std::sin(3 * v) + 0.1 * v; }),
                          map_values(x, [](double v) { return v * v; })}) {
        const auto best = kan::fit_symbolic(x, y);
        for (const auto& f : kan::fit_all_candidates(x, y)) EXPECT_GE(best.r_squared, f.r_squared);
        EXPECT_LE(best.r_squared, 1.0);
    }
}

TEST(SymbolicProperty, DomainRestrictedCandidatesStayValid) {
    const auto x = linspace(-3, 3, 40);
    const auto y = map_values(x, [](double v) { return v; });
    const auto all = kan::fit_all_candidates(x, y);
    for (Candidate c : {Candidate::logarithm, Candidate::square_root}) {
        const auto& f = all[static_cast<std::size_t>(c)];
        if (!f.valid) continue;
        for (double v : x) EXPECT_GT(f.a * v + f.b, 0.0);
    }
}

TEST(Symbolic, SnapshotOverload) {
    kan::ActivationSnapshot s;
    s.x = linspace(0, 1, 30);
    s.values = map_values(s.x, [](double v) { return -4 * v + 2; });
    EXPECT_EQ(kan::fit_symbolic(s).candidate, Candidate::linear);
    EXPECT_EQ(kan::candidate_name(Candidate::absolute), "absolute-value");
}
