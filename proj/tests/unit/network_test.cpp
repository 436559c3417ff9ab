#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "kanopf/errors.hpp"
#include "kanopf/kan/network.hpp"
#include "support.hpp"

using namespace kanopf;
using kan::KanLayer;
using kan::KanNetwork;
using kan::SplineEdge;
using kan::SplineGrid;

namespace {

KanNetwork random_network(std::vector<int> widths, std::uint64_t seed) {
    kan::InitConfig c;
    c.noise_scale = 0.3;
    c.seed = seed;
    return kan::initialize_network(widths, c);
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST(EdgeActivation, ZeroWeights) {
    SplineEdge e(SplineGrid(-1, 1, 5, 3));
    for (double& c : e.coeffs) c = 3.0;
    for (double x : {-5.0, 0.0, 0.4, 7.0}) EXPECT_EQ(kan::edge_activation(e, x), 0.0);
}

TEST(EdgeActivation, BaseOnly) {
    SplineEdge e(SplineGrid(-1, 1, 5, 3));
    e.base_weight = 1.0;
    EXPECT_EQ(kan::edge_activation(e, 0.0), 0.0);
    EXPECT_NEAR(kan::edge_activation(e, 10.0), test::silu_reference(10.0), 1e-14);
    EXPECT_NEAR(kan::edge_activation(e, 10.0), 9.99954, 1e-5);
}

TEST(EdgeActivation, FullFormula) {
    const SplineGrid g(-1, 1, 4, 2);
    SplineEdge e(g, {0.1, -0.2, 0.3, 0.4, -0.5, 0.6}, 0.7, 1.3);
    for (double x : {-1.2, -0.3, 0.0, 0.8, 1.1}) {
        const auto b = test::oracle_basis(-1, 1, 4, 2, x);
        double s = 0.0;
        for (int i = 0; i < 6; ++i) s += e.coeffs[i] * b[i];
        EXPECT_NEAR(kan::edge_activation(e, x), 0.7 * test::silu_reference(x) + 1.3 * s, 1e-14);
    }
}

TEST(EdgeActivation, LinearInCoefficients) {
    const SplineGrid g(0, 2, 5, 3);
    const auto a = test::uniform_samples(8, -1, 1, 1);
    const auto b = test::uniform_samples(8, -1, 1, 2);
    std::vector<double> ab(8);
    for (int i = 0; i < 8; ++i) ab[i] = a[i] + b[i];
    const SplineEdge ea(g, a, 0.0, 0.9), eb(g, b, 0.0, 0.9), eab(g, ab, 0.0, 0.9);
    for (double x : test::uniform_samples(200, -0.5, 2.5, 3)) {
        EXPECT_NEAR(kan::edge_activation(eab, x), kan::edge_activation(ea, x) + kan::edge_activation(eb, x), 1e-12);
    }
}

TEST(EdgeActivation, RejectsBadEdges) {
    const SplineGrid g(0, 1, 3, 2);
    EXPECT_THROW(SplineEdge(g, {1.0, 2.0}, 0.0, 1.0), ShapeError);
    EXPECT_THROW(SplineEdge(g, {1, 2, 3, 4, 5}, NAN, 1.0), DomainError);
    EXPECT_THROW(kan::edge_activation(SplineEdge(g), NAN), DomainError);
}

TEST(LayerForward, ZeroLayer) {
    const KanLayer layer(3, 2, SplineGrid(-1, 1, 5, 3));
    const auto y = kan::layer_forward(layer, std::vector<double>{0.3, -2.0, 5.0});
    EXPECT_EQ(y, (std::vector<double>{0.0, 0.0}));
}

TEST(LayerForward, IdentityEdge) {
    const KanLayer layer(1, 1, {test::identity_edge()});
    EXPECT_NEAR(kan::layer_forward(layer, std::vector<double>{0.5})[0], 0.5, 1e-3);
}

TEST(LayerForward, SummationNode) {
    const KanLayer layer(2, 1, {test::identity_edge(), test::identity_edge()});
    EXPECT_NEAR(kan::layer_forward(layer, std::vector<double>{0.2, 0.3})[0], 0.5, 2e-3);
}

TEST(LayerForward, ShapeMismatch) {
    const KanLayer layer(2, 1, SplineGrid(-1, 1, 5, 3));
    EXPECT_THROW(kan::layer_forward(layer, std::vector<double>{1.0}), ShapeError);
    EXPECT_THROW(KanLayer(2, 2, {test::identity_edge()}), ShapeError);
}

TEST(NetworkForward, ZeroNetwork) {
    const std::vector<int> w = {3, 4, 2};
    const auto net = KanNetwork::zeros(w, SplineGrid(-1, 1, 5, 3));
    EXPECT_EQ(kan::network_forward(net, std::vector<double>{0.1, 0.2, 0.3}), (std::vector<double>{0.0, 0.0}));
}

TEST(NetworkForward, IdentityNetwork) {
    const KanNetwork net({KanLayer(1, 1, {test::identity_edge()})});
    for (double x : {-0.9, -0.2, 0.0, 0.45, 0.8}) EXPECT_NEAR(kan::network_forward(net, std::vector<double>{x})[0], x, 2e-3);
}

TEST(NetworkForward, Deterministic) {
    const auto net = random_network({3, 4, 2}, 5);
    const std::vector<double> x = {0.2, -0.7, 0.4};
    EXPECT_TRUE(same_bits(kan::network_forward(net, x), kan::network_forward(net, x)));
}

TEST(NetworkForward, ComposesLayers) {
    const auto net = random_network({2, 3, 2}, 9);
    const std::vector<double> x = {0.6, -0.1};
    const auto h = kan::layer_forward(net.layer(0), x);
    EXPECT_TRUE(same_bits(kan::network_forward(net, x), kan::layer_forward(net.layer(1), h)));
    EXPECT_THROW(kan::network_forward(net, std::vector<double>{1.0}), ShapeError);
}

TEST(NetworkShape, LayerWidthsMustChain) {
    std::vector<KanLayer> layers = {KanLayer(2, 3, SplineGrid(-1, 1, 3, 1)), KanLayer(2, 1, SplineGrid(-1, 1, 3, 1))};
    EXPECT_THROW(KanNetwork{layers}, ShapeError);
}

TEST(Parameters, RoundTrip) {
    auto net = random_network({2, 3, 1}, 3);
    auto p = net.parameters();
    ASSERT_EQ(p.size(), net.parameter_count());
    EXPECT_EQ(net.parameter_count(), 9u * (8 + 2));
    for (double& v : p) v *= 2.0;
    net.set_parameters(p);
    EXPECT_EQ(net.parameters(), p);
    p.pop_back();
    EXPECT_THROW(net.set_parameters(p), ShapeError);
}

TEST(PruneMask, AllKeepIsIdentity) {
    const auto net = random_network({3, 2, 2}, 4);
    const auto pruned = kan::apply_prune_mask(net, kan::PruneMask::all(net, true));
    const std::vector<double> x = {0.1, 0.5, -0.3};
    EXPECT_TRUE(same_bits(kan::network_forward(pruned, x), kan::network_forward(net, x)));
}

TEST(PruneMask, AllDropGivesZero) {
    const auto net = random_network({3, 2, 2}, 4);
    const auto pruned = kan::apply_prune_mask(net, kan::PruneMask::all(net, false));
    EXPECT_EQ(kan::network_forward(pruned, std::vector<double>{0.1, 0.5, -0.3}), (std::vector<double>{0.0, 0.0}));
}

TEST(PruneMask, DroppingZeroEdgeChangesNothing) {
    auto net = random_network({2, 2}, 6);
    net.layer(0).edge(1, 0).base_weight = 0.0;
    net.layer(0).edge(1, 0).spline_weight = 0.0;
    auto mask = kan::PruneMask::all(net, true);
    mask.keep[0][2] = false;
    const auto pruned = kan::apply_prune_mask(net, mask);
    for (double x : test::uniform_samples(20, -1, 1, 8)) {
        const std::vector<double> in = {x, -x / 2};
        EXPECT_TRUE(same_bits(kan::network_forward(pruned, in), kan::network_forward(net, in)));
    }
}

TEST(PruneMask, KeptEdgesUntouchedAndShapeChecked) {
    const auto net = random_network({2, 2}, 6);
    auto mask = kan::PruneMask::all(net, true);
    mask.keep[0][1] = false;
    const auto pruned = kan::apply_prune_mask(net, mask);
    EXPECT_EQ(pruned.layer(0).edge(0, 1).base_weight, 0.0);
    EXPECT_EQ(pruned.layer(0).edge(0, 1).spline_weight, 0.0);
    EXPECT_EQ(pruned.layer(0).edge(0, 0).coeffs, net.layer(0).edge(0, 0).coeffs);
    EXPECT_EQ(pruned.layer(0).edge(1, 1).base_weight, net.layer(0).edge(1, 1).base_weight);
    EXPECT_EQ(mask.kept_count(), 3u);
    mask.keep[0].pop_back();
    EXPECT_THROW(kan::apply_prune_mask(net, mask), ShapeError);
}

TEST(Initialization, SeededAndScaled) {
    kan::InitConfig c;
    c.seed = 77;
    c.noise_scale = 0.05;
    c.base_scale = 1.0;
    const std::vector<int> w = {4, 3};
    const auto a = kan::initialize_network(w, c);
    const auto b = kan::initialize_network(w, c);
    EXPECT_EQ(a.parameters(), b.parameters());
    EXPECT_DOUBLE_EQ(a.layer(0).edge(0, 0).base_weight, 0.5);
    EXPECT_DOUBLE_EQ(a.layer(0).edge(0, 0).spline_weight, 1.0);
    c.seed = 78;
    EXPECT_NE(kan::initialize_network(w, c).parameters(), a.parameters());
}

TEST(Initialization, DomainsFollowSamples) {
    kan::InitConfig c;
    const std::vector<int> w = {2, 3, 1};
    std::vector<double> samples;
    for (double x : test::uniform_samples(200, 0.0, 1.0, 2)) {
        samples.push_back(x);
        samples.push_back(3.0 + 2.0 * x);
    }
    std::vector<std::vector<kan::Domain>> doms;
    const auto net = kan::initialize_network_from_samples(w, c, samples, &doms);
    ASSERT_EQ(doms.size(), 2u);
    const auto& g0 = net.layer(0).edge(0, 1).grid;
    EXPECT_NEAR(g0.t_min(), 3.0 - 0.2, 0.02);
    EXPECT_NEAR(g0.t_max(), 5.0 + 0.2, 0.02);
    const auto again = kan::initialize_network(w, c, doms);
    EXPECT_EQ(again.parameters(), net.parameters());
    const auto observed = kan::observed_domains(net, samples);
    for (int i = 0; i < 3; ++i) {
        EXPECT_DOUBLE_EQ(observed[1][i].first, net.layer(1).edge(0, i).grid.t_min());
        EXPECT_DOUBLE_EQ(observed[1][i].second, net.layer(1).edge(0, i).grid.t_max());
    }
}
