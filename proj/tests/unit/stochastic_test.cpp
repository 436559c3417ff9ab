#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "kanopf/errors.hpp"
#include "kanopf/kan/network.hpp"
#include "kanopf/random.hpp"
#include "kanopf/stochastic/distribution.hpp"
#include "kanopf/stochastic/monte_carlo.hpp"
#include "kanopf/stochastic/uncertainty.hpp"
#include "support.hpp"

using namespace kanopf;
using namespace kanopf::stochastic;

namespace {

UncertaintyModel single(DistributionSpec d) { return {{{"x", d}}}; }

std::vector<double> column(const ScenarioSet& s, int c) {
    std::vector<double> v(s.size());
    for (std::size_t r = 0; r < s.size(); ++r) v[r] = s.values(static_cast<Eigen::Index>(r), c);
    return v;
}

std::vector<double> rng_uniform(std::size_t n, double lo, double hi, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

kan::Dataset dataset(std::vector<double> x, std::vector<double> y) {
    kan::Dataset d;
    d.inputs = Eigen::Map<kan::RowMatrix>(x.data(), static_cast<Eigen::Index>(x.size()), 1);
    d.targets = Eigen::Map<kan::RowMatrix>(y.data(), static_cast<Eigen::Index>(y.size()), 1);
    d.feature_names = {"xi"};
    d.target_names = {"objective"};
    return d;
}

}  // namespace

TEST(Rng, SeedDeterminesStream) {
    Rng a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i) {
        const double x = a.normal();
        EXPECT_EQ(x, b.normal());
        EXPECT_NE(x, c.normal());
    }
    Rng u(1);
    for (int i = 0; i < 1000; ++i) {
        const double x = u.uniform();
        EXPECT_GE(x, 0.0);
        EXPECT_LT(x, 1.0);
    }
}

TEST(Sampling, SameSeedIdentical) {
    const auto model = UncertaintyModel::from_system(grid::builtin_case5());
    const auto a = sample_scenarios(model, 500, 9);
    const auto b = sample_scenarios(model, 500, 9);
    EXPECT_EQ(a.values, b.values);
    EXPECT_EQ(a.model_fingerprint, model.fingerprint());
    EXPECT_NE(a.values, sample_scenarios(model, 500, 10).values);
    EXPECT_EQ(a.names, model.names());
}

TEST(Sampling, BetaWithinSupport) {
    const auto s = sample_scenarios(single(DistributionSpec::beta_dist(2.0, 5.0, 1.0)), 10000, 3);
    for (double x : column(s, 0)) {
        EXPECT_GE(x, 0.0);
        EXPECT_LE(x, 1.0);
    }
    const auto v = column(s, 0);
    EXPECT_NEAR(std::accumulate(v.begin(), v.end(), 0.0) / v.size(), 2.0 / 7.0, 0.01);
}

TEST(Sampling, GaussianMeanConcentrates) {
    const auto s = sample_scenarios(single(DistributionSpec::gaussian(1.0, 0.1, 0.0, 2.0)), 100000, 5);
    const auto v = column(s, 0);
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    EXPECT_NEAR(mean, 1.0, 3.0 * 0.1 / std::sqrt(1e5));
}

TEST(Sampling, BernoulliFrequency) {
    const auto v = column(sample_scenarios(single(DistributionSpec::bernoulli(0.2)), 100000, 6), 0);
    for (double x : v) EXPECT_TRUE(x == 0.0 || x == 1.0);
    EXPECT_NEAR(std::accumulate(v.begin(), v.end(), 0.0) / v.size(), 0.2, 4.0 * std::sqrt(0.16 / 1e5));
}

TEST(SamplingProperty, EntriesRespectBounds) {
    UncertaintyModel m{{{"tight", DistributionSpec::gaussian(1.0, 1.0, 0.99, 1.01)},
                        {"loose", DistributionSpec::gaussian(0.0, 0.2, -0.3, 0.3)},
                        {"far", DistributionSpec::gaussian(10.0, 0.01, 0.0, 1.0)},
                        {"solar", DistributionSpec::beta_dist(0.5, 0.5, 2.0)}}};
    const auto s = sample_scenarios(m, 5000, 8);
    for (int c = 0; c < 4; ++c) {
        for (double x : column(s, c)) {
            EXPECT_GE(x, m.dimensions[c].distribution.support_lower());
            EXPECT_LE(x, m.dimensions[c].distribution.support_upper());
        }
    }
    EXPECT_GE(s.clamped, 5000u);
}

TEST(Uncertainty, ValidationErrors) {
    EXPECT_THROW(UncertaintyModel{}.validate(), ConfigError);
    EXPECT_THROW(single(DistributionSpec::gaussian(1.0, -0.1, 0.0, 2.0)).validate(), ConfigError);
    EXPECT_THROW(single(DistributionSpec::gaussian(1.0, 0.1, 2.0, 0.0)).validate(), ConfigError);
    EXPECT_THROW(single(DistributionSpec::gaussian(1.0, 0.1, 0.0, INFINITY)).validate(), ConfigError);
    EXPECT_THROW(single(DistributionSpec::beta_dist(0.0, 1.0, 1.0)).validate(), ConfigError);
    EXPECT_THROW(single(DistributionSpec::bernoulli(1.5)).validate(), ConfigError);
    EXPECT_NO_THROW(UncertaintyModel::from_system(grid::builtin_case5()).validate());
}

TEST(Empirical, CdfExamples) {
    const std::vector<double> s{3.0, 1.0, 2.0};
    EmpiricalDistribution d(s);
    EXPECT_EQ(d.values(), (std::vector<double>{1.0, 2.0, 3.0}));
    EXPECT_EQ(d.cdf(0.5), 0.0);
    EXPECT_NEAR(d.cdf(2.0), 2.0 / 3.0, 1e-15);
    EXPECT_EQ(d.cdf(3.0), 1.0);
    EXPECT_THROW(EmpiricalDistribution(std::vector<double>{}), Error);
    const std::vector<double> w{1.0, -1.0, 1.0};
    EXPECT_THROW(EmpiricalDistribution(s, w), Error);
}

TEST(Empirical, QuantileInterpolation) {
    const std::vector<double> s{1.0, 2.0, 3.0, 4.0};
    EmpiricalDistribution d(s);
    EXPECT_DOUBLE_EQ(d.quantile(0.0), 1.0);
    EXPECT_DOUBLE_EQ(d.quantile(0.5), 2.5);
    EXPECT_DOUBLE_EQ(d.quantile(1.0), 4.0);
    EXPECT_DOUBLE_EQ(d.quantile(1.0 / 3.0), 2.0);
    const std::vector<double> w{1.0, 1.0, 1.0, 1.0};
    EmpiricalDistribution dw(s, w);
    for (double p : {0.1, 0.37, 0.8}) EXPECT_NEAR(dw.quantile(p), d.quantile(p), 1e-12);
}

TEST(Empirical, MomentsExamples) {
    const std::vector<double> ones{1.0, 1.0, 1.0};
    EXPECT_EQ(moments(EmpiricalDistribution(ones)).mean, 1.0);
    EXPECT_EQ(moments(EmpiricalDistribution(ones)).variance, 0.0);
    const std::vector<double> two{0.0, 2.0};
    EXPECT_EQ(moments(EmpiricalDistribution(two)).mean, 1.0);
    EXPECT_EQ(moments(EmpiricalDistribution(two)).variance, 2.0);
}

TEST(Empirical, ConfidenceIntervalUniform) {
    const auto u = rng_uniform(100000, 0.0, 1.0, 21);
    const auto [lo, hi] = confidence_interval(EmpiricalDistribution(u), 0.95);
    EXPECT_NEAR(lo, 0.025, 0.005);
    EXPECT_NEAR(hi, 0.975, 0.005);
}

TEST(EmpiricalProperty, ConfidenceIntervalsNest) {
    const auto u = rng_uniform(2000, -3.0, 5.0, 22);
    EmpiricalDistribution d(u);
    double prev_lo = INFINITY, prev_hi = -INFINITY;
    for (double level : {0.1, 0.5, 0.8, 0.95, 0.999}) {
        const auto [lo, hi] = confidence_interval(d, level);
        EXPECT_LE(lo, prev_lo);
        EXPECT_GE(hi, prev_hi);
        prev_lo = lo;
        prev_hi = hi;
    }
}

TEST(Histogram, Examples) {
    const std::vector<double> s{0.0, 1.0};
    const auto h = pdf_histogram(EmpiricalDistribution(s), 2);
    EXPECT_EQ(h.edges, (std::vector<double>{0.0, 0.5, 1.0}));
    EXPECT_EQ(h.densities, (std::vector<double>{1.0, 1.0}));

    const std::vector<double> same(10, 0.5);
    const auto g = pdf_histogram(EmpiricalDistribution(same), 5);
    ASSERT_EQ(g.densities.size(), 1u);
    const double w = g.edges[1] - g.edges[0];
    EXPECT_GT(w, 0.0);
    EXPECT_LT(w, 1e-12);
    EXPECT_NEAR(g.densities[0] * w, 1.0, 1e-12);
    EXPECT_NEAR(0.5 * (g.edges[0] + g.edges[1]), 0.5, 1e-15);
}

TEST(Histogram, UniformDensityNearOne) {
    const auto h = pdf_histogram(EmpiricalDistribution(rng_uniform(100000, 0.0, 1.0, 23)), 20);
    for (double d : h.densities) EXPECT_NEAR(d, 1.0, 0.1);
}

TEST(HistogramProperty, DensitiesIntegrateToOne) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto u = rng_uniform(50 + 37 * seed, -10.0 * seed, 3.0, seed);
        for (int bins : {1, 3, 17, 50}) {
            const auto h = pdf_histogram(EmpiricalDistribution(u), bins);
            double mass = 0.0;
            for (std::size_t b = 0; b < h.densities.size(); ++b) mass += h.densities[b] * (h.edges[b + 1] - h.edges[b]);
            EXPECT_NEAR(mass, 1.0, 1e-12);
            EXPECT_EQ(h.edges.front(), *std::min_element(u.begin(), u.end()));
            EXPECT_EQ(h.edges.back(), *std::max_element(u.begin(), u.end()));
        }
    }
}

TEST(Distances, IdenticalAndPointMasses) {
    const auto u = rng_uniform(1000, 0.0, 1.0, 24);
    EmpiricalDistribution a(u);
    EXPECT_EQ(ks_statistic(a, a), 0.0);
    EXPECT_EQ(wasserstein1(a, a), 0.0);
    const std::vector<double> zero{0.0}, one{1.0};
    EXPECT_EQ(ks_statistic(EmpiricalDistribution(zero), EmpiricalDistribution(one)), 1.0);
    EXPECT_EQ(wasserstein1(EmpiricalDistribution(zero), EmpiricalDistribution(one)), 1.0);
}

TEST(Distances, ShiftedUniformsMatchAnalytic) {
    // F1 - F2 = 0.5 on [0.5, 1] and tapers linearly on both sides: KS 0.5, W1 0.5.
    EmpiricalDistribution a(rng_uniform(100000, 0.0, 1.0, 25));
    EmpiricalDistribution b(rng_uniform(100000, 0.5, 1.5, 26));
    EXPECT_NEAR(ks_statistic(a, b), 0.5, 0.02);
    EXPECT_NEAR(wasserstein1(a, b), 0.5, 0.02);
}

TEST(DistancesProperty, SymmetricAndBounded) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        EmpiricalDistribution a(rng_uniform(30 + seed, 0.0, 1.0 + seed, seed));
        EmpiricalDistribution b(rng_uniform(70 + 3 * seed, 0.2, 1.5, seed + 100));
        const double ks = ks_statistic(a, b);
        EXPECT_GE(ks, 0.0);
        EXPECT_LE(ks, 1.0);
        EXPECT_EQ(ks, ks_statistic(b, a));
        EXPECT_NEAR(wasserstein1(a, b), wasserstein1(b, a), 1e-12);
        EXPECT_GT(wasserstein1(a, b), 0.0);
    }
}

TEST(DistancesProperty, WassersteinOfShiftIsShift) {
    const auto u = rng_uniform(500, 0.0, 1.0, 27);
    auto v = u;
    for (double& x : v) x += 0.3;
    EXPECT_NEAR(wasserstein1(EmpiricalDistribution(u), EmpiricalDistribution(v)), 0.3, 1e-12);
}

TEST(Compare, SelfAndShift) {
    const auto x = rng_uniform(200, 0.7, 1.3, 28);
    const auto y = rng_uniform(200, 10.0, 20.0, 29);
    const auto base = dataset(x, y);
    const auto self = compare(base, base);
    ASSERT_EQ(self.outputs.size(), 1u);
    EXPECT_EQ(self.outputs[0].rmse, 0.0);
    EXPECT_EQ(self.outputs[0].ks, 0.0);
    EXPECT_EQ(self.outputs[0].wasserstein, 0.0);
    EXPECT_EQ(self.outputs[0].mean_surrogate, self.outputs[0].mean_baseline);
    EXPECT_EQ(self.outputs[0].ci_low_surrogate, self.outputs[0].ci_low_baseline);

    auto shifted_y = y;
    for (double& v : shifted_y) v += 0.1;
    const auto r = compare(dataset(x, shifted_y), base);
    EXPECT_NEAR(r.outputs[0].rmse, 0.1, 1e-12);
    EXPECT_NEAR(r.outputs[0].wasserstein, 0.1, 1e-12);
    EXPECT_NEAR(r.outputs[0].mean_surrogate - r.outputs[0].mean_baseline, 0.1, 1e-12);
    EXPECT_EQ(r.samples, 200u);
}

TEST(Compare, MismatchedInputsRejected) {
    const auto x = rng_uniform(50, 0.7, 1.3, 30);
    const auto y = rng_uniform(50, 0.0, 1.0, 31);
    auto other = dataset(x, y);
    other.target_names = {"gen_p:1"};
    EXPECT_THROW(compare(dataset(x, y), other), SpecError);
    auto x2 = x;
    x2[3] += 1.0;
    EXPECT_THROW(compare(dataset(x2, y), dataset(x, y)), SpecError);
    EXPECT_THROW(compare(dataset(x, y).head(10), dataset(x, y)), SpecError);
}

TEST(Surrogate, ZeroNetworkGivesMeans) {
    kan::InitConfig c;
    c.noise_scale = 0.0;
    c.base_scale = 0.0;
    const std::vector<int> widths{2, 3, 2};
    const auto net = kan::initialize_network(widths, c);
    kan::Standardizer st{{4.0, -1.5}, {2.0, 0.5}};
    kan::RowMatrix in(3, 2);
    in << 0.1, 0.2, 0.3, 0.4, -0.5, 0.9;
    const auto out = propagate_surrogate(net, st, in, {"a", "b"}, {"y1", "y2"});
    for (Eigen::Index r = 0; r < 3; ++r) {
        EXPECT_EQ(out.targets(r, 0), 4.0);
        EXPECT_EQ(out.targets(r, 1), -1.5);
    }
    EXPECT_EQ(out.inputs, in);
    EXPECT_THROW(propagate_surrogate(net, st, kan::RowMatrix(3, 3), {"a", "b", "c"}, {"y1", "y2"}), ShapeError);
}

TEST(MonteCarlo, SingleNominalScenarioMatchesDirectSolve) {
    const auto sys = grid::builtin_case5();
    ScenarioSet set;
    set.values = kan::RowMatrix::Constant(1, 5, 1.0);
    set.values(0, 4) = 0.5;
    set.names = UncertaintyModel::from_system(sys).names();
    const auto spec = opf::OutputSpec::parse({"objective", "gen_p:1", "gen_p:2"});
    const auto mc = run_monte_carlo(sys, set, spec);
    ASSERT_EQ(mc.data.rows(), 1u);
    const auto direct = opf::extract_outputs(sys, opf::solve_opf(grid::apply_scenario(sys, set.row(0))), spec);
    for (int c = 0; c < 3; ++c) EXPECT_EQ(mc.data.targets(0, c), direct[static_cast<std::size_t>(c)]);
    EXPECT_TRUE(mc.failures.empty());
}

TEST(MonteCarlo, DeterministicModelGivesIdenticalRows) {
    const auto sys = grid::builtin_case5();
    UncertaintyModel m = UncertaintyModel::from_system(sys);
    for (auto& d : m.dimensions) d.distribution = DistributionSpec::gaussian(0.9, 0.0, 0.7, 1.3);
    const auto set = sample_scenarios(m, 6, 1);
    const auto mc = run_monte_carlo(sys, set, opf::OutputSpec::parse({"objective", "bus_vm:5"}));
    ASSERT_EQ(mc.data.rows(), 6u);
    for (Eigen::Index r = 1; r < 6; ++r) EXPECT_EQ(mc.data.targets.row(r), mc.data.targets.row(0));
}

TEST(MonteCarloProperty, ThreadCountDoesNotChangeRows) {
    const auto sys = grid::builtin_case5();
    const auto set = sample_scenarios(UncertaintyModel::from_system(sys), 40, 12);
    const auto spec = opf::OutputSpec::parse({"objective", "gen_p:1", "conv_p:1"});
    MonteCarloOptions one, four;
    one.threads = 1;
    four.threads = 4;
    const auto a = run_monte_carlo(sys, set, spec, one);
    const auto b = run_monte_carlo(sys, set, spec, four);
    EXPECT_EQ(a.data.targets, b.data.targets);
    EXPECT_EQ(a.data.inputs, set.values);
    EXPECT_EQ(a.indices, b.indices);
}

TEST(MonteCarlo, TooManyFailuresAbort) {
    const auto sys = grid::builtin_case5();
    ScenarioSet set;
    set.values = kan::RowMatrix::Constant(4, 5, 1.0);
    set.values.row(0).setConstant(20.0);
    set.names = UncertaintyModel::from_system(sys).names();
    EXPECT_THROW(run_monte_carlo(sys, set, opf::OutputSpec::parse({"objective"})), NumericError);
}
