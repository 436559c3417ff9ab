#include "kanopf/stochastic/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kanopf/errors.hpp"
#include "kanopf/random.hpp"

namespace kanopf::stochastic {

namespace {

constexpr int kMaxRetries = 100;

}  // namespace

UncertaintyModel UncertaintyModel::from_system(const grid::PowerSystem& sys) {
    UncertaintyModel m;
    for (const auto& t : sys.scenario_map) m.dimensions.push_back({t.name, t.distribution});
    return m;
}

std::vector<std::string> UncertaintyModel::names() const {
    std::vector<std::string> out;
    for (const auto& d : dimensions) out.push_back(d.name);
    return out;
}

void UncertaintyModel::validate() const {
    if (dimensions.empty()) throw ConfigError("uncertainty model has no dimensions");
    for (const auto& dim : dimensions) {
        const auto& d = dim.distribution;
        const std::string where = "uncertainty dimension '" + dim.name + "': ";
        switch (d.kind) {
            case DistributionSpec::Kind::gaussian:
                if (!std::isfinite(d.mean) || !std::isfinite(d.std) || !std::isfinite(d.lower) ||
                    !std::isfinite(d.upper)) {
                    throw ConfigError(where + "gaussian parameters must be finite");
                }
                if (d.std < 0.0) throw ConfigError(where + "std must be non-negative");
                if (!(d.lower <= d.upper)) throw ConfigError(where + "lower bound exceeds upper bound");
                break;
            case DistributionSpec::Kind::beta:
                if (!(d.alpha > 0.0) || !(d.beta > 0.0) || !std::isfinite(d.alpha) || !std::isfinite(d.beta)) {
                    throw ConfigError(where + "beta shapes must be positive");
                }
                if (!(d.scale > 0.0) || !std::isfinite(d.scale)) throw ConfigError(where + "scale must be positive");
                break;
            case DistributionSpec::Kind::bernoulli:
                if (!(d.p >= 0.0 && d.p <= 1.0)) throw ConfigError(where + "p must lie in [0, 1]");
                break;
        }
    }
}

std::uint64_t UncertaintyModel::fingerprint() const {
    std::uint64_t h = fnv1a64(nullptr, 0);
    for (const auto& dim : dimensions) {
        const auto& d = dim.distribution;
        h = fnv1a64(dim.name.data(), dim.name.size(), h);
        const int kind = static_cast<int>(d.kind);
        h = fnv1a64(&kind, sizeof kind, h);
        const double params[] = {d.mean, d.std, d.lower, d.upper, d.alpha, d.beta, d.scale, d.p};
        h = fnv1a64(params, sizeof params, h);
    }
    return h;
}

ScenarioSet sample_scenarios(const UncertaintyModel& model, std::size_t n, std::uint64_t seed) {
    model.validate();
    if (n < 1) throw ConfigError("sample_scenarios: n must be at least 1");
    ScenarioSet set;
    set.names = model.names();
    set.seed = seed;
    set.model_fingerprint = model.fingerprint();
    const auto cols = static_cast<Eigen::Index>(model.size());
    set.values.resize(static_cast<Eigen::Index>(n), cols);
    Rng rng(seed);
    for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(n); ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            const auto& d = model.dimensions[static_cast<std::size_t>(c)].distribution;
            double v = 0.0;
            switch (d.kind) {
                case DistributionSpec::Kind::gaussian: {
                    v = rng.normal(d.mean, d.std);
                    int retries = 0;
                    while ((v < d.lower || v > d.upper) && retries < kMaxRetries) {
                        v = rng.normal(d.mean, d.std);
                        ++retries;
                    }
                    if (v < d.lower || v > d.upper) {
                        v = std::clamp(v, d.lower, d.upper);
                        ++set.clamped;
                    }
                    break;
                }
                case DistributionSpec::Kind::beta: v = d.scale * rng.beta(d.alpha, d.beta); break;
                case DistributionSpec::Kind::bernoulli: v = rng.bernoulli(d.p) ? 1.0 : 0.0; break;
            }
            set.values(r, c) = v;
        }
    }
    return set;
}

}  // namespace kanopf::stochastic
