#pragma once

#include <cstdint>
#include <random>

namespace kanopf {

/// Deterministic random stream: std::mt19937_64 as the bit source with
/// distribution transforms implemented here, so that a seed produces the
/// same numbers on every standard library (the std:: distributions are
/// implementation-defined).
///
///   uniform  53 high bits of one engine draw, in [0, 1)
///   normal   Box-Muller, both variates used in turn
///   gamma    Marsaglia-Tsang squeeze, boosted for shape < 1
///   beta     ratio of two gammas
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }
    double gamma(double shape);
    double beta(double alpha, double beta);
    bool bernoulli(double p) { return uniform() < p; }
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

/// FNV-1a 64-bit hash, used for fingerprints of models, specs and files.
std::uint64_t fnv1a64(const void* data, std::size_t size,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace kanopf
