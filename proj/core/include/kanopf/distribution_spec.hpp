#pragma once

namespace kanopf {

/// Parameters of one uncertainty dimension's marginal distribution.
///
///   gaussian   N(mean, std²) truncated to [lower, upper]
///   beta       scale · Beta(alpha, beta), support [0, scale]
///   bernoulli  1 with probability p, else 0
struct DistributionSpec {
    enum class Kind { gaussian, beta, bernoulli };

    Kind kind = Kind::gaussian;
    double mean = 1.0;
    double std = 0.0;
    double lower = 1.0;
    double upper = 1.0;
    double alpha = 2.0;
    double beta = 2.0;
    double scale = 1.0;
    double p = 0.0;

    static DistributionSpec gaussian(double mean, double std, double lower, double upper) {
        DistributionSpec d;
        d.kind = Kind::gaussian;
        d.mean = mean;
        d.std = std;
        d.lower = lower;
        d.upper = upper;
        return d;
    }
    static DistributionSpec beta_dist(double alpha, double beta, double scale) {
        DistributionSpec d;
        d.kind = Kind::beta;
        d.alpha = alpha;
        d.beta = beta;
        d.scale = scale;
        return d;
    }
    static DistributionSpec bernoulli(double p) {
        DistributionSpec d;
        d.kind = Kind::bernoulli;
        d.p = p;
        return d;
    }

    double support_lower() const noexcept {
        return kind == Kind::gaussian ? lower : 0.0;
    }
    double support_upper() const noexcept {
        return kind == Kind::gaussian ? upper : (kind == Kind::beta ? scale : 1.0);
    }
};

}  // namespace kanopf
