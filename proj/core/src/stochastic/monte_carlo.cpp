#include "kanopf/stochastic/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <thread>
#include <tuple>

#include "kanopf/errors.hpp"
#include "kanopf/stochastic/distribution.hpp"

namespace kanopf::stochastic {

MonteCarloResult run_monte_carlo(const grid::PowerSystem& sys, const ScenarioSet& set, const opf::OutputSpec& spec,
                                 const MonteCarloOptions& options) {
    spec.validate(sys);
    if (static_cast<std::size_t>(set.values.cols()) != sys.scenario_map.size()) {
        throw ShapeError("scenario dimension " + std::to_string(set.values.cols()) + " does not match the system's " +
                         std::to_string(sys.scenario_map.size()) + " uncertainty targets");
    }
    const std::size_t n = set.size();
    struct Slot {
        std::optional<std::vector<double>> y;
        std::string error;
    };
    std::vector<Slot> slots(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < n; k = next++) {
            try {
                const auto sol = opf::solve_opf(sys, set.row(k), options.opf);
                slots[k].y = opf::extract_outputs(sys, sol, spec);
            } catch (const Error& e) {
                slots[k].error = e.what();
            }
        }
    };
    unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    MonteCarloResult result;
    std::vector<std::size_t> ok;
    for (std::size_t k = 0; k < n; ++k) {
        if (slots[k].y) {
            ok.push_back(k);
        } else {
            result.failures.push_back({k, slots[k].error});
        }
    }
    const double fraction = static_cast<double>(result.failures.size()) / static_cast<double>(n);
    if (fraction > options.max_failure_fraction) {
        const auto& first = result.failures.front();
        throw NumericError(std::to_string(result.failures.size()) + " of " + std::to_string(n) +
                           " scenarios failed (first: scenario " + std::to_string(first.index) + ": " +
                           first.reason + "); the case is mis-sized for this uncertainty model");
    }
    auto& data = result.data;
    data.feature_names = set.names;
    data.target_names = spec.names();
    data.inputs.resize(static_cast<Eigen::Index>(ok.size()), set.values.cols());
    data.targets.resize(static_cast<Eigen::Index>(ok.size()), static_cast<Eigen::Index>(spec.size()));
    for (std::size_t r = 0; r < ok.size(); ++r) {
        const auto row = static_cast<Eigen::Index>(r);
        data.inputs.row(row) = set.values.row(static_cast<Eigen::Index>(ok[r]));
        const auto& y = *slots[ok[r]].y;
        for (std::size_t c = 0; c < y.size(); ++c) data.targets(row, static_cast<Eigen::Index>(c)) = y[c];
    }
    result.indices = std::move(ok);
    return result;
}

kan::Dataset propagate_surrogate(const kan::KanNetwork& net, const kan::Standardizer& standardizer,
                                 const kan::RowMatrix& inputs, const std::vector<std::string>& feature_names,
                                 const std::vector<std::string>& target_names) {
    const auto widths = net.widths();
    if (static_cast<Eigen::Index>(widths.front()) != inputs.cols()) {
        throw ShapeError("surrogate expects " + std::to_string(widths.front()) + " inputs, scenarios have " +
                         std::to_string(inputs.cols()));
    }
    const auto n_out = static_cast<std::size_t>(widths.back());
    if (standardizer.means.size() != n_out || standardizer.stds.size() != n_out || target_names.size() != n_out) {
        throw ShapeError("surrogate output width does not match its standardization or output names");
    }
    kan::Dataset out;
    out.inputs = inputs;
    out.feature_names = feature_names;
    out.target_names = target_names;
    out.targets.resize(inputs.rows(), static_cast<Eigen::Index>(n_out));
    const auto cols = static_cast<std::size_t>(inputs.cols());
    for (Eigen::Index r = 0; r < inputs.rows(); ++r) {
        const std::span<const double> xi(inputs.data() + static_cast<std::size_t>(r) * cols, cols);
        const auto y = standardizer.inverse(kan::network_forward(net, xi));
        for (std::size_t c = 0; c < n_out; ++c) out.targets(r, static_cast<Eigen::Index>(c)) = y[c];
    }
    return out;
}

ComparisonReport compare(const kan::Dataset& surrogate, const kan::Dataset& baseline, double ci_level) {
    if (surrogate.target_names != baseline.target_names || surrogate.targets.cols() != baseline.targets.cols()) {
        throw SpecError("compare: surrogate and baseline have different outputs");
    }
    if (surrogate.targets.rows() != baseline.targets.rows() || baseline.targets.rows() < 2) {
        throw SpecError("compare: datasets must pair the same scenarios (at least two rows)");
    }
    if (surrogate.inputs.size() != 0 && baseline.inputs.size() != 0 && surrogate.inputs != baseline.inputs) {
        throw SpecError("compare: datasets were produced from different scenarios");
    }
    ComparisonReport report;
    report.samples = static_cast<std::size_t>(baseline.targets.rows());
    report.ci_level = ci_level;
    for (Eigen::Index c = 0; c < baseline.targets.cols(); ++c) {
        std::vector<double> s(report.samples), b(report.samples);
        double se = 0.0;
        for (std::size_t r = 0; r < report.samples; ++r) {
            s[r] = surrogate.targets(static_cast<Eigen::Index>(r), c);
            b[r] = baseline.targets(static_cast<Eigen::Index>(r), c);
            se += (s[r] - b[r]) * (s[r] - b[r]);
        }
        const EmpiricalDistribution ds(s), db(b);
        const auto ms = moments(ds);
        const auto mb = moments(db);
        OutputComparison o;
        o.name = baseline.target_names.empty() ? "y" + std::to_string(c) : baseline.target_names[static_cast<std::size_t>(c)];
        o.rmse = std::sqrt(se / static_cast<double>(report.samples));
        const double n = static_cast<double>(report.samples);
        const double pop_std = std::sqrt(mb.variance * (n - 1.0) / n);
        o.rmse_standardized = pop_std > 0.0 ? o.rmse / pop_std : o.rmse;
        o.ks = ks_statistic(ds, db);
        o.wasserstein = wasserstein1(ds, db);
        o.mean_surrogate = ms.mean;
        o.mean_baseline = mb.mean;
        o.variance_surrogate = ms.variance;
        o.variance_baseline = mb.variance;
        std::tie(o.ci_low_surrogate, o.ci_high_surrogate) = confidence_interval(ds, ci_level);
        std::tie(o.ci_low_baseline, o.ci_high_baseline) = confidence_interval(db, ci_level);
        o.baseline_min = db.min();
        o.baseline_max = db.max();
        report.outputs.push_back(o);
    }
    return report;
}

}  // namespace kanopf::stochastic
