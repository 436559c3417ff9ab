#include "kanopf/pipeline/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "detail/json_util.hpp"
#include "kanopf/errors.hpp"
#include "kanopf/kan/interpret.hpp"
#include "kanopf/stochastic/distribution.hpp"

namespace kanopf::pipeline {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void note(const CommandContext& ctx, const std::string& msg) {
    if (ctx.log) *ctx.log << msg << '\n';
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::string widths_text(const std::vector<int>& widths) {
    std::string s;
    for (std::size_t k = 0; k < widths.size(); ++k) s += (k ? "-" : "") + std::to_string(widths[k]);
    return s;
}

kan::Dataset standardized(const kan::Dataset& data, const kan::Standardizer& st) {
    kan::Dataset out = data;
    out.targets = st.transform(data.targets);
    return out;
}

void check_model_against(const ModelFile& model, const PipelineConfig& config, const kan::Dataset& data,
                         const fs::path& model_path) {
    if (model.spec_fingerprint != config.outputs.fingerprint() || model.target_names != config.outputs.names()) {
        throw SpecError(model_path.string() + ": model outputs do not match the configured output spec");
    }
    if (model.feature_names != data.feature_names) {
        throw SpecError(model_path.string() + ": model inputs do not match the dataset's scenario dimensions");
    }
    if (!data.target_names.empty() && data.target_names != model.target_names) {
        throw SpecError(model_path.string() + ": dataset outputs do not match the model");
    }
}

}  // namespace

std::string safe_name(const std::string& selector) {
    std::string s = selector;
    std::replace_if(s.begin(), s.end(), [](char c) { return !(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'); }, '_');
    return s;
}

GeneratedData generate_dataset(const PipelineConfig& config, std::size_t n, std::uint64_t seed,
                               const CommandContext& ctx) {
    const auto t0 = Clock::now();
    const auto model = config.uncertainty();
    const auto set = stochastic::sample_scenarios(model, n, seed);
    stochastic::MonteCarloOptions mc;
    mc.threads = config.threads;
    auto result = stochastic::run_monte_carlo(config.system, set, config.outputs, mc);
    GeneratedData g;
    g.data = std::move(result.data);
    g.meta.seed = seed;
    g.meta.model_fingerprint = set.model_fingerprint;
    g.meta.spec_fingerprint = config.outputs.fingerprint();
    g.meta.scenarios = n;
    g.meta.rows = g.data.rows();
    g.meta.clamped = set.clamped;
    for (const auto& f : result.failures) g.meta.failures.push_back({f.index, f.reason});
    note(ctx, "solved " + std::to_string(n) + " scenarios (" + std::to_string(result.failures.size()) +
                  " failed) in " + std::to_string(seconds_since(t0)) + " s");
    return g;
}

GenDataResult cmd_gen_data(const PipelineConfig& config, const CommandContext& ctx) {
    ensure_dir(config.output_dir);
    const auto seeds = config.seeds();
    GenDataResult r;
    r.train_path = config.output_dir / "train.csv";
    r.test_path = config.output_dir / "test.csv";
    r.train = generate_dataset(config, config.n_train, seeds.train_scenarios, ctx);
    r.test = generate_dataset(config, config.n_test, seeds.test_scenarios, ctx);
    write_dataset(r.train_path, r.train.data);
    write_meta(r.train_path, r.train.meta);
    write_dataset(r.test_path, r.test.data);
    write_meta(r.test_path, r.test.meta);
    return r;
}

TrainOutcome train_surrogate(const PipelineConfig& config, const std::vector<int>& widths, const kan::Dataset& train,
                             const kan::Dataset& test, const CommandContext& ctx) {
    train.validate();
    test.validate();
    if (widths.front() != train.input_dim() || widths.back() != train.target_dim()) {
        throw ConfigError("widths " + widths_text(widths) + " do not match the dataset (" +
                          std::to_string(train.input_dim()) + " inputs, " + std::to_string(train.target_dim()) +
                          " outputs)");
    }
    if (test.input_dim() != train.input_dim() || test.target_dim() != train.target_dim()) {
        throw ConfigError("train and test datasets have different shapes");
    }
    const auto t0 = Clock::now();
    const auto st = kan::Standardizer::fit(train.targets);
    const auto train_std = standardized(train, st);
    const auto test_std = standardized(test, st);
    std::vector<std::vector<kan::Domain>> domains;
    auto net = kan::initialize_network_from_samples(widths, config.init, train.input_span(), &domains);
    auto result = kan::train(std::move(net), train_std, test_std, config.train);
    TrainOutcome out{ModelFile{std::move(result.net), st, train.feature_names, train.target_names,
                               config.outputs.fingerprint(), config.init, std::move(domains),
                               {config.train.seed, config.train.steps, dataset_hash(train), train.rows()}},
                     std::move(result.report), {}};
    out.test_rmse_per_output = kan::rmse_per_output(out.model.net, test_std);
    note(ctx, "trained " + widths_text(widths) + " on " + std::to_string(train.rows()) + " rows in " +
                  std::to_string(seconds_since(t0)) + " s, test rmse " +
                  std::to_string(out.report.test_rmse.empty() ? NAN : out.report.test_rmse.back()));
    return out;
}

TextTable loss_curve_table(const kan::TrainReport& report) {
    TextTable t{{"step", "train_loss", "test_rmse"}, {}};
    std::size_t e = 0;
    for (std::size_t s = 0; s < report.train_loss.size(); ++s) {
        std::string test;
        // Test RMSE is taken after the update of step s, i.e. at step count s + 1.
        if (e < report.eval_steps.size() && report.eval_steps[e] == s + 1) test = format_double(report.test_rmse[e++]);
        t.rows.push_back({std::to_string(s), format_double(report.train_loss[s]), test});
    }
    return t;
}

TrainOutcome cmd_train(const PipelineConfig& config, const fs::path& train_path, const fs::path& test_path,
                       const CommandContext& ctx) {
    const auto train = read_dataset(train_path);
    const auto test = read_dataset(test_path);
    if (train.target_names != config.outputs.names()) {
        throw ConfigError(train_path.string() + ": dataset outputs do not match the configured output spec");
    }
    if (static_cast<std::size_t>(train.input_dim()) != config.system.scenario_map.size()) {
        throw ConfigError(train_path.string() + ": dataset scenario dimension does not match the configuration");
    }
    auto out = train_surrogate(config, config.widths, train, test, ctx);
    ensure_dir(config.output_dir);
    save_model(config.output_dir / "model.json", out.model);
    write_table(config.output_dir / "loss_curve.csv", loss_curve_table(out.report));
    return out;
}

std::vector<SweepCell> cmd_sweep(const PipelineConfig& config, const CommandContext& ctx) {
    if (config.sweep.train_sizes.empty() || config.sweep.widths.empty()) {
        throw ConfigError("sweep needs at least one train size and one configuration");
    }
    const fs::path dir = config.output_dir / "sweep";
    ensure_dir(dir);
    const auto seeds = config.seeds();
    const std::size_t n_max = *std::max_element(config.sweep.train_sizes.begin(), config.sweep.train_sizes.end());
    const auto train = generate_dataset(config, n_max, seeds.train_scenarios, ctx);
    const auto test = generate_dataset(config, config.n_test, seeds.test_scenarios, ctx);
    write_dataset(dir / "train.csv", train.data);
    write_meta(dir / "train.csv", train.meta);
    write_dataset(dir / "test.csv", test.data);
    write_meta(dir / "test.csv", test.meta);

    std::vector<SweepCell> cells;
    for (const auto& widths : config.sweep.widths) {
        for (std::size_t size : config.sweep.train_sizes) {
            SweepCell cell;
            cell.train_size = size;
            cell.widths = widths;
            try {
                if (size > train.data.rows()) {
                    throw NumericError("only " + std::to_string(train.data.rows()) + " training rows converged");
                }
                const auto out = train_surrogate(config, widths, train.data.head(size), test.data, ctx);
                cell.ok = true;
                cell.status = "ok";
                cell.final_train_rmse = out.report.final_train_rmse;
                cell.final_test_rmse = out.report.test_rmse.back();
                cell.best_test_rmse = *std::min_element(out.report.test_rmse.begin(), out.report.test_rmse.end());
                cell.test_rmse_per_output = out.test_rmse_per_output;
            } catch (const Error& e) {
                cell.status = e.what();
                note(ctx, "sweep cell " + std::to_string(size) + " x " + widths_text(widths) + " failed: " + e.what());
            }
            cells.push_back(std::move(cell));
        }
    }

    TextTable t{{"train_size", "widths", "final_train_rmse", "final_test_rmse", "best_test_rmse"}, {}};
    for (const auto& name : config.outputs.names()) t.header.push_back("test_rmse:" + name);
    t.header.push_back("status");
    for (const auto& c : cells) {
        std::vector<std::string> row{std::to_string(c.train_size), widths_text(c.widths)};
        if (c.ok) {
            row.push_back(format_double(c.final_train_rmse));
            row.push_back(format_double(c.final_test_rmse));
            row.push_back(format_double(c.best_test_rmse));
            for (double v : c.test_rmse_per_output) row.push_back(format_double(v));
        } else {
            row.insert(row.end(), 3 + config.outputs.size(), "");
        }
        std::string status = c.status;
        std::replace_if(status.begin(), status.end(), [](char ch) { return ch == ',' || ch == '\n' || ch == '\r'; }, ';');
        row.push_back(status);
        t.rows.push_back(std::move(row));
    }
    write_table(dir / "sweep.csv", t);
    return cells;
}

stochastic::ComparisonReport cmd_compare(const PipelineConfig& config, const fs::path& model_path,
                                         const fs::path& test_path, const CommandContext& ctx) {
    const auto model = load_model(model_path);
    const auto baseline = read_dataset(test_path);
    check_model_against(model, config, baseline, model_path);
    const auto t0 = Clock::now();
    const auto surrogate = stochastic::propagate_surrogate(model.net, model.standardizer, baseline.inputs,
                                                           baseline.feature_names, model.target_names);
    const auto report = stochastic::compare(surrogate, baseline, config.ci_level);

    const fs::path dir = config.output_dir / "compare";
    ensure_dir(dir);
    using detail::Json;
    Json root;
    root["schema_version"] = 1;
    root["samples"] = report.samples;
    root["ci_level"] = report.ci_level;
    root["seed"] = config.seed;
    root["model_data_hash"] = hex64(model.provenance.data_hash);
    root["output_fingerprint"] = hex64(model.spec_fingerprint);
    root["loss_metric"] = "rmse_standardized: RMSE of targets z-scored with the training-set mean and std";
    Json outputs = Json::array();
    for (std::size_t k = 0; k < report.outputs.size(); ++k) {
        const auto& o = report.outputs[k];
        outputs.push_back({{"name", o.name},
                           {"rmse", o.rmse},
                           {"rmse_standardized", o.rmse_standardized},
                           {"ks", o.ks},
                           {"wasserstein1", o.wasserstein},
                           {"mean", {{"surrogate", o.mean_surrogate}, {"baseline", o.mean_baseline}}},
                           {"variance", {{"surrogate", o.variance_surrogate}, {"baseline", o.variance_baseline}}},
                           {"ci", {{"surrogate", {o.ci_low_surrogate, o.ci_high_surrogate}},
                                   {"baseline", {o.ci_low_baseline, o.ci_high_baseline}}}},
                           {"baseline_range", {o.baseline_min, o.baseline_max}}});

        const auto col = static_cast<Eigen::Index>(k);
        std::vector<double> s(surrogate.rows()), b(baseline.rows());
        for (std::size_t r = 0; r < s.size(); ++r) {
            s[r] = surrogate.targets(static_cast<Eigen::Index>(r), col);
            b[r] = baseline.targets(static_cast<Eigen::Index>(r), col);
        }
        const stochastic::EmpiricalDistribution ds(s), db(b);
        double lo = std::min(ds.min(), db.min());
        double hi = std::max(ds.max(), db.max());
        if (!(hi > lo)) {
            const double w = std::max(1.0, std::abs(lo)) * 1e-9;
            lo -= w;
            hi += w;
        }
        std::vector<double> edges(static_cast<std::size_t>(config.histogram_bins) + 1);
        for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
            edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(config.histogram_bins);
        }
        edges.back() = hi;
        const auto dens_s = stochastic::histogram_densities(ds, edges);
        const auto dens_b = stochastic::histogram_densities(db, edges);
        TextTable pdf{{"bin_left", "bin_right", "density_surrogate", "density_baseline"}, {}};
        for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
            pdf.rows.push_back({format_double(edges[i]), format_double(edges[i + 1]), format_double(dens_s[i]),
                                format_double(dens_b[i])});
        }
        write_table(dir / ("pdf_" + safe_name(o.name) + ".csv"), pdf);
        TextTable cdf{{"x", "cdf_surrogate", "cdf_baseline"}, {}};
        for (int i = 0; i < config.cdf_points; ++i) {
            const double x = i + 1 == config.cdf_points
                                 ? hi
                                 : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(config.cdf_points - 1);
            cdf.rows.push_back({format_double(x), format_double(ds.cdf(x)), format_double(db.cdf(x))});
        }
        write_table(dir / ("cdf_" + safe_name(o.name) + ".csv"), cdf);
    }
    root["outputs"] = outputs;
    detail::write_text_file((dir / "report.json").string(), root.dump(2) + "\n");
    note(ctx, "compared " + std::to_string(report.samples) + " scenarios in " + std::to_string(seconds_since(t0)) +
                  " s");
    return report;
}

ActivationExport cmd_export_activations(const PipelineConfig& config, const fs::path& model_path, std::size_t layer,
                                        const fs::path& data_path, const CommandContext& ctx) {
    const auto model = load_model(model_path);
    if (layer >= model.net.depth()) {
        throw ConfigError("layer " + std::to_string(layer) + " out of range (model has " +
                          std::to_string(model.net.depth()) + " layers)");
    }
    const auto data = read_dataset(data_path);
    if (model.feature_names != data.feature_names) {
        throw SpecError(model_path.string() + ": model inputs do not match the dataset's scenario dimensions");
    }
    const auto twin = untrained_twin(model);
    const auto ranges = kan::observed_input_ranges(model.net, layer, data.input_span());
    const auto before = kan::snapshot_activations(twin, layer, ranges, config.activation_points, kan::SnapshotTag::before);
    const auto after = kan::snapshot_activations(model.net, layer, ranges, config.activation_points, kan::SnapshotTag::after);

    const fs::path dir = config.output_dir / "activations";
    ensure_dir(dir);
    ActivationExport out;
    TextTable summary{{"layer", "out", "in", "x_min", "x_max", "sup_difference"}, {}};
    for (std::size_t e = 0; e < after.size(); ++e) {
        const auto& a = after[e];
        const auto& b = before[e];
        TextTable t{{"x", "phi_before", "phi_after"}, {}};
        double sup = 0.0;
        for (std::size_t i = 0; i < a.x.size(); ++i) {
            t.rows.push_back({format_double(a.x[i]), format_double(b.values[i]), format_double(a.values[i])});
            sup = std::max(sup, std::abs(a.values[i] - b.values[i]));
        }
        const fs::path p = dir / ("layer" + std::to_string(layer) + "_out" + std::to_string(a.out) + "_in" +
                                  std::to_string(a.in) + ".csv");
        write_table(p, t);
        out.tables.push_back(p);
        out.sup_difference.push_back(sup);
        summary.rows.push_back({std::to_string(layer), std::to_string(a.out), std::to_string(a.in),
                                format_double(a.x.front()), format_double(a.x.back()), format_double(sup)});
    }
    write_table(dir / ("layer" + std::to_string(layer) + "_summary.csv"), summary);
    note(ctx, "exported " + std::to_string(out.tables.size()) + " activation tables");
    return out;
}

std::vector<SymbolicRow> cmd_symbolic(const PipelineConfig& config, const fs::path& model_path,
                                      const fs::path& data_path, const CommandContext& ctx) {
    const auto model = load_model(model_path);
    const auto data = read_dataset(data_path);
    if (model.feature_names != data.feature_names) {
        throw SpecError(model_path.string() + ": model inputs do not match the dataset's scenario dimensions");
    }
    const auto scores = kan::importance_scores(model.net, data.input_span());
    std::vector<SymbolicRow> rows;
    TextTable skipped{{"layer", "out", "in", "reason"}, {}};
    for (std::size_t l = 0; l < model.net.depth(); ++l) {
        const auto& layer = model.net.layer(l);
        const auto snaps = kan::snapshot_activations(model.net, l, data.input_span(), config.activation_points);
        for (const auto& s : snaps) {
            const auto& edge = layer.edge(s.out, s.in);
            if (edge.base_weight == 0.0 && edge.spline_weight == 0.0) {
                skipped.rows.push_back({std::to_string(l), std::to_string(s.out), std::to_string(s.in), "pruned"});
                continue;
            }
            const double score = scores[l][static_cast<std::size_t>(s.out * layer.n_in() + s.in)];
            rows.push_back({l, s.out, s.in, score, kan::fit_symbolic(s)});
        }
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const SymbolicRow& a, const SymbolicRow& b) { return a.importance > b.importance; });
    TextTable t{{"layer", "out", "in", "importance", "candidate", "a", "b", "c", "d", "r_squared"}, {}};
    for (const auto& r : rows) {
        t.rows.push_back({std::to_string(r.layer), std::to_string(r.out), std::to_string(r.in),
                          format_double(r.importance), std::string(kan::candidate_name(r.fit.candidate)),
                          format_double(r.fit.a), format_double(r.fit.b), format_double(r.fit.c),
                          format_double(r.fit.d), format_double(r.fit.r_squared)});
    }
    ensure_dir(config.output_dir);
    write_table(config.output_dir / "symbolic.csv", t);
    write_table(config.output_dir / "symbolic_skipped.csv", skipped);
    note(ctx, "fitted " + std::to_string(rows.size()) + " edges, skipped " + std::to_string(skipped.rows.size()));
    return rows;
}

PruneOutcome cmd_prune(const PipelineConfig& config, const fs::path& model_path, const fs::path& data_path,
                       double threshold, const CommandContext& ctx) {
    if (!(threshold >= 0.0)) throw ConfigError("prune threshold must be non-negative");
    auto model = load_model(model_path);
    const auto data = read_dataset(data_path);
    if (model.feature_names != data.feature_names) {
        throw SpecError(model_path.string() + ": model inputs do not match the dataset's scenario dimensions");
    }
    const auto scores = kan::importance_scores(model.net, data.input_span());
    PruneOutcome out;
    out.mask = kan::prune_by_threshold(model.net, data.input_span(), threshold);
    out.disconnected_outputs = kan::disconnected_outputs(model.net, out.mask);
    TextTable t{{"layer", "out", "in", "importance", "kept"}, {}};
    for (std::size_t l = 0; l < model.net.depth(); ++l) {
        const auto& layer = model.net.layer(l);
        for (int j = 0; j < layer.n_out(); ++j) {
            for (int i = 0; i < layer.n_in(); ++i) {
                t.rows.push_back({std::to_string(l), std::to_string(j), std::to_string(i),
                                  format_double(scores[l][static_cast<std::size_t>(j * layer.n_in() + i)]),
                                  out.mask.kept(l, j, i, layer.n_in()) ? "1" : "0"});
            }
        }
    }
    model.net = kan::apply_prune_mask(model.net, out.mask);
    ensure_dir(config.output_dir);
    out.model_path = config.output_dir / "model_pruned.json";
    save_model(out.model_path, model);
    write_table(config.output_dir / "prune.csv", t);
    note(ctx, "kept " + std::to_string(out.mask.kept_count()) + " of " + std::to_string(model.net.edge_count()) +
                  " edges");
    for (int o : out.disconnected_outputs) {
        note(ctx, "warning: output " + model.target_names[static_cast<std::size_t>(o)] + " is disconnected");
    }
    return out;
}

}  // namespace kanopf::pipeline
