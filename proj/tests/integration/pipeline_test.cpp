#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include "kanopf/errors.hpp"
#include "kanopf/pipeline/commands.hpp"
#include "kanopf/pipeline/config.hpp"
#include "kanopf/pipeline/model_file.hpp"
#include "kanopf/pipeline/table_io.hpp"
#include "support.hpp"

#ifndef KANOPF_CLI_PATH
#error "KANOPF_CLI_PATH must name the command-line binary"
#endif

using namespace kanopf;
using namespace kanopf::pipeline;
namespace fs = std::filesystem;

namespace {

const char* kSmallConfig = R"({
  "schema_version": 1,
  "samples": {"train": 80, "test": 40},
  "model": {"hidden": [3], "grid_intervals": 3},
  "train": {"steps": 60, "eval_every": 20, "grid_refit_every": 20},
  "sweep": {"train_sizes": [40, 80], "hidden": [[3], [2, 2]]},
  "output_dir": "out",
  "seed": 5,
  "threads": 1
})";

fs::path write_file(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
    return p;
}

PipelineConfig small_config(const fs::path& dir) {
    return load_config(write_file(dir / "config.json", kSmallConfig));
}

// One shared gen-data + train run for the read-only command tests.
struct Trained {
    fs::path dir;
    PipelineConfig config;
    GenDataResult data;
    TrainOutcome trained;
};

const Trained& trained_run() {
    static const Trained t = [] {
        const auto dir = test::fresh_dir("pipeline_shared");
        auto config = small_config(dir);
        auto data = cmd_gen_data(config);
        auto trained = cmd_train(config, data.train_path, data.test_path);
        return Trained{dir, std::move(config), std::move(data), std::move(trained)};
    }();
    return t;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(KANOPF_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, DefaultsDescribeThreeLayerNetwork) {
    const auto c = default_config();
    EXPECT_EQ(c.widths, (std::vector<int>{5, 5, 5, 3}));
    EXPECT_EQ(c.n_train, 4000u);
    EXPECT_EQ(c.sweep.train_sizes, (std::vector<std::size_t>{500, 1000, 2000, 4000}));
    EXPECT_EQ(c.outputs.names(), (std::vector<std::string>{"objective", "gen_p:1", "gen_p:2"}));
    EXPECT_EQ(c.system.scenario_map.size(), 5u);
}

TEST(Config, SeedPlanOffsets) {
    const auto s = SeedPlan::from(100);
    EXPECT_EQ(s.train_scenarios, 100u + 0x1001);
    EXPECT_EQ(s.test_scenarios, 100u + 0x2002);
    EXPECT_EQ(s.init, 100u + 0x3003);
    EXPECT_EQ(s.batches, 100u + 0x4004);
    auto c = default_config();
    c.set_seed(100);
    EXPECT_EQ(c.init.seed, s.init);
    EXPECT_EQ(c.train.seed, s.batches);
}

TEST(Config, SmallConfigParses) {
    const auto dir = test::fresh_dir("config_small");
    const auto c = small_config(dir);
    EXPECT_EQ(c.widths, (std::vector<int>{5, 3, 3}));
    EXPECT_EQ(c.sweep.widths.size(), 2u);
    EXPECT_EQ(c.sweep.widths[1], (std::vector<int>{5, 2, 2, 3}));
    EXPECT_EQ(c.output_dir, dir / "out");
    EXPECT_EQ(c.train.grid_update_schedule.size(), 2u);
    EXPECT_EQ(c.seed, 5u);
}

TEST(Config, ErrorsNamePosition) {
    auto expect_error = [](const std::string& text, const std::string& fragment) {
        try {
            parse_config(text, "cfg.json", ".");
            ADD_FAILURE() << "accepted: " << text;
        } catch (const ConfigError& e) {
            const std::string what = e.what();
            EXPECT_NE(what.find("cfg.json"), std::string::npos) << what;
            EXPECT_NE(what.find(fragment), std::string::npos) << what;
        }
    };
    expect_error(R"({"schema_version": 2})", "schema_version");
    expect_error(R"({"schema_version": 1, "sampels": {}})", "sampels");
    expect_error(R"({"schema_version": 1, "samples": {"train": 0}})", "/samples/train");
    expect_error(R"({"schema_version": 1, "model": {"widths": [4, 3]}})", "/model/widths/0");
    expect_error(R"({"schema_version": 1, "model": {"widths": [5, 2]}})", "/model/widths/1");
    expect_error(R"({"schema_version": 1, "outputs": ["objective", "gen_p:7"]})", "/outputs/1");
    expect_error(R"({"schema_version": 1, "train": {"grid_refit_every": 5, "grid_updates": []}})", "grid");
    expect_error("{\"schema_version\": 1,\n \"seed\": }", "2:");
    EXPECT_THROW(load_config("/nonexistent/config.json"), IoError);
}

TEST(Config, OutageDimensionOptIn) {
    const auto c = parse_config(R"({"schema_version": 1, "outages": [{"branch": 3, "p": 0.05}]})", "o.json", ".");
    ASSERT_EQ(c.system.scenario_map.size(), 6u);
    EXPECT_EQ(c.system.scenario_map.back().kind, grid::TargetKind::branch_outage);
    EXPECT_EQ(c.widths.front(), 6);
}

TEST(TableIo, DatasetRoundTripBitExact) {
    kan::Dataset d;
    d.inputs = kan::RowMatrix::Random(7, 2);
    d.targets = kan::RowMatrix::Random(7, 1);
    d.inputs(0, 0) = 0.1;
    d.targets(3, 0) = 1e-300;
    d.feature_names = {"a", "b"};
    d.target_names = {"gen_p:1"};
    const auto text = dataset_to_string(d);
    EXPECT_EQ(text.substr(0, text.find('\n')), "xi:a,xi:b,y:gen_p:1");
    const auto back = parse_dataset(text, "mem");
    EXPECT_EQ(back.inputs, d.inputs);
    EXPECT_EQ(back.targets, d.targets);
    EXPECT_EQ(dataset_to_string(back), text);
    EXPECT_THROW(parse_dataset("xi:a,y:b\n1\n", "short.csv"), Error);
    EXPECT_THROW(read_dataset("/nonexistent/data.csv"), IoError);
}

TEST(GenData, SameConfigByteIdentical) {
    const auto a = test::fresh_dir("gen_a");
    const auto b = test::fresh_dir("gen_b");
    auto ca = small_config(a);
    auto cb = small_config(b);
    ca.n_train = cb.n_train = 25;
    ca.n_test = cb.n_test = 10;
    const auto ra = cmd_gen_data(ca);
    const auto rb = cmd_gen_data(cb);
    EXPECT_EQ(test::slurp(ra.train_path), test::slurp(rb.train_path));
    EXPECT_EQ(test::slurp(ra.test_path), test::slurp(rb.test_path));
    EXPECT_EQ(test::slurp(meta_path(ra.train_path)), test::slurp(meta_path(rb.train_path)));
    EXPECT_NE(test::slurp(ra.train_path), test::slurp(ra.test_path));
    EXPECT_EQ(read_dataset(ra.train_path).rows(), 25u);
    EXPECT_EQ(read_meta(ra.train_path).seed, ca.seeds().train_scenarios);
    EXPECT_EQ(read_meta(ra.test_path).seed, ca.seeds().test_scenarios);
}

TEST(GenData, SingleRowPipeline) {
    const auto dir = test::fresh_dir("gen_one");
    auto c = small_config(dir);
    c.n_train = 1;
    c.n_test = 1;
    const auto r = cmd_gen_data(c);
    EXPECT_EQ(read_dataset(r.train_path).rows(), 1u);
    EXPECT_NO_THROW(cmd_train(c, r.train_path, r.test_path));
}

TEST(Train, WritesModelAndLossCurve) {
    const auto& t = trained_run();
    const auto curve = read_table(t.config.output_dir / "loss_curve.csv");
    EXPECT_EQ(curve.header, (std::vector<std::string>{"step", "train_loss", "test_rmse"}));
    EXPECT_EQ(curve.rows.size(), 60u);
    EXPECT_TRUE(fs::exists(t.config.output_dir / "model.json"));
    EXPECT_EQ(t.trained.model.provenance.train_rows, 80u);
    EXPECT_EQ(t.trained.model.provenance.seed, t.config.seeds().batches);
}

TEST(Train, RerunGivesIdenticalFiles) {
    const auto& t = trained_run();
    const auto dir = test::fresh_dir("train_rerun");
    auto c = t.config;
    c.output_dir = dir;
    cmd_train(c, t.data.train_path, t.data.test_path);
    EXPECT_EQ(test::slurp(dir / "loss_curve.csv"), test::slurp(t.config.output_dir / "loss_curve.csv"));
    EXPECT_EQ(test::slurp(dir / "model.json"), test::slurp(t.config.output_dir / "model.json"));
}

TEST(Train, MismatchedWidthsRejected) {
    const auto& t = trained_run();
    auto c = t.config;
    c.output_dir = test::fresh_dir("train_bad");
    c.widths = {4, 3, 3};
    EXPECT_THROW(cmd_train(c, t.data.train_path, t.data.test_path), ConfigError);
    c.widths = {5, 3, 2};
    EXPECT_THROW(cmd_train(c, t.data.train_path, t.data.test_path), ConfigError);
}

TEST(ModelFile, RoundTripForwardBitIdentical) {
    const auto& t = trained_run();
    const auto loaded = load_model(t.config.output_dir / "model.json");
    EXPECT_EQ(model_to_string(loaded), model_to_string(t.trained.model));
    const auto xs = test::uniform_samples(5000, 0.6, 1.4, 77);
    for (std::size_t n = 0; n < 1000; ++n) {
        const std::span<const double> x(xs.data() + 5 * n, 5);
        const auto a = kan::network_forward(t.trained.model.net, x);
        const auto b = kan::network_forward(loaded.net, x);
        ASSERT_EQ(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)), 0);
    }
    EXPECT_THROW(load_model("/nonexistent/model.json"), IoError);
}

TEST(Compare, WritesReportAndTables) {
    const auto& t = trained_run();
    const auto r = cmd_compare(t.config, t.config.output_dir / "model.json", t.data.test_path);
    ASSERT_EQ(r.outputs.size(), 3u);
    for (const auto& o : r.outputs) {
        EXPECT_GE(o.ks, 0.0);
        EXPECT_LE(o.ks, 1.0);
        EXPECT_GE(o.wasserstein, 0.0);
        EXPECT_GE(o.variance_surrogate, 0.0);
        EXPECT_LE(o.ci_low_baseline, o.ci_high_baseline);
    }
    const auto cmp = t.config.output_dir / "compare";
    EXPECT_TRUE(fs::exists(cmp / "report.json"));
    const auto pdf = read_table(cmp / "pdf_gen_p_1.csv");
    EXPECT_EQ(pdf.header, (std::vector<std::string>{"bin_left", "bin_right", "density_surrogate", "density_baseline"}));
    EXPECT_EQ(pdf.rows.size(), static_cast<std::size_t>(t.config.histogram_bins));
    const auto cdf = read_table(cmp / "cdf_objective.csv");
    EXPECT_EQ(cdf.rows.size(), static_cast<std::size_t>(t.config.cdf_points));
}

TEST(Compare, MissingModelNamesPath) {
    const auto& t = trained_run();
    try {
        cmd_compare(t.config, "/nonexistent/m.json", t.data.test_path);
        FAIL();
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("/nonexistent/m.json"), std::string::npos);
    }
}

TEST(Compare, OutputSpecMismatchRejected) {
    const auto& t = trained_run();
    auto c = t.config;
    c.outputs = opf::OutputSpec::parse({"objective", "gen_p:1", "bus_vm:3"});
    EXPECT_THROW(cmd_compare(c, t.config.output_dir / "model.json", t.data.test_path), SpecError);
}

TEST(Activations, OneTablePerLayerZeroEdge) {
    const auto& t = trained_run();
    auto c = t.config;
    c.output_dir = test::fresh_dir("act");
    const auto r = cmd_export_activations(c, t.config.output_dir / "model.json", 0, t.data.test_path);
    ASSERT_EQ(r.tables.size(), 5u * 3u);
    EXPECT_EQ(r.sup_difference.size(), 15u);
    for (const auto& p : r.tables) {
        const auto tab = read_table(p);
        EXPECT_EQ(tab.header, (std::vector<std::string>{"x", "phi_before", "phi_after"}));
        EXPECT_EQ(tab.rows.size(), static_cast<std::size_t>(c.activation_points));
        for (std::size_t i = 1; i < tab.rows.size(); ++i) {
            EXPECT_LT(parse_double(tab.rows[i - 1][0], "x"), parse_double(tab.rows[i][0], "x"));
        }
    }
    EXPECT_TRUE(fs::exists(c.output_dir / "activations" / "layer0_summary.csv"));
    EXPECT_THROW(cmd_export_activations(c, t.config.output_dir / "model.json", 2, t.data.test_path), ConfigError);
}

TEST(Activations, ZeroNoiseTwinIsBaseOnly) {
    const auto& t = trained_run();
    auto model = t.trained.model;
    model.init.noise_scale = 0.0;
    const auto dir = test::fresh_dir("act_zero");
    save_model(dir / "model.json", model);
    auto c = t.config;
    c.output_dir = dir;
    const auto r = cmd_export_activations(c, dir / "model.json", 0, t.data.test_path);
    const auto twin = untrained_twin(model);
    for (std::size_t e = 0; e < r.tables.size(); ++e) {
        const auto& edge = twin.layer(0).edge(static_cast<int>(e / 5), static_cast<int>(e % 5));
        for (const auto& row : read_table(r.tables[e]).rows) {
            const double x = parse_double(row[0], "x");
            EXPECT_NEAR(parse_double(row[1], "phi_before"), edge.base_weight * test::silu_reference(x), 1e-12);
        }
    }
}

TEST(Symbolic, RowPerKeptEdgeSkipsPruned) {
    const auto& t = trained_run();
    auto c = t.config;
    c.output_dir = test::fresh_dir("sym");
    const auto rows = cmd_symbolic(c, t.config.output_dir / "model.json", t.data.test_path);
    EXPECT_EQ(rows.size(), t.trained.model.net.edge_count());
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GE(rows[i - 1].importance, rows[i].importance);

    const auto pruned = cmd_prune(c, t.config.output_dir / "model.json", t.data.test_path, 0.05);
    const std::size_t kept = pruned.mask.kept_count();
    ASSERT_LT(kept, t.trained.model.net.edge_count());
    const auto sym = cmd_symbolic(c, pruned.model_path, t.data.test_path);
    EXPECT_EQ(sym.size(), kept);
    EXPECT_EQ(read_table(c.output_dir / "symbolic_skipped.csv").rows.size(), t.trained.model.net.edge_count() - kept);
    EXPECT_EQ(read_table(c.output_dir / "symbolic.csv").rows.size(), kept);
}

TEST(Prune, TableAndErrors) {
    const auto& t = trained_run();
    auto c = t.config;
    c.output_dir = test::fresh_dir("prune");
    const auto none = cmd_prune(c, t.config.output_dir / "model.json", t.data.test_path, 0.0);
    EXPECT_EQ(none.mask.kept_count(), t.trained.model.net.edge_count());
    EXPECT_EQ(read_table(c.output_dir / "prune.csv").rows.size(), t.trained.model.net.edge_count());
    const auto all = cmd_prune(c, t.config.output_dir / "model.json", t.data.test_path, 1e9);
    EXPECT_EQ(all.mask.kept_count(), 0u);
    EXPECT_EQ(all.disconnected_outputs.size(), 3u);
    EXPECT_THROW(cmd_prune(c, t.config.output_dir / "model.json", t.data.test_path, -1.0), ConfigError);
}

TEST(Sweep, CardinalityAndSingleCellConsistency) {
    const auto dir = test::fresh_dir("sweep");
    auto c = small_config(dir);
    const auto cells = cmd_sweep(c);
    ASSERT_EQ(cells.size(), 4u);
    const auto table = read_table(c.output_dir / "sweep" / "sweep.csv");
    EXPECT_EQ(table.rows.size(), 4u);
    for (const auto& cell : cells) EXPECT_TRUE(cell.ok) << cell.status;

    // The 80-row [5,3,3] cell trains on the same data as a direct run.
    const auto sweep_train = c.output_dir / "sweep" / "train.csv";
    const auto sweep_test = c.output_dir / "sweep" / "test.csv";
    auto direct = c;
    direct.output_dir = dir / "direct";
    const auto r = cmd_train(direct, sweep_train, sweep_test);
    const auto& cell = *std::find_if(cells.begin(), cells.end(),
                                     [](const SweepCell& s) { return s.train_size == 80 && s.widths.size() == 3; });
    EXPECT_EQ(cell.test_rmse_per_output, r.test_rmse_per_output);
}

TEST(Cli, ExitCodes) {
    const auto dir = test::fresh_dir("cli");
    write_file(dir / "bad.json", R"({"schema_version": 1, "samples": {"train": -3}})");
    EXPECT_EQ(run_cli("--help"), 0);
    EXPECT_EQ(run_cli("gen-data --bogus"), 2);
    EXPECT_EQ(run_cli("gen-data --config " + (dir / "bad.json").string()), 2);
    EXPECT_EQ(run_cli("gen-data --config " + (dir / "missing.json").string()), 4);
    EXPECT_EQ(run_cli("compare -q --out " + dir.string() + " --model " + (dir / "none.json").string()), 4);
    EXPECT_EQ(run_cli("prune -q --out " + dir.string()), 2);
}

TEST(Cli, EndToEndSmallRun) {
    const auto dir = test::fresh_dir("cli_run");
    write_file(dir / "config.json", kSmallConfig);
    const std::string cfg = "--config " + (dir / "config.json").string() + " -q";
    ASSERT_EQ(run_cli("gen-data " + cfg), 0);
    ASSERT_EQ(run_cli("train " + cfg), 0);
    ASSERT_EQ(run_cli("compare " + cfg), 0);
    ASSERT_EQ(run_cli("export-activations --layer 1 " + cfg), 0);
    EXPECT_TRUE(fs::exists(dir / "out" / "compare" / "report.json"));
    EXPECT_TRUE(fs::exists(dir / "out" / "activations" / "layer1_out0_in0.csv"));
    EXPECT_EQ(test::slurp(dir / "out" / "train.csv"), test::slurp(trained_run().data.train_path));
}
