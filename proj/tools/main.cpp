#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "kanopf/errors.hpp"
#include "kanopf/pipeline/commands.hpp"
#include "kanopf/pipeline/config.hpp"

namespace fs = std::filesystem;
using namespace kanopf;

namespace {

enum Exit { ok = 0, config_error = 2, numeric_error = 3, io_error = 4, internal_error = 1 };

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<unsigned> threads;
    std::string model;
    std::string data;
    std::string train;
    std::string test;
    std::size_t layer = 0;
    double threshold = 0.0;
    bool quiet = false;
};

pipeline::PipelineConfig resolve(const Options& o) {
    auto cfg = o.config.empty() ? pipeline::default_config() : pipeline::load_config(o.config);
    if (o.seed) cfg.set_seed(*o.seed);
    if (!o.out.empty()) cfg.output_dir = o.out;
    if (o.threads) cfg.threads = *o.threads;
    return cfg;
}

fs::path or_default(const std::string& given, const fs::path& fallback) {
    return given.empty() ? fallback : fs::path(given);
}

void print_report(const stochastic::ComparisonReport& r) {
    std::cout << "output,rmse_std,ks,w1,mean_sur,mean_mc,ci_lo_sur,ci_lo_mc,ci_hi_sur,ci_hi_mc\n";
    for (const auto& o : r.outputs) {
        std::cout << o.name << ',' << o.rmse_standardized << ',' << o.ks << ',' << o.wasserstein << ','
                  << o.mean_surrogate << ',' << o.mean_baseline << ',' << o.ci_low_surrogate << ','
                  << o.ci_low_baseline << ',' << o.ci_high_surrogate << ',' << o.ci_high_baseline << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"KAN surrogate for stochastic AC/DC optimal power flow"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "pipeline configuration (JSON); defaults to the bundled 5-bus setup");
        sub->add_option("--seed", o.seed, "global seed, overrides the configuration");
        sub->add_option("--out", o.out, "output directory, overrides the configuration");
        sub->add_option("--threads", o.threads, "scenario solver threads (0 = hardware)");
        sub->add_flag("-q,--quiet", o.quiet, "suppress progress messages");
    };
    auto model_and_data = [&](CLI::App* sub) {
        sub->add_option("--model", o.model, "model file (default <out>/model.json)");
        sub->add_option("--data", o.data, "dataset file (default <out>/test.csv)");
    };

    auto* gen = app.add_subcommand("gen-data", "solve OPF scenarios into train.csv and test.csv");
    common(gen);
    auto* train = app.add_subcommand("train", "train the surrogate, write model.json and loss_curve.csv");
    common(train);
    train->add_option("--train", o.train, "training dataset (default <out>/train.csv)");
    train->add_option("--test", o.test, "test dataset (default <out>/test.csv)");
    auto* sweep = app.add_subcommand("sweep", "train sizes x configurations loss table");
    common(sweep);
    auto* compare = app.add_subcommand("compare", "surrogate vs Monte Carlo distributions");
    common(compare);
    model_and_data(compare);
    auto* act = app.add_subcommand("export-activations", "before/after activation tables of one layer");
    common(act);
    model_and_data(act);
    act->add_option("--layer", o.layer, "layer index")->capture_default_str();
    auto* sym = app.add_subcommand("symbolic", "best symbolic candidate per edge");
    common(sym);
    model_and_data(sym);
    auto* prune = app.add_subcommand("prune", "drop edges with importance below a threshold");
    common(prune);
    model_and_data(prune);
    prune->add_option("--threshold", o.threshold, "importance threshold")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        const auto cfg = resolve(o);
        pipeline::CommandContext ctx{o.quiet ? nullptr : &std::cerr};
        const fs::path model = or_default(o.model, cfg.output_dir / "model.json");
        const fs::path data = or_default(o.data, cfg.output_dir / "test.csv");
        if (*gen) {
            const auto r = pipeline::cmd_gen_data(cfg, ctx);
            std::cout << r.train_path.string() << ' ' << r.train.data.rows() << " rows\n"
                      << r.test_path.string() << ' ' << r.test.data.rows() << " rows\n";
        } else if (*train) {
            const auto r = pipeline::cmd_train(cfg, or_default(o.train, cfg.output_dir / "train.csv"),
                                               or_default(o.test, cfg.output_dir / "test.csv"), ctx);
            for (std::size_t k = 0; k < r.model.target_names.size(); ++k) {
                std::cout << r.model.target_names[k] << " test_rmse " << r.test_rmse_per_output[k] << '\n';
            }
        } else if (*sweep) {
            const auto cells = pipeline::cmd_sweep(cfg, ctx);
            for (const auto& c : cells) {
                std::cout << c.train_size << ' ' << (c.ok ? std::to_string(c.best_test_rmse) : c.status) << '\n';
            }
        } else if (*compare) {
            print_report(pipeline::cmd_compare(cfg, model, data, ctx));
        } else if (*act) {
            const auto r = pipeline::cmd_export_activations(cfg, model, o.layer, data, ctx);
            std::cout << r.tables.size() << " tables\n";
        } else if (*sym) {
            const auto rows = pipeline::cmd_symbolic(cfg, model, data, ctx);
            std::cout << rows.size() << " edges fitted\n";
        } else if (*prune) {
            const auto r = pipeline::cmd_prune(cfg, model, data, o.threshold, ctx);
            std::cout << r.mask.kept_count() << " edges kept, " << r.disconnected_outputs.size()
                      << " outputs disconnected\n";
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const ConnectivityError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const ShapeError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return numeric_error;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return io_error;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return numeric_error;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return internal_error;
    }
    return ok;
}
