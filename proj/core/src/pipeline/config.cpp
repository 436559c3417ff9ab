#include "kanopf/pipeline/config.hpp"

#include "detail/json_util.hpp"
#include "kanopf/errors.hpp"

namespace kanopf::pipeline {

namespace {

using detail::Json;
using namespace detail;

std::size_t positive_size(const Json& obj, const std::string& key, const std::string& path) {
    const long long v = integer(obj, key, path);
    if (v < 1) throw ConfigError(path + "/" + key + ": must be at least 1");
    return static_cast<std::size_t>(v);
}

std::vector<int> int_list(const Json& j, const std::string& path, int min_value) {
    if (!j.is_array() || j.empty()) throw ConfigError(path + ": expected a non-empty array of integers");
    std::vector<int> out;
    for (std::size_t k = 0; k < j.size(); ++k) {
        if (!j[k].is_number_integer() || j[k].get<long long>() < min_value || j[k].get<long long>() > 1'000'000) {
            throw ConfigError(path + "/" + std::to_string(k) + ": expected an integer >= " + std::to_string(min_value));
        }
        out.push_back(j[k].get<int>());
    }
    return out;
}

std::uint64_t unsigned64(const Json& obj, const std::string& key, const std::string& path) {
    const Json& v = member(obj, key, path);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        throw ConfigError(path + "/" + key + ": expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

// Full width list from either "widths" or "hidden".
std::vector<int> resolve_widths(const Json& j, const std::string& key_path, int n_in, int n_out, bool explicit_list) {
    std::vector<int> w;
    if (explicit_list) {
        w = int_list(j, key_path, 1);
        if (w.size() < 2) throw ConfigError(key_path + ": needs at least input and output widths");
        if (w.front() != n_in) {
            throw ConfigError(key_path + "/0: first width must equal the scenario dimension " + std::to_string(n_in));
        }
        if (w.back() != n_out) {
            throw ConfigError(key_path + "/" + std::to_string(w.size() - 1) +
                              ": last width must equal the number of outputs " + std::to_string(n_out));
        }
    } else {
        const auto hidden = j.is_array() && j.empty() ? std::vector<int>{} : int_list(j, key_path, 1);
        w.push_back(n_in);
        w.insert(w.end(), hidden.begin(), hidden.end());
        w.push_back(n_out);
    }
    return w;
}

}  // namespace

SeedPlan SeedPlan::from(std::uint64_t seed) {
    return {seed + 0x1001, seed + 0x2002, seed + 0x3003, seed + 0x4004};
}

void PipelineConfig::set_seed(std::uint64_t s) {
    seed = s;
    init.seed = seeds().init;
    train.seed = seeds().batches;
}

void PipelineConfig::set_periodic_grid_refits() {
    train.grid_update_schedule.clear();
    if (grid_refit_every == 0) return;
    for (std::size_t s = grid_refit_every; s < train.steps; s += grid_refit_every) {
        train.grid_update_schedule.push_back({s, init.grid_intervals});
    }
}

PipelineConfig default_config() {
    PipelineConfig c;
    c.case_ref = "builtin:case5";
    c.system = grid::builtin_case5();
    c.outputs = opf::OutputSpec::parse({"objective", "gen_p:1", "gen_p:2"});
    c.widths = {5, 5, 5, 3};
    c.init.grid_intervals = 3;
    c.train.steps = 3000;
    c.train.learning_rate = 0.01;
    c.set_periodic_grid_refits();
    c.sweep.train_sizes = {500, 1000, 2000, 4000};
    c.sweep.widths = {c.widths};
    c.set_seed(0);
    return c;
}

PipelineConfig parse_config(const std::string& text, const std::string& origin, const std::filesystem::path& base_dir) {
    const Json root = parse_json(text, origin);
    try {
        const std::string p;
        reject_unknown_keys(root, {"schema_version", "case", "outages", "outputs", "samples", "model", "train",
                                   "sweep", "report", "output_dir", "seed", "threads"},
                            p);
        if (integer(root, "schema_version", p) != 1) throw ConfigError("/schema_version: unsupported version");
        PipelineConfig c = default_config();

        c.case_ref = string_or(root, "case", "builtin:case5", p);
        if (c.case_ref == "builtin:case5") {
            c.system = grid::builtin_case5();
        } else if (c.case_ref.rfind("builtin:", 0) == 0) {
            throw ConfigError("/case: unknown builtin case '" + c.case_ref + "'");
        } else {
            std::filesystem::path cp(c.case_ref);
            if (cp.is_relative()) cp = base_dir / cp;
            c.system = grid::load_case(cp);
        }
        if (root.contains("outages")) {
            const Json& arr = array(root, "outages", p);
            for (std::size_t k = 0; k < arr.size(); ++k) {
                const std::string q = "/outages/" + std::to_string(k);
                reject_unknown_keys(arr[k], {"branch", "p"}, q);
                const int branch = static_cast<int>(integer(arr[k], "branch", q));
                const double prob = number(arr[k], "p", q);
                if (!(prob >= 0.0 && prob <= 1.0)) throw ConfigError(q + "/p: must lie in [0, 1]");
                try {
                    c.system.branch_index(branch);
                } catch (const SpecError&) {
                    throw ConfigError(q + "/branch: no AC branch with id " + std::to_string(branch));
                }
                c.system.scenario_map.push_back({"outage_branch" + std::to_string(branch),
                                                 grid::TargetKind::branch_outage, branch,
                                                 DistributionSpec::bernoulli(prob)});
            }
        }
        if (root.contains("outputs")) {
            const Json& arr = array(root, "outputs", p);
            if (arr.empty()) throw ConfigError("/outputs: needs at least one selector");
            std::vector<std::string> texts;
            for (std::size_t k = 0; k < arr.size(); ++k) {
                const std::string q = "/outputs/" + std::to_string(k);
                if (!arr[k].is_string()) throw ConfigError(q + ": expected a string");
                texts.push_back(arr[k].get<std::string>());
                try {
                    opf::OutputSpec::parse({texts.back()}).validate(c.system);
                } catch (const SpecError& e) {
                    throw ConfigError(q + ": " + e.what());
                }
            }
            c.outputs = opf::OutputSpec::parse(texts);
        }
        c.uncertainty().validate();
        const int n_in = static_cast<int>(c.system.scenario_map.size());
        const int n_out = static_cast<int>(c.outputs.size());

        if (root.contains("samples")) {
            const Json& s = root.at("samples");
            reject_unknown_keys(s, {"train", "test"}, "/samples");
            if (s.contains("train")) c.n_train = positive_size(s, "train", "/samples");
            if (s.contains("test")) c.n_test = positive_size(s, "test", "/samples");
        }
        c.widths = {n_in, 5, 5, n_out};
        if (root.contains("model")) {
            const Json& m = root.at("model");
            const std::string mp = "/model";
            reject_unknown_keys(m, {"widths", "hidden", "grid_intervals", "degree", "noise_scale", "base_scale"}, mp);
            if (m.contains("widths") && m.contains("hidden")) {
                throw ConfigError("/model: give either widths or hidden, not both");
            }
            if (m.contains("widths")) c.widths = resolve_widths(m.at("widths"), "/model/widths", n_in, n_out, true);
            if (m.contains("hidden")) c.widths = resolve_widths(m.at("hidden"), "/model/hidden", n_in, n_out, false);
            c.init.grid_intervals = static_cast<int>(integer_or(m, "grid_intervals", c.init.grid_intervals, mp));
            c.init.degree = static_cast<int>(integer_or(m, "degree", c.init.degree, mp));
            c.init.noise_scale = number_or(m, "noise_scale", c.init.noise_scale, mp);
            c.init.base_scale = number_or(m, "base_scale", c.init.base_scale, mp);
            if (c.init.grid_intervals < 1) throw ConfigError("/model/grid_intervals: must be at least 1");
            if (c.init.degree < 1 || c.init.degree > 16) throw ConfigError("/model/degree: must lie in [1, 16]");
            if (!(c.init.noise_scale >= 0.0)) throw ConfigError("/model/noise_scale: must be non-negative");
        }
        bool explicit_schedule = false;
        if (root.contains("train")) {
            const Json& t = root.at("train");
            const std::string tp = "/train";
            reject_unknown_keys(t, {"steps", "learning_rate", "batch_size", "l1_penalty", "entropy_penalty",
                                    "eval_every", "grid_updates", "grid_refit_every"},
                                tp);
            if (t.contains("steps")) c.train.steps = positive_size(t, "steps", tp);
            c.train.learning_rate = number_or(t, "learning_rate", c.train.learning_rate, tp);
            const long long batch = integer_or(t, "batch_size", 0, tp);
            if (batch < 0) throw ConfigError("/train/batch_size: must be non-negative (0 = full batch)");
            c.train.batch_size = static_cast<std::size_t>(batch);
            c.train.l1_penalty = number_or(t, "l1_penalty", 0.0, tp);
            c.train.entropy_penalty = number_or(t, "entropy_penalty", 0.0, tp);
            if (t.contains("eval_every")) c.train.eval_every = positive_size(t, "eval_every", tp);
            if (t.contains("grid_updates") && t.contains("grid_refit_every")) {
                throw ConfigError("/train: give either grid_updates or grid_refit_every, not both");
            }
            if (t.contains("grid_refit_every")) {
                const long long every = integer(t, "grid_refit_every", tp);
                if (every < 0) throw ConfigError("/train/grid_refit_every: must be non-negative (0 = never)");
                c.grid_refit_every = static_cast<std::size_t>(every);
            }
            if (t.contains("grid_updates")) {
                explicit_schedule = true;
                c.train.grid_update_schedule.clear();
                const Json& arr = array(t, "grid_updates", tp);
                for (std::size_t k = 0; k < arr.size(); ++k) {
                    const std::string q = "/train/grid_updates/" + std::to_string(k);
                    reject_unknown_keys(arr[k], {"step", "intervals"}, q);
                    const long long step = integer(arr[k], "step", q);
                    if (step < 0) throw ConfigError(q + "/step: must be non-negative");
                    c.train.grid_update_schedule.push_back(
                        {static_cast<std::size_t>(step), static_cast<int>(positive_size(arr[k], "intervals", q))});
                }
            }
            try {
                c.train.validate();
            } catch (const ConfigError& e) {
                throw ConfigError(std::string("/train: ") + e.what());
            }
        }
        if (!explicit_schedule) c.set_periodic_grid_refits();
        c.sweep.widths = {c.widths};
        if (root.contains("sweep")) {
            const Json& s = root.at("sweep");
            reject_unknown_keys(s, {"train_sizes", "hidden"}, "/sweep");
            if (s.contains("train_sizes")) {
                const auto sizes = int_list(s.at("train_sizes"), "/sweep/train_sizes", 1);
                c.sweep.train_sizes.assign(sizes.begin(), sizes.end());
            }
            if (s.contains("hidden")) {
                const Json& arr = array(s, "hidden", "/sweep");
                if (arr.empty()) throw ConfigError("/sweep/hidden: needs at least one configuration");
                c.sweep.widths.clear();
                for (std::size_t k = 0; k < arr.size(); ++k) {
                    c.sweep.widths.push_back(
                        resolve_widths(arr[k], "/sweep/hidden/" + std::to_string(k), n_in, n_out, false));
                }
            }
        }
        if (root.contains("report")) {
            const Json& r = root.at("report");
            const std::string rp = "/report";
            reject_unknown_keys(r, {"histogram_bins", "cdf_points", "ci_level", "activation_points"}, rp);
            c.histogram_bins = static_cast<int>(integer_or(r, "histogram_bins", c.histogram_bins, rp));
            c.cdf_points = static_cast<int>(integer_or(r, "cdf_points", c.cdf_points, rp));
            c.ci_level = number_or(r, "ci_level", c.ci_level, rp);
            c.activation_points = static_cast<int>(integer_or(r, "activation_points", c.activation_points, rp));
            if (c.histogram_bins < 1) throw ConfigError("/report/histogram_bins: must be at least 1");
            if (c.cdf_points < 2) throw ConfigError("/report/cdf_points: must be at least 2");
            if (!(c.ci_level > 0.0 && c.ci_level < 1.0)) throw ConfigError("/report/ci_level: must lie in (0, 1)");
            if (c.activation_points < 2) throw ConfigError("/report/activation_points: must be at least 2");
        }
        std::filesystem::path out(string_or(root, "output_dir", "run", p));
        c.output_dir = out.is_relative() ? base_dir / out : out;
        const std::uint64_t seed = root.contains("seed") ? unsigned64(root, "seed", p) : 0;
        const long long threads = integer_or(root, "threads", 0, p);
        if (threads < 0) throw ConfigError("/threads: must be non-negative (0 = all cores)");
        c.threads = static_cast<unsigned>(threads);
        c.set_seed(seed);
        return c;
    } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
    }
}

PipelineConfig load_config(const std::filesystem::path& path) {
    const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    return parse_config(detail::read_text_file(path.string()), path.string(), base);
}

}  // namespace kanopf::pipeline
