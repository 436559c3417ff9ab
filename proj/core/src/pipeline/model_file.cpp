#include "kanopf/pipeline/model_file.hpp"

#include "detail/json_util.hpp"
#include "kanopf/errors.hpp"
#include "kanopf/pipeline/table_io.hpp"

namespace kanopf::pipeline {

namespace {

using detail::Json;

std::vector<double> doubles(const Json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) throw ConfigError(path + ": expected an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

std::vector<std::string> strings(const Json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path + ": expected an array of strings");
    std::vector<std::string> out;
    for (const auto& v : j) {
        if (!v.is_string()) throw ConfigError(path + ": expected an array of strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

}  // namespace

std::string model_to_string(const ModelFile& model) {
    Json root;
    root["schema_version"] = 1;
    root["widths"] = std::vector<int>(model.net.widths().begin(), model.net.widths().end());
    root["feature_names"] = model.feature_names;
    root["target_names"] = model.target_names;
    root["output_fingerprint"] = hex64(model.spec_fingerprint);
    root["standardization"] = {{"means", model.standardizer.means}, {"stds", model.standardizer.stds}};
    Json domains = Json::array();
    for (const auto& layer : model.init_domains) {
        Json l = Json::array();
        for (const auto& [lo, hi] : layer) l.push_back({lo, hi});
        domains.push_back(l);
    }
    root["init"] = {{"seed", model.init.seed},
                    {"grid_intervals", model.init.grid_intervals},
                    {"degree", model.init.degree},
                    {"noise_scale", model.init.noise_scale},
                    {"base_scale", model.init.base_scale},
                    {"domains", domains}};
    root["provenance"] = {{"seed", model.provenance.seed},
                          {"steps", model.provenance.steps},
                          {"train_rows", model.provenance.train_rows},
                          {"data_hash", hex64(model.provenance.data_hash)}};
    Json layers = Json::array();
    for (const auto& layer : model.net.layers()) {
        Json edges = Json::array();
        for (const auto& e : layer.edges()) {
            edges.push_back({{"t_min", e.grid.t_min()},
                             {"t_max", e.grid.t_max()},
                             {"intervals", e.grid.num_intervals()},
                             {"degree", e.grid.degree()},
                             {"base_weight", e.base_weight},
                             {"spline_weight", e.spline_weight},
                             {"coeffs", e.coeffs}});
        }
        layers.push_back({{"n_in", layer.n_in()}, {"n_out", layer.n_out()}, {"edges", edges}});
    }
    root["layers"] = layers;
    return root.dump(1) + "\n";
}

ModelFile parse_model(const std::string& text, const std::string& origin) {
    const Json root = detail::parse_json(text, origin);
    try {
        using namespace detail;
        const std::string p;
        if (integer(root, "schema_version", p) != 1) throw ConfigError("/schema_version: unsupported version");
        std::vector<kan::KanLayer> layers;
        const Json& jl = array(root, "layers", p);
        for (std::size_t l = 0; l < jl.size(); ++l) {
            const std::string lp = "/layers/" + std::to_string(l);
            const int n_in = static_cast<int>(integer(jl[l], "n_in", lp));
            const int n_out = static_cast<int>(integer(jl[l], "n_out", lp));
            const Json& je = array(jl[l], "edges", lp);
            std::vector<kan::SplineEdge> edges;
            for (std::size_t k = 0; k < je.size(); ++k) {
                const std::string ep = lp + "/edges/" + std::to_string(k);
                kan::SplineGrid grid(number(je[k], "t_min", ep), number(je[k], "t_max", ep),
                                     static_cast<int>(integer(je[k], "intervals", ep)),
                                     static_cast<int>(integer(je[k], "degree", ep)));
                edges.emplace_back(std::move(grid), doubles(member(je[k], "coeffs", ep), ep + "/coeffs"),
                                   number(je[k], "base_weight", ep), number(je[k], "spline_weight", ep));
            }
            layers.emplace_back(n_in, n_out, std::move(edges));
        }
        ModelFile m{kan::KanNetwork(std::move(layers)), {}, {}, {}, 0, {}, {}, {}};
        const auto widths = doubles(member(root, "widths", p), "/widths");
        const auto actual = m.net.widths();
        if (widths.size() != actual.size() || !std::equal(actual.begin(), actual.end(), widths.begin())) {
            throw ConfigError("/widths: does not match the layers");
        }
        m.feature_names = strings(member(root, "feature_names", p), "/feature_names");
        m.target_names = strings(member(root, "target_names", p), "/target_names");
        m.spec_fingerprint = parse_hex64(string(root, "output_fingerprint", p), "/output_fingerprint");
        const Json& st = member(root, "standardization", p);
        m.standardizer.means = doubles(member(st, "means", "/standardization"), "/standardization/means");
        m.standardizer.stds = doubles(member(st, "stds", "/standardization"), "/standardization/stds");
        const Json& init = member(root, "init", p);
        m.init.seed = member(init, "seed", "/init").get<std::uint64_t>();
        m.init.grid_intervals = static_cast<int>(integer(init, "grid_intervals", "/init"));
        m.init.degree = static_cast<int>(integer(init, "degree", "/init"));
        m.init.noise_scale = number(init, "noise_scale", "/init");
        m.init.base_scale = number(init, "base_scale", "/init");
        for (const auto& layer : array(init, "domains", "/init")) {
            std::vector<kan::Domain> d;
            for (const auto& pair : layer) d.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
            m.init_domains.push_back(std::move(d));
        }
        const Json& prov = member(root, "provenance", p);
        m.provenance.seed = member(prov, "seed", "/provenance").get<std::uint64_t>();
        m.provenance.steps = static_cast<std::size_t>(integer(prov, "steps", "/provenance"));
        m.provenance.train_rows = static_cast<std::size_t>(integer(prov, "train_rows", "/provenance"));
        m.provenance.data_hash = parse_hex64(string(prov, "data_hash", "/provenance"), "/provenance/data_hash");
        const auto n_out = static_cast<std::size_t>(m.net.output_dim());
        if (m.standardizer.means.size() != n_out || m.standardizer.stds.size() != n_out ||
            m.target_names.size() != n_out || m.feature_names.size() != static_cast<std::size_t>(m.net.input_dim())) {
            throw ConfigError("names or standardization do not match the network widths");
        }
        return m;
    } catch (const Error& e) {
        throw IoError(origin + ": invalid model file: " + e.what());
    } catch (const detail::Json::exception& e) {
        throw IoError(origin + ": invalid model file: " + e.what());
    }
}

void save_model(const std::filesystem::path& path, const ModelFile& model) {
    detail::write_text_file(path.string(), model_to_string(model));
}

ModelFile load_model(const std::filesystem::path& path) {
    return parse_model(detail::read_text_file(path.string()), path.string());
}

kan::KanNetwork untrained_twin(const ModelFile& model) {
    const auto w = model.net.widths();
    return kan::initialize_network(std::vector<int>(w.begin(), w.end()), model.init, model.init_domains);
}

}  // namespace kanopf::pipeline
