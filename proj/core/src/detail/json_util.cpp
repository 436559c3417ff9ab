#include "detail/json_util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace kanopf::detail {

namespace {

std::string at(const std::string& path, const std::string& key) { return path + "/" + key; }

}  // namespace

Json parse_json(const std::string& text, const std::string& origin) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        // Byte offset to line:column for the message.
        const std::size_t offset = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        std::size_t line = 1, col = 1;
        for (std::size_t k = 0; k < offset; ++k) {
            if (text[k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
    }
}

void require_object(const Json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
}

const Json& member(const Json& obj, const std::string& key, const std::string& path) {
    require_object(obj, path);
    const auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(at(path, key) + ": missing required key");
    return *it;
}

double number(const Json& obj, const std::string& key, const std::string& path) {
    const Json& v = member(obj, key, path);
    if (!v.is_number()) throw ConfigError(at(path, key) + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(at(path, key) + ": expected a finite number");
    return x;
}

double number_or(const Json& obj, const std::string& key, double fallback, const std::string& path) {
    require_object(obj, path);
    return obj.contains(key) ? number(obj, key, path) : fallback;
}

long long integer(const Json& obj, const std::string& key, const std::string& path) {
    const Json& v = member(obj, key, path);
    if (!v.is_number_integer()) throw ConfigError(at(path, key) + ": expected an integer");
    return v.get<long long>();
}

long long integer_or(const Json& obj, const std::string& key, long long fallback, const std::string& path) {
    require_object(obj, path);
    return obj.contains(key) ? integer(obj, key, path) : fallback;
}

bool boolean_or(const Json& obj, const std::string& key, bool fallback, const std::string& path) {
    require_object(obj, path);
    if (!obj.contains(key)) return fallback;
    const Json& v = obj.at(key);
    if (!v.is_boolean()) throw ConfigError(at(path, key) + ": expected true or false");
    return v.get<bool>();
}

std::string string(const Json& obj, const std::string& key, const std::string& path) {
    const Json& v = member(obj, key, path);
    if (!v.is_string()) throw ConfigError(at(path, key) + ": expected a string");
    return v.get<std::string>();
}

std::string string_or(const Json& obj, const std::string& key, const std::string& fallback,
                      const std::string& path) {
    require_object(obj, path);
    return obj.contains(key) ? string(obj, key, path) : fallback;
}

const Json& array(const Json& obj, const std::string& key, const std::string& path) {
    const Json& v = member(obj, key, path);
    if (!v.is_array()) throw ConfigError(at(path, key) + ": expected an array");
    return v;
}

void reject_unknown_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& path) {
    require_object(obj, path);
    for (const auto& item : obj.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* k) { return item.key() == k; });
        if (!known) throw ConfigError(at(path, item.key()) + ": unknown key");
    }
}

DistributionSpec distribution_from_json(const Json& j, const std::string& path) {
    const std::string kind = string(j, "kind", path);
    DistributionSpec d;
    if (kind == "gaussian") {
        reject_unknown_keys(j, {"kind", "mean", "std", "lower", "upper"}, path);
        d = DistributionSpec::gaussian(number(j, "mean", path), number(j, "std", path), number(j, "lower", path),
                                       number(j, "upper", path));
        if (!(d.std >= 0.0)) throw ConfigError(path + "/std: must be non-negative");
        if (!(d.lower <= d.mean && d.mean <= d.upper)) {
            throw ConfigError(path + ": need lower <= mean <= upper");
        }
    } else if (kind == "beta") {
        reject_unknown_keys(j, {"kind", "alpha", "beta", "scale"}, path);
        d = DistributionSpec::beta_dist(number(j, "alpha", path), number(j, "beta", path),
                                        number_or(j, "scale", 1.0, path));
        if (!(d.alpha > 0.0) || !(d.beta > 0.0)) throw ConfigError(path + ": alpha and beta must be positive");
        if (!(d.scale > 0.0)) throw ConfigError(path + "/scale: must be positive");
    } else if (kind == "bernoulli") {
        reject_unknown_keys(j, {"kind", "p"}, path);
        d = DistributionSpec::bernoulli(number(j, "p", path));
        if (!(d.p >= 0.0 && d.p <= 1.0)) throw ConfigError(path + "/p: must lie in [0, 1]");
    } else {
        throw ConfigError(path + "/kind: unknown distribution '" + kind + "'");
    }
    return d;
}

Json distribution_to_json(const DistributionSpec& d) {
    switch (d.kind) {
        case DistributionSpec::Kind::gaussian:
            return {{"kind", "gaussian"}, {"mean", d.mean}, {"std", d.std}, {"lower", d.lower}, {"upper", d.upper}};
        case DistributionSpec::Kind::beta:
            return {{"kind", "beta"}, {"alpha", d.alpha}, {"beta", d.beta}, {"scale", d.scale}};
        case DistributionSpec::Kind::bernoulli:
            return {{"kind", "bernoulli"}, {"p", d.p}};
    }
    return {};
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("error reading " + path);
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    out << text;
    out.flush();
    if (!out) throw IoError("error writing " + path);
}

}  // namespace kanopf::detail
