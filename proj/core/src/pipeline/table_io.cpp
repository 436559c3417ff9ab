#include "kanopf/pipeline/table_io.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "detail/json_util.hpp"
#include "kanopf/errors.hpp"
#include "kanopf/random.hpp"

namespace kanopf::pipeline {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc()) throw DomainError("format_double: conversion failed");
    return std::string(buf, ptr);
}

double parse_double(const std::string& field, const std::string& where) {
    if (field.empty() || field == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (field == "inf") return std::numeric_limits<double>::infinity();
    if (field == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const char* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), last, v);
    if (ec != std::errc() || ptr != last) throw IoError(where + ": '" + field + "' is not a number");
    return v;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    const auto [ptr, ec] = std::to_chars(buf, buf + 16, v, 16);
    std::string s(buf, ptr);
    return std::string(16 - s.size(), '0') + s;
}

std::uint64_t parse_hex64(const std::string& text, const std::string& where) {
    std::uint64_t v = 0;
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), last, v, 16);
    if (text.empty() || ec != std::errc() || ptr != last) throw IoError(where + ": '" + text + "' is not a hex hash");
    return v;
}

std::string table_to_string(const TextTable& table) {
    std::string out;
    auto line = [&](const std::vector<std::string>& fields) {
        if (fields.size() != table.header.size()) throw ShapeError("table row width differs from header");
        for (std::size_t k = 0; k < fields.size(); ++k) {
            if (fields[k].find_first_of(",\n\r") != std::string::npos) {
                throw DomainError("table field '" + fields[k] + "' contains a separator");
            }
            if (k) out += ',';
            out += fields[k];
        }
        out += '\n';
    };
    line(table.header);
    for (const auto& r : table.rows) line(r);
    return out;
}

TextTable parse_table(const std::string& text, const std::string& origin) {
    TextTable t;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cur;
        for (char ch : s) {
            if (ch == ',') {
                out.push_back(cur);
                cur.clear();
            } else if (ch != '\r') {
                cur += ch;
            }
        }
        out.push_back(cur);
        return out;
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto fields = split(line);
        if (t.header.empty()) {
            t.header = std::move(fields);
        } else {
            if (fields.size() != t.header.size()) {
                throw IoError(origin + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                              " fields, found " + std::to_string(fields.size()));
            }
            t.rows.push_back(std::move(fields));
        }
    }
    if (t.header.empty()) throw IoError(origin + ": empty table");
    return t;
}

void write_table(const std::filesystem::path& path, const TextTable& table) {
    detail::write_text_file(path.string(), table_to_string(table));
}

TextTable read_table(const std::filesystem::path& path) {
    return parse_table(detail::read_text_file(path.string()), path.string());
}

std::string dataset_to_string(const kan::Dataset& data) {
    data.validate();
    TextTable t;
    for (int c = 0; c < data.input_dim(); ++c) {
        t.header.push_back("xi:" + (data.feature_names.empty() ? "x" + std::to_string(c)
                                                               : data.feature_names[static_cast<std::size_t>(c)]));
    }
    for (int c = 0; c < data.target_dim(); ++c) {
        t.header.push_back("y:" + (data.target_names.empty() ? "y" + std::to_string(c)
                                                             : data.target_names[static_cast<std::size_t>(c)]));
    }
    for (std::size_t r = 0; r < data.rows(); ++r) {
        std::vector<std::string> row;
        for (double v : data.input_row(r)) row.push_back(format_double(v));
        for (double v : data.target_row(r)) row.push_back(format_double(v));
        t.rows.push_back(std::move(row));
    }
    return table_to_string(t);
}

kan::Dataset parse_dataset(const std::string& text, const std::string& origin) {
    const TextTable t = parse_table(text, origin);
    kan::Dataset d;
    std::size_t n_in = 0;
    for (std::size_t c = 0; c < t.header.size(); ++c) {
        const auto& h = t.header[c];
        if (h.rfind("xi:", 0) == 0) {
            if (!d.target_names.empty()) throw IoError(origin + ": xi columns must precede y columns");
            d.feature_names.push_back(h.substr(3));
            ++n_in;
        } else if (h.rfind("y:", 0) == 0) {
            d.target_names.push_back(h.substr(2));
        } else {
            throw IoError(origin + ": column '" + h + "' is neither xi:<name> nor y:<name>");
        }
    }
    const auto rows = static_cast<Eigen::Index>(t.rows.size());
    d.inputs.resize(rows, static_cast<Eigen::Index>(n_in));
    d.targets.resize(rows, static_cast<Eigen::Index>(d.target_names.size()));
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = t.rows[static_cast<std::size_t>(r)];
        const std::string where = origin + ":" + std::to_string(r + 2);
        for (std::size_t c = 0; c < row.size(); ++c) {
            const double v = parse_double(row[c], where);
            if (c < n_in) {
                d.inputs(r, static_cast<Eigen::Index>(c)) = v;
            } else {
                d.targets(r, static_cast<Eigen::Index>(c - n_in)) = v;
            }
        }
    }
    try {
        d.validate();
    } catch (const Error& e) {
        throw IoError(origin + ": " + e.what());
    }
    return d;
}

void write_dataset(const std::filesystem::path& path, const kan::Dataset& data) {
    detail::write_text_file(path.string(), dataset_to_string(data));
}

kan::Dataset read_dataset(const std::filesystem::path& path) {
    return parse_dataset(detail::read_text_file(path.string()), path.string());
}

std::uint64_t dataset_hash(const kan::Dataset& data) {
    const std::string text = dataset_to_string(data);
    return fnv1a64(text.data(), text.size());
}

std::filesystem::path meta_path(const std::filesystem::path& dataset_path) {
    return std::filesystem::path(dataset_path.string() + ".meta.json");
}

void write_meta(const std::filesystem::path& dataset_path, const DatasetMeta& meta) {
    detail::Json j;
    j["schema_version"] = 1;
    j["seed"] = meta.seed;
    j["uncertainty_fingerprint"] = hex64(meta.model_fingerprint);
    j["output_fingerprint"] = hex64(meta.spec_fingerprint);
    j["scenarios"] = meta.scenarios;
    j["rows"] = meta.rows;
    j["clamped_draws"] = meta.clamped;
    j["failure_count"] = meta.failures.size();
    detail::Json failures = detail::Json::array();
    for (const auto& f : meta.failures) failures.push_back({{"scenario", f.scenario}, {"reason", f.reason}});
    j["failures"] = failures;
    detail::write_text_file(meta_path(dataset_path).string(), j.dump(2) + "\n");
}

DatasetMeta read_meta(const std::filesystem::path& dataset_path) {
    const auto path = meta_path(dataset_path).string();
    const auto j = detail::parse_json(detail::read_text_file(path), path);
    DatasetMeta m;
    try {
        m.seed = j.at("seed").get<std::uint64_t>();
        m.model_fingerprint = parse_hex64(j.at("uncertainty_fingerprint").get<std::string>(), path);
        m.spec_fingerprint = parse_hex64(j.at("output_fingerprint").get<std::string>(), path);
        m.scenarios = j.at("scenarios").get<std::size_t>();
        m.rows = j.at("rows").get<std::size_t>();
        m.clamped = j.at("clamped_draws").get<std::size_t>();
        for (const auto& f : j.at("failures")) {
            m.failures.push_back({f.at("scenario").get<std::size_t>(), f.at("reason").get<std::string>()});
        }
    } catch (const detail::Json::exception& e) {
        throw IoError(path + ": malformed metadata (" + e.what() + ")");
    }
    return m;
}

}  // namespace kanopf::pipeline
