#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kanopf/kan/dataset.hpp"

namespace kanopf::pipeline {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);
/// Parses a whole field as a double; an empty field reads as NaN.
double parse_double(const std::string& field, const std::string& where);
std::string hex64(std::uint64_t v);
std::uint64_t parse_hex64(const std::string& text, const std::string& where);

/// Comma-separated table with a header row. Fields must not contain commas
/// or line breaks.
struct TextTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::string table_to_string(const TextTable& table);
TextTable parse_table(const std::string& text, const std::string& origin);
void write_table(const std::filesystem::path& path, const TextTable& table);
TextTable read_table(const std::filesystem::path& path);

/// Dataset file: columns "xi:<feature>" then "y:<selector>".
std::string dataset_to_string(const kan::Dataset& data);
kan::Dataset parse_dataset(const std::string& text, const std::string& origin);
void write_dataset(const std::filesystem::path& path, const kan::Dataset& data);
kan::Dataset read_dataset(const std::filesystem::path& path);
/// FNV-1a over the dataset's file text.
std::uint64_t dataset_hash(const kan::Dataset& data);

struct FailureRecord {
    std::size_t scenario = 0;
    std::string reason;
};

/// Sidecar "<dataset>.meta.json".
struct DatasetMeta {
    std::uint64_t seed = 0;
    std::uint64_t model_fingerprint = 0;
    std::uint64_t spec_fingerprint = 0;
    std::size_t scenarios = 0;
    std::size_t rows = 0;
    std::size_t clamped = 0;
    std::vector<FailureRecord> failures;
};

std::filesystem::path meta_path(const std::filesystem::path& dataset_path);
void write_meta(const std::filesystem::path& dataset_path, const DatasetMeta& meta);
DatasetMeta read_meta(const std::filesystem::path& dataset_path);

}  // namespace kanopf::pipeline
