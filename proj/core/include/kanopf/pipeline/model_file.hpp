#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kanopf/kan/dataset.hpp"
#include "kanopf/kan/network.hpp"

namespace kanopf::pipeline {

struct TrainingProvenance {
    std::uint64_t seed = 0;
    std::size_t steps = 0;
    std::uint64_t data_hash = 0;
    std::size_t train_rows = 0;
};

/// Trained surrogate with everything needed to use and re-create it.
struct ModelFile {
    kan::KanNetwork net;
    kan::Standardizer standardizer;
    std::vector<std::string> feature_names;
    std::vector<std::string> target_names;
    std::uint64_t spec_fingerprint = 0;
    kan::InitConfig init;  ///< initialisation of the untrained twin
    std::vector<std::vector<kan::Domain>> init_domains;
    TrainingProvenance provenance;
};

/// JSON, schema_version 1. Doubles are written in shortest round-trip form,
/// so parse(to_string(m)) reproduces forward outputs bit for bit.
std::string model_to_string(const ModelFile& model);
ModelFile parse_model(const std::string& text, const std::string& origin = "<model>");
void save_model(const std::filesystem::path& path, const ModelFile& model);
ModelFile load_model(const std::filesystem::path& path);

/// Network with the recorded initialisation (seed, grids, noise).
kan::KanNetwork untrained_twin(const ModelFile& model);

}  // namespace kanopf::pipeline
