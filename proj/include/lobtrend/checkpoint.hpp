#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <type_traits>

#include <nlohmann/json.hpp>

#include "lobtrend/hashing.hpp"
#include "lobtrend/models.hpp"

// Checkpoint format: flat little-endian binary of parameter tensors
// (params.bin) plus a JSON manifest naming each tensor, its shape, dtype, and
// the model configuration with its hash.
namespace lobtrend::nn {

inline nlohmann::json config_to_json(const ModelConfig& cfg) {
    nlohmann::json j;
    j["architecture"] = architecture_name(cfg.architecture);
    j["window"] = cfg.window;
    j["features"] = cfg.features;
    j["hidden"] = cfg.hidden;
    j["num_blocks"] = cfg.num_blocks;
    j["heads"] = cfg.heads;
    j["expansion"] = cfg.expansion;
    j["dropout"] = cfg.dropout;
    j["seed"] = cfg.seed;
    j["positional_encoding"] = cfg.use_positional_encoding;
    return j;
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig cfg;
    cfg.architecture = architecture_from_name(j.at("architecture").get<std::string>());
    cfg.window = j.at("window").get<int64_t>();
    cfg.features = j.at("features").get<int64_t>();
    cfg.hidden = j.at("hidden").get<int64_t>();
    cfg.num_blocks = j.at("num_blocks").get<int>();
    cfg.heads = j.value("heads", 1);
    cfg.expansion = j.value("expansion", 4);
    cfg.dropout = j.value("dropout", 0.0);
    cfg.seed = j.value("seed", static_cast<uint64_t>(0));
    cfg.use_positional_encoding = j.value("positional_encoding", true);
    return cfg;
}

inline uint64_t config_hash(const ModelConfig& cfg) {
    return fnv1a64(config_to_json(cfg).dump());
}

template <class S>
void save_checkpoint(const std::string& dir, const Model<S>& model) {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["dtype"] = std::is_same_v<S, double> ? "f64" : "f32";
    manifest["config"] = config_to_json(model.config());
    manifest["config_hash"] = hash_hex(config_hash(model.config()));
    manifest["parameter_count"] = model.parameter_count();

    std::ofstream bin(dir + "/params.bin", std::ios::binary);
    if (!bin) throw DataError("cannot write checkpoint: " + dir + "/params.bin");
    nlohmann::json params = nlohmann::json::array();
    int64_t offset = 0;
    for (const auto& [name, t] : model.named_parameters()) {
        nlohmann::json entry;
        entry["name"] = name;
        entry["shape"] = t.shape();
        entry["offset"] = offset;
        params.push_back(entry);
        bin.write(reinterpret_cast<const char*>(t.data()),
                  static_cast<std::streamsize>(t.numel() * sizeof(S)));
        offset += t.numel();
    }
    if (!bin) throw DataError("checkpoint write failed: " + dir);
    manifest["params"] = params;
    std::ofstream mf(dir + "/manifest.json");
    mf << manifest.dump(2) << "\n";
    if (!mf) throw DataError("checkpoint manifest write failed: " + dir);
}

template <class S>
Model<S> load_checkpoint(const std::string& dir) {
    std::ifstream mf(dir + "/manifest.json");
    if (!mf) throw DataError("missing checkpoint manifest: " + dir);
    nlohmann::json manifest = nlohmann::json::parse(mf);
    const std::string dtype = manifest.at("dtype").get<std::string>();

    auto model = Model<S>::build(config_from_json(manifest.at("config")));

    std::ifstream bin(dir + "/params.bin", std::ios::binary);
    if (!bin) throw DataError("missing checkpoint data: " + dir + "/params.bin");

    auto read_values = [&bin, &dtype](int64_t count) {
        std::vector<S> out(static_cast<size_t>(count));
        if (dtype == "f64") {
            std::vector<double> raw(static_cast<size_t>(count));
            bin.read(reinterpret_cast<char*>(raw.data()),
                     static_cast<std::streamsize>(count * 8));
            for (int64_t i = 0; i < count; ++i) out[i] = static_cast<S>(raw[i]);
        } else if (dtype == "f32") {
            std::vector<float> raw(static_cast<size_t>(count));
            bin.read(reinterpret_cast<char*>(raw.data()),
                     static_cast<std::streamsize>(count * 4));
            for (int64_t i = 0; i < count; ++i) out[i] = static_cast<S>(raw[i]);
        } else {
            throw FormatError("unknown checkpoint dtype: " + dtype);
        }
        return out;
    };

    std::vector<std::vector<S>> values;
    auto params = model.named_parameters();
    const auto& entries = manifest.at("params");
    if (entries.size() != params.size())
        throw FormatError("checkpoint parameter count mismatch in " + dir);
    for (size_t i = 0; i < params.size(); ++i) {
        if (entries[i].at("name").get<std::string>() != params[i].first)
            throw FormatError("checkpoint parameter order mismatch at " + params[i].first);
        values.push_back(read_values(params[i].second.numel()));
    }
    if (!bin) throw FormatError("checkpoint data truncated: " + dir);
    model.load_parameter_values(values);
    return model;
}

} // namespace lobtrend::nn
