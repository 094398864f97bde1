#ifndef THERMOFUSE_CLI_CONFIG_HPP
#define THERMOFUSE_CLI_CONFIG_HPP

#include <array>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "thermofuse/data/manifest.hpp"

namespace thermofuse::cli {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& why) : std::runtime_error("ConfigError: " + why) {}
};

// One declarative document drives every subcommand; sections are fixed,
// unknown keys are rejected rather than silently ignored. The post-override
// form is dumped into each run directory.
struct RunConfig {
    // data
    std::string manifest;
    std::string modality = "fused";
    double window_step = 1.0;
    double window_floor = 0.0;
    // split
    std::uint64_t split_seed = 0;
    std::string split_file;  // load this instead of computing a fresh split
    // model
    std::string backbone = "tiny_dfu";
    std::string inflation = "mean_rgb";
    std::string pretrained;
    std::uint64_t model_seed = 0;
    // train
    int epochs = 50;
    int batch_size = 32;
    double learning_rate = 1e-4;
    std::string optimizer = "adam";
    int patience = 10;
    std::uint64_t train_seed = 0;
    bool freeze_backbone = false;
    bool augment = true;
    int fold = 1;
    // eval
    std::string checkpoint;
    // bench
    int n_warmup = 20;
    int n_iter = 200;
    // synth
    std::uint64_t synth_seed = 0;
    std::array<int, data::kNumGrades> synth_per_class{100, 100, 100, 100, 100, 100};
    bool synth_table1 = false;  // replicate the clinical per-class ratios instead
    // output tree
    std::string out = "runs";
};

namespace detail {

template <typename T>
T get_as(const nlohmann::json& v, const std::string& where);

template <>
inline std::string get_as<std::string>(const nlohmann::json& v, const std::string& where) {
    if (!v.is_string()) throw ConfigError(where + " must be a string");
    return v.get<std::string>();
}
template <>
inline int get_as<int>(const nlohmann::json& v, const std::string& where) {
    if (!v.is_number_integer()) throw ConfigError(where + " must be an integer");
    return v.get<int>();
}
template <>
inline double get_as<double>(const nlohmann::json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + " must be a number");
    return v.get<double>();
}
template <>
inline bool get_as<bool>(const nlohmann::json& v, const std::string& where) {
    if (!v.is_boolean()) throw ConfigError(where + " must be true or false");
    return v.get<bool>();
}
template <>
inline std::uint64_t get_as<std::uint64_t>(const nlohmann::json& v, const std::string& where) {
    if (!v.is_number_unsigned() && !v.is_number_integer())
        throw ConfigError(where + " must be a non-negative integer");
    const auto i = v.get<std::int64_t>();
    if (i < 0) throw ConfigError(where + " must be non-negative");
    return std::uint64_t(i);
}

inline void apply_section(RunConfig& c, const std::string& name, const nlohmann::json& sec) {
    if (!sec.is_object()) throw ConfigError("section '" + name + "' must be an object");
    for (auto it = sec.begin(); it != sec.end(); ++it) {
        const std::string key = name + "." + it.key();
        const nlohmann::json& v = it.value();
        bool ok = true;
        if (name == "data") {
            if (it.key() == "manifest") c.manifest = get_as<std::string>(v, key);
            else if (it.key() == "modality") c.modality = get_as<std::string>(v, key);
            else if (it.key() == "window_step") c.window_step = get_as<double>(v, key);
            else if (it.key() == "window_floor") c.window_floor = get_as<double>(v, key);
            else ok = false;
        } else if (name == "split") {
            if (it.key() == "seed") c.split_seed = get_as<std::uint64_t>(v, key);
            else if (it.key() == "file") c.split_file = get_as<std::string>(v, key);
            else ok = false;
        } else if (name == "model") {
            if (it.key() == "backbone") c.backbone = get_as<std::string>(v, key);
            else if (it.key() == "inflation") c.inflation = get_as<std::string>(v, key);
            else if (it.key() == "pretrained") c.pretrained = get_as<std::string>(v, key);
            else if (it.key() == "seed") c.model_seed = get_as<std::uint64_t>(v, key);
            else ok = false;
        } else if (name == "train") {
            if (it.key() == "epochs") c.epochs = get_as<int>(v, key);
            else if (it.key() == "batch_size") c.batch_size = get_as<int>(v, key);
            else if (it.key() == "learning_rate") c.learning_rate = get_as<double>(v, key);
            else if (it.key() == "optimizer") c.optimizer = get_as<std::string>(v, key);
            else if (it.key() == "patience") c.patience = get_as<int>(v, key);
            else if (it.key() == "seed") c.train_seed = get_as<std::uint64_t>(v, key);
            else if (it.key() == "freeze_backbone") c.freeze_backbone = get_as<bool>(v, key);
            else if (it.key() == "augment") c.augment = get_as<bool>(v, key);
            else if (it.key() == "fold") c.fold = get_as<int>(v, key);
            else ok = false;
        } else if (name == "eval") {
            if (it.key() == "checkpoint") c.checkpoint = get_as<std::string>(v, key);
            else ok = false;
        } else if (name == "bench") {
            if (it.key() == "n_warmup") c.n_warmup = get_as<int>(v, key);
            else if (it.key() == "n_iter") c.n_iter = get_as<int>(v, key);
            else ok = false;
        } else if (name == "synth") {
            if (it.key() == "seed") c.synth_seed = get_as<std::uint64_t>(v, key);
            else if (it.key() == "table1") c.synth_table1 = get_as<bool>(v, key);
            else if (it.key() == "per_class") {
                if (!v.is_array() || v.size() != data::kNumGrades)
                    throw ConfigError(key + " must be an array of 6 counts");
                for (int g = 0; g < data::kNumGrades; ++g)
                    c.synth_per_class[std::size_t(g)] = get_as<int>(v[std::size_t(g)], key);
            } else ok = false;
        } else {
            throw ConfigError("unknown section '" + name + "'");
        }
        if (!ok) throw ConfigError("unknown key '" + key + "'");
    }
}

}  // namespace detail

inline RunConfig config_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("config root must be an object");
    RunConfig c;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (it.key() == "out") {
            c.out = detail::get_as<std::string>(it.value(), "out");
        } else {
            detail::apply_section(c, it.key(), it.value());
        }
    }
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    return config_from_json(doc);
}

// all seeds at once — used by the THERMOFUSE_SEED override and --seed
inline void override_seeds(RunConfig& c, std::uint64_t seed) {
    c.split_seed = c.model_seed = c.train_seed = c.synth_seed = seed;
}

// CI hook: the environment variable beats the config file but not CLI flags
inline void apply_env_overrides(RunConfig& c) {
    if (const char* s = std::getenv("THERMOFUSE_SEED")) {
        try {
            std::size_t used = 0;
            const unsigned long long v = std::stoull(s, &used);
            if (used != std::string(s).size()) throw std::invalid_argument("trailing junk");
            override_seeds(c, v);
        } catch (const std::exception&) {
            throw ConfigError("THERMOFUSE_SEED must be a non-negative integer, got '" +
                              std::string(s) + "'");
        }
    }
}

inline nlohmann::json config_to_json(const RunConfig& c) {
    nlohmann::json j;
    j["data"] = {{"manifest", c.manifest},
                 {"modality", c.modality},
                 {"window_step", c.window_step},
                 {"window_floor", c.window_floor}};
    j["split"] = {{"seed", c.split_seed}, {"file", c.split_file}};
    j["model"] = {{"backbone", c.backbone},
                  {"inflation", c.inflation},
                  {"pretrained", c.pretrained},
                  {"seed", c.model_seed}};
    j["train"] = {{"epochs", c.epochs},
                  {"batch_size", c.batch_size},
                  {"learning_rate", c.learning_rate},
                  {"optimizer", c.optimizer},
                  {"patience", c.patience},
                  {"seed", c.train_seed},
                  {"freeze_backbone", c.freeze_backbone},
                  {"augment", c.augment},
                  {"fold", c.fold}};
    j["eval"] = {{"checkpoint", c.checkpoint}};
    j["bench"] = {{"n_warmup", c.n_warmup}, {"n_iter", c.n_iter}};
    j["synth"] = {{"seed", c.synth_seed},
                  {"per_class", c.synth_per_class},
                  {"table1", c.synth_table1}};
    j["out"] = c.out;
    return j;
}

}  // namespace thermofuse::cli

#endif
