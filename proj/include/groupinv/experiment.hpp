#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "groupinv/dataset.hpp"
#include "groupinv/generator.hpp"
#include "groupinv/train.hpp"

namespace groupinv {

/// Synthetic-data block of the experiment config. Style means/scales default
/// to the generator's symmetric layout when left empty.
struct DataConfig {
    int n_samples = 8000;
    int n_content = 2;
    int n_style = 2;
    int groups = 2;
    uint64_t seed = 7;
    int mixing_depth = 1;
    double group_label_correlation = 0.0;
    std::vector<std::vector<double>> style_means;
    std::vector<std::vector<double>> style_scales;
    SplitFractions fractions{0.625, 0.125, 0.25};
    /// Also emit a test set drawn from an unseen group whose style mean is
    /// extrapolated beyond the training groups.
    bool shifted_test = false;
    double shift_factor = 1.0;

    GenerativeSpec to_spec() const;
    void validate() const;
};

struct EvalSettings {
    int n_eval = 1000;
    uint64_t eval_seed = 2024;
    // Reporting toggles; auroc is always computed.
    bool mcc = true;
    bool delta = true;
    bool group_probe = true;
};

struct ExperimentConfig {
    DataConfig data;
    TrainConfig train;  // mode field is ignored; `modes` drives the runs
    std::vector<TrainMode> modes = {TrainMode::kInvariant, TrainMode::kBaseline};
    std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
    int top_m = 0;  // 0 keeps every run in the aggregate
    EvalSettings eval;
    std::string output_dir = "out";

    void validate() const;
};

ExperimentConfig default_config();

/// Strict parse: every section is validated and unknown keys are rejected by
/// name before any work starts.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// Canonical JSON echo of a config (sorted keys); the basis of config_hash.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// FNV-1a 64-bit hash of the canonical config serialization, as lowercase hex.
std::string config_hash(const ExperimentConfig& cfg);

/// output_dir from the config, unless CRL_OUTPUT_DIR is set and nonempty.
std::string resolve_output_dir(const ExperimentConfig& cfg);

const char* mode_name(TrainMode mode);
TrainMode mode_from_name(const std::string& name);

}  // namespace groupinv
