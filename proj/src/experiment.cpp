#include "groupinv/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>

#include "groupinv/errors.hpp"

namespace groupinv {

namespace {

void check_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                const std::string& context) {
    if (!obj.is_object()) throw ConfigError(context + " must be a JSON object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key)) {
            throw ConfigError("unknown key '" + key + "' in " + context);
        }
    }
}

template <typename T>
T get_or(const nlohmann::json& obj, const char* key, T fallback, const std::string& context) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(context + "." + key + " has the wrong type");
    }
}

}  // namespace

GenerativeSpec DataConfig::to_spec() const {
    GenerativeSpec spec = GenerativeSpec::defaults(n_content, n_style, groups, seed);
    spec.mixing_depth = mixing_depth;
    spec.group_label_correlation = group_label_correlation;
    if (!style_means.empty()) spec.group_style_means = style_means;
    if (!style_scales.empty()) spec.group_style_scales = style_scales;
    spec.validate();
    return spec;
}

void DataConfig::validate() const {
    if (n_samples < 2 * groups) {
        throw ConfigError("data.n_samples must be at least twice the group count");
    }
    const double sum = fractions.train + fractions.val + fractions.test;
    if (fractions.train <= 0.0 || fractions.val <= 0.0 || fractions.test <= 0.0 ||
        std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("data.fractions must be positive and sum to 1");
    }
    if (shift_factor <= 0.0) throw ConfigError("data.shift_factor must be positive");
    to_spec();  // validates the generator-facing fields
}

void ExperimentConfig::validate() const {
    data.validate();
    train.validate();
    if (modes.empty()) throw ConfigError("at least one training mode is required");
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    std::set<uint64_t> unique(seeds.begin(), seeds.end());
    if (unique.size() != seeds.size()) throw ConfigError("seeds must be distinct");
    if (top_m < 0) throw ConfigError("top_m must be >= 0");
    if (eval.n_eval < 1) throw ConfigError("eval.n_eval must be >= 1");
    if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

ExperimentConfig default_config() { return ExperimentConfig{}; }

ExperimentConfig parse_config(const nlohmann::json& j) {
    check_keys(j, {"data", "train", "eval", "output_dir"}, "config");
    ExperimentConfig cfg;

    if (j.contains("data")) {
        const auto& d = j.at("data");
        check_keys(d,
                   {"n_samples", "n_content", "n_style", "groups", "seed", "mixing_depth",
                    "group_label_correlation", "style_means", "style_scales", "fractions",
                    "shifted_test", "shift_factor"},
                   "data");
        cfg.data.n_samples = get_or(d, "n_samples", cfg.data.n_samples, "data");
        cfg.data.n_content = get_or(d, "n_content", cfg.data.n_content, "data");
        cfg.data.n_style = get_or(d, "n_style", cfg.data.n_style, "data");
        cfg.data.groups = get_or(d, "groups", cfg.data.groups, "data");
        cfg.data.seed = get_or(d, "seed", cfg.data.seed, "data");
        cfg.data.mixing_depth = get_or(d, "mixing_depth", cfg.data.mixing_depth, "data");
        cfg.data.group_label_correlation =
            get_or(d, "group_label_correlation", cfg.data.group_label_correlation, "data");
        cfg.data.style_means = get_or(d, "style_means", cfg.data.style_means, "data");
        cfg.data.style_scales = get_or(d, "style_scales", cfg.data.style_scales, "data");
        cfg.data.shifted_test = get_or(d, "shifted_test", cfg.data.shifted_test, "data");
        cfg.data.shift_factor = get_or(d, "shift_factor", cfg.data.shift_factor, "data");
        if (d.contains("fractions")) {
            const auto& f = d.at("fractions");
            check_keys(f, {"train", "val", "test"}, "data.fractions");
            cfg.data.fractions.train = get_or(f, "train", 0.0, "data.fractions");
            cfg.data.fractions.val = get_or(f, "val", 0.0, "data.fractions");
            cfg.data.fractions.test = get_or(f, "test", 0.0, "data.fractions");
        }
    }

    if (j.contains("train")) {
        const auto& t = j.at("train");
        check_keys(t,
                   {"modes", "epochs", "batch_size", "lr_phi", "lr_psi", "P",
                    "uniformity_weight", "temperature", "pairing", "selection", "hidden",
                    "latent_dim", "seeds", "top_m", "assert_routing"},
                   "train");
        cfg.train.epochs = get_or(t, "epochs", cfg.train.epochs, "train");
        cfg.train.batch_size = get_or(t, "batch_size", cfg.train.batch_size, "train");
        cfg.train.lr_phi = get_or(t, "lr_phi", cfg.train.lr_phi, "train");
        cfg.train.lr_psi = get_or(t, "lr_psi", cfg.train.lr_psi, "train");
        cfg.train.P = get_or(t, "P", cfg.train.P, "train");
        cfg.train.uniformity_weight =
            get_or(t, "uniformity_weight", cfg.train.uniformity_weight, "train");
        cfg.train.temperature = get_or(t, "temperature", cfg.train.temperature, "train");
        cfg.train.hidden = get_or(t, "hidden", cfg.train.hidden, "train");
        cfg.train.latent_dim = get_or(t, "latent_dim", cfg.train.latent_dim, "train");
        cfg.train.assert_routing = get_or(t, "assert_routing", cfg.train.assert_routing, "train");
        cfg.seeds = get_or(t, "seeds", cfg.seeds, "train");
        cfg.top_m = get_or(t, "top_m", cfg.top_m, "train");

        const std::string pairing = get_or<std::string>(t, "pairing", "chain", "train");
        if (pairing == "chain") {
            cfg.train.pairing = Pairing::kChain;
        } else if (pairing == "all_pairs") {
            cfg.train.pairing = Pairing::kAllPairs;
        } else {
            throw ConfigError("train.pairing must be 'chain' or 'all_pairs'");
        }
        const std::string selection =
            get_or<std::string>(t, "selection", "min_val_bce", "train");
        if (selection == "min_val_bce") {
            cfg.train.selection = SelectionRule::kMinValBce;
        } else if (selection == "max_val_auroc") {
            cfg.train.selection = SelectionRule::kMaxValAuroc;
        } else {
            throw ConfigError("train.selection must be 'min_val_bce' or 'max_val_auroc'");
        }
        if (t.contains("modes")) {
            cfg.modes.clear();
            for (const auto& m : t.at("modes")) {
                cfg.modes.push_back(mode_from_name(m.get<std::string>()));
            }
        }
    }

    if (j.contains("eval")) {
        const auto& e = j.at("eval");
        check_keys(e, {"n_eval", "eval_seed", "mcc", "delta", "group_probe"}, "eval");
        cfg.eval.n_eval = get_or(e, "n_eval", cfg.eval.n_eval, "eval");
        cfg.eval.eval_seed = get_or(e, "eval_seed", cfg.eval.eval_seed, "eval");
        cfg.eval.mcc = get_or(e, "mcc", cfg.eval.mcc, "eval");
        cfg.eval.delta = get_or(e, "delta", cfg.eval.delta, "eval");
        cfg.eval.group_probe = get_or(e, "group_probe", cfg.eval.group_probe, "eval");
    }
    cfg.train.n_eval = cfg.eval.n_eval;
    cfg.train.eval_seed = cfg.eval.eval_seed;

    cfg.output_dir = get_or<std::string>(j, "output_dir", cfg.output_dir, "config");
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifactError("config file not found: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + path + " is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["data"] = {{"n_samples", cfg.data.n_samples},
                 {"n_content", cfg.data.n_content},
                 {"n_style", cfg.data.n_style},
                 {"groups", cfg.data.groups},
                 {"seed", cfg.data.seed},
                 {"mixing_depth", cfg.data.mixing_depth},
                 {"group_label_correlation", cfg.data.group_label_correlation},
                 {"style_means", cfg.data.style_means},
                 {"style_scales", cfg.data.style_scales},
                 {"fractions",
                  {{"train", cfg.data.fractions.train},
                   {"val", cfg.data.fractions.val},
                   {"test", cfg.data.fractions.test}}},
                 {"shifted_test", cfg.data.shifted_test},
                 {"shift_factor", cfg.data.shift_factor}};

    nlohmann::json modes = nlohmann::json::array();
    for (TrainMode m : cfg.modes) modes.push_back(mode_name(m));
    j["train"] = {{"modes", modes},
                  {"epochs", cfg.train.epochs},
                  {"batch_size", cfg.train.batch_size},
                  {"lr_phi", cfg.train.lr_phi},
                  {"lr_psi", cfg.train.lr_psi},
                  {"P", cfg.train.P},
                  {"uniformity_weight", cfg.train.uniformity_weight},
                  {"temperature", cfg.train.temperature},
                  {"pairing", cfg.train.pairing == Pairing::kChain ? "chain" : "all_pairs"},
                  {"selection", cfg.train.selection == SelectionRule::kMinValBce
                                    ? "min_val_bce"
                                    : "max_val_auroc"},
                  {"hidden", cfg.train.hidden},
                  {"latent_dim", cfg.train.latent_dim},
                  {"assert_routing", cfg.train.assert_routing},
                  {"seeds", cfg.seeds},
                  {"top_m", cfg.top_m}};
    j["eval"] = {{"n_eval", cfg.eval.n_eval},
                 {"eval_seed", cfg.eval.eval_seed},
                 {"mcc", cfg.eval.mcc},
                 {"delta", cfg.eval.delta},
                 {"group_probe", cfg.eval.group_probe}};
    j["output_dir"] = cfg.output_dir;
    return j;
}

std::string config_hash(const ExperimentConfig& cfg) {
    const std::string canonical = config_to_json(cfg).dump();
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string resolve_output_dir(const ExperimentConfig& cfg) {
    const char* env = std::getenv("CRL_OUTPUT_DIR");
    if (env != nullptr && env[0] != '\0') return env;
    return cfg.output_dir;
}

const char* mode_name(TrainMode mode) {
    return mode == TrainMode::kInvariant ? "invariant" : "baseline";
}

TrainMode mode_from_name(const std::string& name) {
    if (name == "invariant") return TrainMode::kInvariant;
    if (name == "baseline") return TrainMode::kBaseline;
    throw ConfigError("unknown training mode '" + name + "' (expected invariant or baseline)");
}

}  // namespace groupinv
