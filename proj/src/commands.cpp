#include "groupinv/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <thread>

#include "groupinv/errors.hpp"
#include "groupinv/svg_plot.hpp"

namespace fs = std::filesystem;

namespace groupinv {

namespace {

// -------------------------------------------------------------------------
// Shared plumbing
// -------------------------------------------------------------------------

void write_json_file(const fs::path& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ContractError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
    if (!out) throw ContractError("failed writing " + path.string());
}

nlohmann::json read_json_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifactError("file not found: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return j;
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct DataPaths {
    fs::path dir, train, val, test, shifted, sidecar;
};

DataPaths data_paths(const fs::path& out_dir) {
    DataPaths p;
    p.dir = out_dir / "data";
    p.train = p.dir / "train.csv";
    p.val = p.dir / "val.csv";
    p.test = p.dir / "test.csv";
    p.shifted = p.dir / "test_shifted.csv";
    p.sidecar = p.dir / "spec.json";
    return p;
}

DatasetSplits load_splits(const DataPaths& paths) {
    DatasetSplits splits;
    splits.train = load_csv(paths.train.string());
    splits.val = load_csv(paths.val.string());
    splits.test = load_csv(paths.test.string());
    splits.train.split_tag = "train";
    splits.val.split_tag = "val";
    splits.test.split_tag = "test";
    return splits;
}

std::string run_dir_name(TrainMode mode, uint64_t seed) {
    return std::string(mode_name(mode)) + "_seed" + std::to_string(seed);
}

void refuse_existing(const fs::path& path, bool force) {
    if (!force && fs::exists(path)) {
        throw ConfigError(path.string() + " already exists; pass --force to overwrite");
    }
}

nlohmann::json metrics_to_json(const MetricsReport& m, TrainMode mode, uint64_t seed,
                               const EvalSettings& eval) {
    nlohmann::json j;
    j["mode"] = mode_name(mode);
    j["seed"] = seed;
    j["n_eval"] = m.n_eval;
    j["auroc"] = m.auroc;
    if (eval.delta) j["delta"] = m.delta;
    if (eval.group_probe) {
        j["group_probe_acc"] = m.group_probe_acc;
        j["group_majority_rate"] = m.group_majority;
    }
    if (eval.mcc && m.has_gt) {
        j["mcc_strong"] = m.mcc_strong;
        j["mcc_weak"] = m.mcc_weak;
        j["mcc_weak_style"] = m.mcc_weak_style;
    }
    return j;
}

/// Classifier AUROC on a fixed-size subsample of `ds`. Used for the shifted
/// test set, which holds a single held-out group, so the full metrics report
/// (group probe and friends) does not apply.
double auroc_on(const Model& model, const GroupedDataset& ds, int n_eval, uint64_t eval_seed) {
    const std::vector<int> idx = eval_subset(static_cast<int>(ds.size()), n_eval, eval_seed);
    const Matrix logits = model.psi.logit(model.phi.forward(ds.gather_x(idx)));
    std::vector<double> scores(static_cast<size_t>(logits.rows));
    for (int i = 0; i < logits.rows; ++i) scores[static_cast<size_t>(i)] = logits.at(i, 0);
    return auroc(scores, ds.gather_y(idx));
}

nlohmann::json history_to_json(const RunResult& run) {
    nlohmann::json epochs = nlohmann::json::array();
    for (const EpochRecord& rec : run.history) {
        epochs.push_back({{"epoch", rec.epoch},
                          {"train", {{"similarity", rec.train_loss.similarity},
                                     {"uniformity", rec.train_loss.uniformity},
                                     {"bce", rec.train_loss.bce},
                                     {"total", rec.train_loss.total}}},
                          {"val_bce", rec.val_bce},
                          {"val_auroc", rec.val_auroc}});
    }
    return {{"best_epoch", run.best_epoch}, {"epochs", epochs}};
}

void write_run_artifacts(const fs::path& run_dir, const RunResult& run,
                         const std::string& cfg_hash, const EvalSettings& eval,
                         const GroupedDataset& test_set, const GroupedDataset* shifted_set,
                         int n_eval, uint64_t eval_seed) {
    fs::create_directories(run_dir);
    save_checkpoint(run.best_checkpoint, (run_dir / "checkpoint.json").string(),
                    (run_dir / "checkpoint.bin").string());
    write_json_file(run_dir / "history.json", history_to_json(run));
    nlohmann::json metrics = metrics_to_json(run.test_metrics, run.mode, run.seed, eval);
    if (shifted_set != nullptr) {
        metrics["auroc_shifted"] = auroc_on(run.best_checkpoint, *shifted_set, n_eval, eval_seed);
    }
    write_json_file(run_dir / "metrics.json", metrics);

    const EmbeddingTable table =
        embed_eval_subset(run.best_checkpoint, test_set, n_eval, eval_seed);
    save_embeddings_csv((run_dir / "embeddings.csv").string(), table.z, table.labels,
                        table.groups);

    nlohmann::json manifest;
    manifest["format"] = "groupinv-run";
    manifest["config_hash"] = cfg_hash;
    manifest["mode"] = mode_name(run.mode);
    manifest["seed"] = run.seed;
    manifest["status"] = "complete";
    manifest["best_epoch"] = run.best_epoch;
    manifest["paths"] = {{"checkpoint", "checkpoint.json"},
                         {"checkpoint_blob", "checkpoint.bin"},
                         {"history", "history.json"},
                         {"metrics", "metrics.json"},
                         {"embeddings", "embeddings.csv"}};
    write_json_file(run_dir / "manifest.json", manifest);
}

/// A run may be named by bare name ("invariant_seed1"), by path relative to
/// the output directory, or by explicit path; accept all three.
fs::path resolve_run_dir(const fs::path& out_dir, const std::string& name) {
    const fs::path candidates[] = {out_dir / "runs" / name, out_dir / name, fs::path(name)};
    for (const fs::path& p : candidates) {
        if (fs::is_directory(p)) return p;
    }
    throw MissingArtifactError("run directory not found: " + name + " (looked under " +
                               (out_dir / "runs").string() + ")");
}

std::vector<fs::path> discover_run_dirs(const fs::path& out_dir) {
    const fs::path runs = out_dir / "runs";
    if (!fs::exists(runs)) {
        throw MissingArtifactError("no runs directory under " + out_dir.string() +
                                   "; run `train` first");
    }
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(runs)) {
        if (entry.is_directory()) dirs.push_back(entry.path());
    }
    std::sort(dirs.begin(), dirs.end());
    if (dirs.empty()) {
        throw MissingArtifactError("no run directories under " + runs.string());
    }
    return dirs;
}

nlohmann::json sidecar_json(const ExperimentConfig& cfg, const GenerativeSpec& spec) {
    nlohmann::json j;
    j["format"] = "groupinv-data";
    j["config_hash"] = config_hash(cfg);
    j["seed"] = cfg.data.seed;
    j["n_samples"] = cfg.data.n_samples;
    j["fractions"] = {{"train", cfg.data.fractions.train},
                      {"val", cfg.data.fractions.val},
                      {"test", cfg.data.fractions.test}};
    j["spec"] = {{"n_content", spec.n_content},
                 {"n_style", spec.n_style},
                 {"groups", spec.groups},
                 {"group_style_means", spec.group_style_means},
                 {"group_style_scales", spec.group_style_scales},
                 {"label_rule", {{"w", spec.label_rule.w}, {"b", spec.label_rule.b}}},
                 {"mixing_depth", spec.mixing_depth},
                 {"mixing_seed", spec.mixing_seed},
                 {"group_label_correlation", spec.group_label_correlation}};
    if (cfg.data.shifted_test) {
        const GenerativeSpec shifted = shifted_group_spec(cfg.data.to_spec(), cfg.data.shift_factor);
        j["shifted_test"] = {{"factor", cfg.data.shift_factor},
                             {"style_mean", shifted.group_style_means[0]},
                             {"style_scale", shifted.group_style_scales[0]}};
    }
    return j;
}

}  // namespace

// -------------------------------------------------------------------------
// gen-data
// -------------------------------------------------------------------------

void cmd_gen_data(const ExperimentConfig& cfg, bool force) {
    const fs::path out_dir = resolve_output_dir(cfg);
    const DataPaths paths = data_paths(out_dir);
    refuse_existing(paths.dir, force);
    if (force && fs::exists(paths.dir)) fs::remove_all(paths.dir);
    fs::create_directories(paths.dir);

    const GenerativeSpec spec = cfg.data.to_spec();
    Rng root(cfg.data.seed);
    GroupedDataset ds = generate(spec, cfg.data.n_samples, root);
    Rng split_rng = root.substream(stream::kSplit);
    DatasetSplits splits = split(ds, cfg.data.fractions, split_rng);

    save_csv(splits.train, paths.train.string());
    save_csv(splits.val, paths.val.string());
    save_csv(splits.test, paths.test.string());
    if (cfg.data.shifted_test) {
        const GenerativeSpec shifted = shifted_group_spec(spec, cfg.data.shift_factor);
        Rng shift_rng = root.substream(stream::kShift);
        GroupedDataset shifted_ds =
            generate(shifted, static_cast<int>(splits.test.size()), shift_rng);
        shifted_ds.split_tag = "test_shifted";
        save_csv(shifted_ds, paths.shifted.string());
    }
    write_json_file(paths.sidecar, sidecar_json(cfg, spec));
}

// -------------------------------------------------------------------------
// train
// -------------------------------------------------------------------------

void cmd_train(const ExperimentConfig& cfg, bool force, int jobs) {
    const fs::path out_dir = resolve_output_dir(cfg);
    const DatasetSplits splits = load_splits(data_paths(out_dir));
    const std::string cfg_hash = config_hash(cfg);

    std::optional<GroupedDataset> shifted;
    if (fs::exists(data_paths(out_dir).shifted)) {
        shifted = load_csv(data_paths(out_dir).shifted.string());
        shifted->split_tag = "test_shifted";
    }

    struct Planned {
        TrainMode mode;
        uint64_t seed;
        fs::path dir;
        std::optional<RunResult> result;
        std::string error;
    };
    std::vector<Planned> plan;
    for (TrainMode mode : cfg.modes) {
        for (uint64_t seed : cfg.seeds) {
            plan.push_back({mode, seed, out_dir / "runs" / run_dir_name(mode, seed), {}, {}});
        }
    }
    for (const Planned& p : plan) refuse_existing(p.dir, force);
    for (const Planned& p : plan) {
        if (fs::exists(p.dir)) fs::remove_all(p.dir);
    }
    if (fs::exists(out_dir / "aggregate.json")) {
        refuse_existing(out_dir / "aggregate.json", force);
        fs::remove(out_dir / "aggregate.json");
    }

    std::atomic<size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const size_t i = next.fetch_add(1);
            if (i >= plan.size()) return;
            TrainConfig tcfg = cfg.train;
            tcfg.mode = plan[i].mode;
            try {
                plan[i].result = train_run(tcfg, splits, plan[i].seed);
            } catch (const std::exception& e) {
                plan[i].error = e.what();
            }
        }
    };
    const size_t n_threads = std::min(static_cast<size_t>(std::max(jobs, 1)), plan.size());
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    for (const Planned& p : plan) {
        if (p.result) continue;
        // Leave the diagnostics where an operator will look for them.
        fs::create_directories(p.dir);
        nlohmann::json manifest;
        manifest["format"] = "groupinv-run";
        manifest["config_hash"] = cfg_hash;
        manifest["mode"] = mode_name(p.mode);
        manifest["seed"] = p.seed;
        manifest["status"] = "aborted";
        manifest["error"] = p.error;
        write_json_file(p.dir / "manifest.json", manifest);
        throw TrainError("run " + run_dir_name(p.mode, p.seed) + " failed: " + p.error);
    }

    for (const Planned& p : plan) {
        write_run_artifacts(p.dir, *p.result, cfg_hash, cfg.eval, splits.test,
                            shifted ? &*shifted : nullptr, cfg.eval.n_eval, cfg.eval.eval_seed);
    }

    nlohmann::json modes_json;
    for (TrainMode mode : cfg.modes) {
        std::vector<RunResult> runs;
        for (Planned& p : plan) {
            if (p.mode == mode) runs.push_back(std::move(*p.result));
        }
        const ExperimentResult agg = aggregate_runs(std::move(runs), cfg.top_m);
        nlohmann::json kept = nlohmann::json::array();
        for (size_t i : agg.kept) kept.push_back(agg.runs[i].seed);
        const auto stat = [](const MetricStat& s) {
            return nlohmann::json{{"mean", s.mean}, {"std", s.std_dev}};
        };
        modes_json[mode_name(mode)] = {{"auroc", stat(agg.auroc)},
                                       {"mcc_strong", stat(agg.mcc_strong)},
                                       {"mcc_weak", stat(agg.mcc_weak)},
                                       {"mcc_weak_style", stat(agg.mcc_weak_style)},
                                       {"delta", stat(agg.delta)},
                                       {"group_probe_acc", stat(agg.group_probe_acc)},
                                       {"kept_seeds", kept},
                                       {"degenerate_std", agg.degenerate_std}};
    }
    write_json_file(out_dir / "aggregate.json",
                    {{"config_hash", cfg_hash}, {"modes", modes_json}});
}

// -------------------------------------------------------------------------
// eval
// -------------------------------------------------------------------------

void cmd_eval(const ExperimentConfig& cfg, const std::string& run_dir, bool force) {
    const fs::path out_dir = resolve_output_dir(cfg);
    GroupedDataset test = load_csv(data_paths(out_dir).test.string());
    test.split_tag = "test";

    std::optional<GroupedDataset> shifted;
    if (fs::exists(data_paths(out_dir).shifted)) {
        shifted = load_csv(data_paths(out_dir).shifted.string());
        shifted->split_tag = "test_shifted";
    }

    std::vector<fs::path> dirs;
    if (run_dir.empty()) {
        dirs = discover_run_dirs(out_dir);
    } else {
        dirs.push_back(resolve_run_dir(out_dir, run_dir));
    }

    for (const fs::path& dir : dirs) {
        const nlohmann::json manifest = read_json_file(dir / "manifest.json");
        if (manifest.value("status", "") != "complete") {
            throw MissingArtifactError("run " + dir.string() + " is not complete");
        }
        const TrainMode mode = mode_from_name(manifest.at("mode").get<std::string>());
        const uint64_t seed = manifest.at("seed").get<uint64_t>();
        const Model model = load_checkpoint((dir / "checkpoint.json").string(),
                                            (dir / "checkpoint.bin").string());
        if (model.phi.spec.input_dim != test.dim()) {
            throw ConfigError("checkpoint expects " + std::to_string(model.phi.spec.input_dim) +
                              "-dim inputs but the dataset has " + std::to_string(test.dim()));
        }
        refuse_existing(dir / "metrics.json", force);
        refuse_existing(dir / "embeddings.csv", force);

        const MetricsReport report =
            evaluate_model(model, test, cfg.eval.n_eval, cfg.eval.eval_seed);
        nlohmann::json metrics = metrics_to_json(report, mode, seed, cfg.eval);
        if (shifted) {
            metrics["auroc_shifted"] =
                auroc_on(model, *shifted, cfg.eval.n_eval, cfg.eval.eval_seed);
        }
        write_json_file(dir / "metrics.json", metrics);
        const EmbeddingTable table =
            embed_eval_subset(model, test, cfg.eval.n_eval, cfg.eval.eval_seed);
        save_embeddings_csv((dir / "embeddings.csv").string(), table.z, table.labels,
                            table.groups);
    }
}

// -------------------------------------------------------------------------
// mcc
// -------------------------------------------------------------------------

void cmd_mcc(const ExperimentConfig& cfg, std::vector<std::string> run_dirs, bool force) {
    const fs::path out_dir = resolve_output_dir(cfg);
    std::vector<fs::path> dirs;
    if (run_dirs.empty()) {
        dirs = discover_run_dirs(out_dir);
    } else {
        for (const std::string& name : run_dirs) dirs.push_back(resolve_run_dir(out_dir, name));
    }
    if (dirs.size() < 2) {
        throw ConfigError("pairwise MCC needs at least 2 runs, got " +
                          std::to_string(dirs.size()));
    }

    std::vector<std::string> names;
    std::vector<EmbeddingTable> tables;
    for (const fs::path& dir : dirs) {
        names.push_back(dir.filename().string());
        tables.push_back(load_embeddings_csv((dir / "embeddings.csv").string()));
    }
    for (size_t i = 1; i < tables.size(); ++i) {
        if (tables[i].z.cols != tables[0].z.cols) {
            throw ConfigError("latent width mismatch: " + names[0] + " has N=" +
                              std::to_string(tables[0].z.cols) + " but " + names[i] +
                              " has N=" + std::to_string(tables[i].z.cols));
        }
        if (tables[i].z.rows != tables[0].z.rows || tables[i].labels != tables[0].labels ||
            tables[i].groups != tables[0].groups) {
            throw ConfigError("runs " + names[0] + " and " + names[i] +
                              " were evaluated on different sample sets; rerun `eval`");
        }
    }

    const fs::path json_path = out_dir / "mcc.json";
    const fs::path csv_path = out_dir / "mcc.csv";
    refuse_existing(json_path, force);
    refuse_existing(csv_path, force);

    const size_t n = tables.size();
    std::vector<std::vector<double>> strong(n, std::vector<double>(n, 1.0));
    std::vector<std::vector<double>> weak(n, std::vector<double>(n, 1.0));
    double strong_sum = 0.0, weak_sum = 0.0;
    size_t pairs = 0;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            const double s = mcc_strong(tables[i].z, tables[j].z);
            // Weak MCC is directional (fit j -> i); symmetrize by averaging.
            const double w =
                0.5 * (mcc_weak(tables[i].z, tables[j].z) + mcc_weak(tables[j].z, tables[i].z));
            strong[i][j] = strong[j][i] = s;
            weak[i][j] = weak[j][i] = w;
            strong_sum += s;
            weak_sum += w;
            ++pairs;
        }
    }

    nlohmann::json j;
    j["runs"] = names;
    j["n_eval"] = tables[0].z.rows;
    j["strong"] = strong;
    j["weak"] = weak;
    j["strong_mean"] = strong_sum / static_cast<double>(pairs);
    j["weak_mean"] = weak_sum / static_cast<double>(pairs);
    write_json_file(json_path, j);

    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) throw ContractError("cannot open " + csv_path.string() + " for writing");
    csv << "kind,run_a,run_b,value\n";
    for (size_t i = 0; i < n; ++i) {
        for (size_t jx = i + 1; jx < n; ++jx) {
            csv << "strong," << names[i] << "," << names[jx] << "," << fmt17(strong[i][jx])
                << "\n";
        }
    }
    for (size_t i = 0; i < n; ++i) {
        for (size_t jx = i + 1; jx < n; ++jx) {
            csv << "weak," << names[i] << "," << names[jx] << "," << fmt17(weak[i][jx]) << "\n";
        }
    }
    if (!csv) throw ContractError("failed writing " + csv_path.string());
}

// -------------------------------------------------------------------------
// report
// -------------------------------------------------------------------------

void cmd_report(const ExperimentConfig& cfg, std::vector<std::string> run_dirs, bool force) {
    const fs::path out_dir = resolve_output_dir(cfg);
    std::vector<fs::path> dirs;
    if (run_dirs.empty()) {
        dirs = discover_run_dirs(out_dir);
    } else {
        for (const std::string& name : run_dirs) dirs.push_back(resolve_run_dir(out_dir, name));
    }

    struct ModeRow {
        std::vector<double> auroc, delta;
    };
    std::map<std::string, ModeRow> by_mode;
    for (const fs::path& dir : dirs) {
        const nlohmann::json manifest = read_json_file(dir / "manifest.json");
        if (manifest.value("status", "") != "complete") continue;
        const nlohmann::json metrics = read_json_file(dir / "metrics.json");
        ModeRow& row = by_mode[manifest.at("mode").get<std::string>()];
        row.auroc.push_back(metrics.at("auroc").get<double>());
        row.delta.push_back(metrics.value("delta", 0.0));
    }
    if (by_mode.empty()) {
        throw MissingArtifactError("no completed runs among the given directories");
    }

    const fs::path md_path = out_dir / "report.md";
    const fs::path csv_path = out_dir / "report.csv";
    refuse_existing(md_path, force);
    refuse_existing(csv_path, force);

    const auto mean_std = [](const std::vector<double>& v) {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double sd = 0.0;
        if (v.size() > 1) {
            double ss = 0.0;
            for (double x : v) ss += (x - mean) * (x - mean);
            sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
        }
        return std::pair<double, double>(mean, sd);
    };
    const auto fmt4 = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f", v);
        return std::string(buf);
    };

    std::string md;
    md += "| mode | runs | AUROC (mean +- std) | delta (mean +- std) | note |\n";
    md += "|---|---|---|---|---|\n";
    std::string csv = "mode,n_runs,auroc_mean,auroc_std,delta_mean,delta_std,single_run\n";
    for (const auto& [mode, row] : by_mode) {
        const auto [am, as] = mean_std(row.auroc);
        const auto [dm, ds] = mean_std(row.delta);
        const bool single = row.auroc.size() == 1;
        md += "| " + mode + " | " + std::to_string(row.auroc.size()) + " | " + fmt4(am) +
              " +- " + fmt4(as) + " | " + fmt4(dm) + " +- " + fmt4(ds) + " | " +
              (single ? "single run; std is 0 by convention" : "") + " |\n";
        csv += mode + "," + std::to_string(row.auroc.size()) + "," + fmt17(am) + "," + fmt17(as) +
               "," + fmt17(dm) + "," + fmt17(ds) + "," + (single ? "1" : "0") + "\n";
    }
    write_text_file(md_path.string(), md);
    write_text_file(csv_path.string(), csv);
}

// -------------------------------------------------------------------------
// plot
// -------------------------------------------------------------------------

void cmd_plot(const ExperimentConfig& cfg, const std::string& run_dir,
              const std::string& attribute, bool force) {
    if (run_dir.empty()) throw ConfigError("plot needs --run <run_dir>");
    std::vector<std::string> attributes;
    if (attribute == "class" || attribute == "group") {
        attributes.push_back(attribute);
    } else if (attribute == "both") {
        attributes = {"class", "group"};
    } else {
        throw ConfigError("plot attribute must be class, group, or both");
    }

    const fs::path dir = resolve_run_dir(resolve_output_dir(cfg), run_dir);
    const EmbeddingTable table = load_embeddings_csv((dir / "embeddings.csv").string());
    const Pc1 pc1 = pca_pc1(table.z);

    double lo = pc1.projections[0], hi = pc1.projections[0];
    for (double p : pc1.projections) {
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    if (hi <= lo) throw MetricError("PC1 projections are constant; nothing to plot");
    std::vector<double> scaled(pc1.projections.size());
    for (size_t i = 0; i < scaled.size(); ++i) {
        scaled[i] = (pc1.projections[i] - lo) / (hi - lo);
    }

    for (const std::string& attr : attributes) {
        const std::vector<int>& tags = attr == "class" ? table.labels : table.groups;
        std::vector<int> cats = tags;
        std::sort(cats.begin(), cats.end());
        cats.erase(std::unique(cats.begin(), cats.end()), cats.end());

        std::vector<std::vector<double>> groups_values(cats.size());
        for (size_t i = 0; i < tags.size(); ++i) {
            const size_t c = static_cast<size_t>(
                std::lower_bound(cats.begin(), cats.end(), tags[i]) - cats.begin());
            groups_values[c].push_back(scaled[i]);
        }

        double h_max = 0.0;
        std::vector<double> bandwidths(cats.size());
        for (size_t c = 0; c < cats.size(); ++c) {
            if (groups_values[c].size() < 2) {
                throw MetricError(attr + " " + std::to_string(cats[c]) +
                                  " has fewer than 2 samples; cannot estimate a density");
            }
            bandwidths[c] = silverman_bandwidth(groups_values[c]);
            h_max = std::max(h_max, bandwidths[c]);
        }

        std::vector<PlotCurve> curves;
        nlohmann::json curve_meta = nlohmann::json::array();
        for (size_t c = 0; c < cats.size(); ++c) {
            PlotCurve pc;
            pc.label = attr + " " + std::to_string(cats[c]);
            pc.samples = static_cast<int>(groups_values[c].size());
            pc.curve = kde_on_span(groups_values[c], bandwidths[c], 0.0 - 3.0 * h_max,
                                   1.0 + 3.0 * h_max);
            curves.push_back(std::move(pc));
            curve_meta.push_back({{"label", attr + " " + std::to_string(cats[c])},
                                  {"n", groups_values[c].size()},
                                  {"bandwidth", bandwidths[c]}});
        }

        const fs::path svg_path = dir / ("plot_" + attr + ".svg");
        const fs::path meta_path = dir / ("plot_" + attr + ".json");
        refuse_existing(svg_path, force);
        refuse_existing(meta_path, force);

        write_text_file(svg_path.string(),
                        render_density_svg("PC1 density by " + attr, "scaled PC1", curves));
        nlohmann::json meta;
        meta["attribute"] = attr;
        meta["scale_min"] = lo;
        meta["scale_max"] = hi;
        meta["explained_variance"] = pc1.explained_variance;
        meta["curves"] = curve_meta;
        meta["max_l1_gap"] = max_l1_gap(curves);
        write_json_file(meta_path, meta);
    }
}

}  // namespace groupinv
