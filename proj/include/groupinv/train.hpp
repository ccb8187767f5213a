#pragma once

#include <cstdint>
#include <vector>

#include "groupinv/dataset.hpp"
#include "groupinv/losses.hpp"
#include "groupinv/metrics.hpp"
#include "groupinv/model.hpp"

namespace groupinv {

enum class TrainMode { kInvariant, kBaseline };

/// Which per-epoch validation number picks the checkpoint kept for testing.
enum class SelectionRule { kMinValBce, kMaxValAuroc };

struct TrainConfig {
    TrainMode mode = TrainMode::kInvariant;
    int epochs = 20;
    int batch_size = 32;
    double lr_phi = 0.001;   // extractor learning rate
    double lr_psi = 0.0001;  // head learning rate
    int P = 2;               // samples per grouped iteration
    double uniformity_weight = 1.0;
    double temperature = 2.0;
    Pairing pairing = Pairing::kChain;
    SelectionRule selection = SelectionRule::kMinValBce;
    std::vector<int> hidden = {64, 64};
    int latent_dim = 8;
    /// In invariant mode, assert every step that the classification loss puts
    /// zero gradient on the extractor and the invariance loss zero gradient
    /// on the head.
    bool assert_routing = true;
    int n_eval = 1000;
    uint64_t eval_seed = 2024;  // shared across runs so MCC compares like with like

    void validate() const;
};

struct EpochRecord {
    int epoch = 0;  // 1-based
    LossBreakdown train_loss;  // per-step mean
    double val_bce = 0.0;
    double val_auroc = 0.0;
};

struct RunResult {
    uint64_t seed = 0;
    TrainMode mode = TrainMode::kInvariant;
    Model best_checkpoint;
    int best_epoch = 0;  // 1-based epoch the selection rule picked
    std::vector<EpochRecord> history;
    MetricsReport test_metrics;

    double best_val_auroc() const;
};

/// One full training run: deterministic given (cfg, splits, seed).
RunResult train_run(const TrainConfig& cfg, const DatasetSplits& splits, uint64_t seed);

struct MetricStat {
    double mean = 0.0;
    double std_dev = 0.0;  // sample standard deviation over kept runs
};

struct ExperimentResult {
    std::vector<RunResult> runs;   // one per seed, in seed order
    std::vector<size_t> kept;      // indices aggregated (top-m by val AUROC)
    MetricStat auroc, mcc_strong, mcc_weak, mcc_weak_style, delta, group_probe_acc;
    bool degenerate_std = false;   // single kept run: std is 0 by convention
};

/// Keeps the top_m runs by the selected checkpoint's validation AUROC
/// (0 keeps all) and aggregates their test metrics as mean +- sample std.
ExperimentResult aggregate_runs(std::vector<RunResult> runs, int top_m = 0);

/// Trains every seed (up to `jobs` in parallel; results are independent of
/// the schedule) and aggregates via aggregate_runs.
ExperimentResult run_experiment(const TrainConfig& cfg, const DatasetSplits& splits,
                                const std::vector<uint64_t>& seeds, int top_m = 0, int jobs = 1);

}  // namespace groupinv
