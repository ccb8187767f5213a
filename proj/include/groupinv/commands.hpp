#pragma once

#include <string>
#include <vector>

#include "groupinv/experiment.hpp"

namespace groupinv {

// Subcommand drivers for the CLI binary. Each either finishes its work and
// returns, or throws; main() maps exception types onto the stable exit codes
// (0 ok, 2 config, 3 numerical abort, 4 missing artifact).
//
// All artifact writers refuse to overwrite existing outputs unless force is
// set, and given force they are idempotent: reruns with identical inputs
// produce byte-identical files (nothing emitted depends on wall time).

/// Generates the synthetic corpus: train/val/test CSVs plus a JSON sidecar
/// describing the generative process (and optionally a shifted-group test
/// set for out-of-distribution evaluation).
void cmd_gen_data(const ExperimentConfig& cfg, bool force);

/// Trains every configured (mode, seed) pair and writes per-run artifacts
/// (manifest, checkpoint, history, metrics, embeddings) plus per-mode
/// aggregates. A numerical abort records its diagnostics in the failing
/// run's manifest before the error propagates.
void cmd_train(const ExperimentConfig& cfg, bool force, int jobs);

/// Re-evaluates finished runs from their checkpoints, rewriting metrics and
/// embeddings. run_dir empty means every run under the output directory.
void cmd_eval(const ExperimentConfig& cfg, const std::string& run_dir, bool force);

/// Pairwise strong/weak MCC between the runs' embeddings (which share an
/// evaluation subset); writes a matrix as CSV + JSON with means.
void cmd_mcc(const ExperimentConfig& cfg, std::vector<std::string> run_dirs, bool force);

/// Aggregates per-run metrics into a per-mode mean +- std table (Markdown
/// and CSV).
void cmd_report(const ExperimentConfig& cfg, std::vector<std::string> run_dirs, bool force);

/// KDE plots of min-max-scaled PC1 projections, split by class and/or group;
/// emits one SVG per attribute plus a sidecar JSON with the scaling
/// constants and the max pairwise L1 gap between curves.
void cmd_plot(const ExperimentConfig& cfg, const std::string& run_dir,
              const std::string& attribute, bool force);

}  // namespace groupinv
