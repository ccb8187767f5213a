#pragma once

#include <utility>
#include <vector>

#include "groupinv/matrix.hpp"
#include "groupinv/model.hpp"
#include "groupinv/tape.hpp"

namespace groupinv {

/// How the similarity term pairs representations.
///  - kChain: sum of squared distances along the sampler's reference chain
///    (the training default).
///  - kAllPairs: mean of squared distances over all cross-group pairs i<j
///    (ablation variant).
enum class Pairing { kChain, kAllPairs };

/// A batch of representations plus the metadata the losses need.
/// chain_pairs lists (row, reference_row) pairs; a self-pair is legal and
/// contributes zero similarity. `rounds` counts how many sampling rounds were
/// concatenated into the batch: the chain similarity sums within a round and
/// averages across rounds, so its scale is independent of the batch size
/// (mirroring the mean reduction of the classification loss).
struct LatentBatch {
    TapeValue z;  // B x N on the tape
    std::vector<int> group_ids;
    std::vector<int> labels;
    std::vector<std::pair<int, int>> chain_pairs;
    int rounds = 1;

    void validate(const Tape& tape) const;
};

struct LossConfig {
    double uniformity_weight = 1.0;
    double temperature = 2.0;
    Pairing pairing = Pairing::kChain;
    /// When true, the classifier head sees a detached copy of z, so the
    /// classification loss cannot move the extractor and the invariance loss
    /// cannot move the head. Disable only for gradient checking.
    bool routed = true;
};

/// Tape handles for every term of the objective; values are read off the
/// tape after the forward pass.
struct LossNodes {
    TapeValue similarity;
    TapeValue uniformity;
    TapeValue bce;
    TapeValue invariance;  // similarity + uniformity_weight * uniformity
    TapeValue total;       // invariance + bce
};

/// Scalar view of a LossNodes; total = similarity + w * uniformity + bce
/// holds bitwise because it is read off the same tape nodes.
struct LossBreakdown {
    double similarity = 0.0;
    double uniformity = 0.0;
    double bce = 0.0;
    double total = 0.0;
};

TapeValue similarity_loss(Tape& tape, const LatentBatch& batch, Pairing pairing);
TapeValue uniformity_loss(Tape& tape, const LatentBatch& batch, double t);
/// Mean over the batch of log(1 + exp(-(2y-1) * logit)), overflow-safe.
TapeValue bce_with_logits(Tape& tape, TapeValue logits, const std::vector<int>& labels);

/// Full objective: runs the extractor and head forward on the tape and wires
/// up similarity + uniformity + BCE with the configured gradient routing.
LossNodes total_loss(Tape& tape, const Model& model, const Matrix& x,
                     const std::vector<int>& group_ids, const std::vector<int>& labels,
                     const std::vector<std::pair<int, int>>& chain_pairs,
                     const LossConfig& cfg, int rounds = 1);

LossBreakdown read_breakdown(const Tape& tape, const LossNodes& nodes);

// Plain-value entry points (build a scratch tape internally); used by tests,
// evaluation, and the bindings.
double similarity_value(const Matrix& z, const std::vector<int>& group_ids, Pairing pairing,
                        const std::vector<std::pair<int, int>>& chain_pairs = {});
double uniformity_value(const Matrix& z, double t);
double bce_value(const std::vector<int>& labels, const std::vector<double>& logits);

}  // namespace groupinv
