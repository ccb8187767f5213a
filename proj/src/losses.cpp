#include "groupinv/losses.hpp"

#include <string>

#include "groupinv/errors.hpp"

namespace groupinv {

void LatentBatch::validate(const Tape& tape) const {
    const Matrix& zv = tape.value(z);
    const size_t b = static_cast<size_t>(zv.rows);
    if (group_ids.size() != b || labels.size() != b) {
        throw ContractError("latent batch metadata length mismatch: z has " +
                            std::to_string(b) + " rows, " + std::to_string(group_ids.size()) +
                            " group ids, " + std::to_string(labels.size()) + " labels");
    }
    for (int y : labels) {
        if (y != 0 && y != 1) {
            throw ContractError("labels must be 0/1, got " + std::to_string(y));
        }
    }
    for (const auto& [a, r] : chain_pairs) {
        if (a < 0 || a >= zv.rows || r < 0 || r >= zv.rows) {
            throw ContractError("chain pair (" + std::to_string(a) + ", " + std::to_string(r) +
                                ") out of range for batch of " + std::to_string(zv.rows));
        }
    }
    if (rounds < 1) {
        throw ContractError("a latent batch holds at least one sampling round, got " +
                            std::to_string(rounds));
    }
}

namespace {

/// Signed pair-difference matrix: row p of (A z) equals z[a_p] - z[b_p].
/// A self-pair leaves its row zero, contributing nothing.
Matrix pair_difference_matrix(const std::vector<std::pair<int, int>>& pairs, int batch_rows) {
    Matrix a = Matrix::zeros(static_cast<int>(pairs.size()), batch_rows);
    for (size_t p = 0; p < pairs.size(); ++p) {
        const int i = static_cast<int>(p);
        a.at(i, pairs[p].first) += 1.0;
        a.at(i, pairs[p].second) -= 1.0;
    }
    return a;
}

std::vector<std::pair<int, int>> cross_group_pairs(const std::vector<int>& group_ids) {
    std::vector<std::pair<int, int>> pairs;
    const int b = static_cast<int>(group_ids.size());
    for (int i = 0; i < b; ++i) {
        for (int j = i + 1; j < b; ++j) {
            if (group_ids[static_cast<size_t>(i)] != group_ids[static_cast<size_t>(j)]) {
                pairs.emplace_back(i, j);
            }
        }
    }
    return pairs;
}

}  // namespace

TapeValue similarity_loss(Tape& tape, const LatentBatch& batch, Pairing pairing) {
    batch.validate(tape);
    const Matrix& zv = tape.value(batch.z);
    if (zv.rows < 2) {
        throw ContractError("similarity loss needs a batch of >= 2, got " +
                            std::to_string(zv.rows));
    }

    std::vector<std::pair<int, int>> pairs;
    bool take_mean = false;
    if (pairing == Pairing::kChain) {
        pairs = batch.chain_pairs;
        if (pairs.empty()) {
            throw ContractError("chain pairing requested but the batch carries no chain pairs");
        }
    } else {
        pairs = cross_group_pairs(batch.group_ids);
        take_mean = true;
        if (pairs.empty()) {
            // Single-group batch: no cross-group constraint applies.
            return tape.constant(Matrix::scalar(0.0));
        }
    }

    TapeValue diffs = tape.matmul(tape.constant(pair_difference_matrix(pairs, zv.rows)), batch.z);
    TapeValue sq = tape.sum(tape.hadamard(diffs, diffs));
    if (take_mean) return tape.scale(sq, 1.0 / static_cast<double>(pairs.size()));
    // Chain mode: sum within each round, mean across the concatenated rounds.
    return batch.rounds > 1 ? tape.scale(sq, 1.0 / static_cast<double>(batch.rounds)) : sq;
}

TapeValue uniformity_loss(Tape& tape, const LatentBatch& batch, double t) {
    batch.validate(tape);
    const Matrix& zv = tape.value(batch.z);
    const int b = zv.rows;
    if (b < 2) {
        throw ContractError("uniformity loss needs a batch of >= 2, got " + std::to_string(b));
    }
    if (t <= 0.0) throw ContractError("kernel temperature must be positive");

    // log of the off-diagonal mean of exp(-t * ||z_i - z_j||^2).
    Matrix mask = Matrix::full(b, b, 1.0);
    for (int i = 0; i < b; ++i) mask.at(i, i) = 0.0;
    TapeValue kernel = tape.exp(tape.scale(tape.pairwise_sqdist(batch.z), -t));
    TapeValue off_diag = tape.hadamard(kernel, tape.constant(mask));
    TapeValue mean_pair = tape.scale(tape.sum(off_diag), 1.0 / static_cast<double>(b) /
                                                             static_cast<double>(b - 1));
    return tape.log(mean_pair);
}

TapeValue bce_with_logits(Tape& tape, TapeValue logits, const std::vector<int>& labels) {
    const Matrix& lv = tape.value(logits);
    if (lv.cols != 1) {
        throw ShapeError("logits must be a column, got " + lv.shape_str());
    }
    if (static_cast<size_t>(lv.rows) != labels.size()) {
        throw ContractError("got " + std::to_string(lv.rows) + " logits for " +
                            std::to_string(labels.size()) + " labels");
    }
    // softplus(-(2y-1) * logit) == -log sigma(logit) for y=1, -log(1-sigma) for y=0.
    Matrix sign(lv.rows, 1);
    for (int i = 0; i < lv.rows; ++i) {
        const int y = labels[static_cast<size_t>(i)];
        if (y != 0 && y != 1) {
            throw ContractError("labels must be 0/1, got " + std::to_string(y));
        }
        sign.at(i, 0) = 1.0 - 2.0 * static_cast<double>(y);
    }
    return tape.mean(tape.softplus(tape.hadamard(logits, tape.constant(sign))));
}

LossNodes total_loss(Tape& tape, const Model& model, const Matrix& x,
                     const std::vector<int>& group_ids, const std::vector<int>& labels,
                     const std::vector<std::pair<int, int>>& chain_pairs,
                     const LossConfig& cfg, int rounds) {
    if (cfg.uniformity_weight < 0.0) {
        throw ConfigError("uniformity_weight must be nonnegative");
    }
    LatentBatch batch;
    batch.z = model.phi.forward(tape, tape.constant(x));
    batch.group_ids = group_ids;
    batch.labels = labels;
    batch.chain_pairs = chain_pairs;
    batch.rounds = rounds;

    LossNodes nodes;
    nodes.similarity = similarity_loss(tape, batch, cfg.pairing);
    nodes.uniformity = uniformity_loss(tape, batch, cfg.temperature);
    nodes.invariance =
        tape.add(nodes.similarity, tape.scale(nodes.uniformity, cfg.uniformity_weight));

    TapeValue head_input = cfg.routed ? tape.detach(batch.z) : batch.z;
    nodes.bce = bce_with_logits(tape, model.psi.logit(tape, head_input), labels);
    nodes.total = tape.add(nodes.invariance, nodes.bce);
    return nodes;
}

LossBreakdown read_breakdown(const Tape& tape, const LossNodes& nodes) {
    LossBreakdown out;
    out.similarity = tape.value(nodes.similarity).at(0, 0);
    out.uniformity = tape.value(nodes.uniformity).at(0, 0);
    out.bce = tape.value(nodes.bce).at(0, 0);
    out.total = tape.value(nodes.total).at(0, 0);
    return out;
}

double similarity_value(const Matrix& z, const std::vector<int>& group_ids, Pairing pairing,
                        const std::vector<std::pair<int, int>>& chain_pairs) {
    Tape tape;
    LatentBatch batch;
    batch.z = tape.constant(z);
    batch.group_ids = group_ids;
    batch.labels.assign(group_ids.size(), 0);
    batch.chain_pairs = chain_pairs;
    return tape.value(similarity_loss(tape, batch, pairing)).at(0, 0);
}

double uniformity_value(const Matrix& z, double t) {
    Tape tape;
    LatentBatch batch;
    batch.z = tape.constant(z);
    batch.group_ids.assign(static_cast<size_t>(z.rows), 0);
    batch.labels.assign(static_cast<size_t>(z.rows), 0);
    return tape.value(uniformity_loss(tape, batch, t)).at(0, 0);
}

double bce_value(const std::vector<int>& labels, const std::vector<double>& logits) {
    if (labels.size() != logits.size()) {
        throw ContractError("got " + std::to_string(logits.size()) + " logits for " +
                            std::to_string(labels.size()) + " labels");
    }
    Tape tape;
    Matrix col(static_cast<int>(logits.size()), 1);
    col.data = logits;
    return tape.value(bce_with_logits(tape, tape.constant(col), labels)).at(0, 0);
}

}  // namespace groupinv
