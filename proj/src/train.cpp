#include "groupinv/train.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "groupinv/adam.hpp"
#include "groupinv/errors.hpp"
#include "groupinv/sampler.hpp"

namespace groupinv {

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (lr_phi <= 0.0 || lr_psi <= 0.0) throw ConfigError("learning rates must be positive");
    if (P < 2) throw ConfigError("P must be >= 2");
    if (uniformity_weight < 0.0) throw ConfigError("uniformity_weight must be nonnegative");
    if (temperature <= 0.0) throw ConfigError("temperature must be positive");
    if (latent_dim < 1) throw ConfigError("latent_dim must be >= 1");
    for (int h : hidden) {
        if (h < 1) throw ConfigError("hidden layer widths must be >= 1");
    }
    if (n_eval < 1) throw ConfigError("n_eval must be >= 1");
}

double RunResult::best_val_auroc() const {
    for (const EpochRecord& rec : history) {
        if (rec.epoch == best_epoch) return rec.val_auroc;
    }
    throw ContractError("run history does not contain the selected epoch");
}

namespace {

struct StepBatch {
    Matrix x;
    std::vector<int> labels;
    std::vector<int> groups;
    std::vector<std::pair<int, int>> chain_pairs;
    int rounds = 1;
};

/// Concatenates ceil(batch_size / P) grouped sampling rounds into one batch;
/// chain pairs are re-based onto batch rows.
StepBatch assemble_grouped_batch(const GroupedDataset& train, const GroupCells& cells,
                                 const SamplerConfig& scfg, int batch_size, Rng& rng) {
    const int iterations = (batch_size + scfg.P - 1) / scfg.P;
    std::vector<int> indices;
    StepBatch batch;
    batch.rounds = iterations;
    indices.reserve(static_cast<size_t>(iterations * scfg.P));
    for (int it = 0; it < iterations; ++it) {
        const SamplingIteration round = draw_iteration(scfg, cells, rng);
        const int base = static_cast<int>(indices.size());
        for (const auto& [idx, group] : round.samples) {
            indices.push_back(idx);
            batch.labels.push_back(round.y);
            batch.groups.push_back(group);
        }
        for (const auto& [a, r] : round.chain_pairs) {
            batch.chain_pairs.emplace_back(base + a, base + r);
        }
    }
    batch.x = train.gather_x(indices);
    return batch;
}

struct ValScores {
    double bce = 0.0;
    double auroc_value = 0.0;
};

ValScores validate_epoch(const Model& model, const GroupedDataset& val) {
    std::vector<int> all(val.size());
    std::iota(all.begin(), all.end(), 0);
    const Matrix logits = model.psi.logit(model.phi.forward(val.gather_x(all)));
    const std::vector<int> y = val.gather_y(all);
    std::vector<double> scores(static_cast<size_t>(logits.rows));
    for (int i = 0; i < logits.rows; ++i) scores[static_cast<size_t>(i)] = logits.at(i, 0);
    ValScores out;
    out.bce = bce_value(y, scores);
    out.auroc_value = auroc(scores, y);
    return out;
}

void require_exact_zero(const Matrix& g, const char* loss, const char* group) {
    for (double v : g.data) {
        if (v != 0.0) {
            throw TrainError(std::string("gradient routing violated: ") + loss +
                             " reached the " + group + " parameters");
        }
    }
}

}  // namespace

RunResult train_run(const TrainConfig& cfg, const DatasetSplits& splits, uint64_t seed) {
    cfg.validate();
    splits.train.validate();
    splits.val.validate();
    splits.test.validate();
    if (splits.train.dim() != splits.val.dim() || splits.train.dim() != splits.test.dim()) {
        throw ContractError("split dimensionality mismatch");
    }

    Rng run_rng(seed);
    Rng init_rng = run_rng.substream(stream::kInit);
    Rng sampler_rng = run_rng.substream(stream::kSampler);

    ModelSpec mspec;
    mspec.input_dim = splits.train.dim();
    mspec.hidden = cfg.hidden;
    mspec.latent_dim = cfg.latent_dim;
    Model model = init_model(mspec, init_rng);

    const int n_train = static_cast<int>(splits.train.size());
    if (cfg.batch_size > n_train) {
        throw ConfigError("batch_size " + std::to_string(cfg.batch_size) +
                          " exceeds training set size " + std::to_string(n_train));
    }
    const int steps_per_epoch = (n_train + cfg.batch_size - 1) / cfg.batch_size;

    GroupCells cells;
    SamplerConfig scfg;
    scfg.P = cfg.P;
    IidSampler iid(n_train, cfg.batch_size, sampler_rng);
    if (cfg.mode == TrainMode::kInvariant) {
        cells = partition_groups(splits.train);
        if (!cells.empty_cells.empty()) {
            std::string names;
            for (const std::string& c : cells.empty_cells) names += " " + c;
            throw SamplingError("invariant training needs every (group, class) cell populated;"
                                " empty:" + names);
        }
    }

    const std::vector<Matrix*> phi_params = model.phi.params();
    const std::vector<Matrix*> psi_params = model.psi.params();
    AdamState phi_state = AdamState::like(phi_params);
    AdamState psi_state = AdamState::like(psi_params);
    AdamConfig phi_adam;
    phi_adam.lr = cfg.lr_phi;
    AdamConfig psi_adam;
    psi_adam.lr = cfg.lr_psi;

    LossConfig lcfg;
    lcfg.uniformity_weight = cfg.uniformity_weight;
    lcfg.temperature = cfg.temperature;
    lcfg.pairing = cfg.pairing;
    lcfg.routed = true;

    RunResult result;
    result.seed = seed;
    result.mode = cfg.mode;

    double best_score = 0.0;
    bool have_best = false;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        LossBreakdown epoch_mean;
        for (int step = 0; step < steps_per_epoch; ++step) {
            try {
                Tape tape;
                LossBreakdown bd;
                if (cfg.mode == TrainMode::kInvariant) {
                    StepBatch batch = assemble_grouped_batch(splits.train, cells, scfg,
                                                             cfg.batch_size, sampler_rng);
                    LossNodes nodes = total_loss(tape, model, batch.x, batch.groups,
                                                 batch.labels, batch.chain_pairs, lcfg,
                                                 batch.rounds);
                    tape.backward(nodes.total);
                    bd = read_breakdown(tape, nodes);
                    std::vector<Matrix> phi_grads, psi_grads;
                    phi_grads.reserve(phi_params.size());
                    psi_grads.reserve(psi_params.size());
                    // Parameter leaves appear on the tape in params() order:
                    // extractor tensors first, then the head's weight and bias.
                    std::vector<TapeValue> param_nodes = tape.parameter_nodes();
                    if (param_nodes.size() != phi_params.size() + psi_params.size()) {
                        throw ContractError("unexpected parameter leaf count on tape");
                    }
                    for (size_t i = 0; i < phi_params.size(); ++i) {
                        phi_grads.push_back(tape.gradient(param_nodes[i]));
                    }
                    for (size_t i = 0; i < psi_params.size(); ++i) {
                        psi_grads.push_back(tape.gradient(param_nodes[phi_params.size() + i]));
                    }

                    if (cfg.assert_routing) {
                        tape.zero_grads();
                        tape.backward(nodes.bce);
                        for (size_t i = 0; i < phi_params.size(); ++i) {
                            require_exact_zero(tape.gradient(param_nodes[i]), "classification loss",
                                               "extractor");
                        }
                        tape.zero_grads();
                        tape.backward(nodes.invariance);
                        for (size_t i = 0; i < psi_params.size(); ++i) {
                            require_exact_zero(tape.gradient(param_nodes[phi_params.size() + i]),
                                               "invariance loss", "head");
                        }
                    }

                    adam_step(phi_params, phi_grads, phi_state, phi_adam);
                    adam_step(psi_params, psi_grads, psi_state, psi_adam);
                } else {
                    const std::vector<int> idx = iid.next_batch();
                    const Matrix x = splits.train.gather_x(idx);
                    const std::vector<int> y = splits.train.gather_y(idx);
                    TapeValue z = model.phi.forward(tape, tape.constant(x));
                    TapeValue bce = bce_with_logits(tape, model.psi.logit(tape, z), y);
                    tape.backward(bce);

                    std::vector<TapeValue> param_nodes = tape.parameter_nodes();
                    std::vector<Matrix> phi_grads, psi_grads;
                    for (size_t i = 0; i < phi_params.size(); ++i) {
                        phi_grads.push_back(tape.gradient(param_nodes[i]));
                    }
                    for (size_t i = 0; i < psi_params.size(); ++i) {
                        psi_grads.push_back(tape.gradient(param_nodes[phi_params.size() + i]));
                    }
                    adam_step(phi_params, phi_grads, phi_state, phi_adam);
                    adam_step(psi_params, psi_grads, psi_state, psi_adam);

                    bd.bce = tape.value(bce).at(0, 0);
                    bd.total = bd.bce;
                }
                epoch_mean.similarity += bd.similarity;
                epoch_mean.uniformity += bd.uniformity;
                epoch_mean.bce += bd.bce;
                epoch_mean.total += bd.total;
            } catch (const NumericError& e) {
                throw TrainError("numerical abort at epoch " + std::to_string(epoch) + ", step " +
                                 std::to_string(step + 1) + ": " + e.what());
            }
        }
        const double inv_steps = 1.0 / static_cast<double>(steps_per_epoch);
        epoch_mean.similarity *= inv_steps;
        epoch_mean.uniformity *= inv_steps;
        epoch_mean.bce *= inv_steps;
        epoch_mean.total *= inv_steps;

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = epoch_mean;
        try {
            const ValScores val = validate_epoch(model, splits.val);
            rec.val_bce = val.bce;
            rec.val_auroc = val.auroc_value;
        } catch (const NumericError& e) {
            throw TrainError("numerical abort during validation after epoch " +
                             std::to_string(epoch) + ": " + e.what());
        }
        result.history.push_back(rec);

        const double score =
            cfg.selection == SelectionRule::kMinValBce ? -rec.val_bce : rec.val_auroc;
        if (!have_best || score > best_score) {
            best_score = score;
            have_best = true;
            result.best_epoch = epoch;
            result.best_checkpoint = model;
        }
    }

    result.test_metrics =
        evaluate_model(result.best_checkpoint, splits.test, cfg.n_eval, cfg.eval_seed);
    return result;
}

namespace {

MetricStat stat_of(const std::vector<double>& values) {
    MetricStat st;
    if (values.empty()) return st;
    for (double v : values) st.mean += v;
    st.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - st.mean) * (v - st.mean);
        st.std_dev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return st;
}

}  // namespace

ExperimentResult aggregate_runs(std::vector<RunResult> runs, int top_m) {
    if (runs.empty()) throw ContractError("cannot aggregate zero runs");
    ExperimentResult result;
    result.runs = std::move(runs);

    // Rank by the selected checkpoint's validation AUROC and keep the top m.
    std::vector<size_t> order(result.runs.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return result.runs[a].best_val_auroc() > result.runs[b].best_val_auroc();
    });
    size_t keep = result.runs.size();
    if (top_m > 0 && static_cast<size_t>(top_m) < keep) keep = static_cast<size_t>(top_m);
    result.kept.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep));
    std::sort(result.kept.begin(), result.kept.end());

    std::vector<double> v_auroc, v_ms, v_mw, v_mws, v_delta, v_probe;
    for (size_t i : result.kept) {
        const MetricsReport& m = result.runs[i].test_metrics;
        v_auroc.push_back(m.auroc);
        v_ms.push_back(m.mcc_strong);
        v_mw.push_back(m.mcc_weak);
        v_mws.push_back(m.mcc_weak_style);
        v_delta.push_back(m.delta);
        v_probe.push_back(m.group_probe_acc);
    }
    result.auroc = stat_of(v_auroc);
    result.mcc_strong = stat_of(v_ms);
    result.mcc_weak = stat_of(v_mw);
    result.mcc_weak_style = stat_of(v_mws);
    result.delta = stat_of(v_delta);
    result.group_probe_acc = stat_of(v_probe);
    result.degenerate_std = result.kept.size() == 1;
    return result;
}

ExperimentResult run_experiment(const TrainConfig& cfg, const DatasetSplits& splits,
                                const std::vector<uint64_t>& seeds, int top_m, int jobs) {
    if (seeds.empty()) throw ConfigError("run_experiment needs at least one seed");
    if (jobs < 1) jobs = 1;

    std::vector<RunResult> runs(seeds.size());
    std::vector<std::exception_ptr> errors(seeds.size());

    std::atomic<size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const size_t i = next.fetch_add(1);
            if (i >= seeds.size()) return;
            try {
                runs[i] = train_run(cfg, splits, seeds[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const size_t n_threads = std::min(static_cast<size_t>(jobs), seeds.size());
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    for (const std::exception_ptr& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return aggregate_runs(std::move(runs), top_m);
}

}  // namespace groupinv
