#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "groupinv/dataset.hpp"
#include "groupinv/errors.hpp"
#include "groupinv/generator.hpp"
#include "groupinv/losses.hpp"
#include "groupinv/metrics.hpp"
#include "groupinv/train.hpp"

namespace py = pybind11;
using namespace groupinv;

namespace {

Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw ContractError("matrix input must be nonempty");
    const int c = static_cast<int>(rows[0].size());
    Matrix m(static_cast<int>(rows.size()), c);
    for (size_t i = 0; i < rows.size(); ++i) {
        if (static_cast<int>(rows[i].size()) != c) {
            throw ContractError("ragged matrix input at row " + std::to_string(i));
        }
        for (int j = 0; j < c; ++j) m.at(static_cast<int>(i), j) = rows[i][static_cast<size_t>(j)];
    }
    return m;
}

std::vector<std::vector<double>> from_matrix(const Matrix& m) {
    std::vector<std::vector<double>> rows(static_cast<size_t>(m.rows));
    for (int i = 0; i < m.rows; ++i) {
        rows[static_cast<size_t>(i)].assign(m.data.begin() + static_cast<size_t>(i) * m.cols,
                                            m.data.begin() + (static_cast<size_t>(i) + 1) * m.cols);
    }
    return rows;
}

Pairing pairing_from(const std::string& name) {
    if (name == "chain") return Pairing::kChain;
    if (name == "all_pairs") return Pairing::kAllPairs;
    throw ConfigError("pairing must be 'chain' or 'all_pairs'");
}

py::dict dataset_to_dict(const GroupedDataset& ds) {
    std::vector<std::vector<double>> x, content, style;
    std::vector<int> y, group;
    for (const Sample& s : ds.samples) {
        x.push_back(s.x);
        y.push_back(s.y);
        group.push_back(s.group);
        content.push_back(s.gt_content);
        style.push_back(s.gt_style);
    }
    py::dict d;
    d["x"] = x;
    d["y"] = y;
    d["group"] = group;
    d["content"] = content;
    d["style"] = style;
    d["groups"] = ds.group_count;
    return d;
}

GroupedDataset dataset_from_parts(const std::vector<std::vector<double>>& x,
                                  const std::vector<int>& y, const std::vector<int>& group,
                                  int groups, const std::vector<std::vector<double>>& content,
                                  const std::vector<std::vector<double>>& style) {
    if (x.size() != y.size() || x.size() != group.size()) {
        throw ContractError("x, y and group must have equal lengths");
    }
    if (!content.empty() && content.size() != x.size()) {
        throw ContractError("content must be empty or match x in length");
    }
    if (!style.empty() && style.size() != x.size()) {
        throw ContractError("style must be empty or match x in length");
    }
    GroupedDataset ds;
    ds.group_count = groups;
    for (size_t i = 0; i < x.size(); ++i) {
        Sample s;
        s.x = x[i];
        s.y = y[i];
        s.group = group[i];
        if (!content.empty()) s.gt_content = content[i];
        if (!style.empty()) s.gt_style = style[i];
        ds.samples.push_back(std::move(s));
    }
    ds.validate();
    return ds;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Group-invariant representation learning: losses, metrics, data, training";

    // ---- data -------------------------------------------------------------
    m.def(
        "generate",
        [](int n_content, int n_style, int groups, std::uint64_t seed, int n) {
            const GenerativeSpec spec = GenerativeSpec::defaults(n_content, n_style, groups, seed);
            Rng rng(seed);
            return dataset_to_dict(generate(spec, n, rng));
        },
        py::arg("n_content") = 2, py::arg("n_style") = 2, py::arg("groups") = 2,
        py::arg("seed") = 7, py::arg("n") = 1000,
        "Sample the synthetic content/style dataset with ground-truth latents");

    // ---- losses -----------------------------------------------------------
    m.def(
        "similarity_loss",
        [](const std::vector<std::vector<double>>& z, const std::vector<int>& group_ids,
           const std::string& pairing, const std::vector<std::pair<int, int>>& chain_pairs) {
            return similarity_value(to_matrix(z), group_ids, pairing_from(pairing), chain_pairs);
        },
        py::arg("z"), py::arg("group_ids"), py::arg("pairing") = "all_pairs",
        py::arg("chain_pairs") = std::vector<std::pair<int, int>>{});
    m.def(
        "uniformity_loss",
        [](const std::vector<std::vector<double>>& z, double t) {
            return uniformity_value(to_matrix(z), t);
        },
        py::arg("z"), py::arg("t") = 2.0);
    m.def(
        "bce_with_logits",
        [](const std::vector<int>& labels, const std::vector<double>& logits) {
            return bce_value(labels, logits);
        },
        py::arg("labels"), py::arg("logits"));

    // ---- metrics ----------------------------------------------------------
    m.def(
        "auroc",
        [](const std::vector<double>& scores, const std::vector<int>& labels) {
            return auroc(scores, labels);
        },
        py::arg("scores"), py::arg("labels"));
    m.def(
        "mcc_strong",
        [](const std::vector<std::vector<double>>& za, const std::vector<std::vector<double>>& zb) {
            return mcc_strong(to_matrix(za), to_matrix(zb));
        },
        py::arg("za"), py::arg("zb"));
    m.def(
        "mcc_weak",
        [](const std::vector<std::vector<double>>& za, const std::vector<std::vector<double>>& zb) {
            return mcc_weak(to_matrix(za), to_matrix(zb));
        },
        py::arg("za"), py::arg("zb"));
    m.def(
        "pca_pc1",
        [](const std::vector<std::vector<double>>& z) {
            const Pc1 p = pca_pc1(to_matrix(z));
            py::dict d;
            d["direction"] = p.direction;
            d["projections"] = p.projections;
            d["explained_variance"] = p.explained_variance;
            return d;
        },
        py::arg("z"));
    m.def(
        "separation_delta",
        [](const std::vector<std::vector<double>>& z, const std::vector<int>& labels) {
            const SeparationReport r = separation_delta(to_matrix(z), labels);
            py::dict d;
            d["c_nf"] = r.c_nf;
            d["c_d"] = r.c_d;
            d["s"] = r.s;
            d["delta"] = r.delta;
            return d;
        },
        py::arg("z"), py::arg("labels"));
    m.def(
        "group_probe",
        [](const std::vector<std::vector<double>>& z, const std::vector<int>& group_ids) {
            return group_probe(to_matrix(z), group_ids);
        },
        py::arg("z"), py::arg("group_ids"));
    m.def(
        "kde",
        [](const std::vector<double>& values, double bandwidth, int grid_points) {
            const KdeCurve c = kde(values, bandwidth, grid_points);
            py::dict d;
            d["grid"] = c.grid;
            d["density"] = c.density;
            d["bandwidth"] = c.bandwidth;
            return d;
        },
        py::arg("values"), py::arg("bandwidth") = 0.0, py::arg("grid_points") = 256);

    // ---- training ---------------------------------------------------------
    m.def(
        "train_run",
        [](const std::vector<std::vector<double>>& x, const std::vector<int>& y,
           const std::vector<int>& group, int groups, const std::string& mode, int epochs,
           int batch_size, int latent_dim, std::uint64_t seed, int n_eval,
           const std::vector<std::vector<double>>& content,
           const std::vector<std::vector<double>>& style) {
            GroupedDataset ds = dataset_from_parts(x, y, group, groups, content, style);
            SplitFractions fractions;
            Rng split_rng = Rng(seed).substream(stream::kSplit);
            const DatasetSplits splits = split(ds, fractions, split_rng);

            TrainConfig cfg;
            cfg.mode = mode == "baseline" ? TrainMode::kBaseline : TrainMode::kInvariant;
            cfg.epochs = epochs;
            cfg.batch_size = batch_size;
            cfg.latent_dim = latent_dim;
            cfg.n_eval = n_eval;
            const RunResult run = train_run(cfg, splits, seed);

            py::dict d;
            d["best_epoch"] = run.best_epoch;
            d["auroc"] = run.test_metrics.auroc;
            d["delta"] = run.test_metrics.delta;
            d["group_probe_acc"] = run.test_metrics.group_probe_acc;
            d["n_eval"] = run.test_metrics.n_eval;
            if (run.test_metrics.has_gt) {
                d["mcc_strong"] = run.test_metrics.mcc_strong;
                d["mcc_weak"] = run.test_metrics.mcc_weak;
                d["mcc_weak_style"] = run.test_metrics.mcc_weak_style;
            }
            py::list history;
            for (const EpochRecord& rec : run.history) {
                py::dict e;
                e["epoch"] = rec.epoch;
                e["train_total"] = rec.train_loss.total;
                e["train_bce"] = rec.train_loss.bce;
                e["val_bce"] = rec.val_bce;
                e["val_auroc"] = rec.val_auroc;
                history.append(e);
            }
            d["history"] = history;

            std::vector<int> all(splits.test.size());
            for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
            d["embeddings"] = from_matrix(run.best_checkpoint.phi.forward(splits.test.gather_x(all)));
            d["test_y"] = splits.test.gather_y(all);
            d["test_group"] = splits.test.gather_group(all);
            return d;
        },
        py::arg("x"), py::arg("y"), py::arg("group"), py::arg("groups") = 2,
        py::arg("mode") = "invariant", py::arg("epochs") = 3, py::arg("batch_size") = 32,
        py::arg("latent_dim") = 8, py::arg("seed") = 1, py::arg("n_eval") = 1000,
        py::arg("content") = std::vector<std::vector<double>>{},
        py::arg("style") = std::vector<std::vector<double>>{},
        "Split the given dataset, train one run, and return metrics plus test embeddings");

    // Map the library's error taxonomy onto Python exceptions.
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
    py::register_exception<MetricError>(m, "MetricError", PyExc_ArithmeticError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
}
