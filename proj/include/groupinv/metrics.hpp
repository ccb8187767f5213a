#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "groupinv/dataset.hpp"
#include "groupinv/matrix.hpp"
#include "groupinv/model.hpp"

namespace groupinv {

/// Probability that a random positive outscores a random negative, with ties
/// counted half (Mann-Whitney form). Requires both classes present.
double auroc(const std::vector<double>& scores, const std::vector<int>& labels);

/// Mean absolute Pearson correlation between the columns of two
/// representation sets after an optimal one-to-one column matching.
/// Rectangular inputs match min(Na, Nb) columns.
double mcc_strong(const Matrix& za, const Matrix& zb);

/// Strong MCC after first fitting the least-squares affine map zb -> za;
/// scores agreement up to an arbitrary affine transform.
double mcc_weak(const Matrix& za, const Matrix& zb);

struct Pc1 {
    std::vector<double> direction;    // unit-norm, largest coordinate positive
    std::vector<double> projections;  // centered scores, one per row
    double explained_variance = 0.0;  // top eigenvalue / covariance trace
};

Pc1 pca_pc1(const Matrix& z);

/// Class separation along PC1: squared centroid distance over squared range.
struct SeparationReport {
    double c_nf = 0.0;   // centroid of class 0
    double c_d = 0.0;    // centroid of class 1
    double s = 0.0;      // (max projection - min projection)^2
    double delta = 0.0;  // (c_nf - c_d)^2 / s
};

SeparationReport separation_delta(const Matrix& z, const std::vector<int>& labels);
SeparationReport separation_from_projections(const std::vector<double>& projections,
                                             const std::vector<int>& labels);

/// Held-out accuracy of a multinomial linear probe predicting the group from
/// the representation (70/30 split with a fixed internal seed). Low accuracy
/// is evidence the representation is group-invariant.
double group_probe(const Matrix& z, const std::vector<int>& group_ids);

/// Fraction of the most common group; the floor any probe should beat.
double majority_rate(const std::vector<int>& group_ids);

struct KdeCurve {
    std::vector<double> grid;
    std::vector<double> density;  // normalized to unit trapezoid integral
    double bandwidth = 0.0;
};

double silverman_bandwidth(const std::vector<double>& values);

/// Gaussian KDE on an even grid spanning [min-3h, max+3h]. bandwidth <= 0
/// selects Silverman's rule.
KdeCurve kde(const std::vector<double>& values, double bandwidth = 0.0, int grid_points = 256);

/// KDE evaluated on a caller-fixed span so several curves share a grid.
KdeCurve kde_on_span(const std::vector<double>& values, double bandwidth, double lo, double hi,
                     int grid_points = 256);

/// Embedding dump format shared by `eval`, `mcc`, and `plot`:
/// header z0..z{N-1},y,group with 17-significant-digit values.
struct EmbeddingTable {
    Matrix z;
    std::vector<int> labels;
    std::vector<int> groups;
};

void save_embeddings_csv(const std::string& path, const Matrix& z, const std::vector<int>& labels,
                         const std::vector<int>& groups);
EmbeddingTable load_embeddings_csv(const std::string& path);

/// Per-run evaluation bundle. The MCC fields compare the learned latents to
/// the generator's ground-truth factors and are only present when the
/// evaluation set carries them (has_gt).
struct MetricsReport {
    double auroc = 0.0;
    double mcc_strong = 0.0;     // latents vs ground-truth content, matched columns
    double mcc_weak = 0.0;       // latents vs ground-truth content, affine-aligned
    double mcc_weak_style = 0.0; // latents vs ground-truth style, affine-aligned
    double delta = 0.0;
    double group_probe_acc = 0.0;
    double group_majority = 0.0;  // chance level for the probe
    int n_eval = 0;
    bool has_gt = false;
};

/// Deterministic evaluation subset: n_eval indices drawn without replacement
/// from the split with the given seed (all indices if the split is smaller).
std::vector<int> eval_subset(int split_size, int n_eval, uint64_t eval_seed);

MetricsReport evaluate_model(const Model& model, const GroupedDataset& eval_set, int n_eval,
                             uint64_t eval_seed);

/// Latents for the same deterministic evaluation subset evaluate_model uses.
EmbeddingTable embed_eval_subset(const Model& model, const GroupedDataset& eval_set, int n_eval,
                                 uint64_t eval_seed);

}  // namespace groupinv
