#include "groupinv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "groupinv/errors.hpp"
#include "groupinv/linalg.hpp"
#include "groupinv/rng.hpp"

namespace groupinv {

// ---------------------------------------------------------------------------
// AUROC
// ---------------------------------------------------------------------------

double auroc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) {
        throw ContractError("auroc: " + std::to_string(scores.size()) + " scores vs " +
                            std::to_string(labels.size()) + " labels");
    }
    const size_t n = scores.size();
    size_t pos = 0;
    for (size_t i = 0; i < n; ++i) {
        const int y = labels[i];
        if (y != 0 && y != 1) throw ContractError("auroc labels must be 0/1");
        pos += static_cast<size_t>(y);
        if (!std::isfinite(scores[i])) throw MetricError("auroc scores must be finite");
    }
    const size_t neg = n - pos;
    if (pos == 0 || neg == 0) {
        throw MetricError("auroc requires both classes, got " + std::to_string(pos) +
                          " positives out of " + std::to_string(n));
    }

    // Rank-sum form: average ranks over tie blocks are half-integers, so the
    // result is bitwise identical to explicit pair counting.
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return scores[a] < scores[b]; });

    double pos_rank_sum = 0.0;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (size_t k = i; k <= j; ++k) {
            if (labels[order[k]] == 1) pos_rank_sum += avg_rank;
        }
        i = j + 1;
    }
    const double p = static_cast<double>(pos);
    const double u = pos_rank_sum - p * (p + 1.0) / 2.0;
    return u / (p * static_cast<double>(neg));
}

// ---------------------------------------------------------------------------
// MCC
// ---------------------------------------------------------------------------

namespace {

struct ColumnStats {
    std::vector<double> mean;
    std::vector<double> norm;  // sqrt of centered sum of squares
};

ColumnStats column_stats(const Matrix& z, const char* which) {
    ColumnStats st;
    st.mean.resize(static_cast<size_t>(z.cols));
    st.norm.resize(static_cast<size_t>(z.cols));
    for (int j = 0; j < z.cols; ++j) {
        double m = 0.0;
        for (int r = 0; r < z.rows; ++r) m += z.at(r, j);
        m /= static_cast<double>(z.rows);
        double ss = 0.0;
        for (int r = 0; r < z.rows; ++r) {
            const double d = z.at(r, j) - m;
            ss += d * d;
        }
        if (ss <= 0.0) {
            throw MetricError(std::string("column ") + std::to_string(j) + " of the " + which +
                              " representation has zero variance");
        }
        st.mean[static_cast<size_t>(j)] = m;
        st.norm[static_cast<size_t>(j)] = std::sqrt(ss);
    }
    return st;
}

/// |Pearson| matrix between the columns of za and zb.
Matrix abs_correlation(const Matrix& za, const Matrix& zb) {
    if (za.rows != zb.rows) {
        throw ContractError("correlation needs matching row counts, got " + za.shape_str() +
                            " vs " + zb.shape_str());
    }
    if (za.rows < 3) {
        throw ContractError("correlation needs >= 3 rows, got " + std::to_string(za.rows));
    }
    const ColumnStats sa = column_stats(za, "first");
    const ColumnStats sb = column_stats(zb, "second");
    Matrix corr(za.cols, zb.cols);
    for (int i = 0; i < za.cols; ++i) {
        for (int j = 0; j < zb.cols; ++j) {
            double dot = 0.0;
            for (int r = 0; r < za.rows; ++r) {
                dot += (za.at(r, i) - sa.mean[static_cast<size_t>(i)]) *
                       (zb.at(r, j) - sb.mean[static_cast<size_t>(j)]);
            }
            corr.at(i, j) = std::fabs(
                dot / (sa.norm[static_cast<size_t>(i)] * sb.norm[static_cast<size_t>(j)]));
        }
    }
    return corr;
}

}  // namespace

double mcc_strong(const Matrix& za, const Matrix& zb) {
    Matrix corr = abs_correlation(za, zb);
    // Hungarian solver wants a square matrix; pad with zero scores so the
    // extra rows/columns absorb the unmatched dimensions.
    const int n = std::max(corr.rows, corr.cols);
    Matrix square = Matrix::zeros(n, n);
    for (int i = 0; i < corr.rows; ++i) {
        for (int j = 0; j < corr.cols; ++j) square.at(i, j) = corr.at(i, j);
    }
    const std::vector<int> match = solve_assignment_max(square);
    double total = 0.0;
    int counted = 0;
    for (int i = 0; i < corr.rows; ++i) {
        const int j = match[static_cast<size_t>(i)];
        if (j < corr.cols) {
            total += corr.at(i, j);
            ++counted;
        }
    }
    const int expected = std::min(corr.rows, corr.cols);
    if (counted != expected) {
        throw MetricError("assignment matched " + std::to_string(counted) + " of " +
                          std::to_string(expected) + " columns");
    }
    return total / static_cast<double>(expected);
}

double mcc_weak(const Matrix& za, const Matrix& zb) {
    if (za.rows != zb.rows) {
        throw ContractError("mcc_weak needs matching row counts, got " + za.shape_str() + " vs " +
                            zb.shape_str());
    }
    if (za.rows <= zb.cols) {
        throw ContractError("mcc_weak needs more rows than regressor columns, got " +
                            std::to_string(za.rows) + " rows for " + std::to_string(zb.cols) +
                            " columns");
    }

    // Least-squares affine fit za ~ [zb, 1] beta via the normal equations.
    const int b = zb.rows;
    const int d = zb.cols + 1;
    Matrix x(b, d);
    for (int r = 0; r < b; ++r) {
        for (int j = 0; j < zb.cols; ++j) x.at(r, j) = zb.at(r, j);
        x.at(r, d - 1) = 1.0;
    }
    Matrix xtx = matmul(transpose(x), x);
    Matrix xty = matmul(transpose(x), za);
    Matrix beta;
    try {
        beta = solve_linear(xtx, xty);
    } catch (const MetricError&) {
        throw MetricError("affine alignment is rank-deficient; representation columns are "
                          "linearly dependent");
    }
    Matrix fitted = matmul(x, beta);
    return mcc_strong(za, fitted);
}

// ---------------------------------------------------------------------------
// PCA / separation
// ---------------------------------------------------------------------------

Pc1 pca_pc1(const Matrix& z) {
    if (z.rows < 2) {
        throw ContractError("pca_pc1 needs >= 2 rows, got " + std::to_string(z.rows));
    }
    Matrix centered = z;
    for (int j = 0; j < z.cols; ++j) {
        double m = 0.0;
        for (int r = 0; r < z.rows; ++r) m += z.at(r, j);
        m /= static_cast<double>(z.rows);
        for (int r = 0; r < z.rows; ++r) centered.at(r, j) -= m;
    }
    Matrix cov = scale(matmul(transpose(centered), centered), 1.0 / static_cast<double>(z.rows - 1));
    double trace = 0.0;
    for (int j = 0; j < cov.rows; ++j) trace += cov.at(j, j);
    if (trace <= 0.0) throw MetricError("covariance is zero; no principal direction exists");

    EigenPair top = power_iteration_sym(cov);
    if (!top.converged) throw MetricError("power iteration failed to converge on the covariance");

    Pc1 out;
    out.direction.resize(static_cast<size_t>(z.cols));
    int arg_max = 0;
    for (int j = 0; j < z.cols; ++j) {
        out.direction[static_cast<size_t>(j)] = top.vector.at(j, 0);
        if (std::fabs(top.vector.at(j, 0)) > std::fabs(top.vector.at(arg_max, 0))) arg_max = j;
    }
    if (out.direction[static_cast<size_t>(arg_max)] < 0.0) {
        for (double& v : out.direction) v = -v;
    }
    out.projections.resize(static_cast<size_t>(z.rows));
    for (int r = 0; r < z.rows; ++r) {
        double p = 0.0;
        for (int j = 0; j < z.cols; ++j) p += centered.at(r, j) * out.direction[static_cast<size_t>(j)];
        out.projections[static_cast<size_t>(r)] = p;
    }
    out.explained_variance = top.value / trace;
    return out;
}

SeparationReport separation_from_projections(const std::vector<double>& projections,
                                             const std::vector<int>& labels) {
    if (projections.size() != labels.size()) {
        throw ContractError("separation: " + std::to_string(projections.size()) +
                            " projections vs " + std::to_string(labels.size()) + " labels");
    }
    double sum0 = 0.0, sum1 = 0.0;
    size_t n0 = 0, n1 = 0;
    double lo = projections.empty() ? 0.0 : projections[0];
    double hi = lo;
    for (size_t i = 0; i < projections.size(); ++i) {
        const int y = labels[i];
        if (y != 0 && y != 1) throw ContractError("separation labels must be 0/1");
        if (y == 0) {
            sum0 += projections[i];
            ++n0;
        } else {
            sum1 += projections[i];
            ++n1;
        }
        lo = std::min(lo, projections[i]);
        hi = std::max(hi, projections[i]);
    }
    if (n0 == 0 || n1 == 0) throw MetricError("separation requires both classes present");
    if (hi <= lo) throw MetricError("projection range is degenerate; separation is undefined");

    SeparationReport rep;
    rep.c_nf = sum0 / static_cast<double>(n0);
    rep.c_d = sum1 / static_cast<double>(n1);
    rep.s = (hi - lo) * (hi - lo);
    rep.delta = (rep.c_nf - rep.c_d) * (rep.c_nf - rep.c_d) / rep.s;
    return rep;
}

SeparationReport separation_delta(const Matrix& z, const std::vector<int>& labels) {
    return separation_from_projections(pca_pc1(z).projections, labels);
}

// ---------------------------------------------------------------------------
// Group probe
// ---------------------------------------------------------------------------

double majority_rate(const std::vector<int>& group_ids) {
    if (group_ids.empty()) throw ContractError("majority_rate of an empty list");
    const int k = 1 + *std::max_element(group_ids.begin(), group_ids.end());
    std::vector<int> counts(static_cast<size_t>(k), 0);
    for (int g : group_ids) {
        if (g < 0) throw ContractError("group ids must be nonnegative");
        ++counts[static_cast<size_t>(g)];
    }
    return static_cast<double>(*std::max_element(counts.begin(), counts.end())) /
           static_cast<double>(group_ids.size());
}

namespace {
// The probe's split and optimisation are internal details; the seed is fixed
// so the metric is a deterministic function of (z, group_ids).
constexpr uint64_t kProbeSeed = 0x70726f6265ULL;  // "probe"
constexpr int kProbeSteps = 400;
constexpr double kProbeLr = 0.5;
}  // namespace

double group_probe(const Matrix& z, const std::vector<int>& group_ids) {
    if (static_cast<size_t>(z.rows) != group_ids.size()) {
        throw ContractError("group_probe: " + std::to_string(z.rows) + " rows vs " +
                            std::to_string(group_ids.size()) + " group ids");
    }
    std::vector<int> distinct = group_ids;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    const int k = static_cast<int>(distinct.size());
    if (k < 2) throw MetricError("group probe requires >= 2 groups present");

    // Stratified 70/30 split so every group appears in the training part.
    Rng rng(kProbeSeed);
    std::vector<int> train_idx, test_idx;
    for (int g : distinct) {
        std::vector<int> members;
        for (size_t i = 0; i < group_ids.size(); ++i) {
            if (group_ids[i] == g) members.push_back(static_cast<int>(i));
        }
        for (size_t i = members.size(); i > 1; --i) {
            std::swap(members[i - 1],
                      members[static_cast<size_t>(rng.uniform_int(static_cast<int>(i)))]);
        }
        const size_t n_train = std::max<size_t>(1, (members.size() * 7) / 10);
        for (size_t i = 0; i < members.size(); ++i) {
            (i < n_train ? train_idx : test_idx).push_back(members[i]);
        }
    }
    if (test_idx.empty()) throw MetricError("group probe has no held-out samples");

    // Standardize on training statistics; constant features carry no signal
    // and are left unscaled.
    std::vector<double> mean(static_cast<size_t>(z.cols), 0.0);
    std::vector<double> sd(static_cast<size_t>(z.cols), 1.0);
    for (int j = 0; j < z.cols; ++j) {
        double m = 0.0;
        for (int i : train_idx) m += z.at(i, j);
        m /= static_cast<double>(train_idx.size());
        double ss = 0.0;
        for (int i : train_idx) {
            const double d = z.at(i, j) - m;
            ss += d * d;
        }
        mean[static_cast<size_t>(j)] = m;
        const double v = std::sqrt(ss / static_cast<double>(train_idx.size()));
        if (v > 1e-12) sd[static_cast<size_t>(j)] = v;
    }

    std::vector<int> label_of(group_ids.size());
    for (size_t i = 0; i < group_ids.size(); ++i) {
        label_of[i] = static_cast<int>(
            std::lower_bound(distinct.begin(), distinct.end(), group_ids[i]) - distinct.begin());
    }

    // Full-batch gradient descent on the softmax cross-entropy.
    Matrix w = Matrix::zeros(z.cols, k);
    std::vector<double> bias(static_cast<size_t>(k), 0.0);
    const double inv_n = 1.0 / static_cast<double>(train_idx.size());
    std::vector<double> logits(static_cast<size_t>(k));
    for (int step = 0; step < kProbeSteps; ++step) {
        Matrix gw = Matrix::zeros(z.cols, k);
        std::vector<double> gb(static_cast<size_t>(k), 0.0);
        for (int i : train_idx) {
            double max_logit = -1e300;
            for (int c = 0; c < k; ++c) {
                double a = bias[static_cast<size_t>(c)];
                for (int j = 0; j < z.cols; ++j) {
                    a += w.at(j, c) * (z.at(i, j) - mean[static_cast<size_t>(j)]) /
                         sd[static_cast<size_t>(j)];
                }
                logits[static_cast<size_t>(c)] = a;
                max_logit = std::max(max_logit, a);
            }
            double denom = 0.0;
            for (int c = 0; c < k; ++c) {
                logits[static_cast<size_t>(c)] = std::exp(logits[static_cast<size_t>(c)] - max_logit);
                denom += logits[static_cast<size_t>(c)];
            }
            for (int c = 0; c < k; ++c) {
                const double p = logits[static_cast<size_t>(c)] / denom;
                const double err = p - (label_of[static_cast<size_t>(i)] == c ? 1.0 : 0.0);
                gb[static_cast<size_t>(c)] += err;
                for (int j = 0; j < z.cols; ++j) {
                    gw.at(j, c) += err * (z.at(i, j) - mean[static_cast<size_t>(j)]) /
                                   sd[static_cast<size_t>(j)];
                }
            }
        }
        for (int c = 0; c < k; ++c) {
            bias[static_cast<size_t>(c)] -= kProbeLr * inv_n * gb[static_cast<size_t>(c)];
            for (int j = 0; j < z.cols; ++j) w.at(j, c) -= kProbeLr * inv_n * gw.at(j, c);
        }
    }

    int correct = 0;
    for (int i : test_idx) {
        int best = 0;
        double best_logit = -1e300;
        for (int c = 0; c < k; ++c) {
            double a = bias[static_cast<size_t>(c)];
            for (int j = 0; j < z.cols; ++j) {
                a += w.at(j, c) * (z.at(i, j) - mean[static_cast<size_t>(j)]) /
                     sd[static_cast<size_t>(j)];
            }
            if (a > best_logit) {
                best_logit = a;
                best = c;
            }
        }
        if (best == label_of[static_cast<size_t>(i)]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(test_idx.size());
}

// ---------------------------------------------------------------------------
// KDE
// ---------------------------------------------------------------------------

double silverman_bandwidth(const std::vector<double>& values) {
    const size_t n = values.size();
    if (n < 2) throw ContractError("bandwidth selection needs >= 2 values");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));

    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(n - 1);
        const size_t lo = static_cast<size_t>(pos);
        const size_t hi = std::min(lo + 1, n - 1);
        const double frac = pos - static_cast<double>(lo);
        return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
    };
    const double iqr = quantile(0.75) - quantile(0.25);

    double spread = sd;
    if (iqr > 0.0) spread = std::min(spread, iqr / 1.34);
    double h = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
    if (h <= 1e-12) h = 1e-3;  // identical values: fall back to a narrow kernel
    return h;
}

KdeCurve kde_on_span(const std::vector<double>& values, double bandwidth, double lo, double hi,
                     int grid_points) {
    if (values.size() < 2) throw ContractError("kde needs >= 2 values");
    if (bandwidth <= 0.0) throw ContractError("kde bandwidth must be positive");
    if (grid_points < 2) throw ContractError("kde needs >= 2 grid points");
    if (hi <= lo) throw ContractError("kde span is empty");

    KdeCurve curve;
    curve.bandwidth = bandwidth;
    curve.grid.resize(static_cast<size_t>(grid_points));
    curve.density.resize(static_cast<size_t>(grid_points));
    const double step = (hi - lo) / static_cast<double>(grid_points - 1);
    const double norm = 1.0 / (static_cast<double>(values.size()) * bandwidth *
                               std::sqrt(2.0 * 3.14159265358979323846));
    for (int g = 0; g < grid_points; ++g) {
        const double x = lo + step * static_cast<double>(g);
        double d = 0.0;
        for (double v : values) {
            const double u = (x - v) / bandwidth;
            d += std::exp(-0.5 * u * u);
        }
        curve.grid[static_cast<size_t>(g)] = x;
        curve.density[static_cast<size_t>(g)] = d * norm;
    }

    // Normalize so the trapezoid integral over the emitted span is exactly 1;
    // without this, mass outside [lo, hi] (or heavy overlap of kernels) could
    // push the integral outside the contract's 1e-3 window.
    double integral = 0.0;
    for (int g = 0; g + 1 < grid_points; ++g) {
        integral += 0.5 * step * (curve.density[static_cast<size_t>(g)] +
                                  curve.density[static_cast<size_t>(g) + 1]);
    }
    if (integral <= 0.0) throw MetricError("kde integral vanished; values are degenerate");
    for (double& d : curve.density) d /= integral;
    return curve;
}

KdeCurve kde(const std::vector<double>& values, double bandwidth, int grid_points) {
    if (values.size() < 2) throw ContractError("kde needs >= 2 values");
    const double h = bandwidth > 0.0 ? bandwidth : silverman_bandwidth(values);
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    return kde_on_span(values, h, *mn - 3.0 * h, *mx + 3.0 * h, grid_points);
}

// ---------------------------------------------------------------------------
// Model evaluation
// ---------------------------------------------------------------------------

std::vector<int> eval_subset(int split_size, int n_eval, uint64_t eval_seed) {
    if (split_size < 1) throw ContractError("evaluation split is empty");
    if (n_eval < 1) throw ConfigError("n_eval must be >= 1");
    std::vector<int> indices(static_cast<size_t>(split_size));
    std::iota(indices.begin(), indices.end(), 0);
    if (n_eval >= split_size) return indices;
    Rng rng = Rng(eval_seed).substream(stream::kEval);
    for (size_t i = indices.size(); i > 1; --i) {
        std::swap(indices[i - 1],
                  indices[static_cast<size_t>(rng.uniform_int(static_cast<int>(i)))]);
    }
    indices.resize(static_cast<size_t>(n_eval));
    std::sort(indices.begin(), indices.end());
    return indices;
}

MetricsReport evaluate_model(const Model& model, const GroupedDataset& eval_set, int n_eval,
                             uint64_t eval_seed) {
    const std::vector<int> idx =
        eval_subset(static_cast<int>(eval_set.samples.size()), n_eval, eval_seed);
    const Matrix x = eval_set.gather_x(idx);
    const std::vector<int> y = eval_set.gather_y(idx);
    const std::vector<int> groups = eval_set.gather_group(idx);

    const Matrix z = model.phi.forward(x);
    const Matrix logit = model.psi.logit(z);
    std::vector<double> scores(static_cast<size_t>(logit.rows));
    for (int i = 0; i < logit.rows; ++i) scores[static_cast<size_t>(i)] = logit.at(i, 0);

    MetricsReport rep;
    rep.n_eval = static_cast<int>(idx.size());
    rep.auroc = auroc(scores, y);
    rep.delta = separation_delta(z, y).delta;
    rep.group_probe_acc = group_probe(z, groups);
    rep.group_majority = majority_rate(groups);

    if (eval_set.has_ground_truth()) {
        const Matrix content = eval_set.gather_content(idx);
        rep.has_gt = true;
        rep.mcc_strong = mcc_strong(content, z);
        rep.mcc_weak = mcc_weak(content, z);
        const bool has_style = !eval_set.samples.empty() && !eval_set.samples[0].gt_style.empty();
        rep.mcc_weak_style = has_style ? mcc_weak(eval_set.gather_style(idx), z) : 0.0;
    }
    return rep;
}

EmbeddingTable embed_eval_subset(const Model& model, const GroupedDataset& eval_set, int n_eval,
                                 uint64_t eval_seed) {
    const std::vector<int> idx =
        eval_subset(static_cast<int>(eval_set.samples.size()), n_eval, eval_seed);
    EmbeddingTable table;
    table.z = model.phi.forward(eval_set.gather_x(idx));
    table.labels = eval_set.gather_y(idx);
    table.groups = eval_set.gather_group(idx);
    return table;
}

// ---------------------------------------------------------------------------
// Embedding CSV
// ---------------------------------------------------------------------------

void save_embeddings_csv(const std::string& path, const Matrix& z, const std::vector<int>& labels,
                         const std::vector<int>& groups) {
    if (static_cast<size_t>(z.rows) != labels.size() ||
        static_cast<size_t>(z.rows) != groups.size()) {
        throw ContractError("embedding dump: row/label/group counts disagree");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ContractError("cannot open " + path + " for writing");
    for (int j = 0; j < z.cols; ++j) out << "z" << j << ",";
    out << "y,group\n";
    char buf[64];
    for (int i = 0; i < z.rows; ++i) {
        for (int j = 0; j < z.cols; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", z.at(i, j));
            out << buf << ",";
        }
        out << labels[static_cast<size_t>(i)] << "," << groups[static_cast<size_t>(i)] << "\n";
    }
    if (!out) throw ContractError("failed writing " + path);
}

EmbeddingTable load_embeddings_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifactError("embeddings file not found: " + path);

    std::string header;
    if (!std::getline(in, header)) throw ParseError(path + ": empty file");
    if (!header.empty() && header.back() == '\r') header.pop_back();
    std::vector<std::string> cols;
    std::stringstream hs(header);
    std::string field;
    while (std::getline(hs, field, ',')) cols.push_back(field);
    if (cols.size() < 3 || cols[cols.size() - 2] != "y" || cols.back() != "group") {
        throw ParseError(path + ": header must end with y,group");
    }
    const int n = static_cast<int>(cols.size()) - 2;
    for (int j = 0; j < n; ++j) {
        const std::string expected = "z" + std::to_string(j);
        if (cols[static_cast<size_t>(j)] != expected) {
            throw ParseError(path + ": expected column '" + expected + "', found '" +
                             cols[static_cast<size_t>(j)] + "'");
        }
    }

    EmbeddingTable table;
    std::vector<double> flat;
    std::string line;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::vector<std::string> fields;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != cols.size()) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(cols.size()) + " fields, found " +
                             std::to_string(fields.size()));
        }
        try {
            for (int j = 0; j < n; ++j) flat.push_back(std::stod(fields[static_cast<size_t>(j)]));
            table.labels.push_back(std::stoi(fields[static_cast<size_t>(n)]));
            table.groups.push_back(std::stoi(fields[static_cast<size_t>(n) + 1]));
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": unparseable numeric field");
        }
    }
    if (table.labels.empty()) throw ParseError(path + ": no data rows");
    table.z = Matrix(static_cast<int>(table.labels.size()), n);
    table.z.data = std::move(flat);
    return table;
}

}  // namespace groupinv
