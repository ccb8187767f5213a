#pragma once

// Slow, independent reference implementations used to cross-check the
// library. Each oracle takes the most literal route available (double loops,
// exhaustive enumeration, dense eigensolves) and shares no code with the
// production kernels, so agreement is evidence and disagreement points at
// the faster implementation.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "groupinv/matrix.hpp"

namespace oracle {

using groupinv::Matrix;

/// AUROC by counting every (positive, negative) pair; ties count half.
inline double auroc_pairs(const std::vector<double>& scores, const std::vector<int>& labels) {
    double wins = 0.0;
    long pairs = 0;
    for (size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    if (pairs == 0) throw std::runtime_error("auroc oracle needs both classes");
    return wins / static_cast<double>(pairs);
}

/// Textbook binary cross-entropy on probabilities; only safe for moderate
/// logits (|logit| <= ~30), which is exactly why the library uses softplus.
inline double bce_naive(const std::vector<int>& labels, const std::vector<double>& logits) {
    double total = 0.0;
    for (size_t i = 0; i < labels.size(); ++i) {
        const double p = 1.0 / (1.0 + std::exp(-logits[i]));
        total += labels[i] == 1 ? -std::log(p) : -std::log(1.0 - p);
    }
    return total / static_cast<double>(labels.size());
}

inline double sqdist_rows(const Matrix& z, int i, int j) {
    double d = 0.0;
    for (int c = 0; c < z.cols; ++c) {
        const double diff = z.at(i, c) - z.at(j, c);
        d += diff * diff;
    }
    return d;
}

/// Mean squared distance over all unordered cross-group pairs, double loop.
inline double similarity_all_pairs(const Matrix& z, const std::vector<int>& groups) {
    double total = 0.0;
    long pairs = 0;
    for (int i = 0; i < z.rows; ++i) {
        for (int j = i + 1; j < z.rows; ++j) {
            if (groups[static_cast<size_t>(i)] == groups[static_cast<size_t>(j)]) continue;
            total += sqdist_rows(z, i, j);
            ++pairs;
        }
    }
    return pairs == 0 ? 0.0 : total / static_cast<double>(pairs);
}

/// Chain similarity: plain sum over the listed (row, reference) pairs,
/// averaged over sampling rounds.
inline double similarity_chain(const Matrix& z, const std::vector<std::pair<int, int>>& pairs,
                               int rounds) {
    double total = 0.0;
    for (const auto& [a, b] : pairs) total += sqdist_rows(z, a, b);
    return total / static_cast<double>(rounds);
}

/// log of the mean of exp(-t d^2) over ordered pairs i != j, double loop.
inline double uniformity_naive(const Matrix& z, double t) {
    double total = 0.0;
    long pairs = 0;
    for (int i = 0; i < z.rows; ++i) {
        for (int j = 0; j < z.rows; ++j) {
            if (i == j) continue;
            total += std::exp(-t * sqdist_rows(z, i, j));
            ++pairs;
        }
    }
    if (pairs == 0) throw std::runtime_error("uniformity oracle needs >= 2 rows");
    return std::log(total / static_cast<double>(pairs));
}

inline std::vector<double> column(const Matrix& m, int c) {
    std::vector<double> out(static_cast<size_t>(m.rows));
    for (int r = 0; r < m.rows; ++r) out[static_cast<size_t>(r)] = m.at(r, c);
    return out;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        cov += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    if (va <= 0.0 || vb <= 0.0) throw std::runtime_error("pearson oracle: constant column");
    return cov / std::sqrt(va * vb);
}

/// Strong MCC by brute force: try every injective column matching of the
/// smaller representation into the larger and keep the best mean |r|.
/// Factorial in the larger width; tests keep it at <= 4 columns.
inline double mcc_strong_exhaustive(const Matrix& za, const Matrix& zb) {
    const int na = za.cols, nb = zb.cols;
    const int m = std::min(na, nb);
    Matrix corr(na, nb);
    for (int i = 0; i < na; ++i)
        for (int j = 0; j < nb; ++j)
            corr.at(i, j) = std::abs(pearson(column(za, i), column(zb, j)));
    // Permute the larger side; read the first m slots as the matching.
    const bool a_small = na <= nb;
    const int big = a_small ? nb : na;
    std::vector<int> perm(static_cast<size_t>(big));
    std::iota(perm.begin(), perm.end(), 0);
    double best = -1.0;
    do {
        double total = 0.0;
        for (int k = 0; k < m; ++k) {
            const int p = perm[static_cast<size_t>(k)];
            total += a_small ? corr.at(k, p) : corr.at(p, k);
        }
        best = std::max(best, total / static_cast<double>(m));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

struct EigenDecomp {
    std::vector<double> values;  // descending
    Matrix vectors;              // unit eigenvectors as columns, same order
};

/// Cyclic Jacobi eigensolver for a small symmetric matrix.
inline EigenDecomp jacobi_eigen(Matrix a) {
    const int n = a.rows;
    if (a.cols != n) throw std::runtime_error("jacobi oracle: matrix must be square");
    Matrix v = Matrix::identity(n);
    for (int sweep = 0; sweep < 200; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a.at(p, q) * a.at(p, q);
        if (off < 1e-28) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(a.at(p, q)) < 1e-300) continue;
                const double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * a.at(p, q));
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a.at(k, p), akq = a.at(k, q);
                    a.at(k, p) = c * akp - s * akq;
                    a.at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a.at(p, k), aqk = a.at(q, k);
                    a.at(p, k) = c * apk - s * aqk;
                    a.at(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v.at(k, p), vkq = v.at(k, q);
                    v.at(k, p) = c * vkp - s * vkq;
                    v.at(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return a.at(x, x) > a.at(y, y); });
    EigenDecomp out;
    out.vectors = Matrix(n, n);
    for (int j = 0; j < n; ++j) {
        const int src = order[static_cast<size_t>(j)];
        out.values.push_back(a.at(src, src));
        for (int i = 0; i < n; ++i) out.vectors.at(i, j) = v.at(i, src);
    }
    return out;
}

/// Column covariance of z (rows = observations), the PCA oracle's input.
/// Uses the population normalisation 1/n; every PCA quantity the tests
/// compare (direction, eigenvalue ratios, projections) is invariant to it.
inline Matrix covariance(const Matrix& z) {
    const int n = z.rows, d = z.cols;
    std::vector<double> mean(static_cast<size_t>(d), 0.0);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < d; ++c) mean[static_cast<size_t>(c)] += z.at(r, c);
    for (double& m : mean) m /= static_cast<double>(n);
    Matrix cov(d, d);
    for (int r = 0; r < n; ++r) {
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                cov.at(i, j) += (z.at(r, i) - mean[static_cast<size_t>(i)]) *
                                (z.at(r, j) - mean[static_cast<size_t>(j)]);
            }
        }
    }
    for (double& x : cov.data) x /= static_cast<double>(n);
    return cov;
}

/// First principal component via the Jacobi oracle, sign-fixed the same way
/// as the library (largest-magnitude coordinate made positive).
inline std::vector<double> pc1_direction(const Matrix& z) {
    const EigenDecomp eig = jacobi_eigen(covariance(z));
    std::vector<double> dir = column(eig.vectors, 0);
    int arg = 0;
    for (size_t i = 1; i < dir.size(); ++i)
        if (std::abs(dir[i]) > std::abs(dir[static_cast<size_t>(arg)])) arg = static_cast<int>(i);
    if (dir[static_cast<size_t>(arg)] < 0.0)
        for (double& x : dir) x = -x;
    return dir;
}

}  // namespace oracle
