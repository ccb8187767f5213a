#include "groupinv/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "groupinv/rng.hpp"

namespace groupinv {

EigenPair power_iteration_sym(const Matrix& a, double tol, int max_iters) {
    const int n = a.rows;
    if (a.cols != n) throw ShapeError("power_iteration_sym requires square input, got " +
                                      a.shape_str());
    if (n == 0) throw ContractError("power_iteration_sym on empty matrix");

    // Fixed-seed start vector; deterministic and unlikely to be orthogonal
    // to the dominant eigenvector.
    Rng rng(0x9d2c5680u);
    Matrix v(n, 1);
    for (double& x : v.data) x = rng.normal();
    double norm = frobenius_norm(v);
    for (double& x : v.data) x /= norm;

    EigenPair out;
    out.vector = v;
    double lambda = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        Matrix av = matmul(a, v);
        const double av_norm = frobenius_norm(av);
        if (av_norm < 1e-300) {
            // Zero operator: every unit vector is an eigenvector.
            out.value = 0.0;
            out.vector = v;
            out.iterations = it;
            out.converged = true;
            return out;
        }
        Matrix v_next = scale(av, 1.0 / av_norm);
        lambda = dot(v_next, matmul(a, v_next));
        const Matrix residual = sub(matmul(a, v_next), scale(v_next, lambda));
        v = v_next;
        out.iterations = it + 1;
        if (frobenius_norm(residual) <= tol * std::max(1.0, std::fabs(lambda))) {
            out.converged = true;
            break;
        }
    }
    out.value = lambda;
    out.vector = v;
    return out;
}

std::vector<int> solve_assignment_min(const Matrix& cost) {
    const int n = cost.rows;
    if (cost.cols != n) {
        throw ShapeError("assignment requires a square cost matrix, got " + cost.shape_str());
    }
    if (n == 0) return {};
    constexpr double kInf = std::numeric_limits<double>::infinity();

    // Potentials formulation; rows and columns are 1-based, index 0 is the
    // virtual unmatched slot.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = -1;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost.at(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j) {
        if (p[j] > 0) row_to_col[static_cast<size_t>(p[j] - 1)] = j - 1;
    }
    return row_to_col;
}

std::vector<int> solve_assignment_max(const Matrix& score) {
    return solve_assignment_min(scale(score, -1.0));
}

Matrix solve_linear(Matrix a, Matrix b) {
    const int n = a.rows;
    if (a.cols != n) throw ShapeError("solve_linear requires square A, got " + a.shape_str());
    if (b.rows != n) {
        throw ShapeError("solve_linear dimension mismatch: A " + a.shape_str() + ", B " +
                         b.shape_str());
    }
    const int m = b.cols;
    double scale_ref = 0.0;
    for (double x : a.data) scale_ref = std::max(scale_ref, std::fabs(x));
    const double pivot_tol = std::max(scale_ref, 1.0) * 1e-12 * n;

    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r) {
            if (std::fabs(a.at(r, col)) > std::fabs(a.at(pivot, col))) pivot = r;
        }
        if (std::fabs(a.at(pivot, col)) <= pivot_tol) {
            throw MetricError("solve_linear: matrix is singular to working precision at column " +
                              std::to_string(col));
        }
        if (pivot != col) {
            for (int j = 0; j < n; ++j) std::swap(a.at(col, j), a.at(pivot, j));
            for (int j = 0; j < m; ++j) std::swap(b.at(col, j), b.at(pivot, j));
        }
        const double d = a.at(col, col);
        for (int r = col + 1; r < n; ++r) {
            const double f = a.at(r, col) / d;
            if (f == 0.0) continue;
            for (int j = col; j < n; ++j) a.at(r, j) -= f * a.at(col, j);
            for (int j = 0; j < m; ++j) b.at(r, j) -= f * b.at(col, j);
        }
    }
    Matrix x(n, m);
    for (int r = n - 1; r >= 0; --r) {
        for (int j = 0; j < m; ++j) {
            double s = b.at(r, j);
            for (int k = r + 1; k < n; ++k) s -= a.at(r, k) * x.at(k, j);
            x.at(r, j) = s / a.at(r, r);
        }
    }
    require_finite(x, "solve_linear");
    return x;
}

namespace {

/// All eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
std::vector<double> jacobi_eigenvalues(Matrix a) {
    const int n = a.rows;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += a.at(i, j) * a.at(i, j);
        if (off < 1e-26 * std::max(1.0, frobenius_norm(a))) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a.at(p, q);
                if (std::fabs(apq) < 1e-300) continue;
                const double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a.at(k, p);
                    const double akq = a.at(k, q);
                    a.at(k, p) = c * akp - s * akq;
                    a.at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a.at(p, k);
                    const double aqk = a.at(q, k);
                    a.at(p, k) = c * apk - s * aqk;
                    a.at(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> eig(n);
    for (int i = 0; i < n; ++i) eig[static_cast<size_t>(i)] = a.at(i, i);
    return eig;
}

}  // namespace

double condition_number(const Matrix& a) {
    if (a.rows != a.cols) {
        throw ShapeError("condition_number requires a square matrix, got " + a.shape_str());
    }
    const Matrix ata = matmul(transpose(a), a);
    std::vector<double> eig = jacobi_eigenvalues(ata);
    const double lmax = *std::max_element(eig.begin(), eig.end());
    const double lmin = *std::min_element(eig.begin(), eig.end());
    if (lmin <= 0.0) return std::numeric_limits<double>::infinity();
    return std::sqrt(lmax / lmin);
}

}  // namespace groupinv
