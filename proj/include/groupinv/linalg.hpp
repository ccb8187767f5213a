#pragma once

#include <utility>
#include <vector>

#include "groupinv/matrix.hpp"

namespace groupinv {

struct EigenPair {
    double value = 0.0;
    Matrix vector;  // column (n x 1), unit norm
    int iterations = 0;
    bool converged = false;
};

/// Dominant (largest-magnitude) eigenpair of a symmetric matrix by power
/// iteration with a deterministic start vector.
EigenPair power_iteration_sym(const Matrix& a, double tol = 1e-13, int max_iters = 100000);

/// Minimum-cost one-to-one assignment on a square cost matrix (Hungarian
/// method, O(n^3) potentials formulation). Returns row -> column.
std::vector<int> solve_assignment_min(const Matrix& cost);

/// Maximum-total assignment, via cost negation.
std::vector<int> solve_assignment_max(const Matrix& score);

/// Solves A X = B by Gaussian elimination with partial pivoting. A is n x n,
/// B is n x m. Throws MetricError when A is singular to working precision.
Matrix solve_linear(Matrix a, Matrix b);

/// Ratio of largest to smallest singular value; used to reject badly
/// conditioned mixing blocks.
double condition_number(const Matrix& a);

}  // namespace groupinv
