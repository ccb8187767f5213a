#pragma once

#include <string>
#include <vector>

#include "groupinv/errors.hpp"

namespace groupinv {

/// Dense row-major matrix of 64-bit floats. Plain value type: copyable,
/// movable, no shared state. Every public operation keeps entries finite.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;  // row-major, size rows*cols

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}
    Matrix(int r, int c, std::vector<double> d);

    static Matrix zeros(int r, int c) { return Matrix(r, c); }
    static Matrix full(int r, int c, double v);
    static Matrix identity(int n);
    /// 1x1 wrapper for scalars.
    static Matrix scalar(double v);

    double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
    std::string shape_str() const;
    size_t size() const { return data.size(); }

    bool operator==(const Matrix& o) const = default;
};

/// "RxC" for error messages.
std::string shape_str(int rows, int cols);

bool all_finite(const Matrix& m);
/// Throws NumericError if any entry is NaN/Inf; `what` names the operation.
void require_finite(const Matrix& m, const char* what);

/// Standard product; throws ShapeError naming both shapes on mismatch.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double c);

double sum_all(const Matrix& m);
double mean_all(const Matrix& m);
double frobenius_norm(const Matrix& m);
double dot(const Matrix& a, const Matrix& b);  // flattened inner product

}  // namespace groupinv
