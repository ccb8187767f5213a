#pragma once

#include <functional>
#include <vector>

#include "groupinv/tape.hpp"

namespace groupinv {

/// Builds a scalar loss on the given tape from parameter leaves staged in the
/// same order as the `params` vector passed to check_gradients.
using ScalarFn = std::function<TapeValue(Tape&, const std::vector<TapeValue>&)>;

struct GradCheckEntry {
    int param;        // index into the params vector
    int entry;        // flat index inside that matrix
    double analytic;
    double numeric;
    double rel_error;
};

struct GradCheckReport {
    double max_rel_error = 0.0;
    bool pass = true;
    GradCheckEntry worst{};  // entry attaining max_rel_error
    int entries_checked = 0;
};

/// Compares reverse-mode gradients of f against central finite differences
/// (f(p+h) - f(p-h)) / 2h, entry by entry. Relative error is
/// |analytic - numeric| / max(1, |analytic|, |numeric|), so near-zero
/// gradients are compared on an absolute scale.
GradCheckReport check_gradients(const ScalarFn& f, const std::vector<Matrix>& params, double h,
                                double tol);

}  // namespace groupinv
