#pragma once

#include <vector>

#include "groupinv/matrix.hpp"

namespace groupinv {

struct AdamConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// First/second moment buffers, one pair per parameter matrix.
struct AdamState {
    std::vector<Matrix> m;
    std::vector<Matrix> v;
    long step = 0;

    static AdamState like(const std::vector<Matrix*>& params);
};

/// One bias-corrected Adam update, in place. Throws ShapeError when params,
/// grads and state disagree on shapes.
void adam_step(const std::vector<Matrix*>& params, const std::vector<Matrix>& grads,
               AdamState& state, const AdamConfig& cfg);

}  // namespace groupinv
