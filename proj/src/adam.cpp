#include "groupinv/adam.hpp"

#include <cmath>

namespace groupinv {

AdamState AdamState::like(const std::vector<Matrix*>& params) {
    AdamState s;
    s.m.reserve(params.size());
    s.v.reserve(params.size());
    for (const Matrix* p : params) {
        s.m.push_back(Matrix::zeros(p->rows, p->cols));
        s.v.push_back(Matrix::zeros(p->rows, p->cols));
    }
    return s;
}

void adam_step(const std::vector<Matrix*>& params, const std::vector<Matrix>& grads,
               AdamState& state, const AdamConfig& cfg) {
    if (params.size() != grads.size() || params.size() != state.m.size() ||
        params.size() != state.v.size()) {
        throw ShapeError("adam_step: params/grads/state counts differ: " +
                         std::to_string(params.size()) + "/" + std::to_string(grads.size()) +
                         "/" + std::to_string(state.m.size()));
    }
    for (size_t i = 0; i < params.size(); ++i) {
        if (!params[i]->same_shape(grads[i]) || !params[i]->same_shape(state.m[i])) {
            throw ShapeError("adam_step: shape mismatch at parameter " + std::to_string(i) +
                             ": param " + params[i]->shape_str() + ", grad " +
                             grads[i].shape_str() + ", state " + state.m[i].shape_str());
        }
    }

    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);

    for (size_t i = 0; i < params.size(); ++i) {
        Matrix& p = *params[i];
        const Matrix& g = grads[i];
        Matrix& m = state.m[i];
        Matrix& v = state.v[i];
        for (size_t e = 0; e < p.data.size(); ++e) {
            m.data[e] = cfg.beta1 * m.data[e] + (1.0 - cfg.beta1) * g.data[e];
            v.data[e] = cfg.beta2 * v.data[e] + (1.0 - cfg.beta2) * g.data[e] * g.data[e];
            const double mhat = m.data[e] / bc1;
            const double vhat = v.data[e] / bc2;
            p.data[e] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
        require_finite(p, "adam_step");
    }
}

}  // namespace groupinv
