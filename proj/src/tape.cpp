#include "groupinv/tape.hpp"

#include <cmath>
#include <limits>

namespace groupinv {

double sigmoid_stable(double x) {
    double s;
    if (x >= 0.0) {
        s = 1.0 / (1.0 + std::exp(-x));
    } else {
        const double e = std::exp(x);
        s = e / (1.0 + e);
    }
    // Keep the codomain an open interval even when exp underflows.
    if (s <= 0.0) s = std::numeric_limits<double>::denorm_min();
    if (s >= 1.0) s = 1.0 - std::numeric_limits<double>::epsilon() / 2;
    return s;
}

double softplus_stable(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

TapeValue Tape::push(Op op, int a, int b, double aux, Matrix value, bool is_param) {
    nodes_.push_back(Node{op, a, b, aux, std::move(value), Matrix{}, is_param});
    return TapeValue{static_cast<int>(nodes_.size()) - 1};
}

const Tape::Node& Tape::node(TapeValue v) const {
    if (!v.valid() || v.id >= static_cast<int>(nodes_.size())) {
        throw ContractError("invalid tape handle");
    }
    return nodes_[static_cast<size_t>(v.id)];
}

const Matrix& Tape::value(TapeValue v) const { return node(v).value; }

Matrix Tape::gradient(TapeValue v) const {
    const Node& n = node(v);
    if (n.grad.data.empty()) return Matrix::zeros(n.value.rows, n.value.cols);
    return n.grad;
}

std::vector<TapeValue> Tape::parameter_nodes() const {
    std::vector<TapeValue> out;
    for (size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].is_param) out.push_back({static_cast<int>(i)});
    }
    return out;
}

TapeValue Tape::matmul(TapeValue a, TapeValue b) {
    Matrix out = groupinv::matmul(value(a), value(b));
    require_finite(out, "matmul");
    return push(Op::kMatmul, a.id, b.id, 0.0, std::move(out), false);
}

TapeValue Tape::add(TapeValue a, TapeValue b) {
    Matrix out = groupinv::add(value(a), value(b));
    require_finite(out, "add");
    return push(Op::kAdd, a.id, b.id, 0.0, std::move(out), false);
}

TapeValue Tape::sub(TapeValue a, TapeValue b) {
    Matrix out = groupinv::sub(value(a), value(b));
    require_finite(out, "sub");
    return push(Op::kSub, a.id, b.id, 0.0, std::move(out), false);
}

TapeValue Tape::hadamard(TapeValue a, TapeValue b) {
    Matrix out = groupinv::hadamard(value(a), value(b));
    require_finite(out, "hadamard");
    return push(Op::kHadamard, a.id, b.id, 0.0, std::move(out), false);
}

TapeValue Tape::scale(TapeValue a, double c) {
    Matrix out = groupinv::scale(value(a), c);
    require_finite(out, "scale");
    return push(Op::kScale, a.id, -1, c, std::move(out), false);
}

TapeValue Tape::add_row(TapeValue a, TapeValue row) {
    const Matrix& m = value(a);
    const Matrix& r = value(row);
    if (r.rows != 1 || r.cols != m.cols) {
        throw ShapeError("add_row shape mismatch: " + m.shape_str() + " + " + r.shape_str());
    }
    Matrix out = m;
    for (int i = 0; i < out.rows; ++i)
        for (int j = 0; j < out.cols; ++j) out.at(i, j) += r.at(0, j);
    require_finite(out, "add_row");
    return push(Op::kAddRow, a.id, row.id, 0.0, std::move(out), false);
}

TapeValue Tape::sigmoid(TapeValue a) {
    Matrix out = value(a);
    for (double& v : out.data) v = sigmoid_stable(v);
    require_finite(out, "sigmoid");
    return push(Op::kSigmoid, a.id, -1, 0.0, std::move(out), false);
}

TapeValue Tape::leaky_relu(TapeValue a, double slope) {
    Matrix out = value(a);
    for (double& v : out.data) v = v > 0.0 ? v : slope * v;
    require_finite(out, "leaky_relu");
    return push(Op::kLeakyRelu, a.id, -1, slope, std::move(out), false);
}

TapeValue Tape::softplus(TapeValue a) {
    Matrix out = value(a);
    for (double& v : out.data) v = softplus_stable(v);
    require_finite(out, "softplus");
    return push(Op::kSoftplus, a.id, -1, 0.0, std::move(out), false);
}

TapeValue Tape::exp(TapeValue a) {
    Matrix out = value(a);
    for (double& v : out.data) v = std::exp(v);
    require_finite(out, "exp");
    return push(Op::kExp, a.id, -1, 0.0, std::move(out), false);
}

TapeValue Tape::log(TapeValue a) {
    Matrix out = value(a);
    for (double& v : out.data) v = std::log(v);
    require_finite(out, "log");
    return push(Op::kLog, a.id, -1, 0.0, std::move(out), false);
}

TapeValue Tape::sum(TapeValue a) {
    return push(Op::kSum, a.id, -1, 0.0, Matrix::scalar(sum_all(value(a))), false);
}

TapeValue Tape::mean(TapeValue a) {
    return push(Op::kMean, a.id, -1, 0.0, Matrix::scalar(mean_all(value(a))), false);
}

TapeValue Tape::pairwise_sqdist(TapeValue a) {
    const Matrix& z = value(a);
    const int n = z.rows;
    Matrix out(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double d = 0.0;
            for (int k = 0; k < z.cols; ++k) {
                const double diff = z.at(i, k) - z.at(j, k);
                d += diff * diff;
            }
            out.at(i, j) = d;
            out.at(j, i) = d;
        }
    }
    require_finite(out, "pairwise_sqdist");
    return push(Op::kPairwiseSqDist, a.id, -1, 0.0, std::move(out), false);
}

TapeValue Tape::detach(TapeValue a) {
    return push(Op::kDetach, -1, -1, 0.0, value(a), false);
}

void Tape::accumulate(int id, const Matrix& g) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (n.grad.data.empty()) {
        n.grad = g;
    } else {
        for (size_t i = 0; i < n.grad.data.size(); ++i) n.grad.data[i] += g.data[i];
    }
}

void Tape::backprop_node(int id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    const Matrix& g = n.grad;
    switch (n.op) {
        case Op::kLeaf:
        case Op::kDetach:
            break;
        case Op::kMatmul: {
            const Matrix& a = nodes_[n.a].value;
            const Matrix& b = nodes_[n.b].value;
            accumulate(n.a, groupinv::matmul(g, transpose(b)));
            accumulate(n.b, groupinv::matmul(transpose(a), g));
            break;
        }
        case Op::kAdd:
            accumulate(n.a, g);
            accumulate(n.b, g);
            break;
        case Op::kSub:
            accumulate(n.a, g);
            accumulate(n.b, groupinv::scale(g, -1.0));
            break;
        case Op::kHadamard:
            accumulate(n.a, groupinv::hadamard(g, nodes_[n.b].value));
            accumulate(n.b, groupinv::hadamard(g, nodes_[n.a].value));
            break;
        case Op::kScale:
            accumulate(n.a, groupinv::scale(g, n.aux));
            break;
        case Op::kAddRow: {
            accumulate(n.a, g);
            Matrix rg(1, g.cols);
            for (int i = 0; i < g.rows; ++i)
                for (int j = 0; j < g.cols; ++j) rg.at(0, j) += g.at(i, j);
            accumulate(n.b, rg);
            break;
        }
        case Op::kSigmoid: {
            Matrix ga = g;
            for (size_t i = 0; i < ga.data.size(); ++i) {
                const double s = n.value.data[i];
                ga.data[i] *= s * (1.0 - s);
            }
            accumulate(n.a, ga);
            break;
        }
        case Op::kLeakyRelu: {
            const Matrix& x = nodes_[n.a].value;
            Matrix ga = g;
            for (size_t i = 0; i < ga.data.size(); ++i) {
                ga.data[i] *= x.data[i] > 0.0 ? 1.0 : n.aux;
            }
            accumulate(n.a, ga);
            break;
        }
        case Op::kSoftplus: {
            const Matrix& x = nodes_[n.a].value;
            Matrix ga = g;
            for (size_t i = 0; i < ga.data.size(); ++i) ga.data[i] *= sigmoid_stable(x.data[i]);
            accumulate(n.a, ga);
            break;
        }
        case Op::kExp: {
            Matrix ga = g;
            for (size_t i = 0; i < ga.data.size(); ++i) ga.data[i] *= n.value.data[i];
            accumulate(n.a, ga);
            break;
        }
        case Op::kLog: {
            const Matrix& x = nodes_[n.a].value;
            Matrix ga = g;
            for (size_t i = 0; i < ga.data.size(); ++i) ga.data[i] /= x.data[i];
            accumulate(n.a, ga);
            break;
        }
        case Op::kSum: {
            const Matrix& x = nodes_[n.a].value;
            accumulate(n.a, Matrix::full(x.rows, x.cols, g.data[0]));
            break;
        }
        case Op::kMean: {
            const Matrix& x = nodes_[n.a].value;
            accumulate(n.a,
                       Matrix::full(x.rows, x.cols, g.data[0] / static_cast<double>(x.size())));
            break;
        }
        case Op::kPairwiseSqDist: {
            // dL/dz_i = 2 * sum_j (g_ij + g_ji) * (z_i - z_j)
            const Matrix& z = nodes_[n.a].value;
            Matrix gz(z.rows, z.cols);
            for (int i = 0; i < z.rows; ++i) {
                for (int j = 0; j < z.rows; ++j) {
                    if (i == j) continue;
                    const double w = 2.0 * (g.at(i, j) + g.at(j, i));
                    if (w == 0.0) continue;
                    for (int k = 0; k < z.cols; ++k) {
                        gz.at(i, k) += w * (z.at(i, k) - z.at(j, k));
                    }
                }
            }
            accumulate(n.a, gz);
            break;
        }
    }
}

void Tape::backward(TapeValue scalar_output) {
    const Node& out = node(scalar_output);
    if (out.value.rows != 1 || out.value.cols != 1) {
        throw ContractError("backward requires a scalar (1x1) output, got " +
                            out.value.shape_str());
    }
    accumulate(scalar_output.id, Matrix::scalar(1.0));
    for (int i = scalar_output.id; i >= 0; --i) {
        if (nodes_[static_cast<size_t>(i)].grad.data.empty()) continue;
        backprop_node(i);
    }
}

void Tape::zero_grads() {
    for (Node& n : nodes_) n.grad = Matrix{};
}

std::vector<Matrix> backward(Tape& tape, TapeValue scalar_output,
                             const std::vector<TapeValue>& params) {
    tape.backward(scalar_output);
    std::vector<Matrix> grads;
    grads.reserve(params.size());
    for (TapeValue p : params) grads.push_back(tape.gradient(p));
    return grads;
}

}  // namespace groupinv
