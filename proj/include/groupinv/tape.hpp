#pragma once

#include <vector>

#include "groupinv/matrix.hpp"

namespace groupinv {

/// Handle to a node on a Tape.
struct TapeValue {
    int id = -1;
    bool valid() const { return id >= 0; }
};

/// Reverse-mode gradient engine over matrix-valued primitives.
///
/// Nodes are appended in evaluation order, so the node list is already a
/// topological order; backward() is a single reverse sweep that visits each
/// node at most once. Leaves registered via parameter() are the
/// differentiation targets; constants never receive gradient.
///
/// Every primitive validates shapes on entry and finiteness of its result,
/// so a NaN/Inf produced anywhere surfaces as a NumericError at the op that
/// created it.
class Tape {
  public:
    TapeValue constant(Matrix v) { return push(Op::kLeaf, -1, -1, 0.0, std::move(v), false); }
    TapeValue parameter(Matrix v) { return push(Op::kLeaf, -1, -1, 0.0, std::move(v), true); }

    TapeValue matmul(TapeValue a, TapeValue b);
    TapeValue add(TapeValue a, TapeValue b);
    TapeValue sub(TapeValue a, TapeValue b);
    TapeValue hadamard(TapeValue a, TapeValue b);
    TapeValue scale(TapeValue a, double c);
    /// Broadcast-add a 1xC row to every row of a (RxC).
    TapeValue add_row(TapeValue a, TapeValue row);
    TapeValue sigmoid(TapeValue a);
    TapeValue leaky_relu(TapeValue a, double slope);
    /// log(1 + exp(x)) evaluated in overflow-safe form.
    TapeValue softplus(TapeValue a);
    TapeValue exp(TapeValue a);
    TapeValue log(TapeValue a);
    TapeValue sum(TapeValue a);   // -> 1x1
    TapeValue mean(TapeValue a);  // -> 1x1
    /// BxN -> BxB matrix of squared Euclidean row distances.
    TapeValue pairwise_sqdist(TapeValue a);
    /// Value copy with no backward edge (gradient barrier).
    TapeValue detach(TapeValue a);

    const Matrix& value(TapeValue v) const;
    /// Gradient of the last backward() output w.r.t. node v. Nodes that are
    /// not on any path to the output report exact zeros.
    Matrix gradient(TapeValue v) const;
    /// All parameter leaves in registration order.
    std::vector<TapeValue> parameter_nodes() const;

    /// Reverse sweep from a 1x1 node; throws ContractError otherwise.
    void backward(TapeValue scalar_output);
    void zero_grads();
    void clear() { nodes_.clear(); }
    int node_count() const { return static_cast<int>(nodes_.size()); }

  private:
    enum class Op {
        kLeaf,
        kMatmul,
        kAdd,
        kSub,
        kHadamard,
        kScale,
        kAddRow,
        kSigmoid,
        kLeakyRelu,
        kSoftplus,
        kExp,
        kLog,
        kSum,
        kMean,
        kPairwiseSqDist,
        kDetach,
    };

    struct Node {
        Op op;
        int a;
        int b;
        double aux;
        Matrix value;
        Matrix grad;  // empty until touched by backward
        bool is_param;
    };

    std::vector<Node> nodes_;

    TapeValue push(Op op, int a, int b, double aux, Matrix value, bool is_param);
    const Node& node(TapeValue v) const;
    void accumulate(int id, const Matrix& g);
    void backprop_node(int id);
};

/// Gradients of a scalar output w.r.t. a list of parameter leaves, in order.
std::vector<Matrix> backward(Tape& tape, TapeValue scalar_output,
                             const std::vector<TapeValue>& params);

// Plain (non-recording) math shared with the tape kernels, so inference and
// training produce bit-identical forward values.
double sigmoid_stable(double x);
double softplus_stable(double x);

}  // namespace groupinv
