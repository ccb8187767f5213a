#pragma once

#include <string>
#include <vector>

#include "groupinv/matrix.hpp"
#include "groupinv/rng.hpp"
#include "groupinv/tape.hpp"

namespace groupinv {

/// Layer sizes for the feature extractor: input -> hidden... -> latent.
struct ModelSpec {
    int input_dim = 0;
    std::vector<int> hidden = {64, 64};
    int latent_dim = 8;

    void validate() const;
};

/// MLP feature extractor. Hidden layers use leaky ReLU (slope 0.01); the
/// output layer is squashed with a sigmoid so the latent lives in (0, 1)^N.
struct FeatureExtractor {
    ModelSpec spec;
    std::vector<Matrix> weights;  // weights[l] is (in_l x out_l)
    std::vector<Matrix> biases;   // biases[l] is (1 x out_l)

    /// Forward through the tape; x_in must be (B x input_dim).
    TapeValue forward(Tape& tape, TapeValue x_in) const;
    /// Plain forward for evaluation paths that do not need gradients.
    Matrix forward(const Matrix& x) const;

    std::vector<Matrix*> params();
    std::vector<const Matrix*> params() const;
};

/// Linear head mapping latents to a single logit per row.
struct ClassifierHead {
    Matrix weight;  // (latent_dim x 1)
    Matrix bias;    // (1 x 1)

    TapeValue logit(Tape& tape, TapeValue z) const;
    Matrix logit(const Matrix& z) const;

    std::vector<Matrix*> params();
    std::vector<const Matrix*> params() const;
};

/// Extractor + head bundle with joint parameter enumeration order
/// (extractor weights/biases layer by layer, then head weight, head bias).
/// That order is the checkpoint layout contract.
struct Model {
    FeatureExtractor phi;
    ClassifierHead psi;

    std::vector<Matrix*> params();
    std::vector<const Matrix*> params() const;
};

/// Glorot-uniform initialisation: weights ~ U(-a, a) with
/// a = sqrt(6 / (fan_in + fan_out)); biases start at zero.
Model init_model(const ModelSpec& spec, Rng& rng);

/// Checkpoints are a JSON manifest plus a little-endian float64 blob.
/// Loading a saved model reproduces every parameter bit for bit.
void save_checkpoint(const Model& model, const std::string& json_path,
                     const std::string& bin_path);
Model load_checkpoint(const std::string& json_path, const std::string& bin_path);

}  // namespace groupinv
