#include "groupinv/model.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "groupinv/errors.hpp"

namespace groupinv {

namespace {
constexpr double kHiddenSlope = 0.01;

Matrix plain_linear(const Matrix& x, const Matrix& w, const Matrix& b) {
    Matrix out = matmul(x, w);
    for (int i = 0; i < out.rows; ++i) {
        for (int j = 0; j < out.cols; ++j) out.at(i, j) += b.at(0, j);
    }
    return out;
}
}  // namespace

void ModelSpec::validate() const {
    if (input_dim < 1) throw ConfigError("model input_dim must be >= 1");
    if (latent_dim < 1) throw ConfigError("model latent_dim must be >= 1");
    for (int h : hidden) {
        if (h < 1) throw ConfigError("hidden layer widths must be >= 1");
    }
}

TapeValue FeatureExtractor::forward(Tape& tape, TapeValue x_in) const {
    if (tape.value(x_in).cols != spec.input_dim) {
        throw ShapeError("extractor input has " + std::to_string(tape.value(x_in).cols) +
                         " columns, expected " + std::to_string(spec.input_dim));
    }
    TapeValue h = x_in;
    const size_t layers = weights.size();
    for (size_t l = 0; l < layers; ++l) {
        TapeValue w = tape.parameter(weights[l]);
        TapeValue b = tape.parameter(biases[l]);
        h = tape.add_row(tape.matmul(h, w), b);
        h = l + 1 < layers ? tape.leaky_relu(h, kHiddenSlope) : tape.sigmoid(h);
    }
    return h;
}

Matrix FeatureExtractor::forward(const Matrix& x) const {
    if (x.cols != spec.input_dim) {
        throw ShapeError("extractor input has " + std::to_string(x.cols) +
                         " columns, expected " + std::to_string(spec.input_dim));
    }
    Matrix h = x;
    const size_t layers = weights.size();
    for (size_t l = 0; l < layers; ++l) {
        h = plain_linear(h, weights[l], biases[l]);
        for (double& v : h.data) {
            v = l + 1 < layers ? (v > 0.0 ? v : kHiddenSlope * v) : sigmoid_stable(v);
        }
    }
    require_finite(h, "extractor forward");
    return h;
}

std::vector<Matrix*> FeatureExtractor::params() {
    std::vector<Matrix*> out;
    for (size_t l = 0; l < weights.size(); ++l) {
        out.push_back(&weights[l]);
        out.push_back(&biases[l]);
    }
    return out;
}

std::vector<const Matrix*> FeatureExtractor::params() const {
    std::vector<const Matrix*> out;
    for (size_t l = 0; l < weights.size(); ++l) {
        out.push_back(&weights[l]);
        out.push_back(&biases[l]);
    }
    return out;
}

TapeValue ClassifierHead::logit(Tape& tape, TapeValue z) const {
    TapeValue w = tape.parameter(weight);
    TapeValue b = tape.parameter(bias);
    return tape.add_row(tape.matmul(z, w), b);
}

Matrix ClassifierHead::logit(const Matrix& z) const {
    Matrix out = plain_linear(z, weight, bias);
    require_finite(out, "classifier logit");
    return out;
}

std::vector<Matrix*> ClassifierHead::params() { return {&weight, &bias}; }
std::vector<const Matrix*> ClassifierHead::params() const { return {&weight, &bias}; }

std::vector<Matrix*> Model::params() {
    std::vector<Matrix*> out = phi.params();
    for (Matrix* p : psi.params()) out.push_back(p);
    return out;
}

std::vector<const Matrix*> Model::params() const {
    std::vector<const Matrix*> out = phi.params();
    for (const Matrix* p : psi.params()) out.push_back(p);
    return out;
}

Model init_model(const ModelSpec& spec, Rng& rng) {
    spec.validate();
    Model model;
    model.phi.spec = spec;

    std::vector<int> dims;
    dims.push_back(spec.input_dim);
    for (int h : spec.hidden) dims.push_back(h);
    dims.push_back(spec.latent_dim);

    for (size_t l = 0; l + 1 < dims.size(); ++l) {
        const int fan_in = dims[l];
        const int fan_out = dims[l + 1];
        const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Matrix w(fan_in, fan_out);
        for (double& v : w.data) v = rng.uniform(-a, a);
        model.phi.weights.push_back(std::move(w));
        model.phi.biases.push_back(Matrix::zeros(1, fan_out));
    }

    const double a = std::sqrt(6.0 / static_cast<double>(spec.latent_dim + 1));
    model.psi.weight = Matrix(spec.latent_dim, 1);
    for (double& v : model.psi.weight.data) v = rng.uniform(-a, a);
    model.psi.bias = Matrix::zeros(1, 1);
    return model;
}

// ---------------------------------------------------------------------------
// Checkpoint I/O
//
// The manifest records the architecture and, per parameter tensor, its shape
// and byte offset into the blob. The blob is the concatenation of all tensors
// in Model::params() order as little-endian IEEE-754 float64, which makes the
// round trip bit-exact.
// ---------------------------------------------------------------------------

namespace {

void write_le_f64(std::ofstream& out, const std::vector<double>& values) {
    for (double v : values) {
        uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        unsigned char bytes[8];
        for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
        out.write(reinterpret_cast<const char*>(bytes), 8);
    }
}

std::vector<double> read_le_f64(std::ifstream& in, size_t count, const std::string& path) {
    std::vector<double> values(count);
    std::vector<unsigned char> bytes(count * 8);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<size_t>(in.gcount()) != bytes.size()) {
        throw ParseError("checkpoint blob " + path + " is truncated");
    }
    for (size_t i = 0; i < count; ++i) {
        uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) {
            bits |= static_cast<uint64_t>(bytes[i * 8 + static_cast<size_t>(b)]) << (8 * b);
        }
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        values[i] = v;
    }
    return values;
}

}  // namespace

void save_checkpoint(const Model& model, const std::string& json_path,
                     const std::string& bin_path) {
    nlohmann::json manifest;
    manifest["format"] = "groupinv-checkpoint";
    manifest["version"] = 1;
    manifest["dtype"] = "f64le";
    manifest["arch"] = {{"input_dim", model.phi.spec.input_dim},
                        {"hidden", model.phi.spec.hidden},
                        {"latent_dim", model.phi.spec.latent_dim}};

    nlohmann::json tensors = nlohmann::json::array();
    size_t offset = 0;
    const auto params = model.params();
    for (size_t i = 0; i < params.size(); ++i) {
        const Matrix& m = *params[i];
        tensors.push_back({{"index", i},
                           {"rows", m.rows},
                           {"cols", m.cols},
                           {"offset_bytes", offset}});
        offset += m.data.size() * 8;
    }
    manifest["tensors"] = tensors;
    manifest["blob_bytes"] = offset;

    std::ofstream jf(json_path, std::ios::binary);
    if (!jf) throw ContractError("cannot open " + json_path + " for writing");
    jf << manifest.dump(2) << "\n";
    if (!jf) throw ContractError("failed writing checkpoint manifest " + json_path);

    std::ofstream bf(bin_path, std::ios::binary);
    if (!bf) throw ContractError("cannot open " + bin_path + " for writing");
    for (const Matrix* m : params) write_le_f64(bf, m->data);
    if (!bf) throw ContractError("failed writing checkpoint blob " + bin_path);
}

Model load_checkpoint(const std::string& json_path, const std::string& bin_path) {
    std::ifstream jf(json_path, std::ios::binary);
    if (!jf) throw MissingArtifactError("checkpoint manifest not found: " + json_path);
    nlohmann::json manifest;
    try {
        jf >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("checkpoint manifest " + json_path + ": " + e.what());
    }
    if (manifest.value("format", "") != "groupinv-checkpoint") {
        throw ParseError("checkpoint manifest " + json_path + " has unknown format tag");
    }
    if (manifest.value("dtype", "") != "f64le") {
        throw ParseError("checkpoint manifest " + json_path + " has unsupported dtype");
    }

    ModelSpec spec;
    try {
        const auto& arch = manifest.at("arch");
        spec.input_dim = arch.at("input_dim").get<int>();
        spec.hidden = arch.at("hidden").get<std::vector<int>>();
        spec.latent_dim = arch.at("latent_dim").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("checkpoint manifest " + json_path + " arch block: " + e.what());
    }
    spec.validate();

    // Rebuild empty tensors in enumeration order, then fill from the blob.
    Model model;
    model.phi.spec = spec;
    std::vector<int> dims;
    dims.push_back(spec.input_dim);
    for (int h : spec.hidden) dims.push_back(h);
    dims.push_back(spec.latent_dim);
    for (size_t l = 0; l + 1 < dims.size(); ++l) {
        model.phi.weights.push_back(Matrix::zeros(dims[l], dims[l + 1]));
        model.phi.biases.push_back(Matrix::zeros(1, dims[l + 1]));
    }
    model.psi.weight = Matrix::zeros(spec.latent_dim, 1);
    model.psi.bias = Matrix::zeros(1, 1);

    auto params = model.params();
    const auto& tensors = manifest.at("tensors");
    if (tensors.size() != params.size()) {
        throw ParseError("checkpoint manifest " + json_path + " lists " +
                         std::to_string(tensors.size()) + " tensors, architecture implies " +
                         std::to_string(params.size()));
    }

    std::ifstream bf(bin_path, std::ios::binary);
    if (!bf) throw MissingArtifactError("checkpoint blob not found: " + bin_path);
    for (size_t i = 0; i < params.size(); ++i) {
        const auto& t = tensors[i];
        const int rows = t.at("rows").get<int>();
        const int cols = t.at("cols").get<int>();
        if (rows != params[i]->rows || cols != params[i]->cols) {
            throw ParseError("checkpoint tensor " + std::to_string(i) + " is " +
                             std::to_string(rows) + "x" + std::to_string(cols) +
                             ", architecture implies " + params[i]->shape_str());
        }
        params[i]->data = read_le_f64(bf, params[i]->data.size(), bin_path);
    }
    return model;
}

}  // namespace groupinv
