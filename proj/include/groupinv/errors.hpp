#pragma once

#include <stdexcept>
#include <string>

namespace groupinv {

/// Dimension mismatch between operands; message names both shapes.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A precondition of an operation was violated by the caller.
struct ContractError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A value left the finite range (NaN/Inf) inside a numeric kernel.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed on-disk data (CSV, JSON, checkpoint).
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid experiment configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The synthetic generator could not satisfy its own constraints.
struct GenerationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A sampling draw hit an empty (group, class) cell.
struct SamplingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A metric's input was degenerate (single class, zero variance, ...).
struct MetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Training aborted; message carries epoch/batch diagnostics.
struct TrainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A required on-disk artifact (dataset, checkpoint, embeddings) is absent.
struct MissingArtifactError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace groupinv
