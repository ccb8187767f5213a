#pragma once

#include <optional>
#include <vector>

#include "groupinv/dataset.hpp"

namespace groupinv {

/// Hyperplane on the content vector deciding the binary label.
struct LabelRule {
    std::vector<double> w;
    double b = 0.0;
};

/// Synthetic content/style generative process with known ground truth.
///
/// Content is shared across groups, style is group-conditional, and the
/// observation is a smooth invertible mixture of both, so recovery of the
/// content factors is checkable against stored ground truth.
struct GenerativeSpec {
    int n_content = 2;
    int n_style = 2;
    int groups = 2;                                   // K
    std::vector<std::vector<double>> group_style_means;   // K x n_style
    std::vector<std::vector<double>> group_style_scales;  // K x n_style, positive
    LabelRule label_rule;
    int mixing_depth = 1;
    uint64_t mixing_seed = 0;
    /// In [0,1]: probability that a sample's group id is forced to its label
    /// (mod K) instead of drawn uniformly. 0 keeps group and label
    /// independent, which is the default.
    double group_label_correlation = 0.0;

    int obs_dim() const { return n_content + n_style; }

    /// Fills unset fields with workable defaults: style means spread
    /// symmetrically on all style dims, scales 0.1, and a label hyperplane
    /// through the origin (validated below).
    static GenerativeSpec defaults(int n_content, int n_style, int groups, uint64_t seed);

    /// Checks dims, positivity and correlation range; throws ConfigError.
    void validate() const;
};

/// Draws a label rule whose classes are both hit with probability >= 0.2,
/// estimated on a probe of content draws; re-draws up to `max_attempts`
/// times and throws GenerationError after that.
LabelRule draw_label_rule(int n_content, Rng& rng, int max_attempts = 100);

/// Generates n samples: content ~ N(0, I), label from the rule, style from
/// the sample's group distribution, observation through the mixing stack.
/// Throws GenerationError when labels come out single-class after bounded
/// re-draws, and ContractError when n < 2 * groups.
GroupedDataset generate(const GenerativeSpec& spec, int n, Rng& rng);

/// Spec for a held-out-group shift: one new group whose style mean is
/// linearly extrapolated past the last group, same mixing and label rule.
GenerativeSpec shifted_group_spec(const GenerativeSpec& spec, double factor = 1.0);

/// The deterministic mixing stack used by generate(); exposed so evaluation
/// code can re-derive observations if needed.
class MixingStack {
  public:
    MixingStack(int dim, int depth, uint64_t mixing_seed);
    std::vector<double> apply(const std::vector<double>& v) const;
    int depth() const { return static_cast<int>(blocks_.size()); }

  private:
    std::vector<Matrix> blocks_;  // square, condition number < 25 each
};

}  // namespace groupinv
