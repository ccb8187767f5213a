#include "groupinv/generator.hpp"

#include <cmath>

#include "groupinv/linalg.hpp"

namespace groupinv {

namespace {
constexpr double kLeak = 0.1;          // linear leak of the mixing nonlinearity
constexpr double kMaxCondition = 25.0;  // invertibility bound per linear block

double leaky_tanh(double x) { return std::tanh(x) + kLeak * x; }
}  // namespace

GenerativeSpec GenerativeSpec::defaults(int n_content, int n_style, int groups, uint64_t seed) {
    GenerativeSpec spec;
    spec.n_content = n_content;
    spec.n_style = n_style;
    spec.groups = groups;
    Rng rng(seed);
    // Symmetric style means around the origin, +-1 per dim for two groups, and
    // scales well below the mean gap so the groups are cleanly decodable.
    const double spread = groups > 1 ? 2.0 / static_cast<double>(groups - 1) : 0.0;
    for (int k = 0; k < groups; ++k) {
        const double center = (static_cast<double>(k) - static_cast<double>(groups - 1) / 2.0) *
                              spread;
        spec.group_style_means.emplace_back(static_cast<size_t>(n_style), center);
        spec.group_style_scales.emplace_back(static_cast<size_t>(n_style), 0.1);
    }
    Rng rule_rng = rng.substream(stream::kLabelRule);
    spec.label_rule = draw_label_rule(n_content, rule_rng);
    spec.mixing_depth = 1;
    spec.mixing_seed = mix64(seed ^ mix64(stream::kMixing));
    return spec;
}

void GenerativeSpec::validate() const {
    if (n_content < 1) throw ConfigError("n_content must be >= 1");
    if (n_style < 0) throw ConfigError("n_style must be >= 0");
    if (groups < 1) throw ConfigError("groups must be >= 1");
    if (mixing_depth < 0) throw ConfigError("mixing_depth must be >= 0");
    if (group_style_means.size() != static_cast<size_t>(groups) ||
        group_style_scales.size() != static_cast<size_t>(groups)) {
        throw ConfigError("group_style_means/scales must have one entry per group");
    }
    for (int k = 0; k < groups; ++k) {
        if (group_style_means[static_cast<size_t>(k)].size() != static_cast<size_t>(n_style) ||
            group_style_scales[static_cast<size_t>(k)].size() != static_cast<size_t>(n_style)) {
            throw ConfigError("style mean/scale for group " + std::to_string(k) +
                              " must have n_style entries");
        }
        for (double s : group_style_scales[static_cast<size_t>(k)]) {
            if (s <= 0.0) throw ConfigError("style scales must be positive");
        }
    }
    if (label_rule.w.size() != static_cast<size_t>(n_content)) {
        throw ConfigError("label_rule.w must have n_content entries");
    }
    if (group_label_correlation < 0.0 || group_label_correlation > 1.0) {
        throw ConfigError("group_label_correlation must lie in [0, 1]");
    }
}

LabelRule draw_label_rule(int n_content, Rng& rng, int max_attempts) {
    if (n_content < 1) throw ConfigError("n_content must be >= 1");
    constexpr int kProbe = 4096;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        LabelRule rule;
        rule.w.resize(static_cast<size_t>(n_content));
        double norm = 0.0;
        for (double& w : rule.w) {
            w = rng.normal();
            norm += w * w;
        }
        norm = std::sqrt(norm);
        if (norm < 1e-12) continue;
        for (double& w : rule.w) w /= norm;
        // Bias within one sigma of the hyperplane keeps both classes likely.
        rule.b = rng.uniform(-0.5, 0.5);

        int positives = 0;
        for (int i = 0; i < kProbe; ++i) {
            double a = rule.b;
            for (double w : rule.w) a += w * rng.normal();
            if (a > 0.0) ++positives;
        }
        const double p = static_cast<double>(positives) / kProbe;
        if (p >= 0.2 && p <= 0.8) return rule;
    }
    throw GenerationError("could not draw a label rule with class balance in [0.2, 0.8] after " +
                          std::to_string(max_attempts) + " attempts");
}

MixingStack::MixingStack(int dim, int depth, uint64_t mixing_seed) {
    Rng rng(mixing_seed);
    const double sd = 1.0 / std::sqrt(static_cast<double>(dim));
    for (int layer = 0; layer < depth; ++layer) {
        // Resample until the block is comfortably invertible.
        for (int attempt = 0;; ++attempt) {
            if (attempt >= 1000) {
                throw GenerationError("could not draw a well-conditioned mixing block");
            }
            Matrix block(dim, dim);
            for (double& v : block.data) v = rng.normal(0.0, sd);
            if (condition_number(block) < kMaxCondition) {
                blocks_.push_back(std::move(block));
                break;
            }
        }
    }
}

std::vector<double> MixingStack::apply(const std::vector<double>& v) const {
    std::vector<double> cur = v;
    const int dim = static_cast<int>(v.size());
    std::vector<double> next(static_cast<size_t>(dim));
    for (const Matrix& block : blocks_) {
        for (int i = 0; i < dim; ++i) {
            double s = 0.0;
            for (int j = 0; j < dim; ++j) s += block.at(i, j) * cur[static_cast<size_t>(j)];
            next[static_cast<size_t>(i)] = leaky_tanh(s);
        }
        std::swap(cur, next);
    }
    return cur;
}

GroupedDataset generate(const GenerativeSpec& spec, int n, Rng& rng) {
    spec.validate();
    if (n < 2 * spec.groups) {
        throw ContractError("generate requires n >= 2 * groups, got n=" + std::to_string(n));
    }

    const MixingStack mixing(spec.obs_dim(), spec.mixing_depth, spec.mixing_seed);
    Rng content_rng = rng.substream(stream::kContent);
    Rng style_rng = rng.substream(stream::kStyle);
    Rng group_rng = rng.substream(stream::kGroup);

    constexpr int kMaxRedraws = 16;
    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
        GroupedDataset ds;
        ds.group_count = spec.groups;
        ds.samples.reserve(static_cast<size_t>(n));
        int positives = 0;
        for (int i = 0; i < n; ++i) {
            Sample s;
            s.gt_content.resize(static_cast<size_t>(spec.n_content));
            for (double& c : s.gt_content) c = content_rng.normal();

            double a = spec.label_rule.b;
            for (int j = 0; j < spec.n_content; ++j) {
                a += spec.label_rule.w[static_cast<size_t>(j)] * s.gt_content[static_cast<size_t>(j)];
            }
            s.y = a > 0.0 ? 1 : 0;
            positives += s.y;

            if (spec.group_label_correlation > 0.0 &&
                group_rng.uniform() < spec.group_label_correlation) {
                s.group = s.y % spec.groups;
            } else {
                s.group = group_rng.uniform_int(spec.groups);
            }

            s.gt_style.resize(static_cast<size_t>(spec.n_style));
            const auto& mu = spec.group_style_means[static_cast<size_t>(s.group)];
            const auto& sigma = spec.group_style_scales[static_cast<size_t>(s.group)];
            for (int j = 0; j < spec.n_style; ++j) {
                s.gt_style[static_cast<size_t>(j)] =
                    style_rng.normal(mu[static_cast<size_t>(j)], sigma[static_cast<size_t>(j)]);
            }

            std::vector<double> latent;
            latent.reserve(static_cast<size_t>(spec.obs_dim()));
            latent.insert(latent.end(), s.gt_content.begin(), s.gt_content.end());
            latent.insert(latent.end(), s.gt_style.begin(), s.gt_style.end());
            s.x = mixing.apply(latent);
            ds.samples.push_back(std::move(s));
        }
        if (positives == 0 || positives == n) continue;  // degenerate draw, retry
        ds.validate();
        return ds;
    }
    throw GenerationError("label rule produced a single class after " +
                          std::to_string(kMaxRedraws) + " re-draws; rule is degenerate");
}

GenerativeSpec shifted_group_spec(const GenerativeSpec& spec, double factor) {
    if (spec.groups < 2) {
        throw ConfigError("shifted_group_spec needs at least 2 source groups to extrapolate");
    }
    GenerativeSpec out = spec;
    const auto& last = spec.group_style_means[static_cast<size_t>(spec.groups - 1)];
    const auto& prev = spec.group_style_means[static_cast<size_t>(spec.groups - 2)];
    std::vector<double> extrapolated(last.size());
    for (size_t j = 0; j < last.size(); ++j) {
        extrapolated[j] = last[j] + factor * (last[j] - prev[j]);
    }
    out.groups = 1;
    out.group_style_means = {extrapolated};
    out.group_style_scales = {spec.group_style_scales[static_cast<size_t>(spec.groups - 1)]};
    out.group_label_correlation = 0.0;
    return out;
}

}  // namespace groupinv
