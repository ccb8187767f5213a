#pragma once

#include <array>
#include <string>
#include <vector>

#include "groupinv/matrix.hpp"
#include "groupinv/rng.hpp"

namespace groupinv {

/// One observation with its label, group id and (for synthetic data) the
/// ground-truth latent factors that produced it.
struct Sample {
    std::vector<double> x;
    int y = 0;      // binary class label
    int group = 0;  // in [0, K)
    std::vector<double> gt_content;  // empty unless synthetic
    std::vector<double> gt_style;    // empty unless synthetic

    bool operator==(const Sample&) const = default;
};

struct GroupedDataset {
    std::vector<Sample> samples;
    int group_count = 0;               // K
    std::vector<int> class_set = {0, 1};
    std::string split_tag;             // "train" / "val" / "test" / ""

    int dim() const { return samples.empty() ? 0 : static_cast<int>(samples[0].x.size()); }
    size_t size() const { return samples.size(); }
    bool has_ground_truth() const;

    /// Observations stacked as an n x D matrix for the given indices.
    Matrix gather_x(const std::vector<int>& indices) const;
    std::vector<int> gather_y(const std::vector<int>& indices) const;
    std::vector<int> gather_group(const std::vector<int>& indices) const;
    Matrix gather_content(const std::vector<int>& indices) const;
    Matrix gather_style(const std::vector<int>& indices) const;

    /// Checks structural invariants (groups in range, all groups present,
    /// consistent dims); throws ContractError on violation.
    void validate() const;
};

struct SplitFractions {
    double train = 0.6;
    double val = 0.2;
    double test = 0.2;
};

struct DatasetSplits {
    GroupedDataset train;
    GroupedDataset val;
    GroupedDataset test;
};

/// Stratified split by (group, class): every cell contributes to every
/// split. Throws ContractError for bad fractions and a split error naming
/// the cell when a (group, class) cell has fewer than 3 samples.
DatasetSplits split(const GroupedDataset& ds, const SplitFractions& fractions, Rng& rng);

/// CSV with header x0..x{D-1},y,group[,c0..,s0..]; values with 17
/// significant digits so doubles round-trip exactly.
void save_csv(const GroupedDataset& ds, const std::string& path);
GroupedDataset load_csv(const std::string& path);

}  // namespace groupinv
