#pragma once

#include <string>
#include <utility>
#include <vector>

#include "groupinv/dataset.hpp"
#include "groupinv/rng.hpp"

namespace groupinv {

struct SamplerConfig {
    int P = 2;  // samples per grouped iteration, >= 2

    void validate() const;
};

/// Dataset indices bucketed by (group, class). Cells that exist in the
/// cross product but received no samples are listed in empty_cells so
/// callers can fail with a precise message before training starts.
struct GroupCells {
    int group_count = 0;
    std::vector<int> class_set;               // sorted distinct labels
    std::vector<std::vector<int>> cells;      // [group * n_classes + class_pos]
    std::vector<std::string> empty_cells;     // e.g. "(group=1, class=0)"

    const std::vector<int>& cell(int group, int label) const;
    static std::string cell_name(int group, int label);
};

GroupCells partition_groups(const GroupedDataset& ds);

/// One grouped sampling round: a class y, P class-conditioned draws from
/// uniformly chosen groups, and the reference chain used for pairing.
/// chain_pairs holds (element, reference) positions local to this iteration;
/// the first reference is drawn uniformly from the P elements, after which
/// each element becomes the reference for the next.
struct SamplingIteration {
    int y = 0;
    std::vector<std::pair<int, int>> samples;  // (dataset index, group index)
    std::vector<std::pair<int, int>> chain_pairs;
};

/// Draw order is fixed (class, then P groups, then P samples, then the
/// initial reference), so a seeded Rng reproduces the exact sequence.
SamplingIteration draw_iteration(const SamplerConfig& cfg, const GroupCells& cells, Rng& rng);

/// Uniform-without-replacement batch iterator. Every epoch visits each index
/// exactly once (the final batch may be short); the permutation is reshuffled
/// from the same stream at each epoch boundary.
class IidSampler {
  public:
    IidSampler(int dataset_size, int batch_size, Rng rng);

    std::vector<int> next_batch();
    int batches_per_epoch() const { return batches_per_epoch_; }

  private:
    int batch_size_;
    int batches_per_epoch_;
    std::vector<int> order_;
    size_t cursor_ = 0;
    Rng rng_;

    void reshuffle();
};

}  // namespace groupinv
