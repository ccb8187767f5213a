#include "groupinv/sampler.hpp"

#include <algorithm>

#include "groupinv/errors.hpp"

namespace groupinv {

void SamplerConfig::validate() const {
    if (P < 2) throw ConfigError("samples per iteration P must be >= 2, got " + std::to_string(P));
}

std::string GroupCells::cell_name(int group, int label) {
    return "(group=" + std::to_string(group) + ", class=" + std::to_string(label) + ")";
}

const std::vector<int>& GroupCells::cell(int group, int label) const {
    if (group < 0 || group >= group_count) {
        throw ContractError("group " + std::to_string(group) + " out of range [0, " +
                            std::to_string(group_count) + ")");
    }
    const auto it = std::find(class_set.begin(), class_set.end(), label);
    if (it == class_set.end()) {
        throw ContractError("class " + std::to_string(label) + " not present in the dataset");
    }
    const size_t pos = static_cast<size_t>(it - class_set.begin());
    return cells[static_cast<size_t>(group) * class_set.size() + pos];
}

namespace {

std::string cell_name(int group, int label) {
    return "group " + std::to_string(group) + ", class " + std::to_string(label);
}

}  // namespace

GroupCells partition_groups(const GroupedDataset& ds) {
    if (ds.samples.empty()) throw ContractError("cannot partition an empty dataset");
    ds.validate();

    GroupCells out;
    out.group_count = ds.group_count;
    out.class_set = ds.class_set;
    out.cells.assign(static_cast<size_t>(ds.group_count) * out.class_set.size(), {});

    for (size_t i = 0; i < ds.samples.size(); ++i) {
        const Sample& s = ds.samples[i];
        const auto it = std::find(out.class_set.begin(), out.class_set.end(), s.y);
        const size_t pos = static_cast<size_t>(it - out.class_set.begin());
        out.cells[static_cast<size_t>(s.group) * out.class_set.size() + pos].push_back(
            static_cast<int>(i));
    }
    for (int g = 0; g < out.group_count; ++g) {
        for (size_t c = 0; c < out.class_set.size(); ++c) {
            if (out.cells[static_cast<size_t>(g) * out.class_set.size() + c].empty()) {
                out.empty_cells.push_back(cell_name(g, out.class_set[c]));
            }
        }
    }
    return out;
}

SamplingIteration draw_iteration(const SamplerConfig& cfg, const GroupCells& cells, Rng& rng) {
    cfg.validate();
    if (cells.class_set.empty() || cells.group_count < 1) {
        throw ContractError("draw_iteration needs a populated group partition");
    }

    SamplingIteration it;
    it.y = cells.class_set[static_cast<size_t>(
        rng.uniform_int(static_cast<int>(cells.class_set.size())))];

    std::vector<int> groups(static_cast<size_t>(cfg.P));
    for (int& g : groups) g = rng.uniform_int(cells.group_count);

    it.samples.reserve(static_cast<size_t>(cfg.P));
    for (int g : groups) {
        const std::vector<int>& cell = cells.cell(g, it.y);
        if (cell.empty()) {
            throw SamplingError("cannot sample from empty cell " +
                                GroupCells::cell_name(g, it.y));
        }
        const int idx = cell[static_cast<size_t>(rng.uniform_int(static_cast<int>(cell.size())))];
        it.samples.emplace_back(idx, g);
    }

    int reference = rng.uniform_int(cfg.P);
    it.chain_pairs.reserve(static_cast<size_t>(cfg.P));
    for (int k = 0; k < cfg.P; ++k) {
        it.chain_pairs.emplace_back(k, reference);
        reference = k;
    }
    return it;
}

IidSampler::IidSampler(int dataset_size, int batch_size, Rng rng)
    : batch_size_(batch_size), rng_(rng) {
    if (dataset_size < 1) throw ContractError("IID sampler needs a nonempty dataset");
    if (batch_size < 1) throw ContractError("batch size must be >= 1");
    if (batch_size > dataset_size) {
        throw ContractError("batch size " + std::to_string(batch_size) +
                            " exceeds dataset size " + std::to_string(dataset_size));
    }
    order_.resize(static_cast<size_t>(dataset_size));
    for (int i = 0; i < dataset_size; ++i) order_[static_cast<size_t>(i)] = i;
    batches_per_epoch_ = (dataset_size + batch_size - 1) / batch_size;
    reshuffle();
}

void IidSampler::reshuffle() {
    // Fisher-Yates with the pinned Rng so the order is platform-stable.
    for (size_t i = order_.size(); i > 1; --i) {
        const size_t j = static_cast<size_t>(rng_.uniform_int(static_cast<int>(i)));
        std::swap(order_[i - 1], order_[j]);
    }
    cursor_ = 0;
}

std::vector<int> IidSampler::next_batch() {
    if (cursor_ >= order_.size()) reshuffle();
    const size_t take = std::min(static_cast<size_t>(batch_size_), order_.size() - cursor_);
    std::vector<int> batch(order_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                           order_.begin() + static_cast<std::ptrdiff_t>(cursor_ + take));
    cursor_ += take;
    return batch;
}

}  // namespace groupinv
