#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "smallcells/functionals.hpp"
#include "smallcells/sampler.hpp"

namespace smallcells {

struct TopKEntry {
  double size;
  std::uint64_t sample_index;
  std::vector<double> edge_lengths;
};

inline bool topk_entry_less(const TopKEntry& a, const TopKEntry& b) {
  return a.size != b.size ? a.size < b.size : a.sample_index < b.sample_index;
}

struct TopKSelection {
  SizeFunctional functional = SizeFunctional::EdgeProductArea;
  std::uint32_t k = 0;
  bool short_of_k = false;  // stream had fewer than k cells
  std::vector<TopKEntry> entries;  // ascending by (size, sample_index)
};

// Bounded max-heap of the k smallest (size, sample_index) pairs. Ties at
// the retention boundary keep the smaller sample index, which together
// with the pure (seed, index) sampling makes the selection independent of
// worker count and merge order.
class TopKCollector {
 public:
  explicit TopKCollector(std::uint32_t k) : k_(k) {
    if (k == 0) throw std::invalid_argument("top-k: k must be >= 1");
    heap_.reserve(k);
  }

  // Hot path: cheap pre-check before copying edge lengths.
  bool would_accept(double size, std::uint64_t index) const {
    if (heap_.size() < k_) return true;
    const TopKEntry& top = heap_.front();
    return size < top.size ||
           (size == top.size && index < top.sample_index);
  }

  void offer(double size, std::uint64_t index, const double* edges,
             int dimension) {
    if (!would_accept(size, index)) return;
    TopKEntry entry{size, index,
                    std::vector<double>(edges, edges + dimension)};
    if (heap_.size() == k_) {
      std::pop_heap(heap_.begin(), heap_.end(), topk_entry_less);
      heap_.back() = std::move(entry);
    } else {
      heap_.push_back(std::move(entry));
    }
    std::push_heap(heap_.begin(), heap_.end(), topk_entry_less);
  }

  void merge(const TopKCollector& other) {
    for (const TopKEntry& e : other.heap_)
      offer(e.size, e.sample_index, e.edge_lengths.data(),
            static_cast<int>(e.edge_lengths.size()));
  }

  std::uint32_t k() const { return k_; }

  std::vector<TopKEntry> sorted_entries() const {
    std::vector<TopKEntry> out = heap_;
    std::sort(out.begin(), out.end(), topk_entry_less);
    return out;
  }

 private:
  std::uint32_t k_;
  std::vector<TopKEntry> heap_;  // max-heap under topk_entry_less
};

// Exact k smallest cells by `functional` over the deterministic stream, in
// O(k) memory per worker.
TopKSelection select_k_smallest(const TessellationModel& model,
                                const SampleStreamSpec& spec,
                                SizeFunctional functional, std::uint32_t k);

}  // namespace smallcells
