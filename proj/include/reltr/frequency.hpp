#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

#include "reltr/dataset.hpp"
#include "reltr/tensor.hpp"

namespace reltr {

// Empirical predicate counts per ordered class pair, gathered from
// ground-truth triples.  Background (predicate 0) is never annotated, so its
// counts stay zero; smoothing keeps its bias finite.
struct FrequencyTable {
  std::size_t num_classes = 0;
  std::size_t num_predicates = 0;
  double eps = 1.0;
  // Flattened [num_classes x num_classes x num_predicates] counts.
  std::vector<std::int64_t> counts;

  std::int64_t count(int sub_class, int obj_class, int predicate) const;
};

// Counts predicates over the given sample indices of the dataset using
// ground-truth classes.  eps is the additive smoothing used by freq_bias.
FrequencyTable build_frequency_table(const DatasetFile& ds,
                                     const std::vector<std::size_t>& indices,
                                     double eps = 1.0);

// Log of the smoothed empirical predicate distribution for an ordered class
// pair: log((count + eps) / (total + eps * num_predicates)).  Returned as a
// constant [1 x num_predicates] tensor so it can be added to logits.
Tensor freq_bias(const FrequencyTable& table, int sub_class, int obj_class);

}  // namespace reltr
