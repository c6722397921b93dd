#include "reltr/frequency.hpp"

#include <cmath>
#include <string>

#include "reltr/error.hpp"

namespace reltr {

std::int64_t FrequencyTable::count(int sub_class, int obj_class,
                                   int predicate) const {
  const auto s = static_cast<std::size_t>(sub_class);
  const auto o = static_cast<std::size_t>(obj_class);
  const auto r = static_cast<std::size_t>(predicate);
  if (sub_class < 0 || s >= num_classes || obj_class < 0 || o >= num_classes ||
      predicate < 0 || r >= num_predicates)
    throw ValidationError("FrequencyTable::count: index out of range");
  return counts[(s * num_classes + o) * num_predicates + r];
}

FrequencyTable build_frequency_table(const DatasetFile& ds,
                                     const std::vector<std::size_t>& indices,
                                     double eps) {
  if (!(eps > 0.0))
    throw ConfigError("build_frequency_table: eps must be positive");
  FrequencyTable table;
  table.num_classes = ds.vocab.num_classes();
  table.num_predicates = ds.vocab.num_predicates();
  table.eps = eps;
  table.counts.assign(
      table.num_classes * table.num_classes * table.num_predicates, 0);

  for (std::size_t idx : indices) {
    if (idx >= ds.samples.size())
      throw ValidationError("build_frequency_table: sample index " +
                            std::to_string(idx) + " out of range");
    const SceneSample& s = ds.samples[idx];
    for (const Triple& t : s.gt_triples) {
      const auto sc = static_cast<std::size_t>(
          s.nodes[static_cast<std::size_t>(t.subject)].gt_class);
      const auto oc = static_cast<std::size_t>(
          s.nodes[static_cast<std::size_t>(t.object)].gt_class);
      const auto r = static_cast<std::size_t>(t.predicate);
      ++table.counts[(sc * table.num_classes + oc) * table.num_predicates + r];
    }
  }
  return table;
}

Tensor freq_bias(const FrequencyTable& table, int sub_class, int obj_class) {
  if (sub_class < 0 ||
      static_cast<std::size_t>(sub_class) >= table.num_classes ||
      obj_class < 0 || static_cast<std::size_t>(obj_class) >= table.num_classes)
    throw ValidationError("freq_bias: class index out of range");
  const std::size_t base =
      (static_cast<std::size_t>(sub_class) * table.num_classes +
       static_cast<std::size_t>(obj_class)) *
      table.num_predicates;
  std::int64_t total = 0;
  for (std::size_t r = 0; r < table.num_predicates; ++r)
    total += table.counts[base + r];

  const double denom = static_cast<double>(total) +
                       table.eps * static_cast<double>(table.num_predicates);
  std::vector<double> bias(table.num_predicates);
  for (std::size_t r = 0; r < table.num_predicates; ++r)
    bias[r] =
        std::log((static_cast<double>(table.counts[base + r]) + table.eps) /
                 denom);
  return Tensor::from_data({1, table.num_predicates}, std::move(bias));
}

}  // namespace reltr
