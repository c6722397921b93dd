#pragma once

#include <string>
#include <vector>

#include "reltr/tensor.hpp"

namespace reltr {

// Writes a [rows x cols] attention matrix as CSV: a header of column labels,
// then one label-prefixed row per query.  Values use round-trip precision so
// downstream checks can reproduce them exactly.
void write_attention_csv(const Tensor& weights,
                         const std::vector<std::string>& row_labels,
                         const std::vector<std::string>& col_labels,
                         const std::string& path);

// Same matrix as an 8-bit binary portable graymap (P5), pixel =
// round(255 * weight) clamped to [0, 255].
void write_attention_pgm(const Tensor& weights, const std::string& path);

}  // namespace reltr
