#include "reltr/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "reltr/error.hpp"

namespace reltr {

void write_attention_csv(const Tensor& weights,
                         const std::vector<std::string>& row_labels,
                         const std::vector<std::string>& col_labels,
                         const std::string& path) {
  if (weights.rank() != 2)
    throw ShapeError("attention csv: weights must be a matrix");
  if (row_labels.size() != weights.rows() ||
      col_labels.size() != weights.cols())
    throw ShapeError("attention csv: label counts must match the matrix");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("attention csv: cannot open " + path);
  out << "label";
  for (const std::string& c : col_labels) out << ',' << c;
  out << '\n';
  char buf[64];
  for (std::size_t r = 0; r < weights.rows(); ++r) {
    out << row_labels[r];
    for (std::size_t c = 0; c < weights.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", weights.at2(r, c));
      out << ',' << buf;
    }
    out << '\n';
  }
}

void write_attention_pgm(const Tensor& weights, const std::string& path) {
  if (weights.rank() != 2)
    throw ShapeError("attention pgm: weights must be a matrix");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("attention pgm: cannot open " + path);
  out << "P5\n" << weights.cols() << ' ' << weights.rows() << "\n255\n";
  for (std::size_t r = 0; r < weights.rows(); ++r)
    for (std::size_t c = 0; c < weights.cols(); ++c) {
      long v = std::lround(255.0 * weights.at2(r, c));
      v = std::clamp(v, 0L, 255L);
      out.put(static_cast<char>(static_cast<unsigned char>(v)));
    }
}

}  // namespace reltr
