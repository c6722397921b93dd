#pragma once

#include <cstddef>

#include "reltr/tensor.hpp"

namespace reltr {

// Sinusoidal encoding configuration.  d_model must be divisible by 4 because
// the pair encoding consumes channels in groups of four; m is the wavelength
// base shared by both encodings.
struct PosEncConfig {
  std::size_t d_model = 64;
  double m = 10000.0;
};

// Throws ConfigError when d_model is zero or not a multiple of 4, or m <= 0.
void validate(const PosEncConfig& cfg);

// Classic transformer encoding for a single node position p:
// channels (2k, 2k+1) = (sin(p / m^{2k/d}), cos(p / m^{2k/d})).
Tensor node_pos_enc(std::size_t p, const PosEncConfig& cfg);

// Pair encoding for an edge between node positions p_i and p_j.  Channels are
// consumed in groups of four starting at k in {0, 4, 8, ...}:
//   (k,   k+1) = (sin(p_i / m^{2k/d}), cos(p_i / m^{2k/d}))
//   (k+2, k+3) = (sin(p_j / m^{2k/d}), cos(p_j / m^{2k/d}))
// The frequency exponent uses the group's starting index k for all four
// channels, so swapping p_i and p_j swaps the channel pairs within each group.
Tensor pair_pos_enc(std::size_t p_i, std::size_t p_j, const PosEncConfig& cfg);

}  // namespace reltr
