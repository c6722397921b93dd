#include "reltr/pos_encoding.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "reltr/error.hpp"

namespace reltr {

void validate(const PosEncConfig& cfg) {
  if (cfg.d_model == 0 || cfg.d_model % 4 != 0)
    throw ConfigError("pos_enc: d_model must be a positive multiple of 4, got " +
                      std::to_string(cfg.d_model));
  if (!(cfg.m > 0.0))
    throw ConfigError("pos_enc: wavelength base m must be positive");
}

Tensor node_pos_enc(std::size_t p, const PosEncConfig& cfg) {
  validate(cfg);
  const double d = static_cast<double>(cfg.d_model);
  const double pos = static_cast<double>(p);
  std::vector<double> out(cfg.d_model);
  for (std::size_t k = 0; 2 * k < cfg.d_model; ++k) {
    const double divisor = std::pow(cfg.m, 2.0 * static_cast<double>(k) / d);
    out[2 * k] = std::sin(pos / divisor);
    out[2 * k + 1] = std::cos(pos / divisor);
  }
  return Tensor::from_data({cfg.d_model}, std::move(out));
}

Tensor pair_pos_enc(std::size_t p_i, std::size_t p_j, const PosEncConfig& cfg) {
  validate(cfg);
  const double d = static_cast<double>(cfg.d_model);
  const double pi_pos = static_cast<double>(p_i);
  const double pj_pos = static_cast<double>(p_j);
  std::vector<double> out(cfg.d_model);
  for (std::size_t k = 0; k < cfg.d_model; k += 4) {
    const double divisor = std::pow(cfg.m, 2.0 * static_cast<double>(k) / d);
    out[k] = std::sin(pi_pos / divisor);
    out[k + 1] = std::cos(pi_pos / divisor);
    out[k + 2] = std::sin(pj_pos / divisor);
    out[k + 3] = std::cos(pj_pos / divisor);
  }
  return Tensor::from_data({cfg.d_model}, std::move(out));
}

}  // namespace reltr
