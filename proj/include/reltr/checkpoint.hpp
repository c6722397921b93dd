#pragma once

#include <string>

#include "reltr/dataset.hpp"
#include "reltr/frequency.hpp"
#include "reltr/model.hpp"

namespace reltr {

// Everything needed to resume or evaluate a trained model: configuration,
// vocabulary, every parameter tensor (named per ModelParams::collect), and
// the frequency table fitted on the training split.
struct Checkpoint {
  ModelConfig config;
  Vocab vocab;
  ModelParams params;
  FrequencyTable freq;
};

// JSON container with a format_version field.  Doubles survive the round
// trip bitwise (shortest-round-trip serialization), so load(save(m))
// reproduces every tensor exactly.
void save_checkpoint(const ModelConfig& cfg, const Vocab& vocab,
                     const ModelParams& params, const FrequencyTable& freq,
                     const std::string& path);

// Throws ValidationError on parse errors, version mismatch, or any missing /
// reordered / misshapen parameter (named in the message).
Checkpoint load_checkpoint(const std::string& path);

}  // namespace reltr
