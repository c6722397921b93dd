#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "reltr/dataset.hpp"
#include "reltr/eval.hpp"
#include "reltr/frequency.hpp"
#include "reltr/model.hpp"
#include "reltr/optimizer.hpp"

namespace reltr {

struct LossWeights {
  double object = 1.0;
  double predicate = 1.0;
};

// Joint training loss: weighted object cross-entropy (all nodes vs ground
// truth; dropped in PREDCLS where labels are inputs) plus weighted predicate
// cross-entropy over all ordered pairs, with background 0 as the target for
// pairs without a gt triple.  Returns a non-taped zero scalar when neither
// term applies (single-node PREDCLS scene).
Tensor loss(const ForwardOut& out, const SceneSample& sample, Task task,
            const LossWeights& weights);

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  double lr = 1e-3;
  std::size_t patience = 3;
  double decay_factor = 0.1;
  double dropout = 0.25;
  std::uint64_t seed = 42;
  LossWeights weights;
  Task task = Task::PREDCLS;
  double freq_eps = 1.0;
  // Best-validation checkpoint target; empty disables writing.
  std::string checkpoint_path;

  void validate() const;  // ConfigError on nonsense values
};

struct EpochLog {
  std::size_t epoch = 0;      // 1-based
  double train_loss = 0.0;    // mean per-sample loss over the epoch
  double val_recall = 0.0;    // mean over the task's recall cells
  double lr = 0.0;            // rate used during this epoch
};

struct TrainResult {
  std::vector<EpochLog> log;
  FrequencyTable freq;        // fitted on the train split
  ModelParams best_params;    // deep copy at the best validation epoch
  double best_val_recall = 0.0;
  std::size_t best_epoch = 0;  // 0 = initialization (epochs == 0)
};

// Minibatch SGD with seeded shuffling, reduce-on-plateau, and best-checkpoint
// tracking.  params is updated in place (the final state); the returned
// best_params snapshot is what checkpoint_path receives.  Aborts with
// ValidationError naming epoch and batch if the loss turns non-finite.
TrainResult train(ModelParams& params, const ModelConfig& cfg,
                  const Vocab& vocab, const DatasetFile& ds,
                  const SplitIndices& split, const TrainConfig& tc);

}  // namespace reltr
