#include "reltr/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "reltr/checkpoint.hpp"
#include "reltr/error.hpp"

namespace reltr {

Tensor loss(const ForwardOut& out, const SceneSample& sample, Task task,
            const LossWeights& weights) {
  // Labels are inputs in PREDCLS, so the object term carries no signal.
  const double w_obj = task == Task::PREDCLS ? 0.0 : weights.object;

  Tensor total;
  auto accumulate = [&](const Tensor& term) {
    total = total.defined() ? add(total, term) : term;
  };

  if (w_obj != 0.0) {
    std::vector<int> obj_targets;
    for (const SceneNode& node : sample.nodes)
      obj_targets.push_back(node.gt_class);
    accumulate(scale(cross_entropy(out.object_logits, obj_targets), w_obj));
  }

  if (weights.predicate != 0.0 && out.relation_logits.defined()) {
    // Target per ordered pair: its gt predicate, else background 0.  If a
    // pair ever carried several gt predicates the smallest index wins, so
    // the target is deterministic.
    std::vector<int> rel_targets(out.ordered_pairs.size(), 0);
    for (std::size_t r = 0; r < out.ordered_pairs.size(); ++r)
      for (const Triple& t : sample.gt_triples)
        if (t.subject == out.ordered_pairs[r].subject &&
            t.object == out.ordered_pairs[r].object &&
            (rel_targets[r] == 0 || t.predicate < rel_targets[r]))
          rel_targets[r] = t.predicate;
    accumulate(scale(cross_entropy(out.relation_logits, rel_targets),
                     weights.predicate));
  }

  return total.defined() ? total : Tensor::scalar(0.0);
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("train: batch_size must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("train: lr must be positive");
  if (!(decay_factor > 0.0) || !(decay_factor < 1.0))
    throw ConfigError("train: decay_factor must lie in (0, 1)");
  if (dropout < 0.0 || dropout >= 1.0)
    throw ConfigError("train: dropout must lie in [0, 1)");
  if (weights.object < 0.0 || weights.predicate < 0.0)
    throw ConfigError("train: loss weights must be non-negative");
  if (!(freq_eps > 0.0)) throw ConfigError("train: freq_eps must be positive");
}

namespace {

// Deep copy: fresh storage, same values, same registry layout.
ModelParams clone_params(const ModelParams& src, const ModelConfig& cfg,
                         const Vocab& vocab) {
  ModelParams dst = ModelParams::create(cfg, vocab);
  NamedParams from = src.collect();
  NamedParams to = dst.collect();
  for (std::size_t i = 0; i < from.size(); ++i)
    to[i].second.impl()->data = from[i].second.impl()->data;
  return dst;
}

// Validation metric: mean recall over the task's standard cells.
double validation_recall(const ModelParams& params, const FrequencyTable& freq,
                         const ModelConfig& cfg, const DatasetFile& ds,
                         const std::vector<std::size_t>& val_indices,
                         Task task) {
  EvalOptions opts;
  opts.tasks = {task};
  EvalReport report = evaluate(params, freq, cfg, ds, val_indices, opts);
  return report.mean;
}

}  // namespace

TrainResult train(ModelParams& params, const ModelConfig& cfg,
                  const Vocab& vocab, const DatasetFile& ds,
                  const SplitIndices& split, const TrainConfig& tc) {
  tc.validate();
  if (split.train.empty())
    throw ValidationError("train: the train split is empty");

  ModelConfig run_cfg = cfg;
  run_cfg.dropout = tc.dropout;

  TrainResult result;
  result.freq = build_frequency_table(ds, split.train, tc.freq_eps);
  result.best_params = clone_params(params, cfg, vocab);
  result.best_val_recall = -std::numeric_limits<double>::infinity();

  if (tc.epochs == 0) {
    if (!tc.checkpoint_path.empty())
      save_checkpoint(cfg, vocab, result.best_params, result.freq,
                      tc.checkpoint_path);
    return result;
  }

  OptimizerState state;
  state.learning_rate = tc.lr;
  state.patience = tc.patience;
  state.decay_factor = tc.decay_factor;

  std::vector<Tensor> trainable = params.trainable();
  Rng shuffle_rng(hash_name("epoch-shuffle", tc.seed));
  Rng dropout_rng(hash_name("dropout-stream", tc.seed));

  for (std::size_t epoch = 1; epoch <= tc.epochs; ++epoch) {
    std::vector<std::size_t> order = split.train;
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    const double lr_this_epoch = state.learning_rate;

    for (std::size_t start = 0; start < order.size();
         start += tc.batch_size) {
      const std::size_t stop = std::min(order.size(), start + tc.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(stop - start);
      zero_grads(trainable);
      for (std::size_t b = start; b < stop; ++b) {
        const SceneSample& sample = ds.samples[order[b]];
        ForwardOut out = forward(sample, tc.task, params, result.freq,
                                 run_cfg, true, dropout_rng);
        Tensor sample_loss = loss(out, sample, tc.task, tc.weights);
        const double value = sample_loss.value();
        if (!std::isfinite(value))
          throw ValidationError(
              "train: loss diverged (non-finite) at epoch " +
              std::to_string(epoch) + ", batch " +
              std::to_string(start / tc.batch_size) + ", sample " +
              sample.sample_id);
        loss_sum += value;
        ++loss_count;
        if (sample_loss.requires_grad() || sample_loss.impl()->backward_fn)
          backward(scale(sample_loss, inv_batch));
      }
      sgd_step(trainable, state.learning_rate);
    }

    const double val_recall = validation_recall(params, result.freq, cfg, ds,
                                                split.val, tc.task);
    result.log.push_back({epoch, loss_sum / static_cast<double>(loss_count),
                          val_recall, lr_this_epoch});

    if (val_recall > result.best_val_recall) {
      result.best_val_recall = val_recall;
      result.best_epoch = epoch;
      result.best_params = clone_params(params, cfg, vocab);
      if (!tc.checkpoint_path.empty())
        save_checkpoint(cfg, vocab, result.best_params, result.freq,
                        tc.checkpoint_path);
    }
    // The plateau tracker minimizes, so feed the negated recall.
    plateau_update(state, -val_recall);
  }
  return result;
}

}  // namespace reltr
