#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "reltr/dataset.hpp"
#include "reltr/frequency.hpp"
#include "reltr/model.hpp"

namespace reltr {

// One scored candidate triple.  Score is P(sub)*P(obj)*P(pred) for SGCLS and
// P(pred) for PREDCLS; labels are the ones the model committed to (argmax in
// SGCLS, ground truth in PREDCLS).
struct RelationPrediction {
  int subject_idx = 0;
  int object_idx = 0;
  int predicate = 0;  // >= 1; background is never ranked
  double score = 0.0;
  int subject_label = 0;
  int object_label = 0;
};

// Scores every (ordered pair, foreground predicate) candidate from forward
// outputs and sorts by (score desc, subject asc, object asc, predicate asc).
// Empty when the scene has a single node.
std::vector<RelationPrediction> rank_predictions(const ForwardOut& out,
                                                 Task task);

// Inference-mode forward plus ranking.
std::vector<RelationPrediction> predict(const SceneSample& sample, Task task,
                                        const ModelParams& params,
                                        const FrequencyTable& freq,
                                        const ModelConfig& cfg);

// Fraction of gt triples found in the top-k predictions.  Under the graph
// constraint only the best-scoring predicate of each ordered pair stays in
// the ranking pool.  SGCLS additionally requires both predicted node labels
// to equal ground truth.  A sample without gt triples scores a vacuous 1.0;
// evaluate() excludes such samples from aggregation instead.
double recall_at_k(const std::vector<RelationPrediction>& predictions,
                   const SceneSample& sample, std::size_t k,
                   bool graph_constraint, Task task);

struct EvalOptions {
  std::vector<Task> tasks = {Task::SGCLS, Task::PREDCLS};
  std::vector<std::size_t> graph_ks = {20, 50, 100};
  std::vector<std::size_t> nograph_ks = {50, 100};
};

struct EvalCell {
  Task task;
  bool graph_constraint = true;
  std::size_t k = 0;
  double recall = 0.0;  // macro-average over samples with >= 1 gt triple
};

struct EvalReport {
  // Per task: graph-constraint cells in K order, then no-constraint cells.
  std::vector<EvalCell> cells;
  double mean = 0.0;  // over all cells
  std::size_t samples_used = 0;
  std::size_t samples_skipped = 0;  // zero-gt samples
};

EvalReport evaluate(const ModelParams& params, const FrequencyTable& freq,
                    const ModelConfig& cfg, const DatasetFile& ds,
                    const std::vector<std::size_t>& indices,
                    const EvalOptions& opts = {});

// Rank-1 foreground predicate per ground-truth pair, tallied against the
// true predicate.  Row/column 0 (background) stays unused.
struct ConfusionReport {
  std::size_t num_predicates = 0;
  std::vector<std::int64_t> counts;      // [num_predicates x num_predicates]
  std::vector<std::int64_t> row_totals;  // per gt predicate
  std::vector<double> rates;             // row-normalized where total > 0

  std::int64_t count(int gt_pred, int predicted) const;
  double rate(int gt_pred, int predicted) const;
};

ConfusionReport confusion(const ModelParams& params, const FrequencyTable& freq,
                          const ModelConfig& cfg, const DatasetFile& ds,
                          const std::vector<std::size_t>& indices, Task task);

// Fixed-layout text renderings (deterministic byte-for-byte), one recall row
// per task mirroring the standard results-table cells plus the mean.
std::string format_report(const EvalReport& report);
std::string format_confusion(const ConfusionReport& report, const Vocab& vocab);

const char* task_name(Task task);

}  // namespace reltr
