#include "reltr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <utility>

#include "reltr/error.hpp"

namespace reltr {

const char* task_name(Task task) {
  return task == Task::SGCLS ? "SGCLS" : "PREDCLS";
}

namespace {

// Row-wise softmax on raw data (no tape involvement).
std::vector<double> softmax_rows(const Tensor& logits) {
  const std::size_t rows = logits.rows(), cols = logits.cols();
  std::vector<double> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = logits.data() + r * cols;
    double mx = in[0];
    for (std::size_t c = 1; c < cols; ++c) mx = std::max(mx, in[c]);
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      out[r * cols + c] = std::exp(in[c] - mx);
      total += out[r * cols + c];
    }
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] /= total;
  }
  return out;
}

bool prediction_before(const RelationPrediction& a,
                       const RelationPrediction& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.subject_idx != b.subject_idx) return a.subject_idx < b.subject_idx;
  if (a.object_idx != b.object_idx) return a.object_idx < b.object_idx;
  return a.predicate < b.predicate;
}

}  // namespace

std::vector<RelationPrediction> rank_predictions(const ForwardOut& out,
                                                 Task task) {
  std::vector<RelationPrediction> preds;
  if (!out.relation_logits.defined()) return preds;

  const std::size_t rows = out.relation_logits.rows();
  const std::size_t np = out.relation_logits.cols();
  const std::size_t C = out.object_logits.cols();
  const std::vector<double> rel_probs = softmax_rows(out.relation_logits);
  const std::vector<double> obj_probs = softmax_rows(out.object_logits);

  preds.reserve(rows * (np - 1));
  for (std::size_t r = 0; r < rows; ++r) {
    const OrderedPair& pair = out.ordered_pairs[r];
    const auto s = static_cast<std::size_t>(pair.subject);
    const auto o = static_cast<std::size_t>(pair.object);
    const int sl = out.labels_used[s];
    const int ol = out.labels_used[o];
    double label_factor = 1.0;
    if (task == Task::SGCLS)
      label_factor = obj_probs[s * C + static_cast<std::size_t>(sl)] *
                     obj_probs[o * C + static_cast<std::size_t>(ol)];
    for (std::size_t p = 1; p < np; ++p) {
      RelationPrediction rp;
      rp.subject_idx = pair.subject;
      rp.object_idx = pair.object;
      rp.predicate = static_cast<int>(p);
      rp.score = label_factor * rel_probs[r * np + p];
      rp.subject_label = sl;
      rp.object_label = ol;
      preds.push_back(rp);
    }
  }
  std::sort(preds.begin(), preds.end(), prediction_before);
  return preds;
}

std::vector<RelationPrediction> predict(const SceneSample& sample, Task task,
                                        const ModelParams& params,
                                        const FrequencyTable& freq,
                                        const ModelConfig& cfg) {
  NoGradGuard guard;
  Rng rng(0);  // inference: dropout is inert, the stream is never consumed
  ForwardOut out = forward(sample, task, params, freq, cfg, false, rng);
  return rank_predictions(out, task);
}

double recall_at_k(const std::vector<RelationPrediction>& predictions,
                   const SceneSample& sample, std::size_t k,
                   bool graph_constraint, Task task) {
  if (k == 0) throw ConfigError("recall_at_k: k must be >= 1");
  if (sample.gt_triples.empty()) return 1.0;  // vacuous; see header

  // The predictions arrive ranked, so the graph constraint reduces to
  // keeping the first candidate seen per ordered pair.
  std::vector<const RelationPrediction*> kept;
  kept.reserve(std::min(k, predictions.size()));
  std::set<std::pair<int, int>> taken;
  for (const RelationPrediction& p : predictions) {
    if (kept.size() == k) break;
    if (graph_constraint && !taken.insert({p.subject_idx, p.object_idx}).second)
      continue;
    kept.push_back(&p);
  }

  std::size_t matched = 0;
  for (const Triple& gt : sample.gt_triples) {
    const int gt_sub_label =
        sample.nodes[static_cast<std::size_t>(gt.subject)].gt_class;
    const int gt_obj_label =
        sample.nodes[static_cast<std::size_t>(gt.object)].gt_class;
    for (const RelationPrediction* p : kept) {
      if (p->subject_idx != gt.subject || p->object_idx != gt.object ||
          p->predicate != gt.predicate)
        continue;
      if (task == Task::SGCLS && (p->subject_label != gt_sub_label ||
                                  p->object_label != gt_obj_label))
        continue;
      ++matched;
      break;
    }
  }
  return static_cast<double>(matched) /
         static_cast<double>(sample.gt_triples.size());
}

EvalReport evaluate(const ModelParams& params, const FrequencyTable& freq,
                    const ModelConfig& cfg, const DatasetFile& ds,
                    const std::vector<std::size_t>& indices,
                    const EvalOptions& opts) {
  EvalReport report;
  for (Task task : opts.tasks) {
    for (std::size_t k : opts.graph_ks)
      report.cells.push_back({task, true, k, 0.0});
    for (std::size_t k : opts.nograph_ks)
      report.cells.push_back({task, false, k, 0.0});
  }
  if (report.cells.empty()) return report;

  std::size_t used = 0, skipped = 0;
  std::vector<double> sums(report.cells.size(), 0.0);
  for (std::size_t idx : indices) {
    if (idx >= ds.samples.size())
      throw ValidationError("evaluate: sample index " + std::to_string(idx) +
                            " out of range");
    const SceneSample& sample = ds.samples[idx];
    if (sample.gt_triples.empty()) {
      ++skipped;
      continue;
    }
    ++used;
    for (Task task : opts.tasks) {
      std::vector<RelationPrediction> preds =
          predict(sample, task, params, freq, cfg);
      for (std::size_t c = 0; c < report.cells.size(); ++c) {
        const EvalCell& cell = report.cells[c];
        if (cell.task != task) continue;
        sums[c] += recall_at_k(preds, sample, cell.k, cell.graph_constraint,
                               task);
      }
    }
  }

  report.samples_used = used;
  report.samples_skipped = skipped;
  double total = 0.0;
  for (std::size_t c = 0; c < report.cells.size(); ++c) {
    report.cells[c].recall =
        used == 0 ? 0.0 : sums[c] / static_cast<double>(used);
    total += report.cells[c].recall;
  }
  report.mean = total / static_cast<double>(report.cells.size());
  return report;
}

std::int64_t ConfusionReport::count(int gt_pred, int predicted) const {
  return counts[static_cast<std::size_t>(gt_pred) * num_predicates +
                static_cast<std::size_t>(predicted)];
}

double ConfusionReport::rate(int gt_pred, int predicted) const {
  return rates[static_cast<std::size_t>(gt_pred) * num_predicates +
               static_cast<std::size_t>(predicted)];
}

ConfusionReport confusion(const ModelParams& params, const FrequencyTable& freq,
                          const ModelConfig& cfg, const DatasetFile& ds,
                          const std::vector<std::size_t>& indices, Task task) {
  ConfusionReport report;
  report.num_predicates = cfg.num_predicates;
  report.counts.assign(cfg.num_predicates * cfg.num_predicates, 0);

  NoGradGuard guard;
  for (std::size_t idx : indices) {
    if (idx >= ds.samples.size())
      throw ValidationError("confusion: sample index " + std::to_string(idx) +
                            " out of range");
    const SceneSample& sample = ds.samples[idx];
    if (sample.gt_triples.empty() || sample.nodes.size() < 2) continue;
    Rng rng(0);
    ForwardOut out = forward(sample, task, params, freq, cfg, false, rng);

    std::map<std::pair<int, int>, std::size_t> row_of_pair;
    for (std::size_t r = 0; r < out.ordered_pairs.size(); ++r)
      row_of_pair[{out.ordered_pairs[r].subject, out.ordered_pairs[r].object}] =
          r;

    const std::size_t np = cfg.num_predicates;
    for (const Triple& gt : sample.gt_triples) {
      const std::size_t r = row_of_pair.at({gt.subject, gt.object});
      const double* logits = out.relation_logits.data() + r * np;
      std::size_t best = 1;  // background never participates
      for (std::size_t p = 2; p < np; ++p)
        if (logits[p] > logits[best]) best = p;
      ++report.counts[static_cast<std::size_t>(gt.predicate) * np + best];
    }
  }

  report.row_totals.assign(report.num_predicates, 0);
  report.rates.assign(report.counts.size(), 0.0);
  for (std::size_t r = 1; r < report.num_predicates; ++r) {
    std::int64_t total = 0;
    for (std::size_t c = 1; c < report.num_predicates; ++c)
      total += report.counts[r * report.num_predicates + c];
    report.row_totals[r] = total;
    if (total > 0)
      for (std::size_t c = 1; c < report.num_predicates; ++c)
        report.rates[r * report.num_predicates + c] =
            static_cast<double>(report.counts[r * report.num_predicates + c]) /
            static_cast<double>(total);
  }
  return report;
}

std::string format_report(const EvalReport& report) {
  // One row per task; the column set mirrors the usual results table:
  // graph-constraint R@20/50/100 then no-constraint R@50/100, plus a mean.
  std::string out;
  char buf[128];
  out += "task      constraint  K     recall\n";
  for (const EvalCell& cell : report.cells) {
    std::snprintf(buf, sizeof(buf), "%-9s %-11s %-5zu %.6f\n",
                  task_name(cell.task),
                  cell.graph_constraint ? "graph" : "no-graph", cell.k,
                  cell.recall);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "mean %.6f over %zu cells\n", report.mean,
                report.cells.size());
  out += buf;
  std::snprintf(buf, sizeof(buf), "samples used %zu, skipped (no gt) %zu\n",
                report.samples_used, report.samples_skipped);
  out += buf;
  return out;
}

std::string format_confusion(const ConfusionReport& report,
                             const Vocab& vocab) {
  std::string out = "gt_predicate -> rank-1 prediction rates\n";
  char buf[256];
  for (std::size_t r = 1; r < report.num_predicates; ++r) {
    if (report.row_totals[r] == 0) continue;
    out += vocab.predicates[r] + " (" + std::to_string(report.row_totals[r]) +
           " gt):";
    // Highest-rate confusions first; ties resolve by predicate index.
    std::vector<std::size_t> order;
    for (std::size_t c = 1; c < report.num_predicates; ++c)
      if (report.counts[r * report.num_predicates + c] > 0) order.push_back(c);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      double ra = report.rates[r * report.num_predicates + a];
      double rb = report.rates[r * report.num_predicates + b];
      if (ra != rb) return ra > rb;
      return a < b;
    });
    for (std::size_t c : order) {
      std::snprintf(buf, sizeof(buf), " %s=%.4f",
                    vocab.predicates[c].c_str(),
                    report.rates[r * report.num_predicates + c]);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace reltr
