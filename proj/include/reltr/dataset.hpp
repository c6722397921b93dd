#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "reltr/geometry.hpp"
#include "reltr/tensor.hpp"

namespace reltr {

struct SceneNode {
  Box box;
  int gt_class = 0;
  std::vector<double> visual_feature;   // length d_vis
  std::vector<double> detector_prior;   // length C, nonnegative, sums to 1
};

struct Triple {
  int subject = 0;
  int predicate = 0;  // >= 1; 0 is reserved for background "no relation"
  int object = 0;
};

struct SceneSample {
  std::string sample_id;
  double image_w = 0.0, image_h = 0.0;
  std::vector<SceneNode> nodes;
  std::vector<Triple> gt_triples;
};

struct Vocab {
  std::vector<std::string> object_classes;
  std::vector<std::string> predicates;  // index 0 == "__background__"

  std::size_t num_classes() const { return object_classes.size(); }
  std::size_t num_predicates() const { return predicates.size(); }  // R+1
};

struct DatasetFile {
  Vocab vocab;
  std::size_t d_vis = 0;
  std::vector<SceneSample> samples;
};

// Geometric thresholds used by the predicate rules, all relative to image
// size.  These are part of the generator config so the rule set is
// replayable from the file alone plus the defaults.
struct RuleParams {
  double on_gap = 0.05;        // max |bottom_i - top_j| / H for "on"
  double on_overlap = 0.4;     // min horizontal overlap as fraction of w_i
  double in_area_ratio = 0.5;  // max area_i / area_j for "in"
  double gap_frac = 0.05;      // min clear gap / H for "above" and "under"
  double near_frac = 0.22;     // max center distance / diagonal for "near"
};

struct SyntheticConfig {
  std::size_t num_samples = 2400;
  std::size_t min_nodes = 3;
  std::size_t max_nodes = 6;
  std::size_t num_classes = 12;     // must match the rule vocabulary
  std::size_t num_predicates = 7;   // R+1, must match the rule vocabulary
  std::uint64_t seed = 42;
  std::size_t d_vis = 32;
  double feature_noise = 0.25;      // stddev added to visual features
  double prior_strength = 5.0;      // detector-prior logit sharpness
  RuleParams rules;
};

// The fixed vocabulary the rule set is written against: 12 object classes
// and predicates {__background__, on, in, wearing, above, under, near}.
Vocab default_vocab();

// Pure function from (classes, boxes) to the predicate of the ordered pair
// subject=i -> object=j; returns 0 when no rule fires.  The generator derives
// every ground-truth triple through this exact function, so tests can replay
// it against a generated file.
int rule_predicate(int class_i, int class_j, const Box& box_i, const Box& box_j,
                   double image_w, double image_h, const RuleParams& rules);

// Deterministic scene generator; same config (incl. seed) => identical file.
DatasetFile generate_synthetic(const SyntheticConfig& cfg);

// JSON container with a format_version field.  load validates every
// invariant and names the offending sample and field; save produces the
// canonical byte layout (save(load(x)) == x for files written by save).
DatasetFile load_dataset(const std::string& path);
void save_dataset(const DatasetFile& ds, const std::string& path);
void validate_dataset(const DatasetFile& ds);

// Deterministic unit-norm semantic vector per class name, [C x d_sem].
Tensor class_semantic_vectors(const Vocab& vocab, std::size_t d_sem,
                              std::uint64_t seed);

struct SplitSpec {
  // At the default 2400 samples these yield 2000 / 200 / 200.
  double train = 5.0 / 6.0, val = 1.0 / 12.0, test = 1.0 / 12.0;
  std::uint64_t seed = 42;
};

struct SplitIndices {
  std::vector<std::size_t> train, val, test;
};

// Disjoint, exhaustive, deterministic partition of sample indices.
SplitIndices split_dataset(std::size_t num_samples, const SplitSpec& spec);

}  // namespace reltr
