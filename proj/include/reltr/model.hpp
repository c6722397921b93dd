#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "reltr/attention.hpp"
#include "reltr/dataset.hpp"
#include "reltr/frequency.hpp"
#include "reltr/geometry.hpp"
#include "reltr/rng.hpp"
#include "reltr/tensor.hpp"

namespace reltr {

// Desk-scale defaults; the full-scale configuration this architecture is
// normally run at (d_model=2048, 12 heads, 4096-d visual features, 200-d
// semantic vectors) is documented in the README and reachable by overriding
// these fields.
struct ModelConfig {
  std::size_t d_model = 64;
  std::size_t num_heads = 4;
  std::size_t d_vis = 32;
  std::size_t d_sem = 16;
  std::size_t d_ff = 128;          // feed-forward width, 2 * d_model
  std::size_t num_classes = 12;    // C
  std::size_t num_predicates = 7;  // R+1, index 0 = background
  std::size_t encoder_layers = 3;
  std::size_t decoder_layers = 2;
  double dropout = 0.25;
  double ln_eps = 1e-5;
  double pos_m = 10000.0;          // sinusoidal wavelength base
  double leaky_slope = 0.01;
  std::uint64_t seed = 42;

  // Throws ConfigError on inconsistent dimensions.
  void validate() const;
};

// The relation prediction stack applied to each ordered (subject, edge,
// object) concatenation: LeakyReLU(W2(Dropout(W1(LayerNorm(x))))).
struct RelationHeadParams {
  LayerNormParams ln;  // over 3 * d_model
  LinearParams w1;     // 3d -> 2d
  LinearParams w2;     // 2d -> d

  static RelationHeadParams create(std::size_t d_model, Rng& rng);
  void collect(const std::string& prefix, NamedParams& out) const;
};

// Every learnable tensor of the model.  collect() returns them in a fixed,
// documented order (also the checkpoint order):
//   f_nlp, class_vectors, encoder.0.., f_classifier, f_elp, decoder.0..,
//   rpm, w_final.
struct ModelParams {
  LinearParams f_nlp;        // (d_vis + d_sem + 5) -> d_model
  Tensor class_vectors;      // [C x d_sem], seeded from class names
  std::vector<EncoderLayerParams> encoder;
  LinearParams f_classifier; // d_model -> C
  LinearParams f_elp;        // (d_vis + 5 + 2*d_sem) -> d_model
  std::vector<DecoderLayerParams> decoder;
  RelationHeadParams rpm;
  LinearParams w_final;      // d_model -> (R+1)

  // Fresh parameters seeded by cfg.seed; vocab supplies the class names the
  // semantic vectors are derived from (vocab size must match cfg).
  static ModelParams create(const ModelConfig& cfg, const Vocab& vocab);
  NamedParams collect() const;
  std::vector<Tensor> trainable() const;  // tensors only, collect() order
};

enum class Task { SGCLS, PREDCLS };

// Undirected candidate edge between nodes i < j.  The visual feature is the
// elementwise mean of the endpoint node features (stand-in for a union-box
// feature crop).
struct EdgeCandidate {
  int i = 0, j = 0;
  Box union_box;
  std::vector<double> visual_feature;  // d_vis
};

// One ordered direction of a candidate edge, aligned with the rows of
// relation_logits.
struct OrderedPair {
  int subject = 0;
  int object = 0;
};

struct ForwardOut {
  Tensor object_logits;    // [n x C]
  Tensor relation_logits;  // [n(n-1) x (R+1)]; undefined when n == 1
  Tensor n_final;          // [n x d_model]
  Tensor e_final;          // [E x d_model]; undefined when n == 1
  // Row k of relation_logits scores ordered_pairs[k].  Rows come in
  // direction pairs per undirected edge (i<j): row 2e is i->j, 2e+1 is j->i.
  std::vector<OrderedPair> ordered_pairs;
  // Per node: the class label used for the frequency bias and scoring —
  // ground truth in PREDCLS, classifier argmax in SGCLS.
  std::vector<int> labels_used;
  AttentionTrace trace;
};

// Projects one node into the model space:
// f_nlp(concat[visual_feature | o_init | box_geometry]).  o_init is a
// [1 x d_sem] semantic vector (may be on the tape).
Tensor node_input_embedding(const SceneNode& node, const Tensor& o_init,
                            const LinearParams& f_nlp, const ModelConfig& cfg,
                            double image_w, double image_h);

// Projects one candidate edge:
// f_elp(concat[edge.visual_feature | union-box geometry | class_vec_i |
// class_vec_j]); class vectors are [1 x d_sem].
Tensor edge_input_embedding(const EdgeCandidate& edge,
                            const Tensor& class_vec_i,
                            const Tensor& class_vec_j,
                            const LinearParams& f_elp, const ModelConfig& cfg,
                            double image_w, double image_h);

// Full pass over one scene: encode nodes (with position encodings), classify
// objects, contextualize all undirected pair edges through the decoder, and
// score both directions of every pair with the relation head plus the
// frequency bias.  Throws ValidationError for an empty scene and ConfigError
// on width mismatches.  rng drives dropout when training is true.
ForwardOut forward(const SceneSample& sample, Task task,
                   const ModelParams& params, const FrequencyTable& freq,
                   const ModelConfig& cfg, bool training, Rng& rng);

}  // namespace reltr
