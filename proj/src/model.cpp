#include "reltr/model.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "reltr/error.hpp"
#include "reltr/pos_encoding.hpp"

namespace reltr {

void ModelConfig::validate() const {
  if (d_model == 0 || d_model % 4 != 0)
    throw ConfigError("model: d_model must be a positive multiple of 4, got " +
                      std::to_string(d_model));
  if (num_heads == 0 || d_model % num_heads != 0)
    throw ConfigError("model: d_model " + std::to_string(d_model) +
                      " is not divisible by num_heads " +
                      std::to_string(num_heads));
  if (d_vis == 0 || d_sem == 0 || d_ff == 0)
    throw ConfigError("model: d_vis, d_sem and d_ff must be positive");
  if (num_classes == 0)
    throw ConfigError("model: num_classes must be positive");
  if (num_predicates < 2)
    throw ConfigError("model: need background plus at least one predicate");
  if (encoder_layers == 0 || decoder_layers == 0)
    throw ConfigError("model: need at least one encoder and decoder layer");
  if (dropout < 0.0 || dropout >= 1.0)
    throw ConfigError("model: dropout must lie in [0, 1)");
  if (!(ln_eps > 0.0)) throw ConfigError("model: ln_eps must be positive");
  if (!(pos_m > 0.0)) throw ConfigError("model: pos_m must be positive");
  if (!(leaky_slope > 0.0) || !(leaky_slope < 1.0))
    throw ConfigError("model: leaky_slope must lie in (0, 1)");
}

RelationHeadParams RelationHeadParams::create(std::size_t d_model, Rng& rng) {
  RelationHeadParams p;
  p.ln = LayerNormParams::create(3 * d_model);
  p.w1 = LinearParams::create(3 * d_model, 2 * d_model, rng);
  p.w2 = LinearParams::create(2 * d_model, d_model, rng);
  return p;
}

void RelationHeadParams::collect(const std::string& prefix,
                                 NamedParams& out) const {
  ln.collect(prefix + ".ln", out);
  w1.collect(prefix + ".w1", out);
  w2.collect(prefix + ".w2", out);
}

ModelParams ModelParams::create(const ModelConfig& cfg, const Vocab& vocab) {
  cfg.validate();
  if (vocab.num_classes() != cfg.num_classes ||
      vocab.num_predicates() != cfg.num_predicates)
    throw ConfigError("model: vocab has " +
                      std::to_string(vocab.num_classes()) + " classes / " +
                      std::to_string(vocab.num_predicates()) +
                      " predicates but config expects " +
                      std::to_string(cfg.num_classes) + " / " +
                      std::to_string(cfg.num_predicates));

  Rng rng(cfg.seed);
  ModelParams p;
  p.f_nlp = LinearParams::create(cfg.d_vis + cfg.d_sem + 5, cfg.d_model, rng);
  p.class_vectors = class_semantic_vectors(vocab, cfg.d_sem, cfg.seed);
  p.class_vectors.set_requires_grad(true);
  for (std::size_t l = 0; l < cfg.encoder_layers; ++l)
    p.encoder.push_back(
        EncoderLayerParams::create(cfg.d_model, cfg.d_ff, cfg.num_heads, rng));
  p.f_classifier = LinearParams::create(cfg.d_model, cfg.num_classes, rng);
  p.f_elp =
      LinearParams::create(cfg.d_vis + 5 + 2 * cfg.d_sem, cfg.d_model, rng);
  for (std::size_t l = 0; l < cfg.decoder_layers; ++l)
    p.decoder.push_back(
        DecoderLayerParams::create(cfg.d_model, cfg.d_ff, cfg.num_heads, rng));
  p.rpm = RelationHeadParams::create(cfg.d_model, rng);
  p.w_final = LinearParams::create(cfg.d_model, cfg.num_predicates, rng);
  return p;
}

NamedParams ModelParams::collect() const {
  NamedParams out;
  f_nlp.collect("f_nlp", out);
  out.emplace_back("class_vectors", class_vectors);
  for (std::size_t l = 0; l < encoder.size(); ++l)
    encoder[l].collect("encoder." + std::to_string(l), out);
  f_classifier.collect("f_classifier", out);
  f_elp.collect("f_elp", out);
  for (std::size_t l = 0; l < decoder.size(); ++l)
    decoder[l].collect("decoder." + std::to_string(l), out);
  rpm.collect("rpm", out);
  w_final.collect("w_final", out);
  return out;
}

std::vector<Tensor> ModelParams::trainable() const {
  std::vector<Tensor> out;
  for (auto& [name, t] : collect()) out.push_back(t);
  return out;
}

namespace {

// Constant [rows x width] tensor assembled from raw values; never on the tape.
Tensor const_matrix(std::size_t rows, std::size_t width,
                    std::vector<double> values) {
  return Tensor::from_data({rows, width}, std::move(values));
}

void check_width(const char* what, std::size_t got, std::size_t want) {
  if (got != want)
    throw ConfigError(std::string(what) + " width " + std::to_string(got) +
                      " does not match configured " + std::to_string(want));
}

}  // namespace

Tensor node_input_embedding(const SceneNode& node, const Tensor& o_init,
                            const LinearParams& f_nlp, const ModelConfig& cfg,
                            double image_w, double image_h) {
  check_width("node visual_feature", node.visual_feature.size(), cfg.d_vis);
  if (o_init.rank() != 2 || o_init.rows() != 1)
    throw ConfigError("node_input_embedding: o_init must be [1 x d_sem]");
  check_width("o_init", o_init.cols(), cfg.d_sem);

  const auto g = box_geometry(node.box, image_w, image_h);
  const std::array<Tensor, 3> parts = {
      const_matrix(1, cfg.d_vis, node.visual_feature), o_init,
      const_matrix(1, 5, {g.begin(), g.end()})};
  return f_nlp.apply(concat_cols(parts));
}

Tensor edge_input_embedding(const EdgeCandidate& edge,
                            const Tensor& class_vec_i,
                            const Tensor& class_vec_j,
                            const LinearParams& f_elp, const ModelConfig& cfg,
                            double image_w, double image_h) {
  check_width("edge visual_feature", edge.visual_feature.size(), cfg.d_vis);
  for (const Tensor* cv : {&class_vec_i, &class_vec_j}) {
    if (cv->rank() != 2 || cv->rows() != 1)
      throw ConfigError("edge_input_embedding: class vectors must be [1 x d_sem]");
    check_width("class vector", cv->cols(), cfg.d_sem);
  }
  const auto g = box_geometry(edge.union_box, image_w, image_h);
  const std::array<Tensor, 4> parts = {
      const_matrix(1, cfg.d_vis, edge.visual_feature),
      const_matrix(1, 5, {g.begin(), g.end()}), class_vec_i, class_vec_j};
  return f_elp.apply(concat_cols(parts));
}

ForwardOut forward(const SceneSample& sample, Task task,
                   const ModelParams& params, const FrequencyTable& freq,
                   const ModelConfig& cfg, bool training, Rng& rng) {
  cfg.validate();
  const std::size_t n = sample.nodes.size();
  if (n == 0)
    throw ValidationError("forward: scene " + sample.sample_id +
                          " has no nodes");
  if (freq.num_classes != cfg.num_classes ||
      freq.num_predicates != cfg.num_predicates)
    throw ConfigError("forward: frequency table shape does not match config");

  const std::size_t C = cfg.num_classes;
  for (const SceneNode& node : sample.nodes) {
    check_width("node visual_feature", node.visual_feature.size(), cfg.d_vis);
    if (node.gt_class < 0 || static_cast<std::size_t>(node.gt_class) >= C)
      throw ValidationError("forward: scene " + sample.sample_id +
                            " has a gt_class out of range");
    if (task == Task::SGCLS)
      check_width("node detector_prior", node.detector_prior.size(), C);
  }

  // Initial semantic vector per node: ground-truth class vector in PREDCLS,
  // detector-prior-weighted mixture of class vectors in SGCLS.
  Tensor o_init;
  if (task == Task::PREDCLS) {
    std::vector<std::size_t> gt(n);
    for (std::size_t i = 0; i < n; ++i)
      gt[i] = static_cast<std::size_t>(sample.nodes[i].gt_class);
    o_init = gather_rows(params.class_vectors, gt);
  } else {
    std::vector<double> priors(n * C);
    for (std::size_t i = 0; i < n; ++i)
      std::copy(sample.nodes[i].detector_prior.begin(),
                sample.nodes[i].detector_prior.end(), priors.begin() + i * C);
    o_init = matmul(const_matrix(n, C, std::move(priors)),
                    params.class_vectors);
  }

  // Node input embeddings plus sinusoidal position encodings.
  std::vector<double> visual(n * cfg.d_vis), geom(n * 5);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(sample.nodes[i].visual_feature.begin(),
              sample.nodes[i].visual_feature.end(),
              visual.begin() + i * cfg.d_vis);
    const auto g =
        box_geometry(sample.nodes[i].box, sample.image_w, sample.image_h);
    std::copy(g.begin(), g.end(), geom.begin() + i * 5);
  }
  const std::array<Tensor, 3> node_parts = {
      const_matrix(n, cfg.d_vis, std::move(visual)), o_init,
      const_matrix(n, 5, std::move(geom))};
  Tensor n_in = params.f_nlp.apply(concat_cols(node_parts));

  const PosEncConfig pos_cfg{cfg.d_model, cfg.pos_m};
  std::vector<double> node_pos(n * cfg.d_model);
  for (std::size_t i = 0; i < n; ++i) {
    Tensor enc = node_pos_enc(i, pos_cfg);
    std::copy(enc.data(), enc.data() + cfg.d_model,
              node_pos.begin() + i * cfg.d_model);
  }
  Tensor x = add(n_in, const_matrix(n, cfg.d_model, std::move(node_pos)));

  ForwardOut out;
  out.n_final = encoder_stack(x, params.encoder, cfg.dropout, cfg.ln_eps,
                              training, rng, out.trace);
  out.object_logits = params.f_classifier.apply(out.n_final);

  out.labels_used.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (task == Task::PREDCLS) {
      out.labels_used[i] = sample.nodes[i].gt_class;
    } else {
      const double* row = out.object_logits.data() + i * C;
      out.labels_used[i] =
          static_cast<int>(std::max_element(row, row + C) - row);
    }
  }

  if (n == 1) return out;  // a single node has no candidate pairs

  // Candidate edges: all unordered pairs i < j in lexicographic order.
  std::vector<EdgeCandidate> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      EdgeCandidate e;
      e.i = static_cast<int>(i);
      e.j = static_cast<int>(j);
      e.union_box = union_box(sample.nodes[i].box, sample.nodes[j].box);
      e.visual_feature.resize(cfg.d_vis);
      for (std::size_t d = 0; d < cfg.d_vis; ++d)
        e.visual_feature[d] = 0.5 * (sample.nodes[i].visual_feature[d] +
                                     sample.nodes[j].visual_feature[d]);
      edges.push_back(std::move(e));
    }
  const std::size_t E = edges.size();

  std::vector<double> edge_visual(E * cfg.d_vis), union_geom(E * 5);
  std::vector<double> pair_pos(E * cfg.d_model);
  std::vector<std::size_t> sub_of_edge(E), obj_of_edge(E);
  for (std::size_t e = 0; e < E; ++e) {
    std::copy(edges[e].visual_feature.begin(), edges[e].visual_feature.end(),
              edge_visual.begin() + e * cfg.d_vis);
    const auto g =
        box_geometry(edges[e].union_box, sample.image_w, sample.image_h);
    std::copy(g.begin(), g.end(), union_geom.begin() + e * 5);
    Tensor enc = pair_pos_enc(static_cast<std::size_t>(edges[e].i),
                              static_cast<std::size_t>(edges[e].j), pos_cfg);
    std::copy(enc.data(), enc.data() + cfg.d_model,
              pair_pos.begin() + e * cfg.d_model);
    sub_of_edge[e] = static_cast<std::size_t>(edges[e].i);
    obj_of_edge[e] = static_cast<std::size_t>(edges[e].j);
  }

  const std::array<Tensor, 4> edge_parts = {
      const_matrix(E, cfg.d_vis, std::move(edge_visual)),
      const_matrix(E, 5, std::move(union_geom)),
      gather_rows(o_init, sub_of_edge), gather_rows(o_init, obj_of_edge)};
  Tensor e_in = add(params.f_elp.apply(concat_cols(edge_parts)),
                    const_matrix(E, cfg.d_model, std::move(pair_pos)));

  out.e_final = decoder_stack(e_in, out.n_final, params.decoder, cfg.dropout,
                              cfg.ln_eps, training, rng, out.trace);

  // Relation head over both directions of every pair: row 2e is i->j,
  // row 2e+1 is j->i.
  const std::size_t P = 2 * E;
  std::vector<std::size_t> sub_rows(P), obj_rows(P), edge_rows(P);
  out.ordered_pairs.resize(P);
  for (std::size_t e = 0; e < E; ++e) {
    sub_rows[2 * e] = sub_of_edge[e];
    obj_rows[2 * e] = obj_of_edge[e];
    sub_rows[2 * e + 1] = obj_of_edge[e];
    obj_rows[2 * e + 1] = sub_of_edge[e];
    edge_rows[2 * e] = e;
    edge_rows[2 * e + 1] = e;
    out.ordered_pairs[2 * e] = {edges[e].i, edges[e].j};
    out.ordered_pairs[2 * e + 1] = {edges[e].j, edges[e].i};
  }

  const std::array<Tensor, 3> rel_parts = {gather_rows(out.n_final, sub_rows),
                                           gather_rows(out.e_final, edge_rows),
                                           gather_rows(out.n_final, obj_rows)};
  Tensor rel = params.rpm.ln.apply(concat_cols(rel_parts), cfg.ln_eps);
  rel = params.rpm.w1.apply(rel);
  rel = dropout(rel, cfg.dropout, training, rng);
  rel = params.rpm.w2.apply(rel);
  rel = leaky_relu(rel, cfg.leaky_slope);
  Tensor logits = params.w_final.apply(rel);

  std::vector<double> bias(P * cfg.num_predicates);
  for (std::size_t r = 0; r < P; ++r) {
    Tensor b = freq_bias(
        freq, out.labels_used[static_cast<std::size_t>(out.ordered_pairs[r].subject)],
        out.labels_used[static_cast<std::size_t>(out.ordered_pairs[r].object)]);
    std::copy(b.data(), b.data() + cfg.num_predicates,
              bias.begin() + r * cfg.num_predicates);
  }
  out.relation_logits =
      add(logits, const_matrix(P, cfg.num_predicates, std::move(bias)));
  return out;
}

}  // namespace reltr
