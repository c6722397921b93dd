#include "reltr/attention.hpp"

#include <cmath>
#include <string>

#include "reltr/error.hpp"

namespace reltr {

namespace {

Tensor init_weight(std::size_t in, std::size_t out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::vector<double> v(in * out);
  for (double& x : v) x = rng.uniform(-bound, bound);
  return Tensor::from_data({in, out}, std::move(v), /*requires_grad=*/true);
}

}  // namespace

// ---- parameter structs ----

LinearParams LinearParams::create(std::size_t in, std::size_t out, Rng& rng) {
  LinearParams p;
  p.weight = init_weight(in, out, rng);
  p.bias = Tensor::zeros({out}, /*requires_grad=*/true);
  return p;
}

Tensor LinearParams::apply(const Tensor& x) const {
  return add_row(matmul(x, weight), bias);
}

void LinearParams::collect(const std::string& prefix, NamedParams& out) const {
  out.emplace_back(prefix + ".weight", weight);
  out.emplace_back(prefix + ".bias", bias);
}

LayerNormParams LayerNormParams::create(std::size_t dim) {
  LayerNormParams p;
  p.gamma = Tensor::full({dim}, 1.0, /*requires_grad=*/true);
  p.beta = Tensor::zeros({dim}, /*requires_grad=*/true);
  return p;
}

Tensor LayerNormParams::apply(const Tensor& x, double eps) const {
  return layer_norm(x, gamma, beta, eps);
}

void LayerNormParams::collect(const std::string& prefix, NamedParams& out) const {
  out.emplace_back(prefix + ".gamma", gamma);
  out.emplace_back(prefix + ".beta", beta);
}

MultiHeadAttentionParams MultiHeadAttentionParams::create(std::size_t d_model,
                                                          std::size_t num_heads,
                                                          Rng& rng) {
  if (num_heads == 0 || d_model % num_heads != 0)
    throw ConfigError("attention: d_model " + std::to_string(d_model) +
                      " is not divisible by num_heads " +
                      std::to_string(num_heads));
  MultiHeadAttentionParams p;
  p.w_q = init_weight(d_model, d_model, rng);
  p.w_k = init_weight(d_model, d_model, rng);
  p.w_v = init_weight(d_model, d_model, rng);
  p.w_o = init_weight(d_model, d_model, rng);
  p.num_heads = num_heads;
  return p;
}

void MultiHeadAttentionParams::collect(const std::string& prefix,
                                       NamedParams& out) const {
  out.emplace_back(prefix + ".w_q", w_q);
  out.emplace_back(prefix + ".w_k", w_k);
  out.emplace_back(prefix + ".w_v", w_v);
  out.emplace_back(prefix + ".w_o", w_o);
}

EncoderLayerParams EncoderLayerParams::create(std::size_t d_model,
                                              std::size_t d_ff,
                                              std::size_t num_heads, Rng& rng) {
  EncoderLayerParams p;
  p.self_attn = MultiHeadAttentionParams::create(d_model, num_heads, rng);
  p.ffn1 = LinearParams::create(d_model, d_ff, rng);
  p.ffn2 = LinearParams::create(d_ff, d_model, rng);
  p.ln1 = LayerNormParams::create(d_model);
  p.ln2 = LayerNormParams::create(d_model);
  return p;
}

void EncoderLayerParams::collect(const std::string& prefix,
                                 NamedParams& out) const {
  self_attn.collect(prefix + ".self_attn", out);
  ffn1.collect(prefix + ".ffn1", out);
  ffn2.collect(prefix + ".ffn2", out);
  ln1.collect(prefix + ".ln1", out);
  ln2.collect(prefix + ".ln2", out);
}

DecoderLayerParams DecoderLayerParams::create(std::size_t d_model,
                                              std::size_t d_ff,
                                              std::size_t num_heads, Rng& rng) {
  DecoderLayerParams p;
  p.cross_attn = MultiHeadAttentionParams::create(d_model, num_heads, rng);
  p.self_attn = MultiHeadAttentionParams::create(d_model, num_heads, rng);
  p.ffn1 = LinearParams::create(d_model, d_ff, rng);
  p.ffn2 = LinearParams::create(d_ff, d_model, rng);
  p.ln1 = LayerNormParams::create(d_model);
  p.ln2 = LayerNormParams::create(d_model);
  p.ln3 = LayerNormParams::create(d_model);
  return p;
}

void DecoderLayerParams::collect(const std::string& prefix,
                                 NamedParams& out) const {
  cross_attn.collect(prefix + ".cross_attn", out);
  self_attn.collect(prefix + ".self_attn", out);
  ffn1.collect(prefix + ".ffn1", out);
  ffn2.collect(prefix + ".ffn2", out);
  ln1.collect(prefix + ".ln1", out);
  ln2.collect(prefix + ".ln2", out);
  ln3.collect(prefix + ".ln3", out);
}

// ---- attention operations ----

AttentionOut scaled_dot_attention(const Tensor& q, const Tensor& k,
                                  const Tensor& v) {
  if (q.cols() != k.cols())
    throw ShapeError("attention: query width " + shape_str(q.shape()) +
                     " does not match key width " + shape_str(k.shape()));
  if (k.rows() != v.rows())
    throw ShapeError("attention: key count " + shape_str(k.shape()) +
                     " does not match value count " + shape_str(v.shape()));
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  Tensor scores = scale(matmul_nt(q, k), inv_sqrt_dk);
  // Canonical-order reductions: keys form a set, so permuting them (as the
  // E2E path does when edge rows are reordered) must permute the output
  // rows bitwise rather than perturbing the rounding.
  Tensor weights = softmax_rows_canonical(scores);
  return {matmul_canonical(weights, v), weights};
}

AttentionOut multi_head_attention(const Tensor& x_query, const Tensor& x_keyval,
                                  const MultiHeadAttentionParams& params) {
  const std::size_t d_model = params.w_q.rows();
  if (x_query.cols() != d_model || x_keyval.cols() != d_model)
    throw ShapeError("attention: input width must be " +
                     std::to_string(d_model) + ", got " +
                     shape_str(x_query.shape()) + " and " +
                     shape_str(x_keyval.shape()));
  if (params.num_heads == 0 || d_model % params.num_heads != 0)
    throw ConfigError("attention: d_model " + std::to_string(d_model) +
                      " is not divisible by num_heads " +
                      std::to_string(params.num_heads));
  const std::size_t heads = params.num_heads;
  const std::size_t d_k = d_model / heads;

  Tensor q = matmul(x_query, params.w_q);
  Tensor k = matmul(x_keyval, params.w_k);
  Tensor v = matmul(x_keyval, params.w_v);

  std::vector<Tensor> head_outputs;
  std::vector<Tensor> head_weights;
  head_outputs.reserve(heads);
  head_weights.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    AttentionOut head = scaled_dot_attention(slice_cols(q, h * d_k, d_k),
                                             slice_cols(k, h * d_k, d_k),
                                             slice_cols(v, h * d_k, d_k));
    head_outputs.push_back(head.output);
    head_weights.push_back(head.weights);
  }
  Tensor merged = concat_cols(head_outputs);
  Tensor output = matmul(merged, params.w_o);

  // Head-averaged weights for tracing: plain data, off the tape.
  const std::size_t qn = x_query.rows(), sn = x_keyval.rows();
  std::vector<double> avg(qn * sn, 0.0);
  for (const Tensor& w : head_weights)
    for (std::size_t i = 0; i < avg.size(); ++i) avg[i] += w.at(i);
  for (double& x : avg) x /= static_cast<double>(heads);
  return {output, Tensor::from_data({qn, sn}, std::move(avg))};
}

EncoderLayerOut encoder_layer(const Tensor& nodes, const EncoderLayerParams& p,
                              double dropout_p, double ln_eps, bool training,
                              Rng& rng) {
  AttentionOut attn = multi_head_attention(nodes, nodes, p.self_attn);
  Tensor h1 = p.ln1.apply(
      add(nodes, dropout(attn.output, dropout_p, training, rng)), ln_eps);
  Tensor f = p.ffn2.apply(relu(p.ffn1.apply(h1)));
  Tensor out =
      p.ln2.apply(add(h1, dropout(f, dropout_p, training, rng)), ln_eps);
  return {out, attn.weights};
}

DecoderLayerOut decoder_layer(const Tensor& edges, const Tensor& nodes,
                              const DecoderLayerParams& p, double dropout_p,
                              double ln_eps, bool training, Rng& rng) {
  // E2N first (modification 3), then E2E, then FFN; no mask anywhere
  // (modification 1).
  AttentionOut cross = multi_head_attention(edges, nodes, p.cross_attn);
  Tensor y1 = p.ln1.apply(
      add(edges, dropout(cross.output, dropout_p, training, rng)), ln_eps);
  AttentionOut self = multi_head_attention(y1, y1, p.self_attn);
  Tensor y2 = p.ln2.apply(
      add(y1, dropout(self.output, dropout_p, training, rng)), ln_eps);
  Tensor f = p.ffn2.apply(relu(p.ffn1.apply(y2)));
  Tensor out =
      p.ln3.apply(add(y2, dropout(f, dropout_p, training, rng)), ln_eps);
  return {out, cross.weights, self.weights};
}

Tensor encoder_stack(const Tensor& nodes,
                     const std::vector<EncoderLayerParams>& layers,
                     double dropout_p, double ln_eps, bool training, Rng& rng,
                     AttentionTrace& trace) {
  if (layers.empty()) throw ConfigError("encoder_stack: needs at least 1 layer");
  Tensor x = nodes;
  for (const EncoderLayerParams& p : layers) {
    EncoderLayerOut step = encoder_layer(x, p, dropout_p, ln_eps, training, rng);
    x = step.output;
    trace.n2n.push_back(step.n2n);
  }
  return x;
}

Tensor decoder_stack(const Tensor& edges, const Tensor& nodes,
                     const std::vector<DecoderLayerParams>& layers,
                     double dropout_p, double ln_eps, bool training, Rng& rng,
                     AttentionTrace& trace) {
  if (layers.empty()) throw ConfigError("decoder_stack: needs at least 1 layer");
  Tensor x = edges;
  for (const DecoderLayerParams& p : layers) {
    DecoderLayerOut step =
        decoder_layer(x, nodes, p, dropout_p, ln_eps, training, rng);
    x = step.output;
    trace.e2n.push_back(step.e2n);
    trace.e2e.push_back(step.e2e);
  }
  return x;
}

}  // namespace reltr
