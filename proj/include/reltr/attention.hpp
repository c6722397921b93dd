#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "reltr/rng.hpp"
#include "reltr/tensor.hpp"

namespace reltr {

// Named parameter list used by the optimizer, checkpoints, and tests.
using NamedParams = std::vector<std::pair<std::string, Tensor>>;

// Linear map with bias: apply(x) = x * weight + bias (bias broadcast per row).
// Weight init: uniform(-1/sqrt(in), +1/sqrt(in)); bias starts at zero.
struct LinearParams {
  Tensor weight;  // [in x out]
  Tensor bias;    // [out]

  static LinearParams create(std::size_t in, std::size_t out, Rng& rng);
  Tensor apply(const Tensor& x) const;
  void collect(const std::string& prefix, NamedParams& out) const;
};

struct LayerNormParams {
  Tensor gamma;  // [dim], ones
  Tensor beta;   // [dim], zeros

  static LayerNormParams create(std::size_t dim);
  Tensor apply(const Tensor& x, double eps) const;
  void collect(const std::string& prefix, NamedParams& out) const;
};

// Projections for one multi-head attention block.  All four maps are
// d_model -> d_model and bias-free; heads are column slices of width
// d_model / num_heads.
struct MultiHeadAttentionParams {
  Tensor w_q, w_k, w_v, w_o;
  std::size_t num_heads = 1;

  // Throws ConfigError unless d_model is divisible by num_heads.
  static MultiHeadAttentionParams create(std::size_t d_model,
                                         std::size_t num_heads, Rng& rng);
  void collect(const std::string& prefix, NamedParams& out) const;
};

// One encoder layer: self-attention + FFN, post-layer-norm residual wiring.
struct EncoderLayerParams {
  MultiHeadAttentionParams self_attn;
  LinearParams ffn1;  // d_model -> d_ff
  LinearParams ffn2;  // d_ff -> d_model
  LayerNormParams ln1, ln2;

  static EncoderLayerParams create(std::size_t d_model, std::size_t d_ff,
                                   std::size_t num_heads, Rng& rng);
  void collect(const std::string& prefix, NamedParams& out) const;
};

// One decoder layer.  Sub-block order is the modified one: cross-attention
// from edges to nodes (E2N) comes FIRST, then edge self-attention (E2E),
// then the FFN.  Neither attention is masked.
struct DecoderLayerParams {
  MultiHeadAttentionParams cross_attn;  // E2N
  MultiHeadAttentionParams self_attn;   // E2E
  LinearParams ffn1, ffn2;
  LayerNormParams ln1, ln2, ln3;

  static DecoderLayerParams create(std::size_t d_model, std::size_t d_ff,
                                   std::size_t num_heads, Rng& rng);
  void collect(const std::string& prefix, NamedParams& out) const;
};

// Head-averaged attention matrices collected per layer, detached from the
// tape.  The "top most layer" matrix is the last entry of each vector.
struct AttentionTrace {
  std::vector<Tensor> n2n;  // encoder self-attention, [n x n] per layer
  std::vector<Tensor> e2n;  // decoder cross-attention, [E x n] per layer
  std::vector<Tensor> e2e;  // decoder self-attention, [E x E] per layer
};

struct AttentionOut {
  Tensor output;
  Tensor weights;  // row-stochastic; head-averaged and detached for MHA
};

// softmax(Q K^T / sqrt(d_k)) V, no masking.  The returned weights are the
// live softmax output (still on the tape).
AttentionOut scaled_dot_attention(const Tensor& q, const Tensor& k,
                                  const Tensor& v);

AttentionOut multi_head_attention(const Tensor& x_query, const Tensor& x_keyval,
                                  const MultiHeadAttentionParams& params);

struct EncoderLayerOut {
  Tensor output;
  Tensor n2n;
};

EncoderLayerOut encoder_layer(const Tensor& nodes, const EncoderLayerParams& p,
                              double dropout_p, double ln_eps, bool training,
                              Rng& rng);

struct DecoderLayerOut {
  Tensor output;
  Tensor e2n;
  Tensor e2e;
};

DecoderLayerOut decoder_layer(const Tensor& edges, const Tensor& nodes,
                              const DecoderLayerParams& p, double dropout_p,
                              double ln_eps, bool training, Rng& rng);

// Sequential stacks; each appends one trace matrix (or pair) per layer.
Tensor encoder_stack(const Tensor& nodes,
                     const std::vector<EncoderLayerParams>& layers,
                     double dropout_p, double ln_eps, bool training, Rng& rng,
                     AttentionTrace& trace);

Tensor decoder_stack(const Tensor& edges, const Tensor& nodes,
                     const std::vector<DecoderLayerParams>& layers,
                     double dropout_p, double ln_eps, bool training, Rng& rng,
                     AttentionTrace& trace);

}  // namespace reltr
