#ifndef REACFUSE_TRANSFORMER_HPP
#define REACFUSE_TRANSFORMER_HPP

#include <string>
#include <vector>

#include "reacfuse/tensor.hpp"

namespace reacfuse::model {

using core::Tensor;

// Pre-norm transformer block parameters, shared by the reaction encoder and
// the text LM. Projections are [d x d] with x*W + b convention.
template <typename S>
struct TransformerLayer {
  Tensor<S> wq, bq, wk, bk, wv, bv, wo, bo;
  Tensor<S> ln1_g, ln1_b, ln2_g, ln2_b;
  Tensor<S> ff1_w, ff1_b, ff2_w, ff2_b;

  static TransformerLayer init(int d_model, int d_ff, Rng& rng) {
    const S sd = static_cast<S>(0.02);
    TransformerLayer l;
    l.wq = Tensor<S>::param_randn(d_model, d_model, sd, rng);
    l.bq = Tensor<S>::param_zeros(1, d_model);
    l.wk = Tensor<S>::param_randn(d_model, d_model, sd, rng);
    l.bk = Tensor<S>::param_zeros(1, d_model);
    l.wv = Tensor<S>::param_randn(d_model, d_model, sd, rng);
    l.bv = Tensor<S>::param_zeros(1, d_model);
    l.wo = Tensor<S>::param_randn(d_model, d_model, sd, rng);
    l.bo = Tensor<S>::param_zeros(1, d_model);
    l.ln1_g = Tensor<S>::param(1, d_model, std::vector<S>(static_cast<std::size_t>(d_model), S(1)));
    l.ln1_b = Tensor<S>::param_zeros(1, d_model);
    l.ln2_g = Tensor<S>::param(1, d_model, std::vector<S>(static_cast<std::size_t>(d_model), S(1)));
    l.ln2_b = Tensor<S>::param_zeros(1, d_model);
    l.ff1_w = Tensor<S>::param_randn(d_model, d_ff, sd, rng);
    l.ff1_b = Tensor<S>::param_zeros(1, d_ff);
    l.ff2_w = Tensor<S>::param_randn(d_ff, d_model, sd, rng);
    l.ff2_b = Tensor<S>::param_zeros(1, d_model);
    return l;
  }

  void collect(const std::string& prefix, std::vector<std::pair<std::string, Tensor<S>>>& out) {
    out.push_back({prefix + ".wq", wq});
    out.push_back({prefix + ".bq", bq});
    out.push_back({prefix + ".wk", wk});
    out.push_back({prefix + ".bk", bk});
    out.push_back({prefix + ".wv", wv});
    out.push_back({prefix + ".bv", bv});
    out.push_back({prefix + ".wo", wo});
    out.push_back({prefix + ".bo", bo});
    out.push_back({prefix + ".ln1_g", ln1_g});
    out.push_back({prefix + ".ln1_b", ln1_b});
    out.push_back({prefix + ".ln2_g", ln2_g});
    out.push_back({prefix + ".ln2_b", ln2_b});
    out.push_back({prefix + ".ff1_w", ff1_w});
    out.push_back({prefix + ".ff1_b", ff1_b});
    out.push_back({prefix + ".ff2_w", ff2_w});
    out.push_back({prefix + ".ff2_b", ff2_b});
  }
};

// Per-layer attention weights captured during a forward pass: [head] -> n x n
// probabilities. Values only, no graph.
template <typename S>
struct LayerTrace {
  std::vector<std::vector<S>> head_weights;
  int n = 0;
};

// One pre-norm block. head_bias: optional per-head additive [n x n]; add_mask:
// optional additive 0/-inf [n x n]. Captures attention weights when trace is
// given.
template <typename S>
Tensor<S> transformer_block(TransformerLayer<S>& layer, const Tensor<S>& x, int n_heads,
                            const std::vector<Tensor<S>>& head_bias, const Tensor<S>& add_mask,
                            LayerTrace<S>* trace = nullptr) {
  const core::Index d = x.cols();
  const core::Index hd = d / n_heads;
  Tensor<S> xn = core::layer_norm(x, layer.ln1_g, layer.ln1_b);
  Tensor<S> q = core::linear(xn, layer.wq, layer.bq);
  Tensor<S> k = core::linear(xn, layer.wk, layer.bk);
  Tensor<S> v = core::linear(xn, layer.wv, layer.bv);
  std::vector<Tensor<S>> heads;
  heads.reserve(static_cast<std::size_t>(n_heads));
  if (trace) {
    trace->head_weights.clear();
    trace->n = static_cast<int>(x.rows());
  }
  for (int h = 0; h < n_heads; ++h) {
    Tensor<S> qh = core::slice_cols(q, h * hd, hd);
    Tensor<S> kh = core::slice_cols(k, h * hd, hd);
    Tensor<S> vh = core::slice_cols(v, h * hd, hd);
    Tensor<S> bias;  // undefined = no bias
    if (!head_bias.empty()) bias = head_bias[static_cast<std::size_t>(h)];
    auto [weights, ctx] = core::attention_with_weights(qh, kh, vh, bias, add_mask);
    if (trace) trace->head_weights.push_back(weights.values());
    heads.push_back(std::move(ctx));
  }
  Tensor<S> merged = core::linear(core::concat_cols(heads), layer.wo, layer.bo);
  Tensor<S> mid = core::add(x, merged);
  Tensor<S> mn = core::layer_norm(mid, layer.ln2_g, layer.ln2_b);
  Tensor<S> ff =
      core::linear(core::gelu(core::linear(mn, layer.ff1_w, layer.ff1_b)), layer.ff2_w, layer.ff2_b);
  return core::add(mid, ff);
}

}  // namespace reacfuse::model

#endif
