#ifndef REACFUSE_ADAPTER_HPP
#define REACFUSE_ADAPTER_HPP

#include <string>
#include <vector>

#include "reacfuse/graphormer.hpp"
#include "reacfuse/textlm.hpp"

namespace reacfuse::model {

// Cross-modal adapter: the reaction encoder is unfrozen; the text LM is
// frozen; the last n_adapt_layers of the text stack get a second attention
// stream over upsampled reaction states, merged through per-head
// zero-initialized gates. The yield head lives on the reaction stream, so
// inference never touches text.
struct AdapterDims {
  int n_adapt_layers = 0;

  void validate(const GraphormerConfig& g, const TextLMConfig& t) const {
    if (n_adapt_layers < 1) throw ConfigError("BadValue", "need at least one adaptation layer");
    if (n_adapt_layers > t.n_layers)
      throw ConfigError("BadValue", "more adaptation layers than LM layers");
    if (n_adapt_layers > g.n_layers)
      throw ConfigError("BadValue", "more adaptation layers than reaction layers");
  }
  int n_frozen_only(const TextLMConfig& t) const { return t.n_layers - n_adapt_layers; }
};

template <typename S>
struct Adapter {
  AdapterDims dims;
  GraphormerModel<S> reaction;  // trainable, includes the yield head
  TextLM<S> frozen_lm;          // weights frozen bit-for-bit
  std::string frozen_lm_sha;    // binding to the checkpoint the LM came from
  std::vector<Tensor<S>> upsample_w;  // per adapt layer [d_model, d_text]
  std::vector<Tensor<S>> upsample_b;  // per adapt layer [1, d_text]
  std::vector<Tensor<S>> gates;       // per adapt layer [1, n_heads], zero-init

  static Adapter init(const AdapterDims& dims, const GraphormerConfig& gcfg, TextLM<S> lm,
                      std::string lm_sha, std::uint64_t seed) {
    dims.validate(gcfg, lm.cfg);
    Adapter a;
    a.dims = dims;
    Rng rng(Rng::mix(seed, 0xada7));
    a.reaction = GraphormerModel<S>::init_with_rng(gcfg, rng);
    a.frozen_lm = std::move(lm);
    a.frozen_lm.freeze();
    a.frozen_lm_sha = std::move(lm_sha);
    const S sd = static_cast<S>(0.02);
    for (int l = 0; l < dims.n_adapt_layers; ++l) {
      a.upsample_w.push_back(Tensor<S>::param_randn(gcfg.d_model, lm.cfg.d_text, sd, rng));
      a.upsample_b.push_back(Tensor<S>::param_zeros(1, lm.cfg.d_text));
      a.gates.push_back(Tensor<S>::param_zeros(1, lm.cfg.n_heads));
    }
    return a;
  }

  // trainable parameters only (reaction stream + upsample + gates)
  std::vector<std::pair<std::string, Tensor<S>>> named_params() {
    std::vector<std::pair<std::string, Tensor<S>>> out;
    for (auto& [n, t] : reaction.named_params()) out.push_back({"reaction." + n, t});
    for (std::size_t l = 0; l < upsample_w.size(); ++l) {
      out.push_back({"upsample" + std::to_string(l) + ".w", upsample_w[l]});
      out.push_back({"upsample" + std::to_string(l) + ".b", upsample_b[l]});
      out.push_back({"gate" + std::to_string(l), gates[l]});
    }
    return out;
  }

  std::vector<Tensor<S>> params() {
    std::vector<Tensor<S>> out;
    for (auto& [name, t] : named_params()) out.push_back(t);
    return out;
  }
};

// Adapted attention: the frozen layer's own causal self-attention plus a
// second scaled dot-product stream whose keys/values come from the same
// frozen projections applied to the upsampled reaction states. Per-head gate
// scales the reaction stream before the frozen output projection. Takes the
// already-normalized text states; returns the attention sublayer output.
template <typename S>
Tensor<S> adapted_mha(TransformerLayer<S>& frozen, const Tensor<S>& text_norm,
                      const Tensor<S>& reac_up, const Tensor<S>& gate, int n_heads,
                      const Tensor<S>& causal_mask) {
  const core::Index d = text_norm.cols();
  const core::Index hd = d / n_heads;
  Tensor<S> q = core::linear(text_norm, frozen.wq, frozen.bq);
  Tensor<S> k_text = core::linear(text_norm, frozen.wk, frozen.bk);
  Tensor<S> v_text = core::linear(text_norm, frozen.wv, frozen.bv);
  Tensor<S> k_reac = core::linear(reac_up, frozen.wk, frozen.bk);
  Tensor<S> v_reac = core::linear(reac_up, frozen.wv, frozen.bv);

  std::vector<Tensor<S>> heads;
  Tensor<S> no_bias;
  for (int h = 0; h < n_heads; ++h) {
    Tensor<S> qh = core::slice_cols(q, h * hd, hd);
    Tensor<S> a_text = core::masked_biased_attention(qh, core::slice_cols(k_text, h * hd, hd),
                                                     core::slice_cols(v_text, h * hd, hd), no_bias,
                                                     causal_mask);
    // no causal structure across modalities: text queries may see every
    // reaction token
    Tensor<S> a_reac = core::masked_biased_attention(qh, core::slice_cols(k_reac, h * hd, hd),
                                                     core::slice_cols(v_reac, h * hd, hd), no_bias,
                                                     Tensor<S>());
    Tensor<S> gate_h = core::slice_cols(gate, h, 1);
    heads.push_back(core::add(a_text, core::mul_scalar_t(a_reac, gate_h)));
  }
  return core::linear(core::concat_cols(heads), frozen.wo, frozen.bo);
}

// Full adaptation layer: adapted attention inside the frozen block's residual
// and FFN structure.
template <typename S>
Tensor<S> adapted_block(TransformerLayer<S>& frozen, const Tensor<S>& x_text,
                        const Tensor<S>& reac_up, const Tensor<S>& gate, int n_heads,
                        const Tensor<S>& causal_mask) {
  Tensor<S> xn = core::layer_norm(x_text, frozen.ln1_g, frozen.ln1_b);
  Tensor<S> merged = adapted_mha(frozen, xn, reac_up, gate, n_heads, causal_mask);
  Tensor<S> mid = core::add(x_text, merged);
  Tensor<S> mn = core::layer_norm(mid, frozen.ln2_g, frozen.ln2_b);
  Tensor<S> ff = core::linear(core::gelu(core::linear(mn, frozen.ff1_w, frozen.ff1_b)),
                              frozen.ff2_w, frozen.ff2_b);
  return core::add(mid, ff);
}

// Full two-stream forward. Reaction states are tapped after the last
// n_adapt_layers reaction layers (aligned tail mapping) and injected into the
// corresponding adaptation layers of the text stack.
template <typename S>
std::pair<Tensor<S>, Tensor<S>> adapter_forward(Adapter<S>& a, const feat::TokenizedReaction& tr,
                                                const std::vector<int>& text_toks) {
  const auto& gcfg = a.reaction.cfg;
  const int n_graph = gcfg.n_layers;
  const int n_adapt = a.dims.n_adapt_layers;
  const int first_tapped = n_graph - n_adapt;

  // reaction stream
  const core::Index n = static_cast<core::Index>(tr.tokens.size());
  Tensor<S> h = embed_tokens(a.reaction, tr.tokens);
  Tensor<S> add_mask = core::additive_mask<S>(tr.mask.v, n, n);
  std::vector<Tensor<S>> head_bias;
  for (int hidx = 0; hidx < gcfg.n_heads; ++hidx)
    head_bias.push_back(
        core::gather_bias(core::take_rows(a.reaction.distance_bias, {hidx}), tr.distance_codes.v, n));
  std::vector<Tensor<S>> tapped;
  for (int l = 0; l < n_graph; ++l) {
    h = transformer_block(a.reaction.layers[static_cast<std::size_t>(l)], h, gcfg.n_heads,
                          head_bias, add_mask);
    if (l >= first_tapped) tapped.push_back(h);
  }
  Tensor<S> reac_final = core::layer_norm(h, a.reaction.final_ln_g, a.reaction.final_ln_b);
  Tensor<S> yield_prob =
      core::sigmoid(core::linear(core::mean_rows(reac_final), a.reaction.yield_w, a.reaction.yield_b));

  // text stream: frozen-only layers, then adaptation layers
  auto& lm = a.frozen_lm;
  if (static_cast<int>(text_toks.size()) > lm.cfg.context_length)
    throw ShapeError("BadShape", "text exceeds context window");
  const core::Index tn = static_cast<core::Index>(text_toks.size());
  std::vector<int> pos(text_toks.size());
  for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = static_cast<int>(i);
  Tensor<S> t = core::add(core::take_rows(lm.tok_emb, text_toks), core::take_rows(lm.pos_emb, pos));
  Tensor<S> causal = causal_additive_mask<S>(tn);
  const int n_frozen = a.dims.n_frozen_only(lm.cfg);
  std::vector<Tensor<S>> no_bias;
  for (int l = 0; l < n_frozen; ++l)
    t = transformer_block(lm.layers[static_cast<std::size_t>(l)], t, lm.cfg.n_heads, no_bias, causal);
  for (int k = 0; k < n_adapt; ++k) {
    Tensor<S> up = core::linear(tapped[static_cast<std::size_t>(k)],
                                a.upsample_w[static_cast<std::size_t>(k)],
                                a.upsample_b[static_cast<std::size_t>(k)]);
    t = adapted_block(lm.layers[static_cast<std::size_t>(n_frozen + k)], t, up,
                      a.gates[static_cast<std::size_t>(k)], lm.cfg.n_heads, causal);
  }
  t = core::layer_norm(t, lm.final_ln_g, lm.final_ln_b);
  Tensor<S> logits = core::linear(t, lm.head_w, lm.head_b);
  return {yield_prob, logits};
}

// structured input only; no text pathway exists here
template <typename S>
double adapter_infer(Adapter<S>& a, const feat::TokenizedReaction& tr) {
  return yield_probability(a.reaction, tr);
}

}  // namespace reacfuse::model

#endif
