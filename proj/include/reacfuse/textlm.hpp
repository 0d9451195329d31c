#ifndef REACFUSE_TEXTLM_HPP
#define REACFUSE_TEXTLM_HPP

#include <string>
#include <vector>

#include "reacfuse/transformer.hpp"

namespace reacfuse::model {

// Byte-level decoder-only LM. Vocabulary: 256 raw bytes + BOS/EOS/PAD.
struct TextLMConfig {
  int n_layers = 4;
  int n_heads = 4;
  int d_text = 128;
  int context_length = 512;

  static constexpr int kBos = 256;
  static constexpr int kEos = 257;
  static constexpr int kPad = 258;
  static constexpr int kVocab = 259;

  int d_ff() const { return 4 * d_text; }

  void validate() const {
    if (d_text % n_heads != 0) throw ConfigError("BadValue", "d_text must divide by n_heads");
    if (n_layers < 1 || context_length < 4)
      throw ConfigError("BadValue", "bad text LM shape");
  }
};

// BOS + bytes + EOS, truncated to the context window with EOS kept.
std::vector<int> tokenize_text(const std::string& s, int context_length);
std::string detokenize(const std::vector<int>& toks);

template <typename S>
struct TextLM {
  TextLMConfig cfg;
  Tensor<S> tok_emb;  // [kVocab, d]
  Tensor<S> pos_emb;  // [context, d]
  std::vector<TransformerLayer<S>> layers;
  Tensor<S> final_ln_g, final_ln_b;
  Tensor<S> head_w, head_b;  // [d, kVocab]

  static TextLM init(const TextLMConfig& cfg, std::uint64_t seed) {
    Rng rng(Rng::mix(seed, 0x7e47));
    return init_with_rng(cfg, rng);
  }

  static TextLM init_with_rng(const TextLMConfig& cfg, Rng& rng) {
    cfg.validate();
    const S sd = static_cast<S>(0.02);
    TextLM m;
    m.cfg = cfg;
    m.tok_emb = Tensor<S>::param_randn(TextLMConfig::kVocab, cfg.d_text, sd, rng);
    m.pos_emb = Tensor<S>::param_randn(cfg.context_length, cfg.d_text, sd, rng);
    for (int l = 0; l < cfg.n_layers; ++l)
      m.layers.push_back(TransformerLayer<S>::init(cfg.d_text, cfg.d_ff(), rng));
    m.final_ln_g =
        Tensor<S>::param(1, cfg.d_text, std::vector<S>(static_cast<std::size_t>(cfg.d_text), S(1)));
    m.final_ln_b = Tensor<S>::param_zeros(1, cfg.d_text);
    m.head_w = Tensor<S>::param_randn(cfg.d_text, TextLMConfig::kVocab, sd, rng);
    m.head_b = Tensor<S>::param_zeros(1, TextLMConfig::kVocab);
    return m;
  }

  std::vector<std::pair<std::string, Tensor<S>>> named_params() {
    std::vector<std::pair<std::string, Tensor<S>>> out;
    out.push_back({"tok_emb", tok_emb});
    out.push_back({"pos_emb", pos_emb});
    for (std::size_t l = 0; l < layers.size(); ++l)
      layers[l].collect("layer" + std::to_string(l), out);
    out.push_back({"final_ln_g", final_ln_g});
    out.push_back({"final_ln_b", final_ln_b});
    out.push_back({"head_w", head_w});
    out.push_back({"head_b", head_b});
    return out;
  }

  std::vector<Tensor<S>> params() {
    std::vector<Tensor<S>> out;
    for (auto& [name, t] : named_params()) out.push_back(t);
    return out;
  }

  void freeze() {
    for (auto& t : params()) t.node()->requires_grad = false;
  }
};

template <typename S>
Tensor<S> causal_additive_mask(core::Index n) {
  Tensor<S> m = Tensor<S>::zeros(n, n);
  const S neg_inf = -std::numeric_limits<S>::infinity();
  for (core::Index i = 0; i < n; ++i)
    for (core::Index j = i + 1; j < n; ++j)
      m.values()[static_cast<std::size_t>(i * n + j)] = neg_inf;
  return m;
}

// final-layer-norm hidden states for a token sequence
template <typename S>
Tensor<S> lm_hidden(TextLM<S>& m, const std::vector<int>& toks) {
  if (toks.empty()) throw DataError("EmptyInput", "no tokens");
  if (static_cast<int>(toks.size()) > m.cfg.context_length)
    throw ShapeError("BadShape", "sequence exceeds context window");
  const core::Index n = static_cast<core::Index>(toks.size());
  std::vector<int> pos(toks.size());
  for (std::size_t i = 0; i < toks.size(); ++i) pos[i] = static_cast<int>(i);
  Tensor<S> h = core::add(core::take_rows(m.tok_emb, toks), core::take_rows(m.pos_emb, pos));
  Tensor<S> mask = causal_additive_mask<S>(n);
  std::vector<Tensor<S>> no_bias;
  for (auto& layer : m.layers)
    h = transformer_block(layer, h, m.cfg.n_heads, no_bias, mask);
  return core::layer_norm(h, m.final_ln_g, m.final_ln_b);
}

template <typename S>
Tensor<S> lm_logits(TextLM<S>& m, const std::vector<int>& toks) {
  return core::linear(lm_hidden(m, toks), m.head_w, m.head_b);
}

// next-token cross-entropy; PAD targets are excluded
template <typename S>
Tensor<S> lm_loss(TextLM<S>& m, const std::vector<int>& toks) {
  if (toks.size() < 2) throw DataError("EmptyInput", "need at least two tokens");
  Tensor<S> logits = lm_logits(m, toks);
  std::vector<int> rows, targets;
  for (std::size_t t = 0; t + 1 < toks.size(); ++t) {
    if (toks[t + 1] == TextLMConfig::kPad) continue;
    rows.push_back(static_cast<int>(t));
    targets.push_back(toks[t + 1]);
  }
  if (rows.empty()) throw DataError("EmptyInput", "all targets are PAD");
  return core::cross_entropy_mean(core::take_rows(logits, rows), targets);
}

// last non-PAD position of the final hidden states, as plain doubles
template <typename S>
std::vector<double> last_token_embedding(TextLM<S>& m, const std::string& text) {
  std::vector<int> toks = tokenize_text(text, m.cfg.context_length);
  Tensor<S> h = lm_hidden(m, toks);
  std::size_t last = toks.size() - 1;
  while (last > 0 && toks[last] == TextLMConfig::kPad) --last;
  std::vector<double> out(static_cast<std::size_t>(h.cols()));
  for (core::Index j = 0; j < h.cols(); ++j)
    out[static_cast<std::size_t>(j)] =
        static_cast<double>(h.at(static_cast<core::Index>(last), j));
  return out;
}

}  // namespace reacfuse::model

#endif
