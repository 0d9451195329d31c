#ifndef REACFUSE_GRAPHORMER_HPP
#define REACFUSE_GRAPHORMER_HPP

#include <span>
#include <string>
#include <vector>

#include "reacfuse/featurize.hpp"
#include "reacfuse/transformer.hpp"

namespace reacfuse::model {

struct GraphormerConfig {
  int n_layers = 4;   // paper scale: 8
  int n_heads = 4;    // paper scale: 16
  int d_model = 64;   // paper scale: 256
  int atom_vocab = 0;  // real entries, MASK slot added on top
  int rsc_vocab = 0;
  int d_max = feat::kDistanceMax;
  int neighbor_cap = feat::kNeighborCap;
  double mlm_mask_rate = 0.15;

  int d_ff() const { return 4 * d_model; }
  int joint_vocab() const { return atom_vocab + rsc_vocab; }

  void validate() const {
    if (d_model % n_heads != 0) throw ConfigError("BadValue", "d_model must divide by n_heads");
    if (n_layers < 1 || n_heads < 1 || d_model < 1 || atom_vocab < 1 || rsc_vocab < 1)
      throw ConfigError("BadValue", "graphormer sizes must be >= 1");
  }
};

// Reaction encoder: atom-type + neighbor-count embeddings, product-role bias,
// one distance-bias table shared across layers (CROSS pairs structurally
// bias-free), masked pre-norm attention stack, MLM head over the joint
// atom+RSC vocabulary, mean-pooled sigmoid yield head (zero-initialized, so a
// fresh model scores 0.5).
template <typename S>
struct GraphormerModel {
  GraphormerConfig cfg;
  Tensor<S> atom_emb;           // [atom_vocab + 1, d]; last row is MASK
  Tensor<S> neighbor_emb;       // [neighbor_cap + 1, d]
  Tensor<S> rsc_emb;            // [rsc_vocab + 1, d]; last row is MASK
  Tensor<S> product_role_bias;  // [1, d]
  Tensor<S> distance_bias;      // [n_heads, d_max + 1]
  std::vector<TransformerLayer<S>> layers;
  Tensor<S> final_ln_g, final_ln_b;
  Tensor<S> mlm_w, mlm_b;      // [d, joint], [1, joint]
  Tensor<S> yield_w, yield_b;  // [d, 1], [1, 1]

  static GraphormerModel init(const GraphormerConfig& cfg, std::uint64_t seed) {
    Rng rng(Rng::mix(seed, 0x6052));
    return init_with_rng(cfg, rng);
  }

  static GraphormerModel init_with_rng(const GraphormerConfig& cfg, Rng& rng) {
    cfg.validate();
    const S sd = static_cast<S>(0.02);
    GraphormerModel m;
    m.cfg = cfg;
    m.atom_emb = Tensor<S>::param_randn(cfg.atom_vocab + 1, cfg.d_model, sd, rng);
    m.neighbor_emb = Tensor<S>::param_randn(cfg.neighbor_cap + 1, cfg.d_model, sd, rng);
    m.rsc_emb = Tensor<S>::param_randn(cfg.rsc_vocab + 1, cfg.d_model, sd, rng);
    m.product_role_bias = Tensor<S>::param_randn(1, cfg.d_model, sd, rng);
    m.distance_bias = Tensor<S>::param_randn(cfg.n_heads, cfg.d_max + 1, sd, rng);
    for (int l = 0; l < cfg.n_layers; ++l)
      m.layers.push_back(TransformerLayer<S>::init(cfg.d_model, cfg.d_ff(), rng));
    m.final_ln_g = Tensor<S>::param(1, cfg.d_model,
                                    std::vector<S>(static_cast<std::size_t>(cfg.d_model), S(1)));
    m.final_ln_b = Tensor<S>::param_zeros(1, cfg.d_model);
    m.mlm_w = Tensor<S>::param_randn(cfg.d_model, cfg.joint_vocab(), sd, rng);
    m.mlm_b = Tensor<S>::param_zeros(1, cfg.joint_vocab());
    m.yield_w = Tensor<S>::param_zeros(cfg.d_model, 1);
    m.yield_b = Tensor<S>::param_zeros(1, 1);
    return m;
  }

  std::vector<std::pair<std::string, Tensor<S>>> named_params() {
    std::vector<std::pair<std::string, Tensor<S>>> out;
    out.push_back({"atom_emb", atom_emb});
    out.push_back({"neighbor_emb", neighbor_emb});
    out.push_back({"rsc_emb", rsc_emb});
    out.push_back({"product_role_bias", product_role_bias});
    out.push_back({"distance_bias", distance_bias});
    for (std::size_t l = 0; l < layers.size(); ++l)
      layers[l].collect("layer" + std::to_string(l), out);
    out.push_back({"final_ln_g", final_ln_g});
    out.push_back({"final_ln_b", final_ln_b});
    out.push_back({"mlm_w", mlm_w});
    out.push_back({"mlm_b", mlm_b});
    out.push_back({"yield_w", yield_w});
    out.push_back({"yield_b", yield_b});
    return out;
  }

  std::vector<Tensor<S>> params() {
    std::vector<Tensor<S>> out;
    for (auto& [name, t] : named_params()) out.push_back(t);
    return out;
  }
};

template <typename S>
struct EncodeTrace {
  std::vector<LayerTrace<S>> layers;
};

// atom token: atom_emb[type] + neighbor_emb[count] (+ product role bias);
// RSC token: rsc_emb[id]
template <typename S>
Tensor<S> embed_tokens(GraphormerModel<S>& m, std::span<const feat::ReactionToken> tokens) {
  std::vector<int> atom_ids, neigh_ids, rsc_ids;
  std::vector<int> role_rows;  // rows that receive the product bias
  for (const auto& t : tokens) {
    if (t.kind == feat::TokenKind::Rsc) {
      if (t.rsc_id < 0 || t.rsc_id > m.cfg.rsc_vocab)
        throw ShapeError("VocabMismatch", "rsc id " + std::to_string(t.rsc_id));
      atom_ids.push_back(0);  // placeholder row, zeroed below
      neigh_ids.push_back(0);
      rsc_ids.push_back(t.rsc_id);
    } else {
      if (t.atom_type_id < 0 || t.atom_type_id > m.cfg.atom_vocab)
        throw ShapeError("VocabMismatch", "atom type id " + std::to_string(t.atom_type_id));
      atom_ids.push_back(t.atom_type_id);
      neigh_ids.push_back(std::min(t.neighbor_count, m.cfg.neighbor_cap));
      rsc_ids.push_back(m.cfg.rsc_vocab);  // placeholder
    }
  }
  const core::Index n = static_cast<core::Index>(tokens.size());
  const core::Index d = m.cfg.d_model;

  // selector masks keep the per-kind contributions separable while staying
  // on recorded ops
  Tensor<S> is_atom = Tensor<S>::zeros(n, 1);
  Tensor<S> is_rsc = Tensor<S>::zeros(n, 1);
  Tensor<S> is_product = Tensor<S>::zeros(n, 1);
  for (core::Index i = 0; i < n; ++i) {
    const auto& t = tokens[static_cast<std::size_t>(i)];
    if (t.kind == feat::TokenKind::Rsc) is_rsc.values()[static_cast<std::size_t>(i)] = S(1);
    else is_atom.values()[static_cast<std::size_t>(i)] = S(1);
    if (t.kind == feat::TokenKind::ProductAtom)
      is_product.values()[static_cast<std::size_t>(i)] = S(1);
  }
  auto broadcast = [&](const Tensor<S>& col) {
    Tensor<S> w = Tensor<S>::zeros(n, d);
    for (core::Index i = 0; i < n; ++i)
      for (core::Index j = 0; j < d; ++j)
        w.values()[static_cast<std::size_t>(i * d + j)] = col.values()[static_cast<std::size_t>(i)];
    return w;
  };

  Tensor<S> atom_part = core::add(core::take_rows(m.atom_emb, atom_ids),
                                  core::take_rows(m.neighbor_emb, neigh_ids));
  Tensor<S> rsc_part = core::take_rows(m.rsc_emb, rsc_ids);
  Tensor<S> role = core::mul(broadcast(is_product),
                             core::add_rowvec(Tensor<S>::zeros(n, d), m.product_role_bias));
  Tensor<S> h = core::add(core::mul(broadcast(is_atom), atom_part),
                          core::mul(broadcast(is_rsc), rsc_part));
  return core::add(h, role);
}

template <typename S>
Tensor<S> encode_tokens(GraphormerModel<S>& m, std::span<const feat::ReactionToken> tokens,
                        const feat::IntMatrix& codes, const feat::BoolMatrix& mask,
                        EncodeTrace<S>* trace = nullptr) {
  const core::Index n = static_cast<core::Index>(tokens.size());
  Tensor<S> h = embed_tokens(m, tokens);
  Tensor<S> add_mask = core::additive_mask<S>(mask.v, n, n);
  std::vector<Tensor<S>> head_bias;
  for (int hidx = 0; hidx < m.cfg.n_heads; ++hidx) {
    Tensor<S> row = core::take_rows(m.distance_bias, {hidx});
    head_bias.push_back(core::gather_bias(row, codes.v, n));
  }
  if (trace) trace->layers.resize(m.layers.size());
  for (std::size_t l = 0; l < m.layers.size(); ++l)
    h = transformer_block(m.layers[l], h, m.cfg.n_heads, head_bias, add_mask,
                          trace ? &trace->layers[l] : nullptr);
  return core::layer_norm(h, m.final_ln_g, m.final_ln_b);
}

template <typename S>
Tensor<S> encode(GraphormerModel<S>& m, const feat::TokenizedReaction& tr,
                 EncodeTrace<S>* trace = nullptr) {
  return encode_tokens<S>(m, tr.tokens, tr.distance_codes, tr.mask, trace);
}

template <typename S>
Tensor<S> yield_probability_t(GraphormerModel<S>& m, const feat::TokenizedReaction& tr) {
  Tensor<S> h = encode(m, tr);
  Tensor<S> pooled = core::mean_rows(h);
  return core::sigmoid(core::linear(pooled, m.yield_w, m.yield_b));
}

template <typename S>
double yield_probability(GraphormerModel<S>& m, const feat::TokenizedReaction& tr) {
  return static_cast<double>(yield_probability_t(m, tr).item());
}

// Cross-entropy restricted to masked positions (gradients flow nowhere else,
// by construction of the row gather). Returns (loss tensor, accuracy).
template <typename S>
std::pair<Tensor<S>, double> mlm_loss(GraphormerModel<S>& m, const feat::TokenizedReaction& clean,
                                      const feat::MlmCorruption& corr) {
  if (corr.targets.empty()) throw DataError("NoMaskedPositions", "corruption masked nothing");
  Tensor<S> h = encode_tokens<S>(m, corr.tokens, clean.distance_codes, clean.mask);
  Tensor<S> logits = core::linear(h, m.mlm_w, m.mlm_b);
  std::vector<int> rows;
  std::vector<int> targets;
  for (const auto& t : corr.targets) {
    rows.push_back(t.position);
    targets.push_back(t.joint_id);
  }
  Tensor<S> at_masked = core::take_rows(logits, rows);
  Tensor<S> loss = core::cross_entropy_mean(at_masked, targets);

  int correct = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const core::Index v = at_masked.cols();
    core::Index best = 0;
    for (core::Index j = 1; j < v; ++j)
      if (at_masked.at(static_cast<core::Index>(i), j) > at_masked.at(static_cast<core::Index>(i), best))
        best = j;
    if (best == targets[i]) ++correct;
  }
  return {loss, static_cast<double>(correct) / static_cast<double>(rows.size())};
}

}  // namespace reacfuse::model

#endif
