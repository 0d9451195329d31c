#ifndef REACFUSE_MODEL_IO_HPP
#define REACFUSE_MODEL_IO_HPP

#include <filesystem>
#include <string>

#include "reacfuse/adapter.hpp"
#include "reacfuse/checkpoint.hpp"
#include "reacfuse/graphormer.hpp"
#include "reacfuse/hash.hpp"
#include "reacfuse/textlm.hpp"
#include "reacfuse/zsl.hpp"

namespace reacfuse::model {

inline constexpr const char* kGraphormerKind = "graphormer/v1";
inline constexpr const char* kProcLmKind = "proc-lm/v1";
inline constexpr const char* kZslLmKind = "zsl-lm/v1";
inline constexpr const char* kAdapterKind = "reacllama-adapter/v1";
inline constexpr const char* kLabelerKind = "zsl-labeler/v1";
inline constexpr const char* kEmbeddingKind = "embeddings/v1";

namespace detail {

inline int meta_int(const core::Checkpoint& ck, const std::string& key) {
  auto it = ck.meta.find(key);
  if (it == ck.meta.end())
    throw DataError("BadCheckpoint", "checkpoint lacks meta key " + key);
  return std::stoi(it->second);
}

inline void expect_kind(const core::Checkpoint& ck, const std::string& kind,
                        const std::string& origin) {
  if (ck.kind != kind)
    throw DataError("BadCheckpoint",
                    origin + ": expected kind " + kind + ", found " + ck.kind);
}

}  // namespace detail

// ---- graphormer ------------------------------------------------------------

template <typename S>
void save_graphormer(GraphormerModel<S>& m, const std::filesystem::path& p,
                     std::map<std::string, std::string> extra_meta = {}) {
  core::Checkpoint ck;
  ck.kind = kGraphormerKind;
  ck.meta = std::move(extra_meta);
  ck.meta["n_layers"] = std::to_string(m.cfg.n_layers);
  ck.meta["n_heads"] = std::to_string(m.cfg.n_heads);
  ck.meta["d_model"] = std::to_string(m.cfg.d_model);
  ck.meta["atom_vocab"] = std::to_string(m.cfg.atom_vocab);
  ck.meta["rsc_vocab"] = std::to_string(m.cfg.rsc_vocab);
  ck.meta["d_max"] = std::to_string(m.cfg.d_max);
  ck.meta["neighbor_cap"] = std::to_string(m.cfg.neighbor_cap);
  for (auto& [name, t] : m.named_params()) core::checkpoint_put(ck, name, t);
  ck.save(p);
}

template <typename S>
GraphormerModel<S> load_graphormer(const std::filesystem::path& p) {
  core::Checkpoint ck = core::Checkpoint::load(p);
  detail::expect_kind(ck, kGraphormerKind, p.string());
  GraphormerConfig cfg;
  cfg.n_layers = detail::meta_int(ck, "n_layers");
  cfg.n_heads = detail::meta_int(ck, "n_heads");
  cfg.d_model = detail::meta_int(ck, "d_model");
  cfg.atom_vocab = detail::meta_int(ck, "atom_vocab");
  cfg.rsc_vocab = detail::meta_int(ck, "rsc_vocab");
  cfg.d_max = detail::meta_int(ck, "d_max");
  cfg.neighbor_cap = detail::meta_int(ck, "neighbor_cap");
  GraphormerModel<S> m = GraphormerModel<S>::init(cfg, 0);
  for (auto& [name, t] : m.named_params()) core::checkpoint_get(ck, name, t);
  return m;
}

// ---- text LM ----------------------------------------------------------------

template <typename S>
void save_textlm(TextLM<S>& m, const std::string& kind, const std::filesystem::path& p,
                 std::map<std::string, std::string> extra_meta = {}) {
  core::Checkpoint ck;
  ck.kind = kind;
  ck.meta = std::move(extra_meta);
  ck.meta["n_layers"] = std::to_string(m.cfg.n_layers);
  ck.meta["n_heads"] = std::to_string(m.cfg.n_heads);
  ck.meta["d_text"] = std::to_string(m.cfg.d_text);
  ck.meta["context_length"] = std::to_string(m.cfg.context_length);
  for (auto& [name, t] : m.named_params()) core::checkpoint_put(ck, name, t);
  ck.save(p);
}

template <typename S>
TextLM<S> load_textlm(const std::filesystem::path& p, const std::string& expect_kind = "") {
  core::Checkpoint ck = core::Checkpoint::load(p);
  if (!expect_kind.empty()) detail::expect_kind(ck, expect_kind, p.string());
  if (ck.kind != kProcLmKind && ck.kind != kZslLmKind)
    throw DataError("BadCheckpoint", p.string() + ": not a text LM checkpoint");
  TextLMConfig cfg;
  cfg.n_layers = detail::meta_int(ck, "n_layers");
  cfg.n_heads = detail::meta_int(ck, "n_heads");
  cfg.d_text = detail::meta_int(ck, "d_text");
  cfg.context_length = detail::meta_int(ck, "context_length");
  TextLM<S> m = TextLM<S>::init(cfg, 0);
  for (auto& [name, t] : m.named_params()) core::checkpoint_get(ck, name, t);
  return m;
}

// ---- adapter -------------------------------------------------------------------

// The adapter stores only its trainable side plus the SHA-256 of the frozen
// LM checkpoint it was trained against; loading requires that exact file.
template <typename S>
void save_adapter(Adapter<S>& a, const std::filesystem::path& p,
                  std::map<std::string, std::string> extra_meta = {}) {
  core::Checkpoint ck;
  ck.kind = kAdapterKind;
  ck.meta = std::move(extra_meta);
  ck.meta["frozen_lm_sha"] = a.frozen_lm_sha;
  ck.meta["n_adapt_layers"] = std::to_string(a.dims.n_adapt_layers);
  ck.meta["n_layers"] = std::to_string(a.reaction.cfg.n_layers);
  ck.meta["n_heads"] = std::to_string(a.reaction.cfg.n_heads);
  ck.meta["d_model"] = std::to_string(a.reaction.cfg.d_model);
  ck.meta["atom_vocab"] = std::to_string(a.reaction.cfg.atom_vocab);
  ck.meta["rsc_vocab"] = std::to_string(a.reaction.cfg.rsc_vocab);
  ck.meta["d_max"] = std::to_string(a.reaction.cfg.d_max);
  ck.meta["neighbor_cap"] = std::to_string(a.reaction.cfg.neighbor_cap);
  for (auto& [name, t] : a.named_params()) core::checkpoint_put(ck, name, t);
  ck.save(p);
}

template <typename S>
Adapter<S> load_adapter(const std::filesystem::path& p, const std::filesystem::path& frozen_lm) {
  core::Checkpoint ck = core::Checkpoint::load(p);
  detail::expect_kind(ck, kAdapterKind, p.string());
  std::string want_sha = ck.meta.at("frozen_lm_sha");
  std::string have_sha = sha256_file(frozen_lm);
  if (want_sha != have_sha)
    throw DataError("FrozenLmMismatch",
                    p.string() + " was trained against a different frozen LM checkpoint");
  TextLM<S> lm = load_textlm<S>(frozen_lm);
  GraphormerConfig gcfg;
  gcfg.n_layers = detail::meta_int(ck, "n_layers");
  gcfg.n_heads = detail::meta_int(ck, "n_heads");
  gcfg.d_model = detail::meta_int(ck, "d_model");
  gcfg.atom_vocab = detail::meta_int(ck, "atom_vocab");
  gcfg.rsc_vocab = detail::meta_int(ck, "rsc_vocab");
  gcfg.d_max = detail::meta_int(ck, "d_max");
  gcfg.neighbor_cap = detail::meta_int(ck, "neighbor_cap");
  AdapterDims dims{detail::meta_int(ck, "n_adapt_layers")};
  Adapter<S> a = Adapter<S>::init(dims, gcfg, std::move(lm), want_sha, 0);
  for (auto& [name, t] : a.named_params()) core::checkpoint_get(ck, name, t);
  return a;
}

// ---- labeler --------------------------------------------------------------------

template <typename S>
void save_labeler(zsl::LabelerMLP<S>& m, const std::filesystem::path& p,
                  std::map<std::string, std::string> extra_meta = {}) {
  core::Checkpoint ck;
  ck.kind = kLabelerKind;
  ck.meta = std::move(extra_meta);
  ck.meta["d_in"] = std::to_string(m.d_in);
  ck.meta["d_hidden"] = std::to_string(m.d_hidden);
  for (auto& [name, t] : m.named_params()) core::checkpoint_put(ck, name, t);
  ck.save(p);
}

template <typename S>
zsl::LabelerMLP<S> load_labeler(const std::filesystem::path& p) {
  core::Checkpoint ck = core::Checkpoint::load(p);
  detail::expect_kind(ck, kLabelerKind, p.string());
  zsl::LabelerMLP<S> m =
      zsl::LabelerMLP<S>::init(detail::meta_int(ck, "d_in"), detail::meta_int(ck, "d_hidden"), 0);
  for (auto& [name, t] : m.named_params()) core::checkpoint_get(ck, name, t);
  return m;
}

// ---- embedding shards --------------------------------------------------------------

// One shard: an [n x d] matrix plus the record ids it covers (manifest meta).
void save_embedding_shard(const std::filesystem::path& p,
                          const std::vector<std::vector<double>>& rows,
                          const std::vector<std::int64_t>& record_ids,
                          const std::string& lm_sha);

struct EmbeddingShard {
  std::vector<std::vector<double>> rows;
  std::vector<std::int64_t> record_ids;
  std::string lm_sha;
};
EmbeddingShard load_embedding_shard(const std::filesystem::path& p);

}  // namespace reacfuse::model

#endif
