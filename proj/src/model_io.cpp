#include "reacfuse/model_io.hpp"

#include <json.hpp>

namespace reacfuse::model {

void save_embedding_shard(const std::filesystem::path& p,
                          const std::vector<std::vector<double>>& rows,
                          const std::vector<std::int64_t>& record_ids,
                          const std::string& lm_sha) {
  if (rows.size() != record_ids.size())
    throw DataError("AlignmentMismatch", "embedding rows and record ids differ in length");
  if (rows.empty()) throw DataError("EmptyCorpus", "no embedding rows to save");
  const std::int64_t n = static_cast<std::int64_t>(rows.size());
  const std::int64_t d = static_cast<std::int64_t>(rows[0].size());
  std::vector<float> flat;
  flat.reserve(static_cast<std::size_t>(n * d));
  for (const auto& r : rows) {
    if (static_cast<std::int64_t>(r.size()) != d)
      throw ShapeError("BadShape", "ragged embedding rows");
    for (double x : r) flat.push_back(static_cast<float>(x));
  }
  core::Checkpoint ck;
  ck.kind = kEmbeddingKind;
  ck.meta["lm_sha"] = lm_sha;
  ck.meta["record_ids"] = nlohmann::json(record_ids).dump();
  ck.add("embeddings", {n, d}, std::move(flat));
  ck.save(p);
}

EmbeddingShard load_embedding_shard(const std::filesystem::path& p) {
  core::Checkpoint ck = core::Checkpoint::load(p);
  detail::expect_kind(ck, kEmbeddingKind, p.string());
  const core::Checkpoint::Entry* e = ck.find("embeddings");
  if (!e || e->shape.size() != 2)
    throw DataError("BadCheckpoint", p.string() + ": no embedding matrix");
  EmbeddingShard out;
  out.lm_sha = ck.meta.at("lm_sha");
  out.record_ids = nlohmann::json::parse(ck.meta.at("record_ids")).get<std::vector<std::int64_t>>();
  const std::int64_t n = e->shape[0], d = e->shape[1];
  if (static_cast<std::int64_t>(out.record_ids.size()) != n)
    throw DataError("BadCheckpoint", p.string() + ": record id count mismatch");
  out.rows.resize(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    out.rows[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(d));
    for (std::int64_t j = 0; j < d; ++j)
      out.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          static_cast<double>(e->data[static_cast<std::size_t>(i * d + j)]);
  }
  return out;
}

}  // namespace reacfuse::model
