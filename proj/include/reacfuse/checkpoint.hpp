#ifndef REACFUSE_CHECKPOINT_HPP
#define REACFUSE_CHECKPOINT_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "reacfuse/tensor.hpp"

namespace reacfuse::core {

// Little-endian tensor container: versioned header, model-kind tag, string
// metadata, a manifest (name -> shape, offset), then raw float32 payload.
// Round trips bit-exactly for float tensors.
struct Checkpoint {
  std::string kind;  // e.g. "graphormer/v1"
  std::map<std::string, std::string> meta;

  struct Entry {
    std::string name;
    std::vector<std::int64_t> shape;
    std::vector<float> data;
  };
  std::vector<Entry> entries;

  const Entry* find(const std::string& name) const {
    for (const auto& e : entries)
      if (e.name == name) return &e;
    return nullptr;
  }

  void add(const std::string& name, std::vector<std::int64_t> shape, std::vector<float> data);
  std::string serialize() const;
  void save(const std::filesystem::path& p) const;
  static Checkpoint deserialize(const std::string& bytes, const std::string& origin);
  static Checkpoint load(const std::filesystem::path& p);
};

template <typename S>
void checkpoint_put(Checkpoint& ck, const std::string& name, const Tensor<S>& t) {
  std::vector<float> data(t.values().size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<float>(t.values()[i]);
  ck.add(name, {t.rows(), t.cols()}, std::move(data));
}

template <typename S>
void checkpoint_get(const Checkpoint& ck, const std::string& name, Tensor<S>& t) {
  const Checkpoint::Entry* e = ck.find(name);
  if (!e) throw DataError("MissingTensor", "checkpoint has no tensor '" + name + "'");
  if (e->shape.size() != 2 || e->shape[0] != t.rows() || e->shape[1] != t.cols())
    throw ShapeError("BadShape", "checkpoint tensor '" + name + "' shape mismatch");
  for (std::size_t i = 0; i < e->data.size(); ++i) t.values()[i] = static_cast<S>(e->data[i]);
}

}  // namespace reacfuse::core

#endif
