#include "reacfuse/checkpoint.hpp"

#include <cstring>

#include "reacfuse/io.hpp"

namespace reacfuse::core {

namespace {

constexpr char kMagic[8] = {'R', 'F', 'C', 'K', 'P', 'T', '0', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t x) {
  char b[4];
  std::memcpy(b, &x, 4);
  out.append(b, 4);
}

void put_u64(std::string& out, std::uint64_t x) {
  char b[8];
  std::memcpy(b, &x, 8);
  out.append(b, 8);
}

void put_str(std::string& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out += s;
}

class Reader {
public:
  Reader(const std::string& bytes, std::string origin) : b_(bytes), origin_(std::move(origin)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t x;
    std::memcpy(&x, b_.data() + pos_, 4);
    pos_ += 4;
    return x;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t x;
    std::memcpy(&x, b_.data() + pos_, 8);
    pos_ += 8;
    return x;
  }
  std::string str() {
    std::uint32_t n = u32();
    need(n);
    std::string s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void bytes(void* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, b_.data() + pos_, n);
    pos_ += n;
  }
  std::size_t pos() const { return pos_; }

  void need(std::size_t n) const {
    if (pos_ + n > b_.size())
      throw DataError("BadCheckpoint", origin_ + ": truncated container");
  }

private:
  const std::string& b_;
  std::string origin_;
  std::size_t pos_ = 0;
};

}  // namespace

void Checkpoint::add(const std::string& name, std::vector<std::int64_t> shape,
                     std::vector<float> data) {
  std::uint64_t numel = 1;
  for (auto d : shape) numel *= static_cast<std::uint64_t>(d);
  if (numel != data.size())
    throw ShapeError("BadShape", "checkpoint entry '" + name + "': shape/data mismatch");
  entries.push_back({name, std::move(shape), std::move(data)});
}

std::string Checkpoint::serialize() const {
  std::string out;
  out.append(kMagic, 8);
  put_u32(out, kVersion);
  put_str(out, kind);
  put_u32(out, static_cast<std::uint32_t>(meta.size()));
  for (const auto& [k, v] : meta) {
    put_str(out, k);
    put_str(out, v);
  }
  put_u64(out, entries.size());
  std::uint64_t offset = 0;
  for (const auto& e : entries) {
    put_str(out, e.name);
    put_u32(out, static_cast<std::uint32_t>(e.shape.size()));
    for (auto d : e.shape) put_u64(out, static_cast<std::uint64_t>(d));
    put_u64(out, offset);
    put_u64(out, e.data.size());
    offset += e.data.size() * sizeof(float);
  }
  put_u64(out, offset);
  for (const auto& e : entries)
    out.append(reinterpret_cast<const char*>(e.data.data()), e.data.size() * sizeof(float));
  return out;
}

void Checkpoint::save(const std::filesystem::path& p) const { atomic_write(p, serialize()); }

Checkpoint Checkpoint::deserialize(const std::string& bytes, const std::string& origin) {
  Reader r(bytes, origin);
  char magic[8];
  r.bytes(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0)
    throw DataError("BadCheckpoint", origin + ": bad magic");
  std::uint32_t version = r.u32();
  if (version != kVersion)
    throw DataError("BadCheckpoint", origin + ": unsupported version " + std::to_string(version));
  Checkpoint ck;
  ck.kind = r.str();
  std::uint32_t n_meta = r.u32();
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string k = r.str();
    ck.meta[k] = r.str();
  }
  std::uint64_t n_entries = r.u64();
  struct Row {
    std::string name;
    std::vector<std::int64_t> shape;
    std::uint64_t offset, numel;
  };
  std::vector<Row> rows;
  for (std::uint64_t i = 0; i < n_entries; ++i) {
    Row row;
    row.name = r.str();
    std::uint32_t ndim = r.u32();
    for (std::uint32_t d = 0; d < ndim; ++d)
      row.shape.push_back(static_cast<std::int64_t>(r.u64()));
    row.offset = r.u64();
    row.numel = r.u64();
    rows.push_back(std::move(row));
  }
  std::uint64_t data_bytes = r.u64();
  std::size_t data_start = r.pos();
  r.need(data_bytes);
  for (auto& row : rows) {
    if (row.offset + row.numel * sizeof(float) > data_bytes)
      throw DataError("BadCheckpoint", origin + ": entry '" + row.name + "' outside payload");
    std::vector<float> data(row.numel);
    std::memcpy(data.data(), bytes.data() + data_start + row.offset, row.numel * sizeof(float));
    ck.add(row.name, std::move(row.shape), std::move(data));
  }
  return ck;
}

Checkpoint Checkpoint::load(const std::filesystem::path& p) {
  return deserialize(read_file(p), p.string());
}

}  // namespace reacfuse::core
