#include <algorithm>

#include "reacfuse/chem.hpp"
#include "reacfuse/io.hpp"

namespace reacfuse::chem {

RscVocab RscVocab::load(const std::filesystem::path& p) {
  auto lines = read_lines(p);
  if (lines.empty() || lines[0] != "UNK")
    throw DataError("BadVocab", p.string() + ": line 0 must be UNK");
  RscVocab v;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) throw DataError("BadVocab", p.string() + ": empty line " + std::to_string(i));
    if (!v.index_.emplace(lines[i], static_cast<int>(i)).second)
      throw DataError("BadVocab", p.string() + ": duplicate token " + lines[i]);
    v.tokens_.push_back(lines[i]);
  }
  return v;
}

RscVocab RscVocab::from_tokens(std::vector<std::string> tokens) {
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  std::erase(tokens, std::string("UNK"));
  RscVocab v;
  v.tokens_.push_back("UNK");
  v.index_.emplace("UNK", 0);
  for (auto& t : tokens) {
    v.index_.emplace(t, static_cast<int>(v.tokens_.size()));
    v.tokens_.push_back(std::move(t));
  }
  return v;
}

int RscVocab::id_of(std::string_view token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnkId : it->second;
}

const std::string& RscVocab::token(int id) const {
  if (id < 0 || id >= size()) throw DataError("BadVocab", "RSC id out of range: " + std::to_string(id));
  return tokens_[static_cast<std::size_t>(id)];
}

void RscVocab::save(const std::filesystem::path& p) const { write_lines(p, tokens_); }

AtomVocab AtomVocab::load(const std::filesystem::path& p) {
  std::vector<std::pair<std::string, int>> pairs;
  for (const auto& line : read_lines(p)) {
    if (line.empty()) continue;
    std::size_t bar = line.find('|');
    if (bar == std::string::npos) throw DataError("BadVocab", p.string() + ": expected element|charge");
    std::string elem = line.substr(0, bar);
    int charge = std::stoi(line.substr(bar + 1));
    if (!element_known(elem)) throw DataError("BadVocab", p.string() + ": unknown element " + elem);
    pairs.emplace_back(std::move(elem), charge);
  }
  return from_pairs(std::move(pairs));
}

AtomVocab AtomVocab::from_pairs(std::vector<std::pair<std::string, int>> pairs) {
  AtomVocab v;
  v.pairs_ = std::move(pairs);
  for (std::size_t i = 0; i < v.pairs_.size(); ++i) {
    if (!v.index_.emplace(v.pairs_[i], static_cast<int>(i)).second)
      throw DataError("BadVocab", "duplicate atom type " + v.pairs_[i].first);
  }
  return v;
}

std::optional<int> AtomVocab::find(std::string_view element, int charge) const {
  auto it = index_.find(std::pair<std::string, int>(std::string(element), charge));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void AtomVocab::save(const std::filesystem::path& p) const {
  std::vector<std::string> lines;
  lines.reserve(pairs_.size());
  for (const auto& [elem, charge] : pairs_)
    lines.push_back(elem + "|" + std::to_string(charge));
  write_lines(p, lines);
}

}  // namespace reacfuse::chem
