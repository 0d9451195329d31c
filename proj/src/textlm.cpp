#include "reacfuse/textlm.hpp"

namespace reacfuse::model {

std::vector<int> tokenize_text(const std::string& s, int context_length) {
  std::vector<int> toks;
  toks.reserve(s.size() + 2);
  toks.push_back(TextLMConfig::kBos);
  for (unsigned char c : s) toks.push_back(static_cast<int>(c));
  toks.push_back(TextLMConfig::kEos);
  if (static_cast<int>(toks.size()) > context_length) {
    toks.resize(static_cast<std::size_t>(context_length));
    toks.back() = TextLMConfig::kEos;
  }
  return toks;
}

std::string detokenize(const std::vector<int>& toks) {
  std::string out;
  for (int t : toks)
    if (t >= 0 && t < 256) out.push_back(static_cast<char>(t));
  return out;
}

}  // namespace reacfuse::model
