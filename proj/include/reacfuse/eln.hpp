#ifndef REACFUSE_ELN_HPP
#define REACFUSE_ELN_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace reacfuse::data {

inline constexpr double kYieldCutoffPct = 5.0;  // >= cutoff counts as success

// One ELN experiment. yield_pct/outcome_label both absent = unlabeled.
// ground_truth/rule_id exist only in synthetic corpora and are never fed to
// models; the ingestion helpers below strip them from anything model-facing.
struct ElnRecord {
  std::string reaction;
  std::string technology;
  std::string procedure;
  std::string comments;
  std::string product_label;
  std::optional<double> yield_pct;
  std::optional<std::string> outcome_label;  // "pos" or "neg"
  std::string timestamp;                     // ISO date, lexicographically ordered
  std::vector<std::string> tags;

  std::optional<int> ground_truth;  // synthetic only
  std::optional<int> rule_id;       // synthetic only

  bool labeled() const { return yield_pct.has_value() || outcome_label.has_value(); }

  // yield wins over the outcome string when both are present
  std::optional<int> hard_label() const {
    if (yield_pct) return *yield_pct >= kYieldCutoffPct ? 1 : 0;
    if (outcome_label) return *outcome_label == "pos" ? 1 : 0;
    return std::nullopt;
  }

  bool has_tag(const std::string& tag) const {
    for (const auto& t : tags)
      if (t == tag) return true;
    return false;
  }
};

std::string record_to_json(const ElnRecord& rec);
ElnRecord record_from_json(const std::string& line);

std::vector<ElnRecord> load_corpus(const std::filesystem::path& p);
void save_corpus(const std::filesystem::path& p, const std::vector<ElnRecord>& records);

// Table-style textual form: "##technology## ... ##procedure## ... ##comments##
// ... ##product## ...", plus "##yield## ... ##label## ..." only when outcome
// fields are requested. With the flag off neither the tags nor the values
// appear, which keeps label information out of every embedding path.
std::string format_record(const ElnRecord& rec, bool include_outcome_fields);

std::string format_yield(double pct);  // "4.0%"

}  // namespace reacfuse::data

#endif
