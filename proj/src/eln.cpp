#include "reacfuse/eln.hpp"

#include <json.hpp>

#include <cstdio>

#include "reacfuse/errors.hpp"
#include "reacfuse/io.hpp"

using nlohmann::json;

namespace reacfuse::data {

std::string record_to_json(const ElnRecord& rec) {
  json j;
  j["reaction"] = rec.reaction;
  j["technology"] = rec.technology;
  j["procedure"] = rec.procedure;
  j["comments"] = rec.comments;
  j["product_label"] = rec.product_label;
  j["yield_pct"] = rec.yield_pct ? json(*rec.yield_pct) : json(nullptr);
  j["outcome_label"] = rec.outcome_label ? json(*rec.outcome_label) : json(nullptr);
  j["timestamp"] = rec.timestamp;
  j["tags"] = rec.tags;
  if (rec.ground_truth) j["ground_truth"] = *rec.ground_truth;
  if (rec.rule_id) j["rule_id"] = *rec.rule_id;
  return j.dump();
}

ElnRecord record_from_json(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw DataError("BadRecord", std::string("JSONL parse failure: ") + e.what());
  }
  ElnRecord rec;
  try {
    rec.reaction = j.at("reaction").get<std::string>();
    rec.technology = j.at("technology").get<std::string>();
    rec.procedure = j.at("procedure").get<std::string>();
    rec.comments = j.at("comments").get<std::string>();
    rec.product_label = j.at("product_label").get<std::string>();
    if (!j.at("yield_pct").is_null()) rec.yield_pct = j.at("yield_pct").get<double>();
    if (!j.at("outcome_label").is_null())
      rec.outcome_label = j.at("outcome_label").get<std::string>();
    rec.timestamp = j.at("timestamp").get<std::string>();
    rec.tags = j.at("tags").get<std::vector<std::string>>();
    if (j.contains("ground_truth") && !j.at("ground_truth").is_null())
      rec.ground_truth = j.at("ground_truth").get<int>();
    if (j.contains("rule_id") && !j.at("rule_id").is_null())
      rec.rule_id = j.at("rule_id").get<int>();
  } catch (const json::exception& e) {
    throw DataError("BadRecord", std::string("record schema violation: ") + e.what());
  }
  if (rec.outcome_label && *rec.outcome_label != "pos" && *rec.outcome_label != "neg")
    throw DataError("BadRecord", "outcome_label must be pos/neg, got " + *rec.outcome_label);
  return rec;
}

std::vector<ElnRecord> load_corpus(const std::filesystem::path& p) {
  std::vector<ElnRecord> out;
  for (const auto& line : read_lines(p)) {
    if (line.empty()) continue;
    out.push_back(record_from_json(line));
  }
  if (out.empty()) throw DataError("EmptyCorpus", p.string() + " holds no records");
  return out;
}

void save_corpus(const std::filesystem::path& p, const std::vector<ElnRecord>& records) {
  std::vector<std::string> lines;
  lines.reserve(records.size());
  for (const auto& r : records) lines.push_back(record_to_json(r));
  write_lines(p, lines);
}

std::string format_yield(double pct) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", pct);
  return buf;
}

std::string format_record(const ElnRecord& rec, bool include_outcome_fields) {
  std::string out;
  out += "##technology## " + rec.technology;
  out += " ##procedure## " + rec.procedure;
  out += " ##comments## " + rec.comments;
  out += " ##product## " + rec.product_label;
  if (include_outcome_fields) {
    out += " ##yield## ";
    if (rec.yield_pct) out += format_yield(*rec.yield_pct);
    out += " ##label## ";
    if (auto l = rec.hard_label()) out += *l == 1 ? "pos" : "neg";
  }
  return out;
}

}  // namespace reacfuse::data
