#include "reacfuse/zsl.hpp"

#include <json.hpp>

#include <cstdio>

#include "reacfuse/io.hpp"

using nlohmann::json;

namespace reacfuse::zsl {

std::string LabelingStrategy::name() const {
  switch (kind) {
    case StrategyKind::Continuous: return "continuous";
    case StrategyKind::Binary: return "binary";
    case StrategyKind::Threshold: {
      char buf[48];
      std::snprintf(buf, sizeof buf, "threshold(%.2f,%.2f)", lo, hi);
      return buf;
    }
  }
  return "?";
}

std::vector<std::optional<double>> apply_strategy(const std::vector<double>& probs,
                                                  const LabelingStrategy& strategy) {
  strategy.validate();
  std::vector<std::optional<double>> out;
  out.reserve(probs.size());
  for (double p : probs) {
    switch (strategy.kind) {
      case StrategyKind::Continuous:
        out.emplace_back(p);
        break;
      case StrategyKind::Threshold:
        if (p <= strategy.lo || p >= strategy.hi) out.emplace_back(p);
        else out.emplace_back(std::nullopt);
        break;
      case StrategyKind::Binary:
        out.emplace_back(p >= 0.5 ? 1.0 : 0.0);
        break;
    }
  }
  return out;
}

const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::Original: return "original";
    case Provenance::ZslContinuous: return "zsl_continuous";
    case Provenance::ZslThresholded: return "zsl_thresholded";
    case Provenance::ZslBinary: return "zsl_binary";
  }
  return "?";
}

Provenance provenance_from_name(const std::string& s) {
  if (s == "original") return Provenance::Original;
  if (s == "zsl_continuous") return Provenance::ZslContinuous;
  if (s == "zsl_thresholded") return Provenance::ZslThresholded;
  if (s == "zsl_binary") return Provenance::ZslBinary;
  throw DataError("BadRecord", "unknown provenance " + s);
}

std::string DistributionReport::csv() const {
  std::string out = "row,n,positive,negative,positive_share\n";
  for (const DistributionRow* r : {&original, &pseudo, &combined}) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s,%lld,%lld,%lld,%.6f\n", r->name.c_str(),
                  static_cast<long long>(r->n), static_cast<long long>(r->positive),
                  static_cast<long long>(r->negative), r->positive_share);
    out += buf;
  }
  return out;
}

namespace {

DistributionRow make_row(const std::string& name, std::int64_t pos, std::int64_t neg) {
  DistributionRow r;
  r.name = name;
  r.positive = pos;
  r.negative = neg;
  r.n = pos + neg;
  r.positive_share = r.n ? static_cast<double>(pos) / static_cast<double>(r.n) : 0.0;
  return r;
}

}  // namespace

ExtendResult extend_dataset(const std::vector<data::ElnRecord>& labeled,
                            const std::vector<data::ElnRecord>& unlabeled,
                            const std::vector<double>& probs, const LabelingStrategy& strategy) {
  if (probs.size() != unlabeled.size())
    throw DataError("AlignmentMismatch", "probability count does not match unlabeled records");
  Provenance prov = strategy.kind == StrategyKind::Continuous ? Provenance::ZslContinuous
                    : strategy.kind == StrategyKind::Binary   ? Provenance::ZslBinary
                                                              : Provenance::ZslThresholded;
  ExtendResult out;
  std::int64_t orig_pos = 0, orig_neg = 0, zsl_pos = 0, zsl_neg = 0;
  for (const auto& rec : labeled) {
    auto hl = rec.hard_label();
    if (!hl) throw DataError("AlignmentMismatch", "unlabeled record in the labeled pool");
    (*hl ? orig_pos : orig_neg) += 1;
    out.records.push_back({rec, static_cast<double>(*hl), Provenance::Original});
  }
  auto assigned = apply_strategy(probs, strategy);
  for (std::size_t i = 0; i < unlabeled.size(); ++i) {
    if (!assigned[i]) continue;
    (*assigned[i] >= 0.5 ? zsl_pos : zsl_neg) += 1;
    out.records.push_back({unlabeled[i], *assigned[i], prov});
  }
  out.distribution.original = make_row("original", orig_pos, orig_neg);
  out.distribution.pseudo = make_row("zsl", zsl_pos, zsl_neg);
  out.distribution.combined = make_row("combined", orig_pos + zsl_pos, orig_neg + zsl_neg);
  return out;
}

void save_soft_dataset(const std::filesystem::path& p, const std::vector<SoftRecord>& records) {
  std::vector<std::string> lines;
  lines.reserve(records.size());
  for (const auto& sr : records) {
    json j = json::parse(data::record_to_json(sr.rec));
    j["soft_label"] = sr.label;
    j["provenance"] = provenance_name(sr.provenance);
    lines.push_back(j.dump());
  }
  write_lines(p, lines);
}

std::vector<SoftRecord> load_soft_dataset(const std::filesystem::path& p) {
  std::vector<SoftRecord> out;
  for (const auto& line : read_lines(p)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("BadRecord", std::string("soft dataset parse failure: ") + e.what());
    }
    SoftRecord sr;
    sr.rec = data::record_from_json(line);
    if (!j.contains("soft_label") || !j.contains("provenance"))
      throw DataError("BadRecord", "soft dataset line lacks soft_label/provenance");
    sr.label = j.at("soft_label").get<double>();
    sr.provenance = provenance_from_name(j.at("provenance").get<std::string>());
    if (sr.label < 0.0 || sr.label > 1.0)
      throw DataError("BadRecord", "soft_label outside [0,1]");
    out.push_back(std::move(sr));
  }
  if (out.empty()) throw DataError("EmptyCorpus", p.string() + " holds no records");
  return out;
}

}  // namespace reacfuse::zsl
