#include <json.hpp>

#include <set>

#include "pipeline.hpp"
#include "pipeline_util.hpp"
#include "reacfuse/adapter.hpp"
#include "reacfuse/hash.hpp"
#include "reacfuse/io.hpp"
#include "reacfuse/model_io.hpp"
#include "reacfuse/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace reacfuse::cli {

namespace {

struct ScoredSplit {
  std::vector<double> scores;
  std::vector<int> labels;
  std::vector<bool> tagged;
  std::string split_hash;
  std::string model_kind;
};

ScoredSplit score_test_split(const RunContext& ctx, const CorpusBundle& b) {
  double cutoff = ctx.cfg.get_real("data", "yield_cutoff_pct");
  auto labeled_test = labeled_subset(b.records, b.test_idx, cutoff);
  if (labeled_test.empty()) throw DataError("EmptyDataset", "no labeled test records");

  std::vector<feat::TokenizedReaction> trs(labeled_test.size());
  parallel_for(labeled_test.size(), [&](std::size_t k) {
    trs[k] = feat::tokenize_reaction(
        chem::parse_reaction(b.records[labeled_test[k]].reaction, b.rsc_vocab), b.atom_vocab,
        b.rsc_vocab);
  });

  ScoredSplit out;
  fs::path model_path = ctx.artifact(ctx.cfg.get_str("eval", "model"));
  core::Checkpoint probe = core::Checkpoint::load(model_path);
  out.model_kind = probe.kind;
  if (probe.kind == model::kGraphormerKind) {
    auto m = model::load_graphormer<float>(model_path);
    out.scores = model::score_records(m, trs);
  } else if (probe.kind == model::kAdapterKind) {
    auto a = model::load_adapter<float>(model_path,
                                        ctx.artifact(ctx.cfg.get_str("eval", "frozen_lm")));
    out.scores.resize(trs.size());
    parallel_for(trs.size(), [&](std::size_t k) {
      core::NoGrad ng;
      out.scores[k] = model::adapter_infer(a, trs[k]);
    });
  } else {
    throw DataError("BadCheckpoint", model_path.string() + ": not an evaluable model");
  }

  std::string tag = ctx.cfg.get_str("eval", "subset_tag");
  for (std::size_t k = 0; k < labeled_test.size(); ++k) {
    const auto& rec = b.records[labeled_test[k]];
    out.labels.push_back(hard_label_of(rec, cutoff));
    out.tagged.push_back(rec.has_tag(tag));
  }
  out.split_hash = split_digest(b.records, labeled_test);
  return out;
}

}  // namespace

void cmd_eval(const RunContext& ctx) {
  CorpusBundle b = load_corpus_bundle(ctx);
  ScoredSplit s = score_test_split(ctx, b);
  double threshold = ctx.cfg.get_real("eval", "threshold");

  auto overall = eval::metrics(eval::confusion(s.scores, s.labels, threshold));
  overall.roc_auc = eval::roc_auc(s.scores, s.labels);
  overall.subset = "overall";

  json report;
  report["model"] = ctx.cfg.get_str("eval", "model");
  report["model_kind"] = s.model_kind;
  report["threshold"] = threshold;
  report["split_hash"] = s.split_hash;
  report["n"] = s.scores.size();
  report["overall"] = {{"sensitivity", overall.sensitivity},
                       {"specificity", overall.specificity},
                       {"balanced_accuracy", overall.balanced_accuracy},
                       {"roc_auc", *overall.roc_auc},
                       {"n", overall.n}};

  std::string csv = "subset,n,sensitivity,specificity,balanced_accuracy,roc_auc\n";
  csv += metric_csv_row("overall", overall) + "\n";

  json subsets = json::array();
  std::string tag = ctx.cfg.get_str("eval", "subset_tag");
  bool any_tagged = false;
  for (bool t : s.tagged) any_tagged = any_tagged || t;
  if (any_tagged) {
    try {
      auto sub = eval::subset_report(s.scores, s.labels, s.tagged, tag, threshold);
      subsets.push_back({{"tag", tag},
                         {"sensitivity", sub.sensitivity},
                         {"specificity", sub.specificity},
                         {"balanced_accuracy", sub.balanced_accuracy},
                         {"roc_auc", *sub.roc_auc},
                         {"n", sub.n}});
      csv += metric_csv_row(tag, sub) + "\n";
    } catch (const NumericError&) {
      // single-class subset on a small split: skip the row rather than fail
    }
  }
  report["subsets"] = subsets;

  auto grid = sweep_grid(ctx);
  auto curve = eval::threshold_sweep(s.scores, s.labels, grid);
  json sweep = json::array();
  std::string sweep_csv = "threshold,sensitivity,specificity,balanced_accuracy\n";
  for (const auto& pt : curve) {
    sweep.push_back({{"threshold", pt.threshold},
                     {"sensitivity", pt.report.sensitivity},
                     {"specificity", pt.report.specificity},
                     {"balanced_accuracy", pt.report.balanced_accuracy}});
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.4f,%.6f,%.6f,%.6f\n", pt.threshold, pt.report.sensitivity,
                  pt.report.specificity, pt.report.balanced_accuracy);
    sweep_csv += buf;
  }
  report["sweep"] = sweep;

  std::string stem = ctx.cfg.get_str("eval", "report_name");
  atomic_write(ctx.artifact(stem + ".json"), report.dump(2) + "\n");
  atomic_write(ctx.artifact(stem + ".csv"), csv);
  atomic_write(ctx.artifact(stem + "_sweep.csv"), sweep_csv);
  finish_run(ctx, {ctx.artifact("corpus.jsonl"), ctx.artifact(ctx.cfg.get_str("eval", "model"))},
             {ctx.artifact(stem + ".json"), ctx.artifact(stem + ".csv"),
              ctx.artifact(stem + "_sweep.csv")});
}

void cmd_report(const RunContext& ctx) {
  auto load_report = [&](const std::string& name) {
    fs::path p = name.find('/') == std::string::npos ? ctx.artifact(name) : fs::path(name);
    return std::pair<json, fs::path>(json::parse(read_file(p)), p);
  };

  auto base = load_report(ctx.cfg.get_str("report", "baseline"));
  const nlohmann::json& base_json = base.first;
  std::vector<std::pair<json, fs::path>> variants;
  std::string list = ctx.cfg.get_str("report", "variants");
  std::size_t start = 0;
  while (start < list.size()) {
    std::size_t comma = list.find(',', start);
    std::string item = list.substr(start, comma == std::string::npos ? list.size() - start
                                                                     : comma - start);
    if (!item.empty()) variants.push_back(load_report(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (variants.empty()) throw ConfigError("BadValue", "[report] variants is empty");

  const std::string split = base_json["split_hash"].get<std::string>();
  for (const auto& [v, p] : variants)
    if (v["split_hash"].get<std::string>() != split)
      throw DataError("SplitMismatch", p.string() + " was evaluated on a different test split");

  auto row = [](const json& r) {
    return std::array<double, 4>{r["overall"]["sensitivity"].get<double>(),
                                 r["overall"]["specificity"].get<double>(),
                                 r["overall"]["balanced_accuracy"].get<double>(),
                                 r["overall"]["roc_auc"].get<double>()};
  };
  auto brow = row(base_json);

  std::string csv =
      "model,subset,sensitivity,specificity,balanced_accuracy,roc_auc,"
      "d_sensitivity,d_specificity,d_balanced_accuracy,d_roc_auc\n";
  auto add_row = [&](const std::string& name, const std::array<double, 4>& r,
                     const std::array<double, 4>& ref, const std::string& subset) {
    char buf[320];
    std::snprintf(buf, sizeof buf, "%s,%s,%.6f,%.6f,%.6f,%.6f,%+.6f,%+.6f,%+.6f,%+.6f\n",
                  name.c_str(), subset.c_str(), r[0], r[1], r[2], r[3], r[0] - ref[0],
                  r[1] - ref[1], r[2] - ref[2], r[3] - ref[3]);
    csv += buf;
  };
  add_row(base_json["model"].get<std::string>(), brow, brow, "overall");
  for (const auto& [v, p] : variants)
    add_row(v["model"].get<std::string>(), row(v), brow, "overall");

  // per-tag subset rows when both sides carry them
  auto subset_row = [](const json& r, const std::string& tag) -> std::optional<std::array<double, 4>> {
    for (const auto& s : r["subsets"])
      if (s["tag"].get<std::string>() == tag)
        return std::array<double, 4>{s["sensitivity"].get<double>(), s["specificity"].get<double>(),
                                     s["balanced_accuracy"].get<double>(),
                                     s["roc_auc"].get<double>()};
    return std::nullopt;
  };
  std::set<std::string> tags;
  for (const auto& s : base_json["subsets"]) tags.insert(s["tag"].get<std::string>());
  for (const std::string& tag : tags) {
    auto bs = subset_row(base_json, tag);
    if (!bs) continue;
    add_row(base_json["model"].get<std::string>(), *bs, *bs, tag);
    for (const auto& [v, p] : variants)
      if (auto vs = subset_row(v, tag)) add_row(v["model"].get<std::string>(), *vs, *bs, tag);
  }

  // balanced-accuracy sweep comparison (baseline vs each variant)
  std::string sweep_csv = "threshold,baseline";
  for (const auto& [v, p] : variants) sweep_csv += "," + v["model"].get<std::string>();
  sweep_csv += "\n";
  const auto& bsweep = base_json["sweep"];
  for (std::size_t i = 0; i < bsweep.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f,%.6f", bsweep[i]["threshold"].get<double>(),
                  bsweep[i]["balanced_accuracy"].get<double>());
    sweep_csv += buf;
    for (const auto& [v, p] : variants) {
      std::snprintf(buf, sizeof buf, ",%.6f", v["sweep"][i]["balanced_accuracy"].get<double>());
      sweep_csv += buf;
    }
    sweep_csv += "\n";
  }

  std::string prefix = ctx.cfg.get_str("report", "out_prefix");
  atomic_write(ctx.artifact(prefix + ".csv"), csv);
  atomic_write(ctx.artifact(prefix + "_sweep.csv"), sweep_csv);

  std::vector<fs::path> inputs = {base.second};
  for (const auto& [v, p] : variants) inputs.push_back(p);
  finish_run(ctx, inputs,
             {ctx.artifact(prefix + ".csv"), ctx.artifact(prefix + "_sweep.csv")});
}

}  // namespace reacfuse::cli
