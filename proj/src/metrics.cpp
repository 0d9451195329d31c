#include "reacfuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "reacfuse/errors.hpp"

namespace reacfuse::eval {

ConfusionCounts confusion(const std::vector<double>& scores, const std::vector<int>& labels,
                          double threshold) {
  if (scores.size() != labels.size())
    throw DataError("LengthMismatch", "scores and labels differ in length");
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    bool pred = scores[i] >= threshold;
    bool truth = labels[i] != 0;
    if (pred && truth) ++c.tp;
    else if (pred && !truth) ++c.fp;
    else if (!pred && truth) ++c.fn;
    else ++c.tn;
  }
  return c;
}

MetricReport metrics(const ConfusionCounts& c) {
  if (c.tp + c.fn == 0 || c.tn + c.fp == 0)
    throw NumericError("UndefinedMetric", "both classes are needed for sensitivity/specificity");
  MetricReport r;
  r.sensitivity = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  r.specificity = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
  r.balanced_accuracy = (r.sensitivity + r.specificity) / 2.0;
  r.n = c.total();
  return r;
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw DataError("LengthMismatch", "scores and labels differ in length");
  std::int64_t n_pos = 0, n_neg = 0;
  for (int l : labels) (l != 0 ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0)
    throw NumericError("SingleClass", "ROC AUC needs both classes");

  std::vector<std::size_t> idx(scores.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // walk tie groups in ascending score order; exact integer pair counts
  std::int64_t wins = 0, ties = 0, neg_below = 0;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    std::int64_t grp_pos = 0, grp_neg = 0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      (labels[idx[j]] != 0 ? grp_pos : grp_neg) += 1;
      ++j;
    }
    wins += grp_pos * neg_below;
    ties += grp_pos * grp_neg;
    neg_below += grp_neg;
    i = j;
  }
  return static_cast<double>(2 * wins + ties) / static_cast<double>(2 * n_pos * n_neg);
}

std::vector<SweepPoint> threshold_sweep(const std::vector<double>& scores,
                                        const std::vector<int>& labels,
                                        const std::vector<double>& grid) {
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (grid[i] < grid[i - 1]) throw ConfigError("BadValue", "sweep grid must be ascending");
  std::vector<SweepPoint> out;
  out.reserve(grid.size());
  for (double t : grid) out.push_back({t, metrics(confusion(scores, labels, t))});
  return out;
}

std::vector<std::int64_t> default_length_edges() {
  std::vector<std::int64_t> e;
  for (std::int64_t v = 0; v <= 3000; v += 200) e.push_back(v);
  return e;
}

std::vector<BucketReport> length_bucket_report(const std::vector<std::int64_t>& lengths,
                                               const std::vector<double>& scores,
                                               const std::vector<int>& labels,
                                               const std::vector<std::int64_t>& edges) {
  if (lengths.size() != scores.size() || scores.size() != labels.size())
    throw DataError("LengthMismatch", "lengths/scores/labels differ in length");
  if (edges.size() < 2) throw ConfigError("BadValue", "need at least two bucket edges");

  std::vector<BucketReport> out(edges.size() - 1 + 1);  // +1: open-ended tail
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    out[b].lo = static_cast<double>(edges[b]);
    out[b].hi = static_cast<double>(edges[b + 1]);
  }
  out.back().lo = static_cast<double>(edges.back());
  out.back().hi = std::numeric_limits<double>::infinity();

  std::vector<std::vector<std::size_t>> members(out.size());
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    std::size_t b = 0;
    while (b + 1 < edges.size() && lengths[i] >= edges[b + 1]) ++b;
    if (lengths[i] >= edges.back()) b = out.size() - 1;
    members[b].push_back(i);
  }

  for (std::size_t b = 0; b < out.size(); ++b) {
    BucketReport& br = out[b];
    br.n = static_cast<std::int64_t>(members[b].size());
    if (br.n == 0) continue;
    std::vector<double> s;
    std::vector<int> l;
    double lab_sum = 0, pred_sum = 0;
    for (std::size_t i : members[b]) {
      s.push_back(scores[i]);
      l.push_back(labels[i]);
      lab_sum += labels[i];
      pred_sum += scores[i] >= 0.5 ? 1.0 : 0.0;
    }
    br.mean_label = lab_sum / static_cast<double>(br.n);
    br.mean_predicted = pred_sum / static_cast<double>(br.n);
    try {
      br.report = metrics(confusion(s, l, 0.5));
      br.report.roc_auc = roc_auc(s, l);
      br.defined = true;
    } catch (const NumericError&) {
      br.defined = false;  // single-class bucket: marker, not a failure
    }
  }
  return out;
}

std::vector<std::int64_t> length_histogram(const std::vector<std::int64_t>& lengths,
                                           std::int64_t bin_width, std::int64_t cutoff) {
  if (bin_width <= 0 || cutoff <= 0) throw ConfigError("BadValue", "bad histogram shape");
  std::size_t n_bins = static_cast<std::size_t>((cutoff + bin_width - 1) / bin_width) + 1;
  std::vector<std::int64_t> counts(n_bins, 0);
  for (std::int64_t len : lengths) {
    if (len >= cutoff) ++counts.back();
    else ++counts[static_cast<std::size_t>(len / bin_width)];
  }
  return counts;
}

MetricReport subset_report(const std::vector<double>& scores, const std::vector<int>& labels,
                           const std::vector<bool>& keep, const std::string& subset_name,
                           double threshold) {
  if (scores.size() != labels.size() || scores.size() != keep.size())
    throw DataError("LengthMismatch", "scores/labels/mask differ in length");
  std::vector<double> s;
  std::vector<int> l;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (!keep[i]) continue;
    s.push_back(scores[i]);
    l.push_back(labels[i]);
  }
  if (s.empty()) throw DataError("EmptySubset", "no records carry subset " + subset_name);
  MetricReport r = metrics(confusion(s, l, threshold));
  r.roc_auc = roc_auc(s, l);
  r.subset = subset_name;
  return r;
}

std::vector<std::int64_t> label_histogram(const std::vector<double>& probs, int n_bins) {
  if (n_bins < 2) throw ConfigError("BadValue", "need at least two bins");
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n_bins), 0);
  for (double p : probs) {
    int b = static_cast<int>(p * n_bins);
    if (b < 0) b = 0;
    if (b >= n_bins) b = n_bins - 1;
    ++counts[static_cast<std::size_t>(b)];
  }
  return counts;
}

}  // namespace reacfuse::eval
