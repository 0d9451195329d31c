#ifndef REACFUSE_METRICS_HPP
#define REACFUSE_METRICS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace reacfuse::eval {

struct ConfusionCounts {
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::int64_t total() const { return tp + fp + tn + fn; }
};

struct MetricReport {
  double sensitivity = 0;
  double specificity = 0;
  double balanced_accuracy = 0;
  std::optional<double> roc_auc;
  std::int64_t n = 0;
  std::string subset;
};

// Prediction rule everywhere: positive iff score >= threshold.
ConfusionCounts confusion(const std::vector<double>& scores, const std::vector<int>& labels,
                          double threshold);

// sensitivity/specificity/balanced accuracy; throws UndefinedMetric when a
// class is absent. Does not fill roc_auc.
MetricReport metrics(const ConfusionCounts& c);

// Mann-Whitney AUC with half-credit ties, computed from exact integer pair
// counts: (2*wins + ties) / (2*P*N). Throws SingleClass.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct SweepPoint {
  double threshold;
  MetricReport report;
};
std::vector<SweepPoint> threshold_sweep(const std::vector<double>& scores,
                                        const std::vector<int>& labels,
                                        const std::vector<double>& grid);

struct BucketReport {
  double lo = 0, hi = 0;
  std::int64_t n = 0;
  bool defined = false;  // false: single-class bucket, metrics skipped
  MetricReport report;
  double mean_label = 0;
  double mean_predicted = 0;  // mean of binarized predictions at 0.5
};

// Buckets are [edges[i], edges[i+1]) with the last bucket open-ended.
std::vector<BucketReport> length_bucket_report(const std::vector<std::int64_t>& lengths,
                                               const std::vector<double>& scores,
                                               const std::vector<int>& labels,
                                               const std::vector<std::int64_t>& edges);

std::vector<std::int64_t> default_length_edges();  // 0,200,...,3000

// Plain length histogram (distribution analog): fixed-width bins up to
// cutoff, final bin collects everything at or beyond it.
std::vector<std::int64_t> length_histogram(const std::vector<std::int64_t>& lengths,
                                           std::int64_t bin_width, std::int64_t cutoff);

// Metrics restricted to rows where keep[i] is true. Throws EmptySubset.
MetricReport subset_report(const std::vector<double>& scores, const std::vector<int>& labels,
                           const std::vector<bool>& keep, const std::string& subset_name,
                           double threshold);

// Probability histogram over [0,1): half-open bins, the last bin closed.
std::vector<std::int64_t> label_histogram(const std::vector<double>& probs, int n_bins);

}  // namespace reacfuse::eval

#endif
