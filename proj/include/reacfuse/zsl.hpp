#ifndef REACFUSE_ZSL_HPP
#define REACFUSE_ZSL_HPP

#include <optional>
#include <string>
#include <vector>

#include "reacfuse/eln.hpp"
#include "reacfuse/tensor.hpp"

namespace reacfuse::zsl {

using core::Tensor;

// Single-hidden-layer labeler: linear -> GELU -> linear -> sigmoid.
template <typename S>
struct LabelerMLP {
  Tensor<S> w1, b1, w2, b2;
  int d_in = 0, d_hidden = 0;

  static LabelerMLP init(int d_in, int d_hidden, std::uint64_t seed) {
    Rng rng(Rng::mix(seed, 0x15e1));
    LabelerMLP m;
    m.d_in = d_in;
    m.d_hidden = d_hidden;
    const S sd = static_cast<S>(0.05);
    m.w1 = Tensor<S>::param_randn(d_in, d_hidden, sd, rng);
    m.b1 = Tensor<S>::param_zeros(1, d_hidden);
    m.w2 = Tensor<S>::param_randn(d_hidden, 1, sd, rng);
    m.b2 = Tensor<S>::param_zeros(1, 1);
    return m;
  }

  std::vector<std::pair<std::string, Tensor<S>>> named_params() {
    return {{"w1", w1}, {"b1", b1}, {"w2", w2}, {"b2", b2}};
  }
  std::vector<Tensor<S>> params() {
    return {w1, b1, w2, b2};
  }
};

// probabilities in (0,1), one row per embedding row
template <typename S>
Tensor<S> labeler_forward(LabelerMLP<S>& m, const Tensor<S>& x) {
  if (x.cols() != m.d_in)
    throw ShapeError("WidthMismatch", "embedding width does not match labeler input");
  return core::sigmoid(
      core::linear(core::gelu(core::linear(x, m.w1, m.b1)), m.w2, m.b2));
}

template <typename S>
std::vector<double> predict_probs(LabelerMLP<S>& m, const std::vector<std::vector<double>>& rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != m.d_in)
      throw ShapeError("WidthMismatch", "embedding width does not match labeler input");
    std::vector<S> v(r.begin(), r.end());
    Tensor<S> x = Tensor<S>::from(1, m.d_in, std::move(v));
    out.push_back(static_cast<double>(labeler_forward(m, x).item()));
  }
  return out;
}

// ---- labeling strategies ------------------------------------------------------

enum class StrategyKind { Continuous, Threshold, Binary };

struct LabelingStrategy {
  StrategyKind kind = StrategyKind::Continuous;
  double lo = 0.2, hi = 0.8;  // Threshold only

  static LabelingStrategy continuous() { return {StrategyKind::Continuous, 0, 0}; }
  static LabelingStrategy threshold(double lo, double hi) {
    LabelingStrategy s{StrategyKind::Threshold, lo, hi};
    s.validate();
    return s;
  }
  static LabelingStrategy binary() { return {StrategyKind::Binary, 0, 0}; }

  void validate() const {
    if (kind == StrategyKind::Threshold && !(0.0 < lo && lo < hi && hi < 1.0))
      throw ConfigError("BadValue", "threshold strategy needs 0 < lo < hi < 1");
  }
  std::string name() const;
};

// Continuous: keep p. Threshold: keep p only when p <= lo or p >= hi.
// Binary: 1 iff p >= 0.5.
std::vector<std::optional<double>> apply_strategy(const std::vector<double>& probs,
                                                  const LabelingStrategy& strategy);

// ---- dataset extension ------------------------------------------------------------

enum class Provenance { Original, ZslContinuous, ZslThresholded, ZslBinary };

const char* provenance_name(Provenance p);
Provenance provenance_from_name(const std::string& s);

struct SoftRecord {
  data::ElnRecord rec;
  double label = 0;  // [0,1]
  Provenance provenance = Provenance::Original;
};

// Table-style label distribution rows (positive = label >= 0.5).
struct DistributionRow {
  std::string name;
  std::int64_t n = 0, positive = 0, negative = 0;
  double positive_share = 0;
};
struct DistributionReport {
  DistributionRow original, pseudo, combined;
  std::string csv() const;
};

struct ExtendResult {
  std::vector<SoftRecord> records;
  DistributionReport distribution;
};

// Hard-labeled originals plus strategy-labeled pseudo records; records the
// strategy maps to nothing are dropped.
ExtendResult extend_dataset(const std::vector<data::ElnRecord>& labeled,
                            const std::vector<data::ElnRecord>& unlabeled,
                            const std::vector<double>& probs, const LabelingStrategy& strategy);

void save_soft_dataset(const std::filesystem::path& p, const std::vector<SoftRecord>& records);
std::vector<SoftRecord> load_soft_dataset(const std::filesystem::path& p);

}  // namespace reacfuse::zsl

#endif
