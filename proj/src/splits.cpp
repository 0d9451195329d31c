#include "reacfuse/splits.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "reacfuse/errors.hpp"
#include "reacfuse/rng.hpp"

namespace reacfuse::data {

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> temporal_split_indices(
    const std::vector<std::string>& timestamps, double test_fraction) {
  if (test_fraction < 0.0 || test_fraction > 1.0)
    throw ConfigError("BadValue", "test_fraction must be in [0,1]");
  std::vector<std::size_t> idx(timestamps.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return timestamps[a] < timestamps[b]; });
  std::size_t n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(timestamps.size())));
  std::size_t n_train = timestamps.size() - n_test;
  std::vector<std::size_t> train(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  return {std::move(train), std::move(test)};
}

std::pair<std::vector<ElnRecord>, std::vector<ElnRecord>> temporal_split(
    std::vector<ElnRecord> records, double test_fraction) {
  std::vector<std::string> ts;
  ts.reserve(records.size());
  for (const auto& r : records) ts.push_back(r.timestamp);
  auto [train_idx, test_idx] = temporal_split_indices(ts, test_fraction);
  std::vector<ElnRecord> train, test;
  train.reserve(train_idx.size());
  test.reserve(test_idx.size());
  for (std::size_t i : train_idx) train.push_back(std::move(records[i]));
  for (std::size_t i : test_idx) test.push_back(std::move(records[i]));
  return {std::move(train), std::move(test)};
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> random_split_indices(
    std::size_t n, double train_ratio, std::uint64_t seed) {
  if (!(train_ratio > 0.0 && train_ratio < 1.0))
    throw ConfigError("BadValue", "train_ratio must be in (0,1)");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(Rng::mix(seed, 0x5917));  // fixed stream tag for splits
  rng.shuffle(idx);
  std::size_t n_train = static_cast<std::size_t>(std::llround(train_ratio * static_cast<double>(n)));
  std::vector<std::size_t> train(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  return {std::move(train), std::move(test)};
}

}  // namespace reacfuse::data
