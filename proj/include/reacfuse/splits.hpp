#ifndef REACFUSE_SPLITS_HPP
#define REACFUSE_SPLITS_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "reacfuse/eln.hpp"

namespace reacfuse::data {

// Newest test_fraction of records (by timestamp, ties broken by input order)
// go to the test side. Both sides come back in timestamp order.
std::pair<std::vector<ElnRecord>, std::vector<ElnRecord>> temporal_split(
    std::vector<ElnRecord> records, double test_fraction);

// Index form: positions into the original record list, timestamp-ordered.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> temporal_split_indices(
    const std::vector<std::string>& timestamps, double test_fraction);

// Seeded shuffle, then cut at round(train_ratio * n).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> random_split_indices(
    std::size_t n, double train_ratio, std::uint64_t seed);

}  // namespace reacfuse::data

#endif
