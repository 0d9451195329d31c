#ifndef REACFUSE_TOOLS_PIPELINE_UTIL_HPP
#define REACFUSE_TOOLS_PIPELINE_UTIL_HPP

#include <string>
#include <vector>

#include "pipeline.hpp"
#include "reacfuse/chem.hpp"
#include "reacfuse/eln.hpp"
#include "reacfuse/metrics.hpp"

namespace reacfuse::cli {

struct CorpusBundle {
  std::vector<data::ElnRecord> records;
  chem::AtomVocab atom_vocab;
  chem::RscVocab rsc_vocab;
  std::vector<std::size_t> train_idx, test_idx;  // temporal split, corpus positions
};

CorpusBundle load_corpus_bundle(const RunContext& ctx);

// labeled positions within a pool, honoring the configured yield cutoff
std::vector<std::size_t> labeled_subset(const std::vector<data::ElnRecord>& records,
                                        const std::vector<std::size_t>& pool, double cutoff);
int hard_label_of(const data::ElnRecord& rec, double cutoff);

// identity of a test slice: order-sensitive digest of its records
std::string split_digest(const std::vector<data::ElnRecord>& records,
                         const std::vector<std::size_t>& test_idx);

std::string metric_csv_row(const std::string& name, const eval::MetricReport& r);

std::vector<double> sweep_grid(const RunContext& ctx);

}  // namespace reacfuse::cli

#endif
