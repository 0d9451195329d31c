#ifndef REACFUSE_TRAIN_HPP
#define REACFUSE_TRAIN_HPP

#include <cmath>
#include <functional>
#include <optional>

#include "reacfuse/adam.hpp"
#include "reacfuse/adapter.hpp"
#include "reacfuse/graphormer.hpp"
#include "reacfuse/metrics.hpp"
#include "reacfuse/parallel.hpp"
#include "reacfuse/textlm.hpp"
#include "reacfuse/zsl.hpp"

namespace reacfuse::model {

inline void nan_guard(double loss, const char* where) {
  if (!std::isfinite(loss))
    throw NumericError("NonFiniteLoss", std::string(where) + " produced a non-finite loss");
}

// ---- shared featurization helpers -------------------------------------------------

struct FeaturizedRecord {
  feat::TokenizedReaction tr;
  std::optional<double> label;  // hard {0,1} or soft [0,1]
  std::size_t source_index = 0;
};

inline std::vector<feat::TokenizedReaction> featurize_reactions(
    const std::vector<std::string>& reaction_texts, const chem::AtomVocab& av,
    const chem::RscVocab& rv) {
  std::vector<feat::TokenizedReaction> out(reaction_texts.size());
  parallel_for(reaction_texts.size(), [&](std::size_t i) {
    out[i] = feat::tokenize_reaction(chem::parse_reaction(reaction_texts[i], rv), av, rv);
  });
  return out;
}

// thread-parallel scoring over frozen weights, outputs written by index
template <typename S>
std::vector<double> score_records(GraphormerModel<S>& m,
                                  const std::vector<feat::TokenizedReaction>& trs) {
  std::vector<double> out(trs.size());
  parallel_for(trs.size(), [&](std::size_t i) {
    core::NoGrad ng;
    out[i] = yield_probability(m, trs[i]);
  });
  return out;
}

// ---- MLM pretraining -----------------------------------------------------------

struct MlmOptions {
  int epochs = 2;
  int batch = 16;
  double lr = 3e-4;
  double mask_rate = 0.15;
  std::uint64_t seed = 1;
  double heldout_fraction = 0.02;
};

struct MlmEpoch {
  int epoch = 0;
  double train_loss = 0;
  double heldout_accuracy = 0;
};

template <typename S>
std::vector<MlmEpoch> mlm_pretrain(GraphormerModel<S>& m,
                                   const std::vector<feat::TokenizedReaction>& corpus,
                                   const MlmOptions& opt,
                                   const std::function<void(const MlmEpoch&)>& log = {}) {
  if (corpus.empty()) throw DataError("EmptyDataset", "no reactions to pretrain on");
  const int A = m.cfg.atom_vocab, R = m.cfg.rsc_vocab;
  core::Adam<S> adam(m.params(), {opt.lr, 0.9, 0.999, 1e-8});

  std::size_t n_held = static_cast<std::size_t>(opt.heldout_fraction * static_cast<double>(corpus.size()));
  if (n_held < 1) n_held = std::min<std::size_t>(corpus.size() / 2, 64);
  std::size_t n_train = corpus.size() - n_held;

  auto heldout_accuracy = [&]() {
    core::NoGrad ng;
    long correct = 0, total = 0;
    for (std::size_t i = n_train; i < corpus.size(); ++i) {
      auto corr = feat::mask_for_mlm(corpus[i], opt.mask_rate, Rng::mix(opt.seed, 0xe0a1 + i), A, R);
      if (corr.targets.empty()) continue;
      auto [loss, acc] = mlm_loss(m, corpus[i], corr);
      correct += static_cast<long>(std::lround(acc * static_cast<double>(corr.targets.size())));
      total += static_cast<long>(corr.targets.size());
    }
    return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  };

  std::vector<MlmEpoch> history;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    std::vector<std::size_t> order(n_train);
    for (std::size_t i = 0; i < n_train; ++i) order[i] = i;
    Rng shuffle_rng(Rng::mix(opt.seed, 0x5u + static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    double loss_sum = 0;
    long loss_n = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(opt.batch)) {
      std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(opt.batch));
      adam.zero_grad();
      int in_batch = 0;
      for (std::size_t k = start; k < stop; ++k) {
        std::size_t i = order[k];
        auto corr = feat::mask_for_mlm(
            corpus[i], opt.mask_rate,
            Rng::mix(opt.seed, (static_cast<std::uint64_t>(epoch) << 32) ^ i), A, R);
        if (corr.targets.empty()) continue;
        auto [loss, acc] = mlm_loss(m, corpus[i], corr);
        double lv = static_cast<double>(loss.item());
        nan_guard(lv, "mlm_pretrain");
        loss_sum += lv;
        ++loss_n;
        ++in_batch;
        core::backward(core::scale(loss, static_cast<S>(1.0 / static_cast<double>(stop - start))));
      }
      if (in_batch > 0) adam.step();
    }
    MlmEpoch row{epoch, loss_n ? loss_sum / static_cast<double>(loss_n) : 0.0, heldout_accuracy()};
    history.push_back(row);
    if (log) log(row);
  }
  return history;
}

// ---- yield classifier training --------------------------------------------------

struct ClassifierOptions {
  int epochs = 3;
  int batch = 32;
  double lr = 1e-4;   // retraining default; desk runs usually raise it
  std::uint64_t seed = 1;
  double heldout_fraction = 0.05;
};

struct ClassifierEpoch {
  int epoch = 0;
  double loss = 0;
  bool heldout_defined = false;
  eval::MetricReport heldout;
};

template <typename S>
std::vector<ClassifierEpoch> train_classifier(
    GraphormerModel<S>& m, const std::vector<FeaturizedRecord>& dataset,
    const ClassifierOptions& opt, const std::function<void(const ClassifierEpoch&)>& log = {}) {
  if (dataset.empty()) throw DataError("EmptyDataset", "no labeled records");
  for (const auto& r : dataset)
    if (!r.label) throw DataError("EmptyDataset", "record without a label in classifier training");

  core::Adam<S> adam(m.params(), {opt.lr, 0.9, 0.999, 1e-8});

  std::vector<std::size_t> idx(dataset.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng held_rng(Rng::mix(opt.seed, 0x4e1d));
  held_rng.shuffle(idx);
  std::size_t n_held = static_cast<std::size_t>(opt.heldout_fraction * static_cast<double>(idx.size()));
  std::vector<std::size_t> held(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_held));
  std::vector<std::size_t> train(idx.begin() + static_cast<std::ptrdiff_t>(n_held), idx.end());

  auto heldout_report = [&](ClassifierEpoch& row) {
    if (held.empty()) return;
    std::vector<double> scores;
    std::vector<int> labels;
    {
      core::NoGrad ng;
      for (std::size_t i : held) {
        scores.push_back(yield_probability(m, dataset[i].tr));
        labels.push_back(*dataset[i].label >= 0.5 ? 1 : 0);
      }
    }
    try {
      row.heldout = eval::metrics(eval::confusion(scores, labels, 0.5));
      row.heldout.roc_auc = eval::roc_auc(scores, labels);
      row.heldout_defined = true;
    } catch (const NumericError&) {
      row.heldout_defined = false;
    }
  };

  std::vector<ClassifierEpoch> history;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    Rng shuffle_rng(Rng::mix(opt.seed, 0xc1a5 + static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(train);
    double loss_sum = 0;
    long loss_n = 0;
    for (std::size_t start = 0; start < train.size(); start += static_cast<std::size_t>(opt.batch)) {
      std::size_t stop = std::min(train.size(), start + static_cast<std::size_t>(opt.batch));
      adam.zero_grad();
      for (std::size_t k = start; k < stop; ++k) {
        const FeaturizedRecord& r = dataset[train[k]];
        core::Tensor<S> p = yield_probability_t(m, r.tr);
        core::Tensor<S> loss = core::soft_bce_mean(p, {static_cast<S>(*r.label)});
        double lv = static_cast<double>(loss.item());
        nan_guard(lv, "train_classifier");
        loss_sum += lv;
        ++loss_n;
        core::backward(core::scale(loss, static_cast<S>(1.0 / static_cast<double>(stop - start))));
      }
      adam.step();
    }
    ClassifierEpoch row;
    row.epoch = epoch;
    row.loss = loss_n ? loss_sum / static_cast<double>(loss_n) : 0.0;
    heldout_report(row);
    history.push_back(row);
    if (log) log(row);
  }
  return history;
}

// ---- text LM pretraining ----------------------------------------------------------

struct LmOptions {
  int epochs = 1;
  int batch = 8;
  double lr = 3e-4;
  std::uint64_t seed = 1;
  int crop = 0;  // >0: train on the last `crop` bytes of each text
};

struct LmEpoch {
  int epoch = 0;
  double loss = 0;
};

template <typename S>
std::vector<LmEpoch> lm_pretrain(TextLM<S>& m, const std::vector<std::string>& texts,
                                 const LmOptions& opt,
                                 const std::function<void(const LmEpoch&)>& log = {}) {
  if (texts.empty()) throw DataError("EmptyDataset", "no texts to pretrain on");
  core::Adam<S> adam(m.params(), {opt.lr, 0.9, 0.999, 1e-8});
  std::vector<LmEpoch> history;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    std::vector<std::size_t> order(texts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng(Rng::mix(opt.seed, 0x17e8 + static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);
    double loss_sum = 0;
    long loss_n = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(opt.batch)) {
      std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(opt.batch));
      adam.zero_grad();
      for (std::size_t k = start; k < stop; ++k) {
        std::string text = texts[order[k]];
        if (opt.crop > 0 && static_cast<int>(text.size()) > opt.crop)
          text = text.substr(text.size() - static_cast<std::size_t>(opt.crop));
        auto toks = tokenize_text(text, m.cfg.context_length);
        if (toks.size() < 2) continue;
        core::Tensor<S> loss = lm_loss(m, toks);
        double lv = static_cast<double>(loss.item());
        nan_guard(lv, "lm_pretrain");
        loss_sum += lv;
        ++loss_n;
        core::backward(core::scale(loss, static_cast<S>(1.0 / static_cast<double>(stop - start))));
      }
      adam.step();
    }
    LmEpoch row{epoch, loss_n ? loss_sum / static_cast<double>(loss_n) : 0.0};
    history.push_back(row);
    if (log) log(row);
  }
  return history;
}

// ---- adapter training ---------------------------------------------------------------

struct AdapterExample {
  feat::TokenizedReaction tr;
  std::vector<int> text_toks;
  std::optional<double> label;  // absent: text loss only
};

struct AdapterTrainOptions {
  int epochs = 1;
  int batch = 8;
  double lr = 8e-4;
  std::uint64_t seed = 1;
};

struct AdapterEpoch {
  int epoch = 0;
  double bce = 0;  // over labeled examples
  double ce = 0;   // over all examples
};

// One optimizer step over a slice of examples; returns (mean bce, mean ce).
template <typename S>
std::pair<double, double> adapter_train_step(Adapter<S>& a, core::Adam<S>& adam,
                                             const std::vector<AdapterExample>& batch) {
  if (batch.empty()) throw DataError("EmptyBatch", "adapter step needs at least one example");
  adam.zero_grad();
  double bce_sum = 0, ce_sum = 0;
  long bce_n = 0;
  long n_labeled = 0;
  for (const auto& ex : batch)
    if (ex.label) ++n_labeled;
  for (const auto& ex : batch) {
    auto [yield_prob, logits] = adapter_forward(a, ex.tr, ex.text_toks);
    std::vector<int> rows, targets;
    for (std::size_t t = 0; t + 1 < ex.text_toks.size(); ++t) {
      rows.push_back(static_cast<int>(t));
      targets.push_back(ex.text_toks[t + 1]);
    }
    core::Tensor<S> ce = core::cross_entropy_mean(core::take_rows(logits, rows), targets);
    double cv = static_cast<double>(ce.item());
    nan_guard(cv, "adapter_train");
    ce_sum += cv;
    core::Tensor<S> total = core::scale(ce, static_cast<S>(1.0 / static_cast<double>(batch.size())));
    if (ex.label) {
      core::Tensor<S> bce = core::soft_bce_mean(yield_prob, {static_cast<S>(*ex.label)});
      double bv = static_cast<double>(bce.item());
      nan_guard(bv, "adapter_train");
      bce_sum += bv;
      ++bce_n;
      total = core::add(total,
                        core::scale(bce, static_cast<S>(1.0 / static_cast<double>(n_labeled))));
    }
    core::backward(total);
  }
  adam.step();
  return {bce_n ? bce_sum / static_cast<double>(bce_n) : 0.0,
          ce_sum / static_cast<double>(batch.size())};
}

template <typename S>
std::vector<AdapterEpoch> adapter_train(Adapter<S>& a, const std::vector<AdapterExample>& dataset,
                                        const AdapterTrainOptions& opt,
                                        const std::function<void(const AdapterEpoch&)>& log = {}) {
  if (dataset.empty()) throw DataError("EmptyBatch", "no adapter examples");
  core::Adam<S> adam(a.params(), {opt.lr, 0.9, 0.999, 1e-8});
  std::vector<AdapterEpoch> history;
  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    Rng shuffle_rng(Rng::mix(opt.seed, 0xada9 + static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);
    double bce_sum = 0, ce_sum = 0;
    long batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(opt.batch)) {
      std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(opt.batch));
      std::vector<AdapterExample> batch;
      for (std::size_t k = start; k < stop; ++k) batch.push_back(dataset[order[k]]);
      auto [bce, ce] = adapter_train_step(a, adam, batch);
      bce_sum += bce;
      ce_sum += ce;
      ++batches;
    }
    AdapterEpoch row{epoch, batches ? bce_sum / static_cast<double>(batches) : 0.0,
                     batches ? ce_sum / static_cast<double>(batches) : 0.0};
    history.push_back(row);
    if (log) log(row);
  }
  return history;
}

// ---- labeler training -----------------------------------------------------------------

struct LabelerOptions {
  int epochs = 60;
  int batch = 256;          // paper scale uses 3000
  double lr = 1e-4;
  std::uint64_t seed = 1;
  double train_ratio = 0.8;
  int d_hidden = 0;  // 0: same as input width
};

template <typename S>
struct LabelerResult {
  zsl::LabelerMLP<S> labeler;
  double train_loss = 0;
  double heldout_loss = 0;
  bool heldout_defined = false;
  eval::MetricReport heldout;
  std::vector<std::size_t> heldout_indices;
};

template <typename S>
LabelerResult<S> train_labeler(const std::vector<std::vector<double>>& embeddings,
                               const std::vector<int>& labels, const LabelerOptions& opt) {
  if (embeddings.size() != labels.size())
    throw DataError("AlignmentMismatch", "embeddings and labels differ in length");
  if (embeddings.empty()) throw DataError("EmptyCorpus", "no embeddings");
  bool has_pos = false, has_neg = false;
  for (int l : labels) (l ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg)
    throw DataError("DegenerateLabels", "labeler training needs both classes");

  const int d_in = static_cast<int>(embeddings[0].size());
  const int d_hidden = opt.d_hidden > 0 ? opt.d_hidden : d_in;
  LabelerResult<S> out;
  out.labeler = zsl::LabelerMLP<S>::init(d_in, d_hidden, opt.seed);
  core::Adam<S> adam(out.labeler.params(), {opt.lr, 0.9, 0.999, 1e-8});

  std::vector<std::size_t> idx(embeddings.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng split_rng(Rng::mix(opt.seed, 0x8020));
  split_rng.shuffle(idx);
  std::size_t n_train = static_cast<std::size_t>(
      std::llround(opt.train_ratio * static_cast<double>(idx.size())));
  std::vector<std::size_t> train(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.heldout_indices.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());

  auto batch_tensor = [&](const std::vector<std::size_t>& rows) {
    std::vector<S> v;
    v.reserve(rows.size() * static_cast<std::size_t>(d_in));
    for (std::size_t r : rows)
      for (double x : embeddings[r]) v.push_back(static_cast<S>(x));
    return core::Tensor<S>::from(static_cast<core::Index>(rows.size()), d_in, std::move(v));
  };

  double last_train_loss = 0;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    Rng shuffle_rng(Rng::mix(opt.seed, 0x1ab1 + static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(train);
    double loss_sum = 0;
    long batches = 0;
    for (std::size_t start = 0; start < train.size(); start += static_cast<std::size_t>(opt.batch)) {
      std::size_t stop = std::min(train.size(), start + static_cast<std::size_t>(opt.batch));
      std::vector<std::size_t> rows(train.begin() + static_cast<std::ptrdiff_t>(start),
                                    train.begin() + static_cast<std::ptrdiff_t>(stop));
      std::vector<S> targets;
      for (std::size_t r : rows) targets.push_back(static_cast<S>(labels[r]));
      adam.zero_grad();
      core::Tensor<S> p = zsl::labeler_forward(out.labeler, batch_tensor(rows));
      core::Tensor<S> loss = core::soft_bce_mean(p, targets);
      double lv = static_cast<double>(loss.item());
      nan_guard(lv, "train_labeler");
      loss_sum += lv;
      ++batches;
      core::backward(loss);
      adam.step();
    }
    last_train_loss = batches ? loss_sum / static_cast<double>(batches) : 0.0;
  }
  out.train_loss = last_train_loss;

  if (!out.heldout_indices.empty()) {
    core::NoGrad ng;
    std::vector<S> targets;
    std::vector<double> scores;
    std::vector<int> hl;
    core::Tensor<S> p = zsl::labeler_forward(out.labeler, batch_tensor(out.heldout_indices));
    for (std::size_t i = 0; i < out.heldout_indices.size(); ++i) {
      targets.push_back(static_cast<S>(labels[out.heldout_indices[i]]));
      scores.push_back(static_cast<double>(p.values()[i]));
      hl.push_back(labels[out.heldout_indices[i]]);
    }
    out.heldout_loss = static_cast<double>(core::soft_bce_mean(p, targets).item());
    try {
      out.heldout = eval::metrics(eval::confusion(scores, hl, 0.5));
      out.heldout.roc_auc = eval::roc_auc(scores, hl);
      out.heldout_defined = true;
    } catch (const NumericError&) {
      out.heldout_defined = false;
    }
  }
  return out;
}

// ---- embedding extraction ----------------------------------------------------------

// Leak-guarded last-token embeddings for a record span; rows land at their
// record's index whatever the thread count.
template <typename S>
std::vector<std::vector<double>> extract_embeddings(TextLM<S>& lm,
                                                    const std::vector<data::ElnRecord>& records) {
  if (records.empty()) throw DataError("EmptyCorpus", "no records to embed");
  std::vector<std::vector<double>> out(records.size());
  parallel_for(records.size(), [&](std::size_t i) {
    core::NoGrad ng;
    out[i] = last_token_embedding(lm, data::format_record(records[i], false));
  });
  return out;
}

}  // namespace reacfuse::model

#endif
