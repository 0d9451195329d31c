#include "pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <set>

#include "pipeline_util.hpp"
#include "reacfuse/hash.hpp"
#include "reacfuse/io.hpp"
#include "reacfuse/model_io.hpp"
#include "reacfuse/parallel.hpp"
#include "reacfuse/splits.hpp"
#include "reacfuse/synthdata.hpp"
#include "reacfuse/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace reacfuse::cli {

ConfigSchema full_schema() {
  ConfigSchema s;
  // corpus shape (Table-style proportions) and split
  s.declare("data", "n_records", "20000");
  s.declare("data", "unlabeled_fraction", "0.30");
  s.declare("data", "labeled_pos_fraction", "0.75");
  s.declare("data", "unlabeled_pos_fraction", "0.58");
  s.declare("data", "near_empty_fraction", "0.002");
  s.declare("data", "noise_rate", "0.05");
  s.declare("data", "text_noise", "0.03");
  s.declare("data", "pd_fraction", "0.0125");
  s.declare("data", "yield_cutoff_pct", "5.0");
  s.declare("data", "test_fraction", "0.10");
  // reaction encoder
  s.declare("model", "n_layers", "4");
  s.declare("model", "n_heads", "4");
  s.declare("model", "d_model", "64");
  s.declare("model", "mlm_mask_rate", "0.15");
  // text LM
  s.declare("textlm", "n_layers", "4");
  s.declare("textlm", "n_heads", "4");
  s.declare("textlm", "d_text", "128");
  s.declare("textlm", "context_length", "512");
  // MLM pretraining
  s.declare("mlm", "epochs", "2");
  s.declare("mlm", "batch", "16");
  s.declare("mlm", "lr", "3e-4");
  s.declare("mlm", "heldout_fraction", "0.02");
  s.declare("mlm", "use", "train");  // train | all
  // yield classifier fine-tuning (retraining lr from the labeling study)
  s.declare("classifier", "epochs", "3");
  s.declare("classifier", "batch", "32");
  s.declare("classifier", "lr", "1e-4");
  s.declare("classifier", "heldout_fraction", "0.05");
  s.declare("classifier", "init", "graphormer-mlm.ckpt");
  // text LM pretraining
  s.declare("lm", "kind", "proc");  // proc | zsl
  s.declare("lm", "epochs", "1");
  s.declare("lm", "batch", "8");
  s.declare("lm", "lr", "3e-4");
  s.declare("lm", "crop", "192");
  s.declare("lm", "sample_fraction", "0.25");
  s.declare("lm", "general_mix", "0.20");
  // adapter (paper batch 180 at cluster scale; desk default below)
  s.declare("adapter", "n_adapt_layers", "4");
  s.declare("adapter", "epochs", "1");
  s.declare("adapter", "batch", "16");
  s.declare("adapter", "lr", "8e-4");
  s.declare("adapter", "sample_fraction", "0.05");
  s.declare("adapter", "frozen_lm", "proc-lm.ckpt");
  // zero-shot labeling chain (paper: batch 3000, lr 1e-4, 80:20 split)
  s.declare("zsl", "labeler_epochs", "60");
  s.declare("zsl", "labeler_batch", "256");
  s.declare("zsl", "labeler_lr", "1e-4");
  s.declare("zsl", "labeler_hidden", "0");
  s.declare("zsl", "train_ratio", "0.8");
  s.declare("zsl", "shard_index", "0");
  s.declare("zsl", "shard_count", "1");
  s.declare("zsl", "threshold_lo", "0.2");
  s.declare("zsl", "threshold_hi", "0.8");
  s.declare("zsl", "threshold_tight_lo", "0.05");
  s.declare("zsl", "threshold_tight_hi", "0.95");
  // evaluation / comparison
  s.declare("eval", "model", "baseline.ckpt");
  s.declare("eval", "report_name", "report-baseline");
  s.declare("eval", "threshold", "0.5");
  s.declare("eval", "sweep_start", "0.05");
  s.declare("eval", "sweep_stop", "0.95");
  s.declare("eval", "sweep_step", "0.05");
  s.declare("eval", "subset_tag", "Pd");
  s.declare("eval", "hist_bins", "20");
  s.declare("eval", "frozen_lm", "proc-lm.ckpt");
  s.declare("report", "baseline", "report-baseline.json");
  s.declare("report", "variants", "");
  s.declare("report", "out_prefix", "comparison");
  return s;
}

RunContext make_context(const std::string& command, const std::string& config_path,
                        const std::string& out_dir, long seed_flag, long threads_flag) {
  RunContext ctx;
  ctx.command = command;
  ctx.out = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
  fs::create_directories(ctx.out);

  Ini user;
  if (!config_path.empty()) user = Ini::load(config_path);
  ctx.cfg = full_schema().resolve(user);

  long seed = 1;
  if (const char* env = std::getenv("REACFUSE_SEED")) seed = std::atol(env);
  if (seed_flag >= 0) seed = seed_flag;
  ctx.seed = static_cast<std::uint64_t>(seed);

  long threads = 1;
  if (const char* env = std::getenv("REACFUSE_THREADS")) threads = std::atol(env);
  if (threads_flag >= 1) threads = threads_flag;
  ctx.threads = static_cast<int>(threads < 1 ? 1 : threads);
  set_worker_threads(ctx.threads);
  return ctx;
}

void finish_run(const RunContext& ctx, const std::vector<fs::path>& inputs,
                const std::vector<fs::path>& outputs) {
  std::string resolved = ctx.cfg.dump();
  atomic_write(ctx.artifact(ctx.command + ".config"), resolved);

  json manifest;
  manifest["command"] = ctx.command;
  manifest["seed"] = ctx.seed;
  manifest["threads"] = ctx.threads;
  manifest["config_sha256"] = sha256_hex(resolved);
  json in_map = json::object(), out_map = json::object();
  for (const auto& p : inputs) in_map[p.filename().string()] = sha256_file(p);
  for (const auto& p : outputs) out_map[p.filename().string()] = sha256_file(p);
  manifest["inputs"] = in_map;
  manifest["outputs"] = out_map;
  atomic_write(ctx.artifact(ctx.command + ".manifest.json"), manifest.dump(2) + "\n");
}

// ---- shared helpers --------------------------------------------------------

CorpusBundle load_corpus_bundle(const RunContext& ctx) {
  CorpusBundle b;
  b.records = data::load_corpus(ctx.artifact("corpus.jsonl"));
  b.atom_vocab = chem::AtomVocab::load(ctx.artifact("atom_vocab.txt"));
  b.rsc_vocab = chem::RscVocab::load(ctx.artifact("rsc_vocab.txt"));
  std::vector<std::string> ts;
  ts.reserve(b.records.size());
  for (const auto& r : b.records) ts.push_back(r.timestamp);
  auto [train, test] = data::temporal_split_indices(ts, ctx.cfg.get_real("data", "test_fraction"));
  std::sort(train.begin(), train.end());  // corpus order keeps record ids stable
  std::sort(test.begin(), test.end());
  b.train_idx = std::move(train);
  b.test_idx = std::move(test);
  return b;
}

int hard_label_of(const data::ElnRecord& rec, double cutoff) {
  if (rec.yield_pct) return *rec.yield_pct >= cutoff ? 1 : 0;
  if (rec.outcome_label) return *rec.outcome_label == "pos" ? 1 : 0;
  throw DataError("EmptyDataset", "record has no label");
}

std::vector<std::size_t> labeled_subset(const std::vector<data::ElnRecord>& records,
                                        const std::vector<std::size_t>& pool, double cutoff) {
  std::vector<std::size_t> out;
  for (std::size_t i : pool)
    if (records[i].labeled()) out.push_back(i);
  (void)cutoff;
  return out;
}

std::string split_digest(const std::vector<data::ElnRecord>& records,
                         const std::vector<std::size_t>& test_idx) {
  std::string acc;
  for (std::size_t i : test_idx) {
    acc += records[i].reaction;
    acc += '|';
    acc += records[i].timestamp;
    acc += '\n';
  }
  return sha256_hex(acc);
}

std::string metric_csv_row(const std::string& name, const eval::MetricReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s,%lld,%.6f,%.6f,%.6f,%s", name.c_str(),
                static_cast<long long>(r.n), r.sensitivity, r.specificity, r.balanced_accuracy,
                r.roc_auc ? std::to_string(*r.roc_auc).c_str() : "");
  return buf;
}

std::vector<double> sweep_grid(const RunContext& ctx) {
  double start = ctx.cfg.get_real("eval", "sweep_start");
  double stop = ctx.cfg.get_real("eval", "sweep_stop");
  double step = ctx.cfg.get_real("eval", "sweep_step");
  if (step <= 0 || stop < start) throw ConfigError("BadValue", "bad sweep grid");
  std::vector<double> grid;
  for (double t = start; t <= stop + 1e-9; t += step) grid.push_back(t);
  return grid;
}

namespace {

model::GraphormerConfig graphormer_config(const RunContext& ctx, const CorpusBundle& b) {
  model::GraphormerConfig cfg;
  cfg.n_layers = static_cast<int>(ctx.cfg.get_int("model", "n_layers"));
  cfg.n_heads = static_cast<int>(ctx.cfg.get_int("model", "n_heads"));
  cfg.d_model = static_cast<int>(ctx.cfg.get_int("model", "d_model"));
  cfg.mlm_mask_rate = ctx.cfg.get_real("model", "mlm_mask_rate");
  cfg.atom_vocab = b.atom_vocab.size();
  cfg.rsc_vocab = b.rsc_vocab.size();
  cfg.validate();
  return cfg;
}

model::TextLMConfig textlm_config(const RunContext& ctx) {
  model::TextLMConfig cfg;
  cfg.n_layers = static_cast<int>(ctx.cfg.get_int("textlm", "n_layers"));
  cfg.n_heads = static_cast<int>(ctx.cfg.get_int("textlm", "n_heads"));
  cfg.d_text = static_cast<int>(ctx.cfg.get_int("textlm", "d_text"));
  cfg.context_length = static_cast<int>(ctx.cfg.get_int("textlm", "context_length"));
  cfg.validate();
  return cfg;
}

std::vector<feat::TokenizedReaction> featurize_pool(const CorpusBundle& b,
                                                    const std::vector<std::size_t>& pool) {
  std::vector<feat::TokenizedReaction> out(pool.size());
  parallel_for(pool.size(), [&](std::size_t k) {
    out[k] = feat::tokenize_reaction(
        chem::parse_reaction(b.records[pool[k]].reaction, b.rsc_vocab), b.atom_vocab, b.rsc_vocab);
  });
  return out;
}

std::string classifier_history_csv(const std::vector<model::ClassifierEpoch>& hist) {
  std::string csv = "epoch,loss,sensitivity,specificity,balanced_accuracy,roc_auc\n";
  for (const auto& row : hist) {
    char buf[256];
    if (row.heldout_defined) {
      std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f,%.6f,%.6f,%.6f\n", row.epoch, row.loss,
                    row.heldout.sensitivity, row.heldout.specificity,
                    row.heldout.balanced_accuracy, row.heldout.roc_auc.value_or(0.0));
    } else {
      std::snprintf(buf, sizeof buf, "%d,%.6f,,,,\n", row.epoch, row.loss);
    }
    csv += buf;
  }
  return csv;
}

// deterministic everyday-English filler for the general byte corpus
std::string make_general_corpus(std::uint64_t seed, int lines) {
  static const std::vector<std::string> subjects = {
      "The committee", "A neighbour", "The morning train", "Our small garden",
      "The old library", "A quiet street", "The weather station", "The night shift"};
  static const std::vector<std::string> verbs = {
      "reported", "collected", "repaired", "watered", "described", "counted", "moved",
      "painted"};
  static const std::vector<std::string> objects = {
      "the broken fence", "a stack of letters", "three wooden crates", "the garden tools",
      "an old bicycle", "the weekly notes", "a box of maps", "the spare keys"};
  static const std::vector<std::string> tails = {
      "before lunch.", "after the rain stopped.", "without much fuss.", "twice this week.",
      "for the annual record.", "as planned.", "despite the cold.", "in good time."};
  Rng rng(Rng::mix(seed, 0x93e7));
  std::string out;
  for (int i = 0; i < lines; ++i) {
    out += subjects[rng.below(subjects.size())] + " " + verbs[rng.below(verbs.size())] + " " +
           objects[rng.below(objects.size())] + " " + tails[rng.below(tails.size())] + "\n";
  }
  return out;
}

}  // namespace

// ---- commands ------------------------------------------------------------------

void cmd_gen_data(const RunContext& ctx) {
  synth::GeneratorSpec spec;
  spec.n_records = ctx.cfg.get_int("data", "n_records");
  spec.unlabeled_fraction = ctx.cfg.get_real("data", "unlabeled_fraction");
  spec.labeled_pos_fraction = ctx.cfg.get_real("data", "labeled_pos_fraction");
  spec.unlabeled_pos_fraction = ctx.cfg.get_real("data", "unlabeled_pos_fraction");
  spec.near_empty_fraction = ctx.cfg.get_real("data", "near_empty_fraction");
  spec.noise_rate = ctx.cfg.get_real("data", "noise_rate");
  spec.text_noise = ctx.cfg.get_real("data", "text_noise");
  spec.pd_fraction = ctx.cfg.get_real("data", "pd_fraction");
  spec.seed = ctx.seed;

  auto records = synth::generate(spec);
  data::save_corpus(ctx.artifact("corpus.jsonl"), records);

  const auto& lib = synth::MotifLibrary::instance();
  lib.build_rsc_vocab().save(ctx.artifact("rsc_vocab.txt"));
  lib.build_atom_vocab().save(ctx.artifact("atom_vocab.txt"));
  atomic_write(ctx.artifact("planted_rule.txt"), synth::PlantedRule{}.dump(spec.noise_rate));
  atomic_write(ctx.artifact("general.txt"), make_general_corpus(ctx.seed, 600));

  finish_run(ctx, {},
             {ctx.artifact("corpus.jsonl"), ctx.artifact("rsc_vocab.txt"),
              ctx.artifact("atom_vocab.txt"), ctx.artifact("planted_rule.txt"),
              ctx.artifact("general.txt")});
}

void cmd_pretrain_mlm(const RunContext& ctx) {
  CorpusBundle b = load_corpus_bundle(ctx);
  std::vector<std::size_t> pool;
  if (ctx.cfg.get_str("mlm", "use") == "all") {
    for (std::size_t i = 0; i < b.records.size(); ++i) pool.push_back(i);
  } else {
    pool = b.train_idx;
  }
  auto featurized = featurize_pool(b, pool);

  auto gcfg = graphormer_config(ctx, b);
  auto m = model::GraphormerModel<float>::init(gcfg, ctx.seed);
  model::MlmOptions opt;
  opt.epochs = static_cast<int>(ctx.cfg.get_int("mlm", "epochs"));
  opt.batch = static_cast<int>(ctx.cfg.get_int("mlm", "batch"));
  opt.lr = ctx.cfg.get_real("mlm", "lr");
  opt.mask_rate = gcfg.mlm_mask_rate;
  opt.heldout_fraction = ctx.cfg.get_real("mlm", "heldout_fraction");
  opt.seed = ctx.seed;

  auto hist = model::mlm_pretrain(m, featurized, opt);
  std::string csv = "epoch,loss,masked_accuracy\n";
  for (const auto& row : hist) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f\n", row.epoch, row.train_loss,
                  row.heldout_accuracy);
    csv += buf;
  }
  atomic_write(ctx.artifact("mlm_history.csv"), csv);
  model::save_graphormer(m, ctx.artifact("graphormer-mlm.ckpt"));
  finish_run(ctx, {ctx.artifact("corpus.jsonl")},
             {ctx.artifact("graphormer-mlm.ckpt"), ctx.artifact("mlm_history.csv")});
}

void cmd_pretrain_lm(const RunContext& ctx) {
  CorpusBundle b = load_corpus_bundle(ctx);
  std::string kind = ctx.cfg.get_str("lm", "kind");
  if (kind != "proc" && kind != "zsl")
    throw ConfigError("BadValue", "[lm] kind must be proc or zsl");
  const bool proc = kind == "proc";

  // procedure texts come from the training window only
  std::vector<std::string> texts;
  for (std::size_t i : b.train_idx)
    texts.push_back(data::format_record(b.records[i], proc));

  double sample_fraction = ctx.cfg.get_real("lm", "sample_fraction");
  Rng rng(Rng::mix(ctx.seed, 0x13a7));
  rng.shuffle(texts);
  std::size_t keep = static_cast<std::size_t>(sample_fraction * static_cast<double>(texts.size()));
  keep = std::max<std::size_t>(std::min(keep, texts.size()), 1);
  texts.resize(keep);

  if (!proc) {
    double mix = ctx.cfg.get_real("lm", "general_mix");
    auto general = read_lines(ctx.artifact("general.txt"));
    std::size_t take = static_cast<std::size_t>(mix * static_cast<double>(texts.size()));
    for (std::size_t i = 0; i < take && !general.empty(); ++i)
      texts.push_back(general[i % general.size()]);
    rng.shuffle(texts);
  }

  auto m = model::TextLM<float>::init(textlm_config(ctx), ctx.seed);
  model::LmOptions opt;
  opt.epochs = static_cast<int>(ctx.cfg.get_int("lm", "epochs"));
  opt.batch = static_cast<int>(ctx.cfg.get_int("lm", "batch"));
  opt.lr = ctx.cfg.get_real("lm", "lr");
  opt.crop = static_cast<int>(ctx.cfg.get_int("lm", "crop"));
  opt.seed = ctx.seed;
  auto hist = model::lm_pretrain(m, texts, opt);

  std::string csv = "epoch,loss\n";
  for (const auto& row : hist) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%d,%.6f\n", row.epoch, row.loss);
    csv += buf;
  }
  std::string stem = proc ? "proc-lm" : "zsl-lm";
  atomic_write(ctx.artifact(stem + "_history.csv"), csv);
  model::save_textlm(m, proc ? model::kProcLmKind : model::kZslLmKind,
                     ctx.artifact(stem + ".ckpt"));
  finish_run(ctx, {ctx.artifact("corpus.jsonl")},
             {ctx.artifact(stem + ".ckpt"), ctx.artifact(stem + "_history.csv")});
}

namespace {

void run_classifier_training(const RunContext& ctx, const CorpusBundle& b,
                             const std::vector<model::FeaturizedRecord>& dataset,
                             const std::string& ckpt_name, const std::string& history_name,
                             const std::vector<fs::path>& extra_inputs) {
  fs::path init = ctx.artifact(ctx.cfg.get_str("classifier", "init"));
  auto m = model::load_graphormer<float>(init);
  if (m.cfg.atom_vocab != b.atom_vocab.size() || m.cfg.rsc_vocab != b.rsc_vocab.size())
    throw DataError("BadCheckpoint", "init checkpoint vocab does not match the corpus");

  model::ClassifierOptions opt;
  opt.epochs = static_cast<int>(ctx.cfg.get_int("classifier", "epochs"));
  opt.batch = static_cast<int>(ctx.cfg.get_int("classifier", "batch"));
  opt.lr = ctx.cfg.get_real("classifier", "lr");
  opt.heldout_fraction = ctx.cfg.get_real("classifier", "heldout_fraction");
  opt.seed = ctx.seed;

  auto hist = model::train_classifier(m, dataset, opt);
  atomic_write(ctx.artifact(history_name), classifier_history_csv(hist));
  model::save_graphormer(m, ctx.artifact(ckpt_name));

  std::vector<fs::path> inputs = {ctx.artifact("corpus.jsonl"), init};
  inputs.insert(inputs.end(), extra_inputs.begin(), extra_inputs.end());
  finish_run(ctx, inputs, {ctx.artifact(ckpt_name), ctx.artifact(history_name)});
}

}  // namespace

void cmd_train_baseline(const RunContext& ctx) {
  CorpusBundle b = load_corpus_bundle(ctx);
  double cutoff = ctx.cfg.get_real("data", "yield_cutoff_pct");
  auto labeled = labeled_subset(b.records, b.train_idx, cutoff);
  if (labeled.empty()) throw DataError("EmptyDataset", "no labeled training records");

  auto featurized = featurize_pool(b, labeled);
  std::vector<model::FeaturizedRecord> dataset(labeled.size());
  for (std::size_t k = 0; k < labeled.size(); ++k)
    dataset[k] = {std::move(featurized[k]),
                  static_cast<double>(hard_label_of(b.records[labeled[k]], cutoff)), labeled[k]};
  run_classifier_training(ctx, b, dataset, "baseline.ckpt", "baseline_history.csv", {});
}

void cmd_train_adapter(const RunContext& ctx) {
  CorpusBundle b = load_corpus_bundle(ctx);
  double cutoff = ctx.cfg.get_real("data", "yield_cutoff_pct");
  fs::path lm_path = ctx.artifact(ctx.cfg.get_str("adapter", "frozen_lm"));
  auto lm = model::load_textlm<float>(lm_path, model::kProcLmKind);
  int context = lm.cfg.context_length;

  std::vector<std::size_t> pool = b.train_idx;
  Rng rng(Rng::mix(ctx.seed, 0x77ad));
  rng.shuffle(pool);
  double frac = ctx.cfg.get_real("adapter", "sample_fraction");
  std::size_t keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(frac * static_cast<double>(pool.size())));
  pool.resize(std::min(keep, pool.size()));
  std::sort(pool.begin(), pool.end());

  auto featurized = featurize_pool(b, pool);
  std::vector<model::AdapterExample> examples(pool.size());
  for (std::size_t k = 0; k < pool.size(); ++k) {
    const auto& rec = b.records[pool[k]];
    examples[k].tr = std::move(featurized[k]);
    examples[k].text_toks = model::tokenize_text(data::format_record(rec, true), context);
    if (rec.labeled()) examples[k].label = static_cast<double>(hard_label_of(rec, cutoff));
  }

  model::AdapterDims dims{static_cast<int>(ctx.cfg.get_int("adapter", "n_adapt_layers"))};
  auto a = model::Adapter<float>::init(dims, graphormer_config(ctx, b), std::move(lm),
                                       sha256_file(lm_path), ctx.seed);

  model::AdapterTrainOptions opt;
  opt.epochs = static_cast<int>(ctx.cfg.get_int("adapter", "epochs"));
  opt.batch = static_cast<int>(ctx.cfg.get_int("adapter", "batch"));
  opt.lr = ctx.cfg.get_real("adapter", "lr");
  opt.seed = ctx.seed;
  auto hist = model::adapter_train(a, examples, opt);

  std::string csv = "epoch,bce,ce\n";
  for (const auto& row : hist) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f\n", row.epoch, row.bce, row.ce);
    csv += buf;
  }
  atomic_write(ctx.artifact("adapter_history.csv"), csv);
  model::save_adapter(a, ctx.artifact("adapter.ckpt"));
  finish_run(ctx, {ctx.artifact("corpus.jsonl"), lm_path},
             {ctx.artifact("adapter.ckpt"), ctx.artifact("adapter_history.csv")});
}

void cmd_zsl_extract(const RunContext& ctx) {
  CorpusBundle b = load_corpus_bundle(ctx);
  fs::path lm_path = ctx.artifact("zsl-lm.ckpt");
  auto lm = model::load_textlm<float>(lm_path, model::kZslLmKind);

  long shard_index = ctx.cfg.get_int("zsl", "shard_index");
  long shard_count = ctx.cfg.get_int("zsl", "shard_count");
  if (shard_count < 1 || shard_index < 0 || shard_index >= shard_count)
    throw ConfigError("BadValue", "bad shard bounds");

  // contiguous chunk of the training pool
  const std::vector<std::size_t>& pool = b.train_idx;
  std::size_t per = (pool.size() + static_cast<std::size_t>(shard_count) - 1) /
                    static_cast<std::size_t>(shard_count);
  std::size_t begin = static_cast<std::size_t>(shard_index) * per;
  std::size_t end = std::min(pool.size(), begin + per);
  if (begin >= end) throw DataError("EmptyCorpus", "shard holds no records");

  std::vector<data::ElnRecord> slice;
  std::vector<std::int64_t> record_ids;
  for (std::size_t k = begin; k < end; ++k) {
    slice.push_back(b.records[pool[k]]);
    record_ids.push_back(static_cast<std::int64_t>(pool[k]));
  }
  auto rows = model::extract_embeddings(lm, slice);
  std::string name = "embeddings.shard-" + std::to_string(shard_index) + ".ckpt";
  model::save_embedding_shard(ctx.artifact(name), rows, record_ids, sha256_file(lm_path));
  finish_run(ctx, {ctx.artifact("corpus.jsonl"), lm_path}, {ctx.artifact(name)});
}

namespace {

model::EmbeddingShard load_all_shards(const RunContext& ctx) {
  long shard_count = ctx.cfg.get_int("zsl", "shard_count");
  model::EmbeddingShard all;
  for (long i = 0; i < shard_count; ++i) {
    auto shard =
        model::load_embedding_shard(ctx.artifact("embeddings.shard-" + std::to_string(i) + ".ckpt"));
    if (i == 0) all.lm_sha = shard.lm_sha;
    if (shard.lm_sha != all.lm_sha)
      throw DataError("BadCheckpoint", "embedding shards come from different LM checkpoints");
    for (std::size_t r = 0; r < shard.rows.size(); ++r) {
      all.rows.push_back(std::move(shard.rows[r]));
      all.record_ids.push_back(shard.record_ids[r]);
    }
  }
  return all;
}

}  // namespace

void cmd_zsl_train_labeler(const RunContext& ctx) {
  CorpusBundle b = load_corpus_bundle(ctx);
  double cutoff = ctx.cfg.get_real("data", "yield_cutoff_pct");
  auto shards = load_all_shards(ctx);

  std::vector<std::vector<double>> emb;
  std::vector<int> labels;
  std::vector<std::int64_t> ids;
  for (std::size_t r = 0; r < shards.rows.size(); ++r) {
    const auto& rec = b.records[static_cast<std::size_t>(shards.record_ids[r])];
    if (!rec.labeled()) continue;
    emb.push_back(shards.rows[r]);
    labels.push_back(hard_label_of(rec, cutoff));
    ids.push_back(shards.record_ids[r]);
  }

  model::LabelerOptions opt;
  opt.epochs = static_cast<int>(ctx.cfg.get_int("zsl", "labeler_epochs"));
  opt.batch = static_cast<int>(ctx.cfg.get_int("zsl", "labeler_batch"));
  opt.lr = ctx.cfg.get_real("zsl", "labeler_lr");
  opt.d_hidden = static_cast<int>(ctx.cfg.get_int("zsl", "labeler_hidden"));
  opt.train_ratio = ctx.cfg.get_real("zsl", "train_ratio");
  opt.seed = ctx.seed;
  auto res = model::train_labeler<float>(emb, labels, opt);

  model::save_labeler(res.labeler, ctx.artifact("labeler.ckpt"),
                      {{"lm_sha", shards.lm_sha}});

  // held-out metrics plus the text-length view of the same slice
  std::vector<double> ho_scores;
  std::vector<int> ho_labels;
  std::vector<std::int64_t> ho_lengths;
  {
    std::vector<std::vector<double>> ho_emb;
    for (std::size_t i : res.heldout_indices) {
      ho_emb.push_back(emb[i]);
      ho_labels.push_back(labels[i]);
      const auto& rec = b.records[static_cast<std::size_t>(ids[i])];
      ho_lengths.push_back(
          static_cast<std::int64_t>(data::format_record(rec, false).size()));
    }
    ho_scores = zsl::predict_probs(res.labeler, ho_emb);
  }

  json report;
  report["train_loss"] = res.train_loss;
  report["heldout_loss"] = res.heldout_loss;
  report["n_train"] = emb.size() - res.heldout_indices.size();
  report["n_heldout"] = res.heldout_indices.size();
  if (res.heldout_defined) {
    report["sensitivity"] = res.heldout.sensitivity;
    report["specificity"] = res.heldout.specificity;
    report["balanced_accuracy"] = res.heldout.balanced_accuracy;
    report["roc_auc"] = *res.heldout.roc_auc;
  }
  std::int64_t outside = 0;
  for (double p : ho_scores)
    if (p <= 0.2 || p >= 0.8) ++outside;
  report["heldout_share_outside_02_08"] =
      ho_scores.empty() ? 0.0 : static_cast<double>(outside) / static_cast<double>(ho_scores.size());
  atomic_write(ctx.artifact("labeler_report.json"), report.dump(2) + "\n");

  auto buckets = eval::length_bucket_report(ho_lengths, ho_scores, ho_labels,
                                            eval::default_length_edges());
  std::string csv =
      "lo,hi,n,defined,sensitivity,specificity,balanced_accuracy,mean_label,mean_predicted\n";
  for (const auto& bk : buckets) {
    char buf[256];
    if (bk.defined)
      std::snprintf(buf, sizeof buf, "%.0f,%.0f,%lld,1,%.6f,%.6f,%.6f,%.6f,%.6f\n", bk.lo, bk.hi,
                    static_cast<long long>(bk.n), bk.report.sensitivity, bk.report.specificity,
                    bk.report.balanced_accuracy, bk.mean_label, bk.mean_predicted);
    else
      std::snprintf(buf, sizeof buf, "%.0f,%.0f,%lld,0,,,,%.6f,%.6f\n", bk.lo, bk.hi,
                    static_cast<long long>(bk.n), bk.mean_label, bk.mean_predicted);
    csv += buf;
  }
  atomic_write(ctx.artifact("labeler_buckets.csv"), csv);

  auto hist = eval::length_histogram(ho_lengths, 200, 3000);
  std::string hist_csv = "bin_start,count\n";
  for (std::size_t i = 0; i < hist.size(); ++i)
    hist_csv += std::to_string(i * 200) + "," + std::to_string(hist[i]) + "\n";
  atomic_write(ctx.artifact("labeler_length_hist.csv"), hist_csv);

  finish_run(ctx, {ctx.artifact("corpus.jsonl"), ctx.artifact("embeddings.shard-0.ckpt")},
             {ctx.artifact("labeler.ckpt"), ctx.artifact("labeler_report.json"),
              ctx.artifact("labeler_buckets.csv"), ctx.artifact("labeler_length_hist.csv")});
}

void cmd_zsl_label(const RunContext& ctx) {
  CorpusBundle b = load_corpus_bundle(ctx);
  auto shards = load_all_shards(ctx);
  auto labeler = model::load_labeler<float>(ctx.artifact("labeler.ckpt"));

  std::vector<std::vector<double>> emb;
  std::vector<std::int64_t> ids;
  for (std::size_t r = 0; r < shards.rows.size(); ++r) {
    const auto& rec = b.records[static_cast<std::size_t>(shards.record_ids[r])];
    if (rec.labeled()) continue;
    emb.push_back(shards.rows[r]);
    ids.push_back(shards.record_ids[r]);
  }
  if (emb.empty()) throw DataError("EmptyCorpus", "no unlabeled records to label");
  auto probs = zsl::predict_probs(labeler, emb);

  std::string csv = "record_id,prob\n";
  for (std::size_t i = 0; i < probs.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%lld,%.8f\n", static_cast<long long>(ids[i]), probs[i]);
    csv += buf;
  }
  atomic_write(ctx.artifact("zsl_probs.csv"), csv);

  long bins = ctx.cfg.get_int("eval", "hist_bins");
  auto hist = eval::label_histogram(probs, static_cast<int>(bins));
  std::string hist_csv = "bin,count\n";
  for (std::size_t i = 0; i < hist.size(); ++i)
    hist_csv += std::to_string(i) + "," + std::to_string(hist[i]) + "\n";
  atomic_write(ctx.artifact("label_histogram.csv"), hist_csv);

  std::int64_t outside = 0;
  for (double p : probs)
    if (p <= 0.2 || p >= 0.8) ++outside;
  json report;
  report["n"] = probs.size();
  report["share_outside_02_08"] = static_cast<double>(outside) / static_cast<double>(probs.size());
  atomic_write(ctx.artifact("zsl_label_report.json"), report.dump(2) + "\n");

  finish_run(ctx, {ctx.artifact("corpus.jsonl"), ctx.artifact("labeler.ckpt")},
             {ctx.artifact("zsl_probs.csv"), ctx.artifact("label_histogram.csv"),
              ctx.artifact("zsl_label_report.json")});
}

namespace {

zsl::LabelingStrategy strategy_from(const RunContext& ctx, const std::string& name) {
  if (name == "continuous") return zsl::LabelingStrategy::continuous();
  if (name == "binary") return zsl::LabelingStrategy::binary();
  if (name == "threshold")
    return zsl::LabelingStrategy::threshold(ctx.cfg.get_real("zsl", "threshold_lo"),
                                            ctx.cfg.get_real("zsl", "threshold_hi"));
  if (name == "threshold-tight")
    return zsl::LabelingStrategy::threshold(ctx.cfg.get_real("zsl", "threshold_tight_lo"),
                                            ctx.cfg.get_real("zsl", "threshold_tight_hi"));
  throw ConfigError("BadValue", "unknown strategy " + name);
}

std::pair<std::vector<std::int64_t>, std::vector<double>> load_probs(const RunContext& ctx) {
  auto lines = read_lines(ctx.artifact("zsl_probs.csv"));
  std::vector<std::int64_t> ids;
  std::vector<double> probs;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::size_t comma = lines[i].find(',');
    if (comma == std::string::npos) throw DataError("BadRecord", "malformed zsl_probs.csv");
    ids.push_back(std::stoll(lines[i].substr(0, comma)));
    probs.push_back(std::stod(lines[i].substr(comma + 1)));
  }
  return {std::move(ids), std::move(probs)};
}

}  // namespace

void cmd_zsl_extend(const RunContext& ctx, const std::string& strategy_name) {
  CorpusBundle b = load_corpus_bundle(ctx);
  double cutoff = ctx.cfg.get_real("data", "yield_cutoff_pct");
  auto strategy = strategy_from(ctx, strategy_name);
  auto [ids, probs] = load_probs(ctx);

  std::vector<data::ElnRecord> labeled, unlabeled;
  for (std::size_t i : b.train_idx)
    if (b.records[i].labeled()) labeled.push_back(b.records[i]);
  std::set<std::int64_t> train_set(b.train_idx.begin(), b.train_idx.end());
  for (std::size_t k = 0; k < ids.size(); ++k) {
    auto id = static_cast<std::size_t>(ids[k]);
    if (id >= b.records.size() || b.records[id].labeled() || !train_set.count(ids[k]))
      throw DataError("AlignmentMismatch", "probability row does not match an unlabeled record");
    unlabeled.push_back(b.records[id]);
  }

  auto res = zsl::extend_dataset(labeled, unlabeled, probs, strategy);
  zsl::save_soft_dataset(ctx.artifact("extended-" + strategy_name + ".jsonl"), res.records);
  atomic_write(ctx.artifact("distribution-" + strategy_name + ".csv"), res.distribution.csv());
  finish_run(ctx, {ctx.artifact("corpus.jsonl"), ctx.artifact("zsl_probs.csv")},
             {ctx.artifact("extended-" + strategy_name + ".jsonl"),
              ctx.artifact("distribution-" + strategy_name + ".csv")});
}

void cmd_train_zsl(const RunContext& ctx, const std::string& strategy_name) {
  strategy_from(ctx, strategy_name);  // reject bad threshold config before touching data
  CorpusBundle b = load_corpus_bundle(ctx);
  auto soft = zsl::load_soft_dataset(ctx.artifact("extended-" + strategy_name + ".jsonl"));

  std::vector<std::string> reactions;
  for (const auto& sr : soft) reactions.push_back(sr.rec.reaction);
  auto featurized = model::featurize_reactions(reactions, b.atom_vocab, b.rsc_vocab);
  std::vector<model::FeaturizedRecord> dataset(soft.size());
  for (std::size_t i = 0; i < soft.size(); ++i)
    dataset[i] = {std::move(featurized[i]), soft[i].label, i};

  run_classifier_training(ctx, b, dataset, "zsl-" + strategy_name + ".ckpt",
                          "zsl-" + strategy_name + "_history.csv",
                          {ctx.artifact("extended-" + strategy_name + ".jsonl")});
}

}  // namespace reacfuse::cli
