#include <doctest.h>

#include <cmath>

#include "reacfuse/adapter.hpp"
#include "reacfuse/hash.hpp"
#include "reacfuse/model_io.hpp"
#include "reacfuse/train.hpp"
#include "reacfuse/zsl.hpp"
#include "support/finite_diff.hpp"
#include "support/naive_attn.hpp"

using namespace reacfuse;
using model::Adapter;
using model::AdapterDims;
using model::GraphormerConfig;
using model::TextLM;
using model::TextLMConfig;

namespace {

chem::AtomVocab tiny_atom_vocab() {
  return chem::AtomVocab::from_pairs({{"C", 0}, {"N", 0}, {"O", 0}, {"Cl", 0}});
}
chem::RscVocab tiny_rsc_vocab() { return chem::RscVocab::from_tokens({"PdCl2", "THF"}); }

feat::TokenizedReaction featurize(const std::string& rxn) {
  auto av = tiny_atom_vocab();
  auto rv = tiny_rsc_vocab();
  return feat::tokenize_reaction(chem::parse_reaction(rxn, rv), av, rv);
}

GraphormerConfig tiny_gcfg(int layers = 2) {
  GraphormerConfig cfg;
  cfg.n_layers = layers;
  cfg.n_heads = 2;
  cfg.d_model = 16;
  cfg.atom_vocab = tiny_atom_vocab().size();
  cfg.rsc_vocab = tiny_rsc_vocab().size();
  return cfg;
}

TextLMConfig tiny_tcfg(int layers = 2) {
  TextLMConfig cfg;
  cfg.n_layers = layers;
  cfg.n_heads = 2;
  cfg.d_text = 24;
  cfg.context_length = 64;
  return cfg;
}

template <typename S>
Adapter<S> make_adapter(int graph_layers = 2, int lm_layers = 2, int adapt = 2,
                        std::uint64_t seed = 5) {
  auto lm = TextLM<S>::init(tiny_tcfg(lm_layers), seed + 1);
  return Adapter<S>::init(AdapterDims{adapt}, tiny_gcfg(graph_layers), std::move(lm), "sha-test",
                          seed);
}

std::string random_text(Rng& rng) {
  static const char* words[] = {"stirred", "mixture", "failed", "product", "isolated",
                                "overnight", "solvent", "wash", "dried", "quenched"};
  std::string s;
  int n = rng.range(3, 10);
  for (int i = 0; i < n; ++i) {
    if (i) s += ' ';
    s += words[rng.below(10)];
  }
  return s;
}

}  // namespace

TEST_CASE("zero-gate identity: fresh adapter reproduces the frozen LM logits") {
  auto a = make_adapter<float>();
  auto lm_copy = TextLM<float>::init(tiny_tcfg(), 6);  // same seed as adapter's lm
  auto tr = featurize("CC>PdCl2>CC");
  Rng rng(17);
  for (int iter = 0; iter < 20; ++iter) {
    auto toks = model::tokenize_text(random_text(rng), 64);
    auto [yp, logits] = model::adapter_forward(a, tr, toks);
    auto plain = model::lm_logits(a.frozen_lm, toks);
    REQUIRE(logits.rows() == plain.rows());
    for (core::Index i = 0; i < logits.rows(); ++i)
      for (core::Index j = 0; j < logits.cols(); ++j)
        CHECK(std::abs(logits.at(i, j) - plain.at(i, j)) < 1e-6);
    (void)lm_copy;
  }
}

TEST_CASE("gate one with zero upsample still reproduces the frozen path") {
  auto a = make_adapter<float>();
  for (auto& w : a.upsample_w) std::fill(w.values().begin(), w.values().end(), 0.0f);
  for (auto& b : a.upsample_b) std::fill(b.values().begin(), b.values().end(), 0.0f);
  for (auto& g : a.gates) std::fill(g.values().begin(), g.values().end(), 1.0f);
  auto tr = featurize("CC>PdCl2>CC");
  auto toks = model::tokenize_text("mixture stirred overnight", 64);
  auto [yp, logits] = model::adapter_forward(a, tr, toks);
  auto plain = model::lm_logits(a.frozen_lm, toks);
  // zero reaction values contribute exactly nothing through the gate
  for (core::Index i = 0; i < logits.rows(); ++i)
    for (core::Index j = 0; j < logits.cols(); ++j)
      CHECK(std::abs(logits.at(i, j) - plain.at(i, j)) < 1e-6);
}

TEST_CASE("adapted attention matches a naive two-stream reference") {
  Rng rng(23);
  const int n_text = 4, n_reac = 3, d = 8, heads = 2, hd = d / heads;
  auto layer = model::TransformerLayer<double>::init(d, 4 * d, rng);
  core::Tensor<double> text_norm = core::Tensor<double>::param_randn(n_text, d, 0.7, rng);
  core::Tensor<double> reac_up = core::Tensor<double>::param_randn(n_reac, d, 0.7, rng);
  core::Tensor<double> gate = core::Tensor<double>::from(1, 2, {0.35, -0.8});
  auto causal = model::causal_additive_mask<double>(n_text);

  auto got = model::adapted_mha(layer, text_norm, reac_up, gate, heads, causal);

  // naive: project, split heads, run both attention streams, merge, project
  auto project = [&](const core::Tensor<double>& x, const core::Tensor<double>& w,
                     const core::Tensor<double>& b) {
    std::vector<double> out((std::size_t)(x.rows() * d), 0.0);
    for (core::Index i = 0; i < x.rows(); ++i)
      for (int o = 0; o < d; ++o) {
        double acc = b.at(0, o);
        for (int j = 0; j < d; ++j) acc += x.at(i, j) * w.at(j, o);
        out[(std::size_t)(i * d + o)] = acc;
      }
    return out;
  };
  auto q = project(text_norm, layer.wq, layer.bq);
  auto kt = project(text_norm, layer.wk, layer.bk);
  auto vt = project(text_norm, layer.wv, layer.bv);
  auto kr = project(reac_up, layer.wk, layer.bk);
  auto vr = project(reac_up, layer.wv, layer.bv);

  auto slice = [&](const std::vector<double>& x, int rows, int h) {
    std::vector<double> out((std::size_t)rows * hd);
    for (int i = 0; i < rows; ++i)
      for (int c = 0; c < hd; ++c)
        out[(std::size_t)(i * hd + c)] = x[(std::size_t)(i * d + h * hd + c)];
    return out;
  };
  std::vector<unsigned char> causal_allowed((std::size_t)n_text * n_text, 0);
  for (int i = 0; i < n_text; ++i)
    for (int j = 0; j <= i; ++j) causal_allowed[(std::size_t)(i * n_text + j)] = 1;

  std::vector<double> merged((std::size_t)n_text * d);
  for (int h = 0; h < heads; ++h) {
    auto at = naiveref::attention(slice(q, n_text, h), slice(kt, n_text, h), slice(vt, n_text, h),
                                  n_text, n_text, hd, {}, causal_allowed);
    auto ar = naiveref::attention(slice(q, n_text, h), slice(kr, n_reac, h), slice(vr, n_reac, h),
                                  n_text, n_reac, hd, {}, {});
    for (int i = 0; i < n_text; ++i)
      for (int c = 0; c < hd; ++c)
        merged[(std::size_t)(i * d + h * hd + c)] =
            at[(std::size_t)(i * hd + c)] + gate.at(0, h) * ar[(std::size_t)(i * hd + c)];
  }
  for (core::Index i = 0; i < n_text; ++i)
    for (int o = 0; o < d; ++o) {
      double acc = layer.bo.at(0, o);
      for (int j = 0; j < d; ++j) acc += merged[(std::size_t)(i * d + j)] * layer.wo.at(j, o);
      CHECK(got.at(i, o) == doctest::Approx(acc).epsilon(1e-9));
    }
}

TEST_CASE("text input never reaches the yield probability") {
  auto a = make_adapter<float>();
  auto tr = featurize("CC>THF>CC");
  auto [y1, l1] = model::adapter_forward(a, tr, model::tokenize_text("failed", 64));
  auto [y2, l2] = model::adapter_forward(a, tr, model::tokenize_text("worked wonderfully", 64));
  CHECK(y1.item() == y2.item());
  CHECK(model::adapter_infer(a, tr) == y1.item());
  CHECK(a.reaction.yield_b.values()[0] == 0.0f);
  CHECK(y1.item() == 0.5f);  // zero-initialized yield head
}

TEST_CASE("frozen weights stay bit-identical through training steps") {
  auto a = make_adapter<float>();
  std::string before;
  {
    core::Checkpoint ck;
    for (auto& [name, t] : a.frozen_lm.named_params()) core::checkpoint_put(ck, name, t);
    before = sha256_hex(ck.serialize());
  }
  std::vector<model::AdapterExample> batch = {
      {featurize("CC>PdCl2>CC"), model::tokenize_text("stirred overnight", 64), 1.0},
      {featurize("CCO>>CCO"), model::tokenize_text("no conversion", 64), std::nullopt},
  };
  core::Adam<float> adam(a.params(), {1e-3, 0.9, 0.999, 1e-8});
  for (int step = 0; step < 25; ++step) model::adapter_train_step(a, adam, batch);
  {
    core::Checkpoint ck;
    for (auto& [name, t] : a.frozen_lm.named_params()) core::checkpoint_put(ck, name, t);
    CHECK(sha256_hex(ck.serialize()) == before);
  }
}

TEST_CASE("gradient flow: gates closed and no labels starve the encoder; open gates feed it") {
  auto a = make_adapter<float>();
  std::vector<model::AdapterExample> unlabeled = {
      {featurize("CC>PdCl2>CC"), model::tokenize_text("stirred overnight", 64), std::nullopt}};

  auto encoder_grad_norm = [&]() {
    double total = 0;
    for (auto& [name, t] : a.reaction.named_params())
      for (float g : t.grad()) total += std::abs((double)g);
    return total;
  };

  // closed gates, text-only loss: reaction encoder receives nothing
  {
    core::Adam<float> adam(a.params(), {0.0, 0.9, 0.999, 1e-8});
    adam.zero_grad();
    auto [yp, logits] = model::adapter_forward(a, unlabeled[0].tr, unlabeled[0].text_toks);
    std::vector<int> rows, targets;
    for (std::size_t t = 0; t + 1 < unlabeled[0].text_toks.size(); ++t) {
      rows.push_back((int)t);
      targets.push_back(unlabeled[0].text_toks[t + 1]);
    }
    core::backward(core::cross_entropy_mean(core::take_rows(logits, rows), targets));
    CHECK(encoder_grad_norm() == 0.0);
    // but the gates themselves receive gradient, the path that opens them
    double gate_grad = 0;
    for (auto& g : a.gates)
      for (float gg : g.grad()) gate_grad += std::abs((double)gg);
    CHECK(gate_grad > 0.0);
  }

  // open gates: text loss reaches the reaction encoder
  {
    for (auto& g : a.gates) std::fill(g.values().begin(), g.values().end(), 0.3f);
    core::Adam<float> adam(a.params(), {0.0, 0.9, 0.999, 1e-8});
    adam.zero_grad();
    auto [yp, logits] = model::adapter_forward(a, unlabeled[0].tr, unlabeled[0].text_toks);
    std::vector<int> rows, targets;
    for (std::size_t t = 0; t + 1 < unlabeled[0].text_toks.size(); ++t) {
      rows.push_back((int)t);
      targets.push_back(unlabeled[0].text_toks[t + 1]);
    }
    core::backward(core::cross_entropy_mean(core::take_rows(logits, rows), targets));
    CHECK(encoder_grad_norm() > 0.0);
  }
}

TEST_CASE("finite differences through gates, upsample and the reaction stream") {
  auto a = make_adapter<double>(2, 2, 1, 31);
  for (auto& g : a.gates) std::fill(g.values().begin(), g.values().end(), 0.2);
  auto tr = featurize("CC>THF>CC");
  auto toks = model::tokenize_text("ok", 64);
  std::vector<core::Tensor<double>> probe = {a.gates[0], a.upsample_w[0],
                                             a.reaction.atom_emb, a.reaction.distance_bias};
  auto rep = fdcheck::check_gradients(
      probe,
      [&] {
        auto [yp, logits] = model::adapter_forward(a, tr, toks);
        std::vector<int> rows, targets;
        for (std::size_t t = 0; t + 1 < toks.size(); ++t) {
          rows.push_back((int)t);
          targets.push_back(toks[t + 1]);
        }
        auto ce = core::cross_entropy_mean(core::take_rows(logits, rows), targets);
        return core::add(ce, core::soft_bce_mean(yp, {1.0}));
      },
      6, 1e-4, 44);
  CHECK_MESSAGE(rep.failed == 0, "adapter worst rel err ", rep.worst);
}

TEST_CASE("tail mapping: 4 graph layers with 2 adaptation layers runs and stays identical at init") {
  auto a = make_adapter<float>(4, 4, 2, 51);
  CHECK(a.dims.n_frozen_only(a.frozen_lm.cfg) == 2);
  auto tr = featurize("CC>PdCl2>CC");
  auto toks = model::tokenize_text("stirred", 64);
  auto [yp, logits] = model::adapter_forward(a, tr, toks);
  auto plain = model::lm_logits(a.frozen_lm, toks);
  for (core::Index i = 0; i < logits.rows(); ++i)
    for (core::Index j = 0; j < logits.cols(); ++j)
      CHECK(std::abs(logits.at(i, j) - plain.at(i, j)) < 1e-6);
}

TEST_CASE("adapter checkpoint binds to its frozen LM by content hash") {
  auto tmp = std::filesystem::temp_directory_path();
  auto lm_path = tmp / "rf_test_frozen_lm.ckpt";
  auto lm2_path = tmp / "rf_test_frozen_lm2.ckpt";
  auto adapter_path = tmp / "rf_test_adapter.ckpt";

  auto lm = TextLM<float>::init(tiny_tcfg(), 61);
  model::save_textlm(lm, model::kProcLmKind, lm_path);
  auto lm2 = TextLM<float>::init(tiny_tcfg(), 62);
  model::save_textlm(lm2, model::kProcLmKind, lm2_path);

  auto a = Adapter<float>::init(AdapterDims{2}, tiny_gcfg(2), model::load_textlm<float>(lm_path),
                                sha256_file(lm_path), 63);
  model::save_adapter(a, adapter_path);

  CHECK_NOTHROW(model::load_adapter<float>(adapter_path, lm_path));
  CHECK_THROWS_AS(model::load_adapter<float>(adapter_path, lm2_path), DataError);

  // loaded adapter reproduces behavior
  auto loaded = model::load_adapter<float>(adapter_path, lm_path);
  auto tr = featurize("CC>PdCl2>CC");
  CHECK(model::adapter_infer(loaded, tr) == model::adapter_infer(a, tr));

  std::filesystem::remove(lm_path);
  std::filesystem::remove(lm2_path);
  std::filesystem::remove(adapter_path);
}

// ---- zsl ------------------------------------------------------------------

TEST_CASE("labeler learns a linearly separable toy problem") {
  Rng rng(71);
  std::vector<std::vector<double>> emb;
  std::vector<int> labels;
  for (int i = 0; i < 400; ++i) {
    int l = i % 2;
    std::vector<double> row(8);
    for (auto& x : row) x = rng.normal() * 0.3 + (l ? 1.5 : -1.5);
    emb.push_back(row);
    labels.push_back(l);
  }
  model::LabelerOptions opt;
  opt.epochs = 80;
  opt.batch = 64;
  opt.lr = 5e-3;
  auto res = model::train_labeler<float>(emb, labels, opt);
  REQUIRE(res.heldout_defined);
  CHECK(res.heldout.balanced_accuracy > 0.99);

  // label-shuffled data sits at the chance floor
  Rng shuffle_rng(72);
  std::vector<int> shuffled = labels;
  shuffle_rng.shuffle(shuffled);
  std::vector<std::vector<double>> emb2;
  std::vector<int> labels2;
  for (int i = 0; i < 400; ++i) {
    std::vector<double> row(8);
    for (auto& x : row) x = shuffle_rng.normal();
    emb2.push_back(row);
    labels2.push_back(i % 2);
  }
  auto res2 = model::train_labeler<float>(emb2, labels2, opt);
  REQUIRE(res2.heldout_defined);
  CHECK(res2.heldout.balanced_accuracy == doctest::Approx(0.5).epsilon(0.12));

  std::vector<int> ones(emb.size(), 1);
  CHECK_THROWS_AS(model::train_labeler<float>(emb, ones, opt), DataError);
}

TEST_CASE("predict_probs: zero-weight labeler says one half everywhere") {
  auto labeler = zsl::LabelerMLP<float>::init(4, 4, 1);
  for (auto& t : labeler.params()) std::fill(t.values().begin(), t.values().end(), 0.0f);
  auto probs = zsl::predict_probs(labeler, {{1, 2, 3, 4}, {0, 0, 0, 0}});
  CHECK(probs[0] == 0.5);
  CHECK(probs[1] == 0.5);

  auto labeler2 = zsl::LabelerMLP<float>::init(4, 4, 2);
  auto p2 = zsl::predict_probs(labeler2, {{0.5, -1, 2, 0.3}});
  CHECK(p2[0] > 0.0);
  CHECK(p2[0] < 1.0);
  CHECK_THROWS_AS(zsl::predict_probs(labeler2, {{1.0, 2.0}}), ShapeError);
}

TEST_CASE("strategy semantics and algebra") {
  auto cont = zsl::LabelingStrategy::continuous();
  auto th = zsl::LabelingStrategy::threshold(0.2, 0.8);
  auto bin = zsl::LabelingStrategy::binary();

  CHECK(zsl::apply_strategy({0.93}, th)[0].value() == 0.93);
  CHECK(!zsl::apply_strategy({0.5}, th)[0].has_value());
  CHECK(zsl::apply_strategy({0.7}, bin)[0].value() == 1.0);
  CHECK(zsl::apply_strategy({0.5}, bin)[0].value() == 1.0);  // tie goes positive
  CHECK_THROWS_AS(zsl::LabelingStrategy::threshold(0.5, 0.5), ConfigError);

  Rng rng(81);
  std::vector<double> probs;
  for (int i = 0; i < 500; ++i) probs.push_back(rng.uniform());
  auto tight = zsl::apply_strategy(probs, zsl::LabelingStrategy::threshold(0.05, 0.95));
  auto loose = zsl::apply_strategy(probs, th);
  auto continuous = zsl::apply_strategy(probs, cont);
  auto binary = zsl::apply_strategy(probs, bin);
  int tight_kept = 0, loose_kept = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (tight[i]) {
      ++tight_kept;
      CHECK(loose[i].has_value());  // nesting
    }
    if (loose[i]) ++loose_kept;
    CHECK(continuous[i].value() == probs[i]);
    CHECK(binary[i].value() == (continuous[i].value() >= 0.5 ? 1.0 : 0.0));
  }
  CHECK(tight_kept < loose_kept);
}

TEST_CASE("extend_dataset: provenance, distribution, alignment") {
  data::ElnRecord labeled_pos;
  labeled_pos.yield_pct = 50.0;
  data::ElnRecord labeled_neg;
  labeled_neg.outcome_label = "neg";
  data::ElnRecord unlabeled;

  std::vector<data::ElnRecord> lab = {labeled_pos, labeled_pos, labeled_pos, labeled_neg};
  std::vector<data::ElnRecord> unl = {unlabeled, unlabeled, unlabeled};
  std::vector<double> probs = {0.9, 0.1, 0.5};

  auto res = zsl::extend_dataset(lab, unl, probs, zsl::LabelingStrategy::binary());
  CHECK(res.records.size() == 7);
  CHECK(res.distribution.original.positive == 3);
  CHECK(res.distribution.original.negative == 1);
  CHECK(res.distribution.pseudo.positive == 2);  // 0.9 and the 0.5 tie
  CHECK(res.distribution.pseudo.negative == 1);
  CHECK(res.distribution.combined.n == 7);
  double lo = std::min(res.distribution.original.positive_share,
                       res.distribution.pseudo.positive_share);
  double hi = std::max(res.distribution.original.positive_share,
                       res.distribution.pseudo.positive_share);
  CHECK(res.distribution.combined.positive_share > lo);
  CHECK(res.distribution.combined.positive_share < hi);

  auto th = zsl::extend_dataset(lab, unl, probs, zsl::LabelingStrategy::threshold(0.2, 0.8));
  CHECK(th.records.size() == 6);  // the 0.5 record is dropped
  for (const auto& r : th.records)
    if (r.provenance != zsl::Provenance::Original)
      CHECK((r.label <= 0.2 || r.label >= 0.8));

  CHECK_THROWS_AS(zsl::extend_dataset(lab, unl, {0.5}, zsl::LabelingStrategy::binary()),
                  DataError);

  // csv rows for the distribution table
  auto csv = res.distribution.csv();
  CHECK(csv.find("original,") != std::string::npos);
  CHECK(csv.find("zsl,") != std::string::npos);
  CHECK(csv.find("combined,") != std::string::npos);
}

TEST_CASE("soft dataset JSONL round trip") {
  data::ElnRecord rec;
  rec.reaction = "C>>C";
  rec.technology = "Single";
  rec.procedure = "stirred";
  rec.product_label = "P1";
  rec.timestamp = "2020-01-01";
  std::vector<zsl::SoftRecord> rows = {{rec, 0.73, zsl::Provenance::ZslContinuous},
                                       {rec, 1.0, zsl::Provenance::Original}};
  auto p = std::filesystem::temp_directory_path() / "rf_test_soft.jsonl";
  zsl::save_soft_dataset(p, rows);
  auto back = zsl::load_soft_dataset(p);
  REQUIRE(back.size() == 2);
  CHECK(back[0].label == 0.73);
  CHECK(back[0].provenance == zsl::Provenance::ZslContinuous);
  CHECK(back[1].provenance == zsl::Provenance::Original);
  CHECK(back[0].rec.reaction == "C>>C");
  std::filesystem::remove(p);
}

TEST_CASE("embedding extraction: identical texts give identical rows, shards concatenate") {
  TextLMConfig cfg = tiny_tcfg(1);
  auto lm = TextLM<float>::init(cfg, 91);
  data::ElnRecord a;
  a.technology = "Single";
  a.procedure = "A and B were stirred.";
  a.product_label = "P1";
  data::ElnRecord b = a;         // identical text fields
  data::ElnRecord c = a;
  c.procedure = "No conversion was observed.";
  c.yield_pct = 2.0;             // outcome must NOT leak into the embedding

  auto rows = model::extract_embeddings(lm, {a, b, c});
  CHECK(rows[0] == rows[1]);
  CHECK(rows[0] != rows[2]);

  data::ElnRecord c_no_outcome = c;
  c_no_outcome.yield_pct.reset();
  auto rows2 = model::extract_embeddings(lm, {c_no_outcome});
  CHECK(rows2[0] == rows[2]);  // leak guard: outcome fields never formatted

  // shard round trip and concatenation
  auto tmp = std::filesystem::temp_directory_path();
  auto s1 = tmp / "rf_test_emb1.ckpt";
  auto s2 = tmp / "rf_test_emb2.ckpt";
  model::save_embedding_shard(s1, {rows[0], rows[1]}, {0, 1}, "lmsha");
  model::save_embedding_shard(s2, {rows[2]}, {2}, "lmsha");
  auto sh1 = model::load_embedding_shard(s1);
  auto sh2 = model::load_embedding_shard(s2);
  CHECK(sh1.record_ids == std::vector<std::int64_t>{0, 1});
  CHECK(sh2.record_ids == std::vector<std::int64_t>{2});
  // float32 storage round trip
  for (std::size_t j = 0; j < rows[0].size(); ++j)
    CHECK(sh1.rows[0][j] == doctest::Approx(rows[0][j]).epsilon(1e-6));
  std::filesystem::remove(s1);
  std::filesystem::remove(s2);
}
