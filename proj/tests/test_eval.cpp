#include <doctest.h>

#include <cmath>

#include "reacfuse/metrics.hpp"
#include "reacfuse/rng.hpp"
#include "reacfuse/errors.hpp"

using namespace reacfuse;

namespace {

// O(n^2) pairwise oracle with the same exact-integer formulation
double auc_oracle(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::int64_t wins = 0, ties = 0, np = 0, nn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i]) ++np;
    else ++nn;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (!labels[i] || labels[j]) continue;
      if (scores[i] > scores[j]) ++wins;
      else if (scores[i] == scores[j]) ++ties;
    }
  }
  return static_cast<double>(2 * wins + ties) / static_cast<double>(2 * np * nn);
}

}  // namespace

TEST_CASE("confusion counting") {
  auto c = eval::confusion({0.9, 0.1}, {1, 0}, 0.5);
  CHECK(c.tp == 1);
  CHECK(c.tn == 1);
  CHECK(c.fp == 0);
  CHECK(c.fn == 0);

  auto all_pos = eval::confusion({0.9, 0.1, 0.3}, {1, 0, 1}, 0.0);
  CHECK(all_pos.fn == 0);
  CHECK(all_pos.tn == 0);
  CHECK(all_pos.tp + all_pos.fp == 3);

  // brute-force spot check on random data
  Rng rng(3);
  std::vector<double> s;
  std::vector<int> l;
  for (int i = 0; i < 200; ++i) {
    s.push_back(rng.uniform());
    l.push_back(rng.bernoulli(0.6) ? 1 : 0);
  }
  auto got = eval::confusion(s, l, 0.37);
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (int i = 0; i < 200; ++i) {
    bool pred = s[(std::size_t)i] >= 0.37;
    if (pred && l[(std::size_t)i]) ++tp;
    if (pred && !l[(std::size_t)i]) ++fp;
    if (!pred && l[(std::size_t)i]) ++fn;
    if (!pred && !l[(std::size_t)i]) ++tn;
  }
  CHECK(got.tp == tp);
  CHECK(got.fp == fp);
  CHECK(got.tn == tn);
  CHECK(got.fn == fn);

  CHECK_THROWS_AS(eval::confusion({0.5}, {1, 0}, 0.5), DataError);
}

TEST_CASE("metric identities") {
  eval::ConfusionCounts c{3, 2, 5, 1};
  auto r = eval::metrics(c);
  CHECK(r.sensitivity == doctest::Approx(0.75));
  CHECK(r.specificity == doctest::Approx(5.0 / 7.0));
  CHECK(r.balanced_accuracy == (r.sensitivity + r.specificity) / 2.0);  // exact

  auto perfect = eval::metrics({4, 0, 6, 0});
  CHECK(perfect.sensitivity == 1.0);
  CHECK(perfect.specificity == 1.0);
  CHECK(perfect.balanced_accuracy == 1.0);

  CHECK_THROWS_AS(eval::metrics({0, 3, 4, 0}), NumericError);  // no positives
}

TEST_CASE("roc auc: endpoints, ties, exact oracle agreement") {
  CHECK(eval::roc_auc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}) == 1.0);
  CHECK(eval::roc_auc({0.1, 0.2, 0.8, 0.9}, {1, 1, 0, 0}) == 0.0);
  CHECK(eval::roc_auc({0.5, 0.5}, {1, 0}) == 0.5);

  Rng rng(9);
  for (int iter = 0; iter < 200; ++iter) {
    int n = 5 + (int)rng.below(45);
    std::vector<double> s;
    std::vector<int> l;
    bool pos = false, neg = false;
    for (int i = 0; i < n; ++i) {
      // quantized scores force tie handling
      s.push_back(std::floor(rng.uniform() * 8) / 8.0);
      int li = rng.bernoulli(0.5) ? 1 : 0;
      (li ? pos : neg) = true;
      l.push_back(li);
    }
    if (!pos || !neg) continue;
    CHECK(eval::roc_auc(s, l) == auc_oracle(s, l));  // bit-exact
  }

  CHECK_THROWS_AS(eval::roc_auc({0.5, 0.6}, {1, 1}), NumericError);
}

TEST_CASE("roc auc is invariant under strictly monotone transforms") {
  Rng rng(10);
  std::vector<double> s;
  std::vector<int> l;
  for (int i = 0; i < 120; ++i) {
    s.push_back(rng.uniform());
    l.push_back(rng.bernoulli(0.4) ? 1 : 0);
  }
  std::vector<double> warped;
  for (double x : s) warped.push_back(std::exp(3.0 * x) - 1.0);
  CHECK(eval::roc_auc(s, l) == eval::roc_auc(warped, l));
}

TEST_CASE("threshold sweep: endpoints, monotonicity, consistency") {
  Rng rng(11);
  std::vector<double> s;
  std::vector<int> l;
  for (int i = 0; i < 300; ++i) {
    s.push_back(rng.uniform() * 0.98 + 0.01);
    l.push_back(rng.bernoulli(0.5) ? 1 : 0);
  }
  std::vector<double> grid;
  for (int t = 0; t <= 20; ++t) grid.push_back(t / 20.0);
  auto curve = eval::threshold_sweep(s, l, grid);
  CHECK(curve.front().report.sensitivity == 1.0);  // t = 0: everything positive
  CHECK(curve.front().report.specificity == 0.0);
  for (std::size_t i = 1; i < curve.size(); ++i) {
    CHECK(curve[i].report.sensitivity <= curve[i - 1].report.sensitivity);
    CHECK(curve[i].report.specificity >= curve[i - 1].report.specificity);
  }
  auto direct = eval::metrics(eval::confusion(s, l, 0.5));
  CHECK(curve[10].report.sensitivity == direct.sensitivity);
  CHECK(curve[10].report.specificity == direct.specificity);

  CHECK_THROWS_AS(eval::threshold_sweep(s, l, {0.5, 0.4}), ConfigError);
}

TEST_CASE("length buckets partition the data") {
  Rng rng(12);
  std::vector<std::int64_t> lengths;
  std::vector<double> scores;
  std::vector<int> labels;
  for (int i = 0; i < 500; ++i) {
    lengths.push_back((std::int64_t)rng.below(3500));
    scores.push_back(rng.uniform());
    labels.push_back(rng.bernoulli(0.5) ? 1 : 0);
  }
  auto buckets = eval::length_bucket_report(lengths, scores, labels, eval::default_length_edges());
  std::int64_t total = 0;
  for (const auto& b : buckets) total += b.n;
  CHECK(total == 500);

  // one giant bucket reproduces global metrics
  auto single = eval::length_bucket_report(lengths, scores, labels, {0, 1000000});
  auto global = eval::metrics(eval::confusion(scores, labels, 0.5));
  REQUIRE(single[0].defined);
  CHECK(single[0].report.sensitivity == global.sensitivity);
  CHECK(single[0].report.specificity == global.specificity);

  // single-class bucket is a marker, not a crash
  auto marked = eval::length_bucket_report({10, 5000}, {0.9, 0.9}, {1, 1}, {0, 100});
  CHECK(!marked[0].defined);
  CHECK(marked[0].n == 1);
  CHECK(marked[0].mean_label == 1.0);
}

TEST_CASE("subset reports: identity, emptiness, additivity") {
  Rng rng(13);
  std::vector<double> s;
  std::vector<int> l;
  std::vector<bool> tag;
  for (int i = 0; i < 400; ++i) {
    s.push_back(rng.uniform());
    l.push_back(rng.bernoulli(0.5) ? 1 : 0);
    tag.push_back(rng.bernoulli(0.3));
  }
  std::vector<bool> all(400, true), none(400, false);
  auto whole = eval::subset_report(s, l, all, "all", 0.5);
  auto global = eval::metrics(eval::confusion(s, l, 0.5));
  CHECK(whole.sensitivity == global.sensitivity);
  CHECK_THROWS_AS(eval::subset_report(s, l, none, "none", 0.5), DataError);

  // tag + complement reconstruct the global confusion counts
  std::vector<bool> comp;
  for (bool b : tag) comp.push_back(!b);
  auto count = [&](const std::vector<bool>& keep) {
    std::vector<double> ss;
    std::vector<int> ll;
    for (std::size_t i = 0; i < keep.size(); ++i)
      if (keep[i]) {
        ss.push_back(s[i]);
        ll.push_back(l[i]);
      }
    return eval::confusion(ss, ll, 0.5);
  };
  auto a = count(tag), b = count(comp), g = eval::confusion(s, l, 0.5);
  CHECK(a.tp + b.tp == g.tp);
  CHECK(a.fp + b.fp == g.fp);
  CHECK(a.tn + b.tn == g.tn);
  CHECK(a.fn + b.fn == g.fn);
}

TEST_CASE("label histogram conventions") {
  auto h = eval::label_histogram({0.5, 0.5, 0.5}, 2);
  CHECK(h[0] == 0);
  CHECK(h[1] == 3);  // half-open bins, 0.5 lands right

  Rng rng(14);
  std::vector<double> probs;
  for (int i = 0; i < 1000; ++i) probs.push_back(rng.uniform());
  auto h10 = eval::label_histogram(probs, 10);
  std::int64_t total = 0;
  for (auto c : h10) total += c;
  CHECK(total == 1000);

  // sort-and-count oracle
  for (int b = 0; b < 10; ++b) {
    std::int64_t want = 0;
    for (double p : probs) {
      int bin = std::min((int)(p * 10), 9);
      if (bin == b) ++want;
    }
    CHECK(h10[(std::size_t)b] == want);
  }

  CHECK_THROWS_AS(eval::label_histogram(probs, 1), ConfigError);
}

TEST_CASE("length histogram cutoff") {
  auto h = eval::length_histogram({50, 150, 250, 5000, 3000}, 100, 3000);
  CHECK(h.size() == 31);
  CHECK(h[0] == 1);
  CHECK(h[1] == 1);
  CHECK(h[2] == 1);
  CHECK(h.back() == 2);  // everything at or past the cutoff
}
