#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "reacfuse/chem.hpp"
#include "reacfuse/featurize.hpp"
#include "reacfuse/rng.hpp"

using namespace reacfuse;
using feat::TokenKind;

namespace {

chem::AtomVocab wide_atom_vocab() {
  std::vector<std::pair<std::string, int>> pairs;
  for (const char* e : {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I", "H"})
    for (int q : {-1, 0, 1}) pairs.emplace_back(e, q);
  return chem::AtomVocab::from_pairs(std::move(pairs));
}

chem::RscVocab small_rsc_vocab() { return chem::RscVocab::from_tokens({"PdCl2", "THF"}); }

// Floyd-Warshall oracle, same clipping rules
feat::IntMatrix fw_oracle(const chem::Molecule& m) {
  const int n = m.atom_count();
  const int inf = 1 << 20;
  feat::IntMatrix d = feat::IntMatrix::filled(n, inf);
  for (int i = 0; i < n; ++i) d.at(i, i) = 0;
  for (const auto& b : m.bonds) {
    d.at(b.a, b.b) = 1;
    d.at(b.b, b.a) = 1;
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        d.at(i, j) = std::min(d.at(i, j), d.at(i, k) + d.at(k, j));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      d.at(i, j) = d.at(i, j) >= inf ? feat::kCross : std::min(d.at(i, j), feat::kDistanceMax);
  return d;
}

chem::Molecule random_tree(Rng& rng, int n) {
  chem::Molecule m;
  for (int i = 0; i < n; ++i) {
    m.atoms.push_back({"C", 0, std::nullopt});
    if (i > 0) {
      int parent = static_cast<int>(rng.below(static_cast<std::uint64_t>(i)));
      m.bonds.push_back({parent, i, 1});
    }
  }
  m.finalize();
  return m;
}

}  // namespace

TEST_CASE("propane distances") {
  auto m = chem::parse_molecule("CCC");
  auto d = feat::shortest_path_matrix(m);
  CHECK(d.at(0, 2) == 2);
  CHECK(d.at(0, 1) == 1);
  CHECK(d.at(1, 1) == 0);
}

TEST_CASE("cross-component distance is the sentinel") {
  auto m = chem::parse_molecule("C.C");
  auto d = feat::shortest_path_matrix(m);
  CHECK(d.at(0, 1) == feat::kCross);
  CHECK(d.at(1, 0) == feat::kCross);
}

TEST_CASE("bfs matches floyd-warshall on random trees and graphs") {
  Rng rng(7);
  for (int iter = 0; iter < 50; ++iter) {
    auto m = random_tree(rng, 15);
    // add a couple of ring edges
    for (int k = 0; k < 2; ++k) {
      int a = rng.range(0, 14), b = rng.range(0, 14);
      if (a == b) continue;
      chem::Bond bd{std::min(a, b), std::max(a, b), 1};
      bool dup = false;
      for (const auto& e : m.bonds) dup = dup || (e.a == bd.a && e.b == bd.b);
      if (!dup) m.bonds.push_back(bd);
    }
    m.finalize();
    auto got = feat::shortest_path_matrix(m);
    auto want = fw_oracle(m);
    CHECK(got.v == want.v);
  }
}

TEST_CASE("long chains clip at the distance cap") {
  std::string chain(14, 'C');
  auto d = feat::shortest_path_matrix(chem::parse_molecule(chain));
  CHECK(d.at(0, 13) == feat::kDistanceMax);
}

TEST_CASE("tokenize_reaction layout and counts") {
  auto av = wide_atom_vocab();
  auto rv = small_rsc_vocab();

  auto tr = feat::tokenize_reaction(chem::parse_reaction("C>>C", rv), av, rv);
  REQUIRE(tr.size() == 2);
  CHECK(tr.tokens[0].kind == TokenKind::ReactantAtom);
  CHECK(tr.tokens[1].kind == TokenKind::ProductAtom);

  auto tr2 = feat::tokenize_reaction(chem::parse_reaction("CC>THF>CC", rv), av, rv);
  REQUIRE(tr2.size() == 5);
  CHECK(tr2.tokens[4].kind == TokenKind::Rsc);
  CHECK(tr2.distance_codes.n == 5);
  CHECK(tr2.mask.n == 5);

  // neighbor counts: CH3 carbon has 1 heavy neighbor + 3 H
  CHECK(tr2.tokens[0].neighbor_count == 4);
}

TEST_CASE("oversize reactions are rejected") {
  auto av = wide_atom_vocab();
  auto rv = small_rsc_vocab();
  std::string big(200, 'C');
  std::string rxn = big + ">>" + big;
  try {
    feat::tokenize_reaction(chem::parse_reaction(rxn, rv), av, rv);
    FAIL_CHECK("expected SequenceTooLong");
  } catch (const DataError& e) {
    CHECK(e.code() == "SequenceTooLong");
  }
}

TEST_CASE("attention mask rules") {
  auto av = wide_atom_vocab();
  auto rv = small_rsc_vocab();
  auto tr = feat::tokenize_reaction(chem::parse_reaction("CC>THF.PdCl2>CC", rv), av, rv);
  const int n = tr.size();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      bool i_rsc = tr.tokens[(std::size_t)i].kind == TokenKind::Rsc;
      bool j_rsc = tr.tokens[(std::size_t)j].kind == TokenKind::Rsc;
      bool expected = i_rsc || !j_rsc;  // atoms never look at RSCs
      CHECK(tr.mask.at(i, j) == expected);
    }
  }
}

TEST_CASE("distance codes: same molecule, cross molecule, rsc") {
  auto av = wide_atom_vocab();
  auto rv = small_rsc_vocab();
  auto tr = feat::tokenize_reaction(chem::parse_reaction("CC>THF>CC", rv), av, rv);
  CHECK(tr.distance_codes.at(0, 1) == 1);               // bonded reactant atoms
  CHECK(tr.distance_codes.at(0, 2) == feat::kCross);    // reactant vs product
  CHECK(tr.distance_codes.at(2, 3) == 1);               // bonded product atoms
  CHECK(tr.distance_codes.at(0, 4) == feat::kCross);    // atom vs RSC
  CHECK(tr.distance_codes.at(4, 4) == feat::kCross);    // RSC diagonal
  for (int i = 0; i < tr.size(); ++i)
    for (int j = 0; j < tr.size(); ++j)
      CHECK(tr.distance_codes.at(i, j) == tr.distance_codes.at(j, i));
}

TEST_CASE("within-molecule permutation permutes matrices consistently") {
  auto av = wide_atom_vocab();
  auto rv = small_rsc_vocab();
  // same molecule written from two different starting atoms
  auto a = feat::tokenize_reaction(chem::parse_reaction("CC(=O)N>>C", rv), av, rv);
  auto b = feat::tokenize_reaction(chem::parse_reaction("NC(=O)C>>C", rv), av, rv);
  // the reactant has 4 atoms; permutation between the two writings
  std::vector<int> perm = {3, 1, 2, 0};  // a-index -> b-index
  for (int i = 0; i < 4; ++i) {
    CHECK(a.tokens[(std::size_t)i].neighbor_count ==
          b.tokens[(std::size_t)perm[(std::size_t)i]].neighbor_count);
    for (int j = 0; j < 4; ++j)
      CHECK(a.distance_codes.at(i, j) ==
            b.distance_codes.at(perm[(std::size_t)i], perm[(std::size_t)j]));
  }
}

TEST_CASE("neighbor counts agree with the chem module") {
  auto av = wide_atom_vocab();
  auto rv = small_rsc_vocab();
  auto rxn = chem::parse_reaction("CC(=O)O.C1CC1Br>THF>CC(=O)OC1CC1", rv);
  auto tr = feat::tokenize_reaction(rxn, av, rv);
  std::vector<const chem::Molecule*> mols;
  for (const auto& m : rxn.reactants) mols.push_back(&m);
  mols.push_back(&rxn.product);
  for (const auto& t : tr.tokens) {
    if (t.kind == TokenKind::Rsc) continue;
    const chem::Molecule& m = *mols[(std::size_t)t.molecule_id];
    auto adj = m.adjacency();
    int heavy = static_cast<int>(adj[(std::size_t)t.atom_index].size());
    int h = chem::implicit_hydrogen_count(m.atoms[(std::size_t)t.atom_index],
                                          m.bond_order_sum(t.atom_index));
    CHECK(t.neighbor_count == std::min(heavy + h, feat::kNeighborCap));
  }
}

TEST_CASE("mlm masking: determinism, rate, zero mask edge") {
  auto av = wide_atom_vocab();
  auto rv = small_rsc_vocab();
  auto tr = feat::tokenize_reaction(chem::parse_reaction("CCCCCCCC>THF>CCCCCCCC", rv), av, rv);

  auto a = feat::mask_for_mlm(tr, 0.5, 42, av.size(), rv.size());
  auto b = feat::mask_for_mlm(tr, 0.5, 42, av.size(), rv.size());
  REQUIRE(a.targets.size() == b.targets.size());
  for (std::size_t i = 0; i < a.targets.size(); ++i) {
    CHECK(a.targets[i].position == b.targets[i].position);
    CHECK(a.targets[i].joint_id == b.targets[i].joint_id);
  }

  // masked atom positions carry the MASK id, originals preserved in targets
  for (const auto& t : a.targets) {
    const auto& tok = a.tokens[(std::size_t)t.position];
    if (tok.kind == TokenKind::Rsc) {
      CHECK(tok.rsc_id == rv.size());
      CHECK(t.joint_id >= av.size());
    } else {
      CHECK(tok.atom_type_id == av.size());
      CHECK(t.joint_id < av.size());
    }
  }

  // binomial concentration at rate 0.15 over many tokens
  int masked = 0, total = 0;
  for (int seed = 0; seed < 700; ++seed) {
    auto c = feat::mask_for_mlm(tr, 0.15, static_cast<std::uint64_t>(seed), av.size(), rv.size());
    masked += static_cast<int>(c.targets.size());
    total += tr.size();
  }
  double rate = static_cast<double>(masked) / total;
  CHECK(rate == doctest::Approx(0.15).epsilon(0.15));

  CHECK_THROWS_AS(feat::mask_for_mlm(tr, 0.0, 1, av.size(), rv.size()), ConfigError);
}
