#include <doctest.h>

#include <string>
#include <vector>

#include "reacfuse/chem.hpp"
#include "reacfuse/rng.hpp"
#include "support/graph_iso.hpp"
#include "support/ref_smiles.hpp"

using namespace reacfuse;
using chem::Molecule;
using chem::Reaction;

namespace {

chem::RscVocab test_vocab() {
  return chem::RscVocab::from_tokens({"[H+]", "PdCl2", "THF", "K2CO3"});
}

// cross-check a parse against the independent reference parser
void check_against_reference(const std::string& text) {
  Molecule got = chem::parse_molecule(text);
  refsmiles::RefMol want = refsmiles::parse(text);
  REQUIRE(got.atoms.size() == want.atoms.size());
  REQUIRE(got.bonds.size() == want.bonds.size());
  for (std::size_t i = 0; i < got.atoms.size(); ++i) {
    CHECK(got.atoms[i].element == want.atoms[i].element);
    CHECK(got.atoms[i].formal_charge == want.atoms[i].charge);
    CHECK(got.atoms[i].explicit_h == want.atoms[i].hcount);
  }
  for (const auto& b : got.bonds)
    CHECK(want.bonds.count({b.a, b.b, b.order}) == 1);
}

// random molecule builder for property tests: trees plus a few ring closures
Molecule random_molecule(Rng& rng, int max_atoms) {
  static const std::vector<std::string> organics = {"C", "N", "O", "S", "P", "B",
                                                    "F", "Cl", "Br", "I"};
  Molecule m;
  int n = rng.range(1, max_atoms);
  for (int i = 0; i < n; ++i) {
    chem::Atom a;
    if (rng.bernoulli(0.15)) {
      a.element = rng.bernoulli(0.5) ? "N" : "O";
      a.formal_charge = rng.bernoulli(0.5) ? 1 : -1;
    } else {
      a.element = organics[rng.below(organics.size())];
    }
    if (rng.bernoulli(0.1)) a.explicit_h = rng.range(0, 3);
    m.atoms.push_back(a);
    if (i > 0 && rng.bernoulli(0.9)) {  // sometimes start a new component
      int other = rng.range(0, i - 1);
      int order = rng.bernoulli(0.25) ? rng.range(1, 3) : 1;
      m.bonds.push_back({std::min(other, i), std::max(other, i), order});
    }
  }
  // a few extra edges to close rings
  for (int k = 0; k < 2; ++k) {
    if (n >= 4 && rng.bernoulli(0.5)) {
      int a = rng.range(0, n - 1), b = rng.range(0, n - 1);
      if (a == b) continue;
      chem::Bond bd{std::min(a, b), std::max(a, b), 1};
      bool dup = false;
      for (const auto& e : m.bonds) dup = dup || (e.a == bd.a && e.b == bd.b);
      if (!dup) m.bonds.push_back(bd);
    }
  }
  m.finalize();
  return m;
}

}  // namespace

TEST_CASE("single atom molecule") {
  Molecule m = chem::parse_molecule("C");
  CHECK(m.atom_count() == 1);
  CHECK(m.bonds.empty());
  CHECK(m.atoms[0].element == "C");
  CHECK(m.component_count() == 1);
}

TEST_CASE("acetic acid graph") {
  Molecule m = chem::parse_molecule("CC(=O)O");
  REQUIRE(m.atom_count() == 4);
  REQUIRE(m.bonds.size() == 3);
  CHECK(m.bonds[0] == chem::Bond{0, 1, 1});
  CHECK(m.bonds[1] == chem::Bond{1, 2, 2});
  CHECK(m.bonds[2] == chem::Bond{1, 3, 1});
  check_against_reference("CC(=O)O");
}

TEST_CASE("cyclopropane ring closure") {
  Molecule m = chem::parse_molecule("C1CC1");
  CHECK(m.atom_count() == 3);
  CHECK(m.bonds.size() == 3);
  check_against_reference("C1CC1");
}

TEST_CASE("reference cross-check on assorted valid inputs") {
  for (const char* s : {"CCO", "C=CC#N", "C1CCCCC1", "CC(C)(C)Br", "[NH4+]", "[O-]C=O",
                        "C1CC1.O", "ClCCl", "[Na+].[Cl-]", "C(=O)(O)C1CC1C", "S1CC1",
                        "[CH2]C", "[Fe+2]", "C=1CCCCC=1", "N1CC2CC12"})
    check_against_reference(s);
}

TEST_CASE("components split on dot") {
  Molecule m = chem::parse_molecule("CC.O.[Na+]");
  CHECK(m.atom_count() == 4);
  CHECK(m.component_count() == 3);
  CHECK(m.component_ids == std::vector<int>{0, 0, 1, 2});
}

TEST_CASE("parse errors carry kind and byte offset") {
  using chem::parse_molecule;
  auto expect = [](const char* text, ParseErrorKind kind, std::size_t offset) {
    try {
      parse_molecule(text);
      FAIL_CHECK("no error for ", text);
    } catch (const ParseError& e) {
      CHECK(e.kind() == kind);
      CHECK(e.offset() == offset);
    }
  };
  expect("", ParseErrorKind::EmptyInput, 0);
  expect("CC(C", ParseErrorKind::UnbalancedParenthesis, 2);
  expect("CC)C", ParseErrorKind::UnbalancedParenthesis, 2);
  expect("C1CC", ParseErrorKind::UnclosedRingBond, 1);
  expect("CXC", ParseErrorKind::UnknownElement, 1);
  expect("cc", ParseErrorKind::UnsupportedFeature, 0);
  expect("C/C=C/C", ParseErrorKind::UnsupportedFeature, 1);
  expect("[13C]", ParseErrorKind::UnsupportedFeature, 1);
  expect("[C@H]", ParseErrorKind::UnsupportedFeature, 2);
  expect("C%12C", ParseErrorKind::UnsupportedFeature, 1);
  expect("C=", ParseErrorKind::DanglingBond, 1);
  expect("C=.C", ParseErrorKind::DanglingBond, 1);
  expect("C==C", ParseErrorKind::DanglingBond, 2);
  expect("[C+7]", ParseErrorKind::MalformedBracket, 2);
  expect("[C", ParseErrorKind::MalformedBracket, 0);
  expect("C1C1", ParseErrorKind::DuplicateBond, 3);
  expect("C11", ParseErrorKind::DuplicateBond, 2);
  expect("C1.C1", ParseErrorKind::UnclosedRingBond, 1);
}

TEST_CASE("implicit hydrogen counts") {
  auto h = [](const char* elem, int charge, int orders) {
    chem::Atom a{elem, charge, std::nullopt};
    return chem::implicit_hydrogen_count(a, orders);
  };
  CHECK(h("C", 0, 0) == 4);   // methane
  CHECK(h("O", 0, 2) == 0);   // carbonyl oxygen
  CHECK(h("N", 1, 3) == 1);   // ammonium-style nitrogen
  CHECK(h("N", -1, 1) == 1);
  CHECK(h("O", -1, 1) == 0);
  CHECK(h("S", 0, 1) == 1);
  CHECK(h("H", 1, 0) == 0);   // bare proton

  chem::Atom with_h{"C", 0, 2};
  CHECK(chem::implicit_hydrogen_count(with_h, 3) == 2);  // explicit wins

  // enumeration oracle over the full (element, charge, order-sum) grid
  for (const char* elem : {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I", "H"}) {
    for (int charge = -2; charge <= 2; ++charge) {
      for (int orders = 0; orders <= 6; ++orders) {
        chem::Atom a{elem, charge, std::nullopt};
        refsmiles::RefAtom ra{elem, charge, std::nullopt};
        CHECK(chem::implicit_hydrogen_count(a, orders) == refsmiles::ref_hydrogens(ra, orders));
      }
    }
  }
}

TEST_CASE("hydrogen counts are order independent") {
  Molecule a = chem::parse_molecule("CC(=O)N");
  Molecule b = chem::parse_molecule("NC(=O)C");
  std::vector<int> ha, hb;
  for (int i = 0; i < a.atom_count(); ++i)
    ha.push_back(chem::implicit_hydrogen_count(a.atoms[(std::size_t)i], a.bond_order_sum(i)));
  for (int i = 0; i < b.atom_count(); ++i)
    hb.push_back(chem::implicit_hydrogen_count(b.atoms[(std::size_t)i], b.bond_order_sum(i)));
  std::sort(ha.begin(), ha.end());
  std::sort(hb.begin(), hb.end());
  CHECK(ha == hb);
}

TEST_CASE("reaction parsing") {
  auto vocab = test_vocab();
  Reaction r = chem::parse_reaction("CCO.CC(=O)O>[H+]>CCOC(C)=O", vocab);
  CHECK(r.reactants.size() == 2);
  REQUIRE(r.rsc_ids.size() == 1);
  CHECK(vocab.token(r.rsc_ids[0]) == "[H+]");
  CHECK(r.product.atom_count() == 6);

  Reaction id = chem::parse_reaction("C>>C", vocab);
  CHECK(id.reactants.size() == 1);
  CHECK(id.rsc_ids.empty());

  CHECK_THROWS_AS(chem::parse_reaction("C>>C.C", vocab), ParseError);
  try {
    chem::parse_reaction("C>>C.C", vocab);
  } catch (const ParseError& e) {
    CHECK(e.kind() == ParseErrorKind::MultipleProducts);
  }
  try {
    chem::parse_reaction("C>C", vocab);
  } catch (const ParseError& e) {
    CHECK(e.kind() == ParseErrorKind::MissingSegment);
  }
  try {
    chem::parse_reaction(">C>C", vocab);
  } catch (const ParseError& e) {
    CHECK(e.kind() == ParseErrorKind::MissingSegment);
  }
}

TEST_CASE("unknown agents map to UNK") {
  auto vocab = test_vocab();
  Reaction r = chem::parse_reaction("C>NoSuchAgent.THF>C", vocab);
  REQUIRE(r.rsc_ids.size() == 2);
  CHECK(r.rsc_ids[0] == chem::RscVocab::kUnkId);
  CHECK(vocab.token(r.rsc_ids[1]) == "THF");
}

TEST_CASE("write/parse round trip is isomorphic") {
  for (const char* s : {"C", "CC(=O)O", "C1CC1", "C1CCCCC1C(=O)Cl", "[NH4+].[O-]S(=O)(=O)O",
                        "C(Br)(Cl)CC#CC1CC1", "N1CC2CC12", "C=1CCCCC=1"}) {
    Molecule m = chem::parse_molecule(s);
    std::string w = chem::write_molecule(m);
    Molecule back = chem::parse_molecule(w);
    CHECK_MESSAGE(graphiso::isomorphic(m, back), s, " -> ", w);
  }
}

TEST_CASE("round trip on random molecules") {
  Rng rng(20240811);
  for (int i = 0; i < 300; ++i) {
    Molecule m = random_molecule(rng, 20);
    std::string w = chem::write_molecule(m);
    Molecule back;
    REQUIRE_NOTHROW(back = chem::parse_molecule(w));
    CHECK_MESSAGE(graphiso::isomorphic(m, back), "failed on ", w);
  }
}

TEST_CASE("reaction round trip keeps rsc order") {
  auto vocab = test_vocab();
  Reaction r = chem::parse_reaction("CBr>K2CO3.PdCl2>CC", vocab);
  std::string w = chem::write_reaction(r, vocab);
  Reaction back = chem::parse_reaction(w, vocab);
  CHECK(back.rsc_ids == r.rsc_ids);
  CHECK(graphiso::isomorphic(r, back));

  Reaction single = chem::parse_reaction("C>THF.THF>C", vocab);
  Reaction single_back = chem::parse_reaction(chem::write_reaction(single, vocab), vocab);
  CHECK(single_back.rsc_ids == std::vector<int>{single.rsc_ids[0], single.rsc_ids[1]});
}

TEST_CASE("fuzz: parser never crashes, failures are typed") {
  Rng rng(99);
  const std::string alphabet = "CNOSPBFIclrn()[]=#-+.>1234567890@%Hh \t\\/KZaX";
  int parsed = 0;
  for (int iter = 0; iter < 2000; ++iter) {
    std::size_t len = 1 + rng.below(80);
    std::string s;
    for (std::size_t i = 0; i < len; ++i) {
      if (rng.bernoulli(0.02))
        s.push_back(static_cast<char>(rng.below(256)));
      else
        s.push_back(alphabet[rng.below(alphabet.size())]);
    }
    try {
      chem::parse_molecule(s);
      ++parsed;
    } catch (const ParseError& e) {
      CHECK(e.offset() <= s.size());
    }
  }
  CHECK(parsed > 0);  // some random strings should be valid
}

TEST_CASE("rsc vocab file round trip") {
  auto vocab = test_vocab();
  auto p = std::filesystem::temp_directory_path() / "rf_test_rsc_vocab.txt";
  vocab.save(p);
  auto loaded = chem::RscVocab::load(p);
  CHECK(loaded.size() == vocab.size());
  CHECK(loaded.token(0) == "UNK");
  CHECK(loaded.id_of("THF") == vocab.id_of("THF"));
  CHECK(loaded.id_of("missing") == chem::RscVocab::kUnkId);
  std::filesystem::remove(p);
}

TEST_CASE("atom vocab lookups") {
  auto v = chem::AtomVocab::from_pairs({{"C", 0}, {"N", 0}, {"N", 1}, {"O", -1}});
  CHECK(v.find("N", 1).value() == 2);
  CHECK(!v.find("N", -1).has_value());
  auto p = std::filesystem::temp_directory_path() / "rf_test_atom_vocab.txt";
  v.save(p);
  auto loaded = chem::AtomVocab::load(p);
  CHECK(loaded.size() == 4);
  CHECK(loaded.find("O", -1).value() == 3);
  std::filesystem::remove(p);
}
