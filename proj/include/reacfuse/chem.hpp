#ifndef REACFUSE_CHEM_HPP
#define REACFUSE_CHEM_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reacfuse/errors.hpp"

namespace reacfuse::chem {

// One heavy atom. explicit_h is set only for bracket atoms that spell an H
// count; everything else derives hydrogens from the valence table.
struct Atom {
  std::string element;
  int formal_charge = 0;
  std::optional<int> explicit_h;

  bool operator==(const Atom&) const = default;
};

struct Bond {
  int a = 0, b = 0;  // a < b
  int order = 1;     // 1, 2, 3

  bool operator==(const Bond&) const = default;
  auto operator<=>(const Bond&) const = default;
};

struct Molecule {
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;         // sorted, no duplicates
  std::vector<int> component_ids;  // dense labels, 0-based, order of first appearance

  int atom_count() const { return static_cast<int>(atoms.size()); }
  int bond_order_sum(int atom) const;
  // adjacency()[i] = list of (neighbor, bond order)
  std::vector<std::vector<std::pair<int, int>>> adjacency() const;
  int component_count() const;

  // Sorts/normalizes bonds and recomputes component_ids from connectivity.
  void finalize();
};

struct Reaction {
  std::vector<Molecule> reactants;
  Molecule product;
  std::vector<int> rsc_ids;
};

// ---- element tables ----------------------------------------------------

bool element_known(std::string_view symbol);
bool organic_subset(std::string_view symbol);  // atoms writable without brackets
int default_valence(std::string_view symbol);

// Valence-table hydrogen count. Charge adjustment: +charge for the N family
// (N, P), -|charge| otherwise; result floor-clamped at 0. Bracket atoms with
// a spelled H count short-circuit to it.
int implicit_hydrogen_count(const Atom& atom, int bond_order_sum);

// ---- vocabularies -------------------------------------------------------

// RSC dictionary: one identifier per line, line number = id. Line 0 is
// reserved for UNK; every unknown string maps to it.
class RscVocab {
public:
  static constexpr int kUnkId = 0;

  static RscVocab load(const std::filesystem::path& p);
  static RscVocab from_tokens(std::vector<std::string> tokens);  // sorted, UNK prepended

  int id_of(std::string_view token) const;  // unknown -> kUnkId
  const std::string& token(int id) const;
  int size() const { return static_cast<int>(tokens_.size()); }
  void save(const std::filesystem::path& p) const;

private:
  std::vector<std::string> tokens_;
  std::map<std::string, int, std::less<>> index_;
};

// Atom-type dictionary: "element|charge" per line, line number = id.
class AtomVocab {
public:
  static AtomVocab load(const std::filesystem::path& p);
  static AtomVocab from_pairs(std::vector<std::pair<std::string, int>> pairs);

  std::optional<int> find(std::string_view element, int charge) const;
  int size() const { return static_cast<int>(pairs_.size()); }
  const std::pair<std::string, int>& pair(int id) const { return pairs_[id]; }
  void save(const std::filesystem::path& p) const;

private:
  std::vector<std::pair<std::string, int>> pairs_;
  std::map<std::pair<std::string, int>, int> index_;
};

// ---- parse / write ------------------------------------------------------

// Grammar: organic-subset atoms, bracket atoms [Sym Hn? charge?], bonds - = #,
// branches, ring digits 1-9, '.' components. Aromatic atoms, stereo marks and
// isotopes are rejected with UnsupportedFeature. See docs/reaction_grammar.md.
Molecule parse_molecule(std::string_view text);

// "reactants>agents>product". Reactant components become separate molecules;
// the agents segment is split on '.' and looked up in the RSC dictionary.
Reaction parse_reaction(std::string_view text, const RscVocab& rsc_vocab);

std::string write_molecule(const Molecule& m);
std::string write_reaction(const Reaction& r, const RscVocab& rsc_vocab);

}  // namespace reacfuse::chem

#endif
