#ifndef REACFUSE_FEATURIZE_HPP
#define REACFUSE_FEATURIZE_HPP

#include <cstdint>
#include <vector>

#include "reacfuse/chem.hpp"

namespace reacfuse::feat {

// Distances are clipped to kDistanceMax; pairs with no graph relation
// (different molecules/components, or any RSC token) get kCross, whose
// attention-bias contribution is structurally zero.
inline constexpr int kDistanceMax = 10;
inline constexpr int kCross = -1;
inline constexpr int kNeighborCap = 8;
inline constexpr int kMaxTokens = 256;

enum class TokenKind { ReactantAtom, ProductAtom, Rsc };

struct ReactionToken {
  TokenKind kind = TokenKind::ReactantAtom;
  int atom_type_id = -1;    // atom tokens
  int neighbor_count = -1;  // atom tokens: heavy degree + implicit H, capped
  int rsc_id = -1;          // RSC tokens
  int molecule_id = -1;     // -1 for RSC tokens
  int component_id = -1;    // within-molecule component, -1 for RSC tokens
  int atom_index = -1;      // index within its molecule, -1 for RSC tokens
};

struct IntMatrix {
  int n = 0;
  std::vector<int> v;  // row-major n*n

  static IntMatrix filled(int n, int value) { return {n, std::vector<int>(static_cast<std::size_t>(n) * n, value)}; }
  int& at(int i, int j) { return v[static_cast<std::size_t>(i) * n + j]; }
  int at(int i, int j) const { return v[static_cast<std::size_t>(i) * n + j]; }
};

struct BoolMatrix {
  int n = 0;
  std::vector<std::uint8_t> v;

  static BoolMatrix filled(int n, bool value) {
    return {n, std::vector<std::uint8_t>(static_cast<std::size_t>(n) * n, value ? 1 : 0)};
  }
  void set(int i, int j, bool x) { v[static_cast<std::size_t>(i) * n + j] = x ? 1 : 0; }
  bool at(int i, int j) const { return v[static_cast<std::size_t>(i) * n + j] != 0; }
};

struct TokenizedReaction {
  std::vector<ReactionToken> tokens;  // reactant atoms, product atoms, then RSCs
  IntMatrix distance_codes;
  BoolMatrix mask;  // mask.at(i,j): token i may attend to token j

  int size() const { return static_cast<int>(tokens.size()); }
};

// BFS all-pairs distances within one molecule, clipped to kDistanceMax;
// kCross for atoms in different components.
IntMatrix shortest_path_matrix(const chem::Molecule& m);

// Atom->atom always allowed (reactant/product attention enabled), atom->RSC
// masked out, RSC->anything allowed.
BoolMatrix attention_mask(const std::vector<ReactionToken>& tokens);

IntMatrix distance_codes(const std::vector<ReactionToken>& tokens,
                         const std::vector<IntMatrix>& per_molecule_paths);

TokenizedReaction tokenize_reaction(const chem::Reaction& r, const chem::AtomVocab& atom_vocab,
                                    const chem::RscVocab& rsc_vocab);

// MLM corruption: targets live in a joint id space, atom types first, RSC ids
// offset by the atom vocabulary size.
struct MlmTarget {
  int position;
  int joint_id;
};

struct MlmCorruption {
  std::vector<ReactionToken> tokens;
  std::vector<MlmTarget> targets;
};

MlmCorruption mask_for_mlm(const TokenizedReaction& tr, double mask_rate, std::uint64_t rng_seed,
                           int atom_vocab_size, int rsc_vocab_size);

inline int mlm_joint_vocab(int atom_vocab_size, int rsc_vocab_size) {
  return atom_vocab_size + rsc_vocab_size;
}

}  // namespace reacfuse::feat

#endif
