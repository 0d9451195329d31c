#include "reacfuse/featurize.hpp"

#include <deque>

#include "reacfuse/rng.hpp"

namespace reacfuse::feat {

IntMatrix shortest_path_matrix(const chem::Molecule& m) {
  const int n = m.atom_count();
  IntMatrix d = IntMatrix::filled(n, kCross);
  auto adj = m.adjacency();
  std::vector<int> dist(static_cast<std::size_t>(n));
  for (int src = 0; src < n; ++src) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[static_cast<std::size_t>(src)] = 0;
    std::deque<int> q{src};
    while (!q.empty()) {
      int cur = q.front();
      q.pop_front();
      for (auto [nbr, order] : adj[static_cast<std::size_t>(cur)]) {
        if (dist[static_cast<std::size_t>(nbr)] >= 0) continue;
        dist[static_cast<std::size_t>(nbr)] = dist[static_cast<std::size_t>(cur)] + 1;
        q.push_back(nbr);
      }
    }
    for (int j = 0; j < n; ++j) {
      int dj = dist[static_cast<std::size_t>(j)];
      d.at(src, j) = dj < 0 ? kCross : std::min(dj, kDistanceMax);
    }
  }
  return d;
}

BoolMatrix attention_mask(const std::vector<ReactionToken>& tokens) {
  const int n = static_cast<int>(tokens.size());
  BoolMatrix mask = BoolMatrix::filled(n, true);
  for (int i = 0; i < n; ++i) {
    if (tokens[static_cast<std::size_t>(i)].kind == TokenKind::Rsc) continue;
    for (int j = 0; j < n; ++j)
      if (tokens[static_cast<std::size_t>(j)].kind == TokenKind::Rsc) mask.set(i, j, false);
  }
  return mask;
}

IntMatrix distance_codes(const std::vector<ReactionToken>& tokens,
                         const std::vector<IntMatrix>& per_molecule_paths) {
  const int n = static_cast<int>(tokens.size());
  IntMatrix codes = IntMatrix::filled(n, kCross);
  for (int i = 0; i < n; ++i) {
    const ReactionToken& ti = tokens[static_cast<std::size_t>(i)];
    if (ti.molecule_id < 0) continue;
    for (int j = 0; j < n; ++j) {
      const ReactionToken& tj = tokens[static_cast<std::size_t>(j)];
      if (tj.molecule_id != ti.molecule_id) continue;
      codes.at(i, j) = per_molecule_paths[static_cast<std::size_t>(ti.molecule_id)].at(ti.atom_index, tj.atom_index);
    }
  }
  return codes;
}

namespace {

void push_molecule_tokens(const chem::Molecule& m, int molecule_id, TokenKind kind,
                          const chem::AtomVocab& atom_vocab, std::vector<ReactionToken>& out) {
  auto adj = m.adjacency();
  for (int i = 0; i < m.atom_count(); ++i) {
    const chem::Atom& a = m.atoms[static_cast<std::size_t>(i)];
    auto type_id = atom_vocab.find(a.element, a.formal_charge);
    if (!type_id)
      throw ShapeError("VocabMismatch",
                       "atom type " + a.element + "|" + std::to_string(a.formal_charge) +
                           " not in atom vocabulary");
    int heavy_degree = static_cast<int>(adj[static_cast<std::size_t>(i)].size());
    int neighbors = heavy_degree + chem::implicit_hydrogen_count(a, m.bond_order_sum(i));
    ReactionToken t;
    t.kind = kind;
    t.atom_type_id = *type_id;
    t.neighbor_count = std::min(neighbors, kNeighborCap);
    t.molecule_id = molecule_id;
    t.component_id = m.component_ids[static_cast<std::size_t>(i)];
    t.atom_index = i;
    out.push_back(t);
  }
}

}  // namespace

TokenizedReaction tokenize_reaction(const chem::Reaction& r, const chem::AtomVocab& atom_vocab,
                                    const chem::RscVocab& rsc_vocab) {
  TokenizedReaction tr;
  int total = 0;
  for (const auto& m : r.reactants) total += m.atom_count();
  total += r.product.atom_count() + static_cast<int>(r.rsc_ids.size());
  if (total > kMaxTokens)
    throw DataError("SequenceTooLong",
                    std::to_string(total) + " tokens exceeds cap " + std::to_string(kMaxTokens));

  std::vector<IntMatrix> paths;
  for (std::size_t i = 0; i < r.reactants.size(); ++i) {
    push_molecule_tokens(r.reactants[i], static_cast<int>(i), TokenKind::ReactantAtom, atom_vocab,
                         tr.tokens);
    paths.push_back(shortest_path_matrix(r.reactants[i]));
  }
  push_molecule_tokens(r.product, static_cast<int>(r.reactants.size()), TokenKind::ProductAtom,
                       atom_vocab, tr.tokens);
  paths.push_back(shortest_path_matrix(r.product));

  for (int id : r.rsc_ids) {
    if (id < 0 || id >= rsc_vocab.size())
      throw ShapeError("VocabMismatch", "RSC id out of range: " + std::to_string(id));
    ReactionToken t;
    t.kind = TokenKind::Rsc;
    t.rsc_id = id;
    tr.tokens.push_back(t);
  }

  tr.distance_codes = distance_codes(tr.tokens, paths);
  tr.mask = attention_mask(tr.tokens);
  return tr;
}

MlmCorruption mask_for_mlm(const TokenizedReaction& tr, double mask_rate, std::uint64_t rng_seed,
                           int atom_vocab_size, int rsc_vocab_size) {
  if (!(mask_rate > 0.0 && mask_rate < 1.0))
    throw ConfigError("BadValue", "mask_rate must be in (0,1)");
  Rng rng(rng_seed);
  MlmCorruption out;
  out.tokens = tr.tokens;
  const int atom_mask_id = atom_vocab_size;
  const int rsc_mask_id = rsc_vocab_size;
  for (std::size_t i = 0; i < out.tokens.size(); ++i) {
    if (!rng.bernoulli(mask_rate)) continue;
    ReactionToken& t = out.tokens[i];
    if (t.kind == TokenKind::Rsc) {
      out.targets.push_back({static_cast<int>(i), atom_vocab_size + t.rsc_id});
      t.rsc_id = rsc_mask_id;
    } else {
      out.targets.push_back({static_cast<int>(i), t.atom_type_id});
      t.atom_type_id = atom_mask_id;
    }
  }
  return out;
}

}  // namespace reacfuse::feat
