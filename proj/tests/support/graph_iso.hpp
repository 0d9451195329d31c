#ifndef REACFUSE_TESTS_GRAPH_ISO_HPP
#define REACFUSE_TESTS_GRAPH_ISO_HPP

// Exact molecular-graph isomorphism oracle (backtracking over attribute- and
// degree-compatible candidates). Intended for small molecules; the round-trip
// suites use it to compare a reparsed molecule against the original.

#include <algorithm>
#include <functional>
#include <map>
#include <vector>

#include "reacfuse/chem.hpp"

namespace graphiso {

struct AtomKey {
  std::string element;
  int charge;
  int hydrogens;
  int degree;
  std::vector<int> bond_orders;  // sorted

  bool operator==(const AtomKey&) const = default;
};

inline std::vector<AtomKey> keys(const reacfuse::chem::Molecule& m) {
  auto adj = m.adjacency();
  std::vector<AtomKey> out;
  for (int i = 0; i < m.atom_count(); ++i) {
    AtomKey k;
    const auto& a = m.atoms[static_cast<std::size_t>(i)];
    k.element = a.element;
    k.charge = a.formal_charge;
    k.hydrogens = reacfuse::chem::implicit_hydrogen_count(a, m.bond_order_sum(i));
    k.degree = static_cast<int>(adj[static_cast<std::size_t>(i)].size());
    for (auto [nbr, order] : adj[static_cast<std::size_t>(i)]) k.bond_orders.push_back(order);
    std::sort(k.bond_orders.begin(), k.bond_orders.end());
    out.push_back(std::move(k));
  }
  return out;
}

inline bool isomorphic(const reacfuse::chem::Molecule& a, const reacfuse::chem::Molecule& b) {
  using reacfuse::chem::Bond;
  if (a.atom_count() != b.atom_count() || a.bonds.size() != b.bonds.size()) return false;
  const int n = a.atom_count();
  auto ka = keys(a), kb = keys(b);

  std::map<std::pair<int, int>, int> b_order;
  for (const Bond& bd : b.bonds) b_order[{bd.a, bd.b}] = bd.order;
  auto order_in_b = [&](int x, int y) {
    auto it = b_order.find(std::minmax(x, y));
    return it == b_order.end() ? 0 : it->second;
  };
  auto adj_a = a.adjacency();

  std::vector<int> map_ab(static_cast<std::size_t>(n), -1);
  std::vector<bool> used(static_cast<std::size_t>(n), false);

  // order atoms by candidate-set rarity for faster backtracking
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::vector<int> cand_count(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (ka[static_cast<std::size_t>(i)] == kb[static_cast<std::size_t>(j)])
        ++cand_count[static_cast<std::size_t>(i)];
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    return cand_count[static_cast<std::size_t>(x)] < cand_count[static_cast<std::size_t>(y)];
  });

  std::function<bool(std::size_t)> place = [&](std::size_t pos) -> bool {
    if (pos == order.size()) return true;
    int i = order[pos];
    for (int j = 0; j < n; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      if (!(ka[static_cast<std::size_t>(i)] == kb[static_cast<std::size_t>(j)])) continue;
      bool ok = true;
      for (auto [nbr, ord] : adj_a[static_cast<std::size_t>(i)]) {
        int mapped = map_ab[static_cast<std::size_t>(nbr)];
        if (mapped >= 0 && order_in_b(j, mapped) != ord) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      map_ab[static_cast<std::size_t>(i)] = j;
      used[static_cast<std::size_t>(j)] = true;
      if (place(pos + 1)) return true;
      map_ab[static_cast<std::size_t>(i)] = -1;
      used[static_cast<std::size_t>(j)] = false;
    }
    return false;
  };
  return place(0);
}

inline bool isomorphic(const reacfuse::chem::Reaction& a, const reacfuse::chem::Reaction& b) {
  if (a.reactants.size() != b.reactants.size() || a.rsc_ids != b.rsc_ids) return false;
  for (std::size_t i = 0; i < a.reactants.size(); ++i)
    if (!isomorphic(a.reactants[i], b.reactants[i])) return false;
  return isomorphic(a.product, b.product);
}

}  // namespace graphiso

#endif
