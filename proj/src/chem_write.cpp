#include <algorithm>
#include <map>
#include <set>

#include "reacfuse/chem.hpp"

namespace reacfuse::chem {

namespace {

using Edge = std::pair<int, int>;

bool needs_bracket(const Atom& a) {
  return a.formal_charge != 0 || a.explicit_h.has_value() || !organic_subset(a.element);
}

void append_atom(std::string& out, const Atom& a) {
  if (!needs_bracket(a)) {
    out += a.element;
    return;
  }
  out += '[';
  out += a.element;
  if (a.explicit_h) {
    // H count is always spelled (H0 included): a bare bracket atom means
    // "derive hydrogens from the valence table", which is a different thing.
    out += 'H';
    if (*a.explicit_h != 1) out += static_cast<char>('0' + *a.explicit_h);
  }
  if (a.formal_charge != 0) {
    out += a.formal_charge > 0 ? '+' : '-';
    int mag = std::abs(a.formal_charge);
    if (mag > 1) out += static_cast<char>('0' + mag);
  }
  out += ']';
}

void append_bond(std::string& out, int order) {
  if (order == 2) out += '=';
  else if (order == 3) out += '#';
}

// Deterministic writer: DFS from the lowest atom index of each component,
// neighbors in ascending index order, back edges become ring digits.
class Writer {
public:
  explicit Writer(const Molecule& m) : mol_(m), adj_(m.adjacency()) {
    for (auto& nbrs : adj_) std::sort(nbrs.begin(), nbrs.end());
    find_ring_edges();
  }

  std::string run() {
    std::string out;
    std::vector<bool> emitted(static_cast<std::size_t>(mol_.atom_count()), false);
    bool first = true;
    for (int start = 0; start < mol_.atom_count(); ++start) {
      if (emitted[static_cast<std::size_t>(start)]) continue;
      if (!first) out += '.';
      first = false;
      emit(start, -1, out, emitted);
    }
    return out;
  }

private:
  void find_ring_edges() {
    std::vector<bool> seen(static_cast<std::size_t>(mol_.atom_count()), false);
    struct Frame { int atom; int parent; std::size_t next = 0; };
    for (int root = 0; root < mol_.atom_count(); ++root) {
      if (seen[static_cast<std::size_t>(root)]) continue;
      seen[static_cast<std::size_t>(root)] = true;
      std::vector<Frame> stack{{root, -1, 0}};
      while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next >= adj_[static_cast<std::size_t>(f.atom)].size()) {
          stack.pop_back();
          continue;
        }
        auto [nbr, order] = adj_[static_cast<std::size_t>(f.atom)][f.next++];
        if (nbr == f.parent) continue;
        if (seen[static_cast<std::size_t>(nbr)]) {
          ring_edges_.insert(std::minmax(f.atom, nbr));
        } else {
          seen[static_cast<std::size_t>(nbr)] = true;
          stack.push_back({nbr, f.atom, 0});
        }
      }
    }
  }

  void emit(int atom, int parent, std::string& out, std::vector<bool>& emitted) {
    emitted[static_cast<std::size_t>(atom)] = true;
    append_atom(out, mol_.atoms[static_cast<std::size_t>(atom)]);
    emit_ring_digits(atom, out);

    std::vector<std::pair<int, int>> children;
    for (auto [nbr, order] : adj_[static_cast<std::size_t>(atom)]) {
      if (nbr == parent) continue;
      if (ring_edges_.count(std::minmax(atom, nbr))) continue;
      children.push_back({nbr, order});
    }
    for (std::size_t i = 0; i < children.size(); ++i) {
      auto [child, order] = children[i];
      bool last = (i + 1 == children.size());
      if (!last) out += '(';
      append_bond(out, order);
      emit(child, atom, out, emitted);
      if (!last) out += ')';
    }
  }

  void emit_ring_digits(int atom, std::string& out) {
    // close pending digits first so they become reusable
    std::vector<int> to_close;
    for (const auto& [edge, digit] : open_digits_)
      if (edge.first == atom || edge.second == atom) to_close.push_back(digit);
    std::sort(to_close.begin(), to_close.end());
    for (int digit : to_close) {
      auto it = std::find_if(open_digits_.begin(), open_digits_.end(),
                             [&](const auto& kv) { return kv.second == digit; });
      append_bond(out, edge_order(it->first));
      out += static_cast<char>('0' + digit);
      used_digits_.erase(digit);
      open_digits_.erase(it);
    }
    std::vector<Edge> to_open;
    for (const auto& e : ring_edges_)
      if ((e.first == atom || e.second == atom) && !opened_.count(e)) to_open.push_back(e);
    for (const auto& e : to_open) {
      int digit = 1;
      while (used_digits_.count(digit)) ++digit;
      if (digit > 9) throw DataError("RingDigitOverflow", "more than 9 concurrent ring bonds");
      used_digits_.insert(digit);
      opened_.insert(e);
      open_digits_.push_back({e, digit});
      out += static_cast<char>('0' + digit);
    }
  }

  int edge_order(Edge e) const {
    for (const Bond& b : mol_.bonds)
      if (b.a == e.first && b.b == e.second) return b.order;
    return 1;
  }

  const Molecule& mol_;
  std::vector<std::vector<std::pair<int, int>>> adj_;
  std::set<Edge> ring_edges_;
  std::set<Edge> opened_;
  std::vector<std::pair<Edge, int>> open_digits_;
  std::set<int> used_digits_;
};

}  // namespace

std::string write_molecule(const Molecule& m) {
  if (m.atoms.empty()) throw DataError("EmptyMolecule", "cannot write a molecule with no atoms");
  return Writer(m).run();
}

std::string write_reaction(const Reaction& r, const RscVocab& rsc_vocab) {
  std::string out;
  for (std::size_t i = 0; i < r.reactants.size(); ++i) {
    if (i) out += '.';
    out += write_molecule(r.reactants[i]);
  }
  out += '>';
  for (std::size_t i = 0; i < r.rsc_ids.size(); ++i) {
    if (i) out += '.';
    out += rsc_vocab.token(r.rsc_ids[i]);
  }
  out += '>';
  out += write_molecule(r.product);
  return out;
}

}  // namespace reacfuse::chem
