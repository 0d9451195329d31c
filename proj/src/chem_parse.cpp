#include <algorithm>
#include <array>
#include <cctype>
#include <numeric>

#include "reacfuse/chem.hpp"

namespace reacfuse::chem {

namespace {

struct ElementInfo {
  const char* symbol;
  int valence;
  bool organic;
};

// Default valences; metals carry no implicit hydrogens.
constexpr std::array<ElementInfo, 22> kElements = {{
    {"H", 1, false},  {"B", 3, true},   {"C", 4, true},   {"N", 3, true},
    {"O", 2, true},   {"F", 1, true},   {"Na", 1, false}, {"Mg", 2, false},
    {"Si", 4, false}, {"P", 3, true},   {"S", 2, true},   {"Cl", 1, true},
    {"K", 1, false},  {"Ca", 2, false}, {"Fe", 0, false}, {"Ni", 0, false},
    {"Cu", 0, false}, {"Zn", 2, false}, {"Br", 1, true},  {"Pd", 0, false},
    {"Sn", 4, false}, {"I", 1, true},
}};

const ElementInfo* find_element(std::string_view sym) {
  for (const auto& e : kElements)
    if (sym == e.symbol) return &e;
  return nullptr;
}

struct OpenRing {
  int atom;
  int order;        // 0 = unspecified
  std::size_t offset;
};

class MoleculeParser {
public:
  explicit MoleculeParser(std::string_view text, std::size_t base_offset)
      : s_(text), base_(base_offset) {}

  Molecule run() {
    if (s_.empty()) fail(ParseErrorKind::EmptyInput, 0, "empty molecule text");
    while (i_ < s_.size()) step();
    if (!open_rings_.empty())
      fail(ParseErrorKind::UnclosedRingBond, first_open_ring_offset(), "unclosed ring bond");
    if (!branch_stack_.empty())
      fail(ParseErrorKind::UnbalancedParenthesis, branch_stack_.back().offset, "unclosed '('");
    if (pending_order_ != 0)
      fail(ParseErrorKind::DanglingBond, pending_offset_, "bond with no following atom");
    if (prev_ < 0)
      fail(ParseErrorKind::BadCharacter, i_ ? i_ - 1 : 0, "component with no atoms");
    mol_.finalize();
    return std::move(mol_);
  }

private:
  void step() {
    char c = s_[i_];
    switch (c) {
      case '-': case '=': case '#':
        if (pending_order_ != 0) fail(ParseErrorKind::DanglingBond, i_, "two bond symbols in a row");
        if (prev_ < 0) fail(ParseErrorKind::DanglingBond, i_, "bond with no preceding atom");
        pending_order_ = (c == '-') ? 1 : (c == '=') ? 2 : 3;
        pending_offset_ = i_;
        ++i_;
        return;
      case '(':
        if (prev_ < 0) fail(ParseErrorKind::UnbalancedParenthesis, i_, "branch with no preceding atom");
        if (pending_order_ != 0) fail(ParseErrorKind::DanglingBond, pending_offset_, "bond before '('");
        branch_stack_.push_back({prev_, mol_.atom_count(), i_});
        ++i_;
        return;
      case ')': {
        if (branch_stack_.empty()) fail(ParseErrorKind::UnbalancedParenthesis, i_, "unmatched ')'");
        if (pending_order_ != 0) fail(ParseErrorKind::DanglingBond, pending_offset_, "bond before ')'");
        const Branch& b = branch_stack_.back();
        if (mol_.atom_count() == b.atoms_at_open)
          fail(ParseErrorKind::UnbalancedParenthesis, b.offset, "empty branch");
        prev_ = b.return_atom;
        branch_stack_.pop_back();
        ++i_;
        return;
      }
      case '.':
        if (!branch_stack_.empty()) fail(ParseErrorKind::BadCharacter, i_, "'.' inside a branch");
        if (pending_order_ != 0) fail(ParseErrorKind::DanglingBond, pending_offset_, "bond before '.'");
        if (prev_ < 0) fail(ParseErrorKind::BadCharacter, i_, "empty component before '.'");
        if (!open_rings_.empty())
          fail(ParseErrorKind::UnclosedRingBond, first_open_ring_offset(), "ring bond crosses '.'");
        prev_ = -1;
        ++i_;
        if (i_ == s_.size()) fail(ParseErrorKind::BadCharacter, i_ - 1, "trailing '.'");
        return;
      case '[': {
        std::size_t at = i_;
        Atom atom = parse_bracket();
        add_atom(std::move(atom), at);
        return;
      }
      case '%':
        fail(ParseErrorKind::UnsupportedFeature, i_, "two-digit ring bonds not supported");
        return;
      case '/': case '\\':
        fail(ParseErrorKind::UnsupportedFeature, i_, "stereo bond marks not supported");
        return;
      default:
        break;
    }
    if (c >= '1' && c <= '9') {
      ring_digit(c - '0');
      ++i_;
      return;
    }
    if (std::islower(static_cast<unsigned char>(c)))
      fail(ParseErrorKind::UnsupportedFeature, i_, "aromatic atoms not supported");
    if (std::isupper(static_cast<unsigned char>(c))) {
      std::size_t at = i_;
      add_atom(parse_organic_atom(), at);
      return;
    }
    fail(ParseErrorKind::BadCharacter, i_, "unexpected character");
  }

  Atom parse_organic_atom() {
    // two-letter organic symbols first (Cl, Br)
    if (i_ + 1 < s_.size()) {
      std::string two{s_.substr(i_, 2)};
      const ElementInfo* e2 = find_element(two);
      if (e2 && e2->organic) {
        i_ += 2;
        return Atom{two, 0, std::nullopt};
      }
    }
    std::string one{s_.substr(i_, 1)};
    const ElementInfo* e1 = find_element(one);
    if (!e1 || !e1->organic)
      fail(ParseErrorKind::UnknownElement, i_, "'" + one + "' needs bracket notation or is unknown");
    ++i_;
    return Atom{one, 0, std::nullopt};
  }

  Atom parse_bracket() {
    std::size_t open = i_;
    ++i_;  // '['
    if (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_])))
      fail(ParseErrorKind::UnsupportedFeature, i_, "isotopes not supported");
    if (i_ >= s_.size() || !std::isupper(static_cast<unsigned char>(s_[i_])))
      fail(ParseErrorKind::MalformedBracket, i_ < s_.size() ? i_ : open, "expected element symbol");

    std::size_t elem_at = i_;
    std::string sym{s_.substr(i_, 1)};
    ++i_;
    if (i_ < s_.size() && std::islower(static_cast<unsigned char>(s_[i_]))) {
      std::string two = sym + s_[i_];
      if (find_element(two)) {
        sym = two;
        ++i_;
      }
    }
    if (!find_element(sym))
      fail(ParseErrorKind::UnknownElement, elem_at, "unknown element '" + sym + "'");

    Atom atom{sym, 0, std::nullopt};

    if (i_ < s_.size() && s_[i_] == '@')
      fail(ParseErrorKind::UnsupportedFeature, i_, "stereo centres not supported");

    if (i_ < s_.size() && s_[i_] == 'H') {
      ++i_;
      int h = 1;
      if (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) {
        h = s_[i_] - '0';
        ++i_;
      }
      atom.explicit_h = h;
    }

    if (i_ < s_.size() && (s_[i_] == '+' || s_[i_] == '-')) {
      int sign = s_[i_] == '+' ? 1 : -1;
      std::size_t sign_at = i_;
      ++i_;
      int mag = 1;
      if (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) {
        mag = s_[i_] - '0';
        ++i_;
      }
      if (mag == 0 || mag > 4)
        fail(ParseErrorKind::MalformedBracket, sign_at, "charge magnitude must be 1..4");
      atom.formal_charge = sign * mag;
    }

    if (i_ >= s_.size() || s_[i_] != ']')
      fail(ParseErrorKind::MalformedBracket, i_ < s_.size() ? i_ : open, "expected ']'");
    ++i_;
    return atom;
  }

  void add_atom(Atom atom, std::size_t at) {
    int idx = mol_.atom_count();
    mol_.atoms.push_back(std::move(atom));
    if (prev_ >= 0) {
      int order = pending_order_ == 0 ? 1 : pending_order_;
      push_bond(prev_, idx, order, at);
    }
    pending_order_ = 0;
    prev_ = idx;
  }

  void ring_digit(int digit) {
    if (prev_ < 0) fail(ParseErrorKind::BadCharacter, i_, "ring digit with no atom");
    auto it = std::find_if(open_rings_.begin(), open_rings_.end(),
                           [&](const auto& kv) { return kv.first == digit; });
    if (it == open_rings_.end()) {
      open_rings_.push_back({digit, OpenRing{prev_, pending_order_, i_}});
      pending_order_ = 0;
      return;
    }
    OpenRing open = it->second;
    open_rings_.erase(it);
    int order;
    if (open.order != 0 && pending_order_ != 0 && open.order != pending_order_)
      fail(ParseErrorKind::DuplicateBond, i_, "ring bond order conflict");
    order = open.order != 0 ? open.order : (pending_order_ != 0 ? pending_order_ : 1);
    pending_order_ = 0;
    if (open.atom == prev_)
      fail(ParseErrorKind::DuplicateBond, i_, "ring bond closes onto its own atom");
    push_bond(open.atom, prev_, order, i_);
  }

  void push_bond(int a, int b, int order, std::size_t at) {
    if (a > b) std::swap(a, b);
    for (const Bond& bd : mol_.bonds)
      if (bd.a == a && bd.b == b)
        fail(ParseErrorKind::DuplicateBond, at, "duplicate bond between atoms");
    mol_.bonds.push_back({a, b, order});
  }

  std::size_t first_open_ring_offset() const {
    std::size_t off = s_.size();
    for (const auto& [d, r] : open_rings_) off = std::min(off, r.offset);
    return off;
  }

  [[noreturn]] void fail(ParseErrorKind kind, std::size_t at, const std::string& msg) const {
    throw ParseError(kind, base_ + at, msg);
  }

  struct Branch {
    int return_atom;
    int atoms_at_open;
    std::size_t offset;
  };

  std::string_view s_;
  std::size_t base_;
  std::size_t i_ = 0;
  Molecule mol_;
  int prev_ = -1;
  int pending_order_ = 0;  // 0 = none
  std::size_t pending_offset_ = 0;
  std::vector<Branch> branch_stack_;
  std::vector<std::pair<int, OpenRing>> open_rings_;
};

std::vector<std::pair<std::string_view, std::size_t>> split_with_offsets(std::string_view s,
                                                                         char sep,
                                                                         std::size_t base) {
  std::vector<std::pair<std::string_view, std::size_t>> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start), base + start);
      start = i + 1;
    }
  }
  return out;
}

}  // namespace

bool element_known(std::string_view symbol) { return find_element(symbol) != nullptr; }

bool organic_subset(std::string_view symbol) {
  const ElementInfo* e = find_element(symbol);
  return e && e->organic;
}

int default_valence(std::string_view symbol) {
  const ElementInfo* e = find_element(symbol);
  if (!e) throw DataError("UnknownElement", std::string(symbol));
  return e->valence;
}

int implicit_hydrogen_count(const Atom& atom, int bond_order_sum) {
  if (atom.explicit_h) return *atom.explicit_h;
  int dv = default_valence(atom.element);
  bool n_family = atom.element == "N" || atom.element == "P";
  int adjust = n_family ? atom.formal_charge : -std::abs(atom.formal_charge);
  return std::max(0, dv + adjust - bond_order_sum);
}

int Molecule::bond_order_sum(int atom) const {
  int sum = 0;
  for (const Bond& b : bonds)
    if (b.a == atom || b.b == atom) sum += b.order;
  return sum;
}

std::vector<std::vector<std::pair<int, int>>> Molecule::adjacency() const {
  std::vector<std::vector<std::pair<int, int>>> adj(atoms.size());
  for (const Bond& b : bonds) {
    adj[static_cast<std::size_t>(b.a)].emplace_back(b.b, b.order);
    adj[static_cast<std::size_t>(b.b)].emplace_back(b.a, b.order);
  }
  return adj;
}

int Molecule::component_count() const {
  int m = -1;
  for (int c : component_ids) m = std::max(m, c);
  return m + 1;
}

void Molecule::finalize() {
  for (Bond& b : bonds)
    if (b.a > b.b) std::swap(b.a, b.b);
  std::sort(bonds.begin(), bonds.end());

  // union-find over bonds, then relabel components in first-appearance order
  std::vector<int> parent(atoms.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  for (const Bond& b : bonds) {
    int ra = find(b.a), rb = find(b.b);
    if (ra != rb) parent[static_cast<std::size_t>(ra)] = rb;
  }
  component_ids.assign(atoms.size(), -1);
  std::map<int, int> label;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    int root = find(static_cast<int>(i));
    auto [it, fresh] = label.try_emplace(root, static_cast<int>(label.size()));
    component_ids[i] = it->second;
  }
}

Molecule parse_molecule(std::string_view text) {
  return MoleculeParser(text, 0).run();
}

Reaction parse_reaction(std::string_view text, const RscVocab& rsc_vocab) {
  if (text.empty()) throw ParseError(ParseErrorKind::EmptyInput, 0, "empty reaction text");
  auto segments = split_with_offsets(text, '>', 0);
  if (segments.size() != 3)
    throw ParseError(ParseErrorKind::MissingSegment, segments.size() < 3 ? text.size() : segments[3].second - 1,
                     "expected reactants>agents>product");

  auto [reactant_seg, reactant_off] = segments[0];
  auto [agent_seg, agent_off] = segments[1];
  auto [product_seg, product_off] = segments[2];

  if (reactant_seg.empty())
    throw ParseError(ParseErrorKind::MissingSegment, reactant_off, "no reactants");
  if (product_seg.empty())
    throw ParseError(ParseErrorKind::MissingSegment, product_off, "no product");

  Reaction rxn;
  for (auto [part, off] : split_with_offsets(reactant_seg, '.', reactant_off)) {
    if (part.empty()) throw ParseError(ParseErrorKind::BadCharacter, off, "empty reactant");
    rxn.reactants.push_back(MoleculeParser(part, off).run());
  }

  auto product_parts = split_with_offsets(product_seg, '.', product_off);
  if (product_parts.size() != 1)
    throw ParseError(ParseErrorKind::MultipleProducts, product_parts[1].second,
                     "product segment must contain exactly one component");
  rxn.product = MoleculeParser(product_parts[0].first, product_parts[0].second).run();
  if (rxn.product.component_count() != 1)
    throw ParseError(ParseErrorKind::MultipleProducts, product_off,
                     "product segment must contain exactly one component");

  if (!agent_seg.empty()) {
    for (auto [part, off] : split_with_offsets(agent_seg, '.', agent_off)) {
      if (part.empty()) throw ParseError(ParseErrorKind::BadCharacter, off, "empty agent");
      rxn.rsc_ids.push_back(rsc_vocab.id_of(part));
    }
  }
  return rxn;
}

}  // namespace reacfuse::chem
