#ifndef REACFUSE_TESTS_REF_SMILES_HPP
#define REACFUSE_TESTS_REF_SMILES_HPP

// Independent reference parser used as the oracle for chem::parse_molecule.
// Deliberately structured differently from the production parser: a separate
// lexing phase followed by a small stack interpreter. Only needs to be right
// on valid inputs.

#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace refsmiles {

struct RefAtom {
  std::string element;
  int charge = 0;
  std::optional<int> hcount;
};

struct RefMol {
  std::vector<RefAtom> atoms;
  std::set<std::tuple<int, int, int>> bonds;  // (min, max, order)
};

namespace detail {

struct Token {
  enum Kind { Atom, Bond, Open, Close, Ring, Dot } kind;
  RefAtom atom;
  int order = 0;
  int digit = 0;
};

inline std::vector<Token> lex(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto org2 = [&](char a, char b) {
    return i + 1 < s.size() && s[i] == a && s[i + 1] == b;
  };
  while (i < s.size()) {
    char c = s[i];
    if (c == '-' || c == '=' || c == '#') {
      out.push_back({Token::Bond, {}, c == '-' ? 1 : c == '=' ? 2 : 3, 0});
      ++i;
    } else if (c == '(') {
      out.push_back({Token::Open, {}, 0, 0});
      ++i;
    } else if (c == ')') {
      out.push_back({Token::Close, {}, 0, 0});
      ++i;
    } else if (c == '.') {
      out.push_back({Token::Dot, {}, 0, 0});
      ++i;
    } else if (c >= '1' && c <= '9') {
      out.push_back({Token::Ring, {}, 0, c - '0'});
      ++i;
    } else if (c == '[') {
      std::size_t close = s.find(']', i);
      if (close == std::string::npos) throw std::runtime_error("ref: no ]");
      std::string body = s.substr(i + 1, close - i - 1);
      RefAtom a;
      std::size_t j = 0;
      a.element += body[j++];
      while (j < body.size() && std::islower(static_cast<unsigned char>(body[j])))
        a.element += body[j++];
      if (j < body.size() && body[j] == 'H') {
        ++j;
        if (j < body.size() && std::isdigit(static_cast<unsigned char>(body[j])))
          a.hcount = body[j++] - '0';
        else
          a.hcount = 1;
      }
      if (j < body.size() && (body[j] == '+' || body[j] == '-')) {
        int sign = body[j] == '+' ? 1 : -1;
        ++j;
        int mag = 1;
        if (j < body.size() && std::isdigit(static_cast<unsigned char>(body[j]))) mag = body[j++] - '0';
        a.charge = sign * mag;
      }
      if (j != body.size()) throw std::runtime_error("ref: bracket leftovers");
      out.push_back({Token::Atom, a, 0, 0});
      i = close + 1;
    } else if (org2('C', 'l') || org2('B', 'r')) {
      out.push_back({Token::Atom, {s.substr(i, 2), 0, std::nullopt}, 0, 0});
      i += 2;
    } else if (std::string("BCNOPSFI").find(c) != std::string::npos) {
      out.push_back({Token::Atom, {std::string(1, c), 0, std::nullopt}, 0, 0});
      ++i;
    } else {
      throw std::runtime_error(std::string("ref: bad char ") + c);
    }
  }
  return out;
}

}  // namespace detail

inline RefMol parse(const std::string& s) {
  RefMol mol;
  std::vector<int> stack;
  int prev = -1;
  int bond = 0;
  std::map<int, std::pair<int, int>> rings;  // digit -> (atom, order)
  for (const auto& t : detail::lex(s)) {
    switch (t.kind) {
      case detail::Token::Atom: {
        int idx = static_cast<int>(mol.atoms.size());
        mol.atoms.push_back(t.atom);
        if (prev >= 0)
          mol.bonds.insert({std::min(prev, idx), std::max(prev, idx), bond ? bond : 1});
        bond = 0;
        prev = idx;
        break;
      }
      case detail::Token::Bond:
        bond = t.order;
        break;
      case detail::Token::Open:
        stack.push_back(prev);
        break;
      case detail::Token::Close:
        prev = stack.back();
        stack.pop_back();
        break;
      case detail::Token::Dot:
        prev = -1;
        bond = 0;
        break;
      case detail::Token::Ring: {
        auto it = rings.find(t.digit);
        if (it == rings.end()) {
          rings[t.digit] = {prev, bond};
          bond = 0;
        } else {
          auto [other, open_order] = it->second;
          rings.erase(it);
          int order = open_order ? open_order : (bond ? bond : 1);
          bond = 0;
          mol.bonds.insert({std::min(other, prev), std::max(other, prev), order});
        }
        break;
      }
    }
  }
  if (!rings.empty() || !stack.empty()) throw std::runtime_error("ref: dangling structure");
  return mol;
}

// Reference hydrogen-count rule (mirrors the documented valence table).
inline int ref_hydrogens(const RefAtom& a, int bond_order_sum) {
  if (a.hcount) return *a.hcount;
  static const std::map<std::string, int> val = {
      {"H", 1},  {"B", 3},  {"C", 4},  {"N", 3},  {"O", 2},  {"F", 1},  {"Na", 1},
      {"Mg", 2}, {"Si", 4}, {"P", 3},  {"S", 2},  {"Cl", 1}, {"K", 1},  {"Ca", 2},
      {"Fe", 0}, {"Ni", 0}, {"Cu", 0}, {"Zn", 2}, {"Br", 1}, {"Pd", 0}, {"Sn", 4},
      {"I", 1}};
  int dv = val.at(a.element);
  int adj = (a.element == "N" || a.element == "P") ? a.charge : -std::abs(a.charge);
  int h = dv + adj - bond_order_sum;
  return h > 0 ? h : 0;
}

}  // namespace refsmiles

#endif
