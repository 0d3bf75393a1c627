//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "stgg/smiles.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <string>

#include "stgg/elements.hpp"

namespace stgg {

std::string_view to_string(SmilesErrorKind kind) noexcept {
  switch (kind) {
  case SmilesErrorKind::kUnsupportedFeature:
    return "unsupported-feature";
  case SmilesErrorKind::kSyntax:
    return "syntax";
  case SmilesErrorKind::kRingMismatch:
    return "ring-mismatch";
  case SmilesErrorKind::kValenceOverflow:
    return "valence-overflow";
  }
  return "unknown";
}

SmilesError::SmilesError(SmilesErrorKind kind, std::size_t position,
                         const std::string &detail)
    : DataError(std::string(to_string(kind)) + " at position " +
                std::to_string(position) + ": " + detail),
      kind_(kind), position_(position) { }

namespace {

struct OrganicValence {
  std::string_view symbol;
  std::array<int, 3> valences;  // ascending, 0-padded
};

constexpr std::array<OrganicValence, 10> kOrganic = { {
    { "B", { 3, 0, 0 } },
    { "C", { 4, 0, 0 } },
    { "N", { 3, 5, 0 } },
    { "O", { 2, 0, 0 } },
    { "P", { 3, 5, 0 } },
    { "S", { 2, 4, 6 } },
    { "F", { 1, 0, 0 } },
    { "Cl", { 1, 0, 0 } },
    { "Br", { 1, 0, 0 } },
    { "I", { 1, 0, 0 } },
} };

const OrganicValence *find_organic(std::string_view sym) {
  for (const auto &o: kOrganic)
    if (o.symbol == sym)
      return &o;
  return nullptr;
}

struct RingOpening {
  int atom;
  int order;  // 0 = unspecified
  std::size_t position;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) { }

  MolGraph run() {
    if (s_.empty())
      fail(SmilesErrorKind::kSyntax, 0, "empty input");
    while (i_ < s_.size()) {
      const char c = s_[i_];
      if (c == '[') {
        bracket_atom();
      } else if (std::isupper(static_cast<unsigned char>(c))) {
        organic_atom();
      } else if (std::islower(static_cast<unsigned char>(c))) {
        fail(SmilesErrorKind::kUnsupportedFeature, i_,
             "aromatic atoms are not supported; kekulize the input");
      } else if (c == '-' || c == '=' || c == '#') {
        bond_symbol();
      } else if (c == '(') {
        if (prev_ < 0 || pending_ != 0)
          fail(SmilesErrorKind::kSyntax, i_, "branch without a preceding atom");
        branches_.push_back(prev_);
        ++i_;
        if (i_ < s_.size() && s_[i_] == ')')
          fail(SmilesErrorKind::kSyntax, i_, "empty branch");
      } else if (c == ')') {
        if (branches_.empty())
          fail(SmilesErrorKind::kSyntax, i_, "unbalanced ')'");
        if (pending_ != 0)
          fail(SmilesErrorKind::kSyntax, i_, "bond before ')'");
        prev_ = branches_.back();
        branches_.pop_back();
        ++i_;
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '%') {
        ring_bond();
      } else if (c == '.') {
        if (prev_ < 0 || pending_ != 0)
          fail(SmilesErrorKind::kSyntax, i_, "misplaced '.'");
        if (!branches_.empty())
          fail(SmilesErrorKind::kUnsupportedFeature, i_, "'.' inside a branch");
        prev_ = -1;
        ++i_;
      } else if (c == '/' || c == '\\') {
        fail(SmilesErrorKind::kUnsupportedFeature, i_, "stereo bond marks");
      } else if (c == ':' || c == '$') {
        fail(SmilesErrorKind::kUnsupportedFeature, i_,
             "aromatic or quadruple bonds");
      } else if (c == '*') {
        fail(SmilesErrorKind::kUnsupportedFeature, i_, "wildcard atom");
      } else {
        fail(SmilesErrorKind::kSyntax, i_, "unexpected character");
      }
    }
    if (pending_ != 0)
      fail(SmilesErrorKind::kSyntax, s_.size(), "dangling bond");
    if (!branches_.empty())
      fail(SmilesErrorKind::kSyntax, s_.size(), "unclosed branch");
    if (!rings_.empty())
      fail(SmilesErrorKind::kRingMismatch, rings_.begin()->second.position,
           "unclosed ring bond " + std::to_string(rings_.begin()->first));
    if (prev_ < 0)
      fail(SmilesErrorKind::kSyntax, s_.size(), "trailing '.'");
    assign_implicit_hydrogens();
    return std::move(g_);
  }

 private:
  [[noreturn]] static void fail(SmilesErrorKind kind, std::size_t pos,
                                const std::string &detail) {
    throw SmilesError(kind, pos, detail);
  }

  void attach(int atom, std::size_t pos) {
    if (prev_ >= 0)
      g_.add_bond(prev_, atom, pending_ == 0 ? 1 : pending_);
    else if (pending_ != 0)
      fail(SmilesErrorKind::kSyntax, pos, "bond without a preceding atom");
    pending_ = 0;
    prev_ = atom;
  }

  void organic_atom() {
    const std::size_t start = i_;
    std::string sym(1, s_[i_]);
    if (i_ + 1 < s_.size()) {
      std::string two = sym + s_[i_ + 1];
      if (find_organic(two) != nullptr)
        sym = two;
    }
    const OrganicValence *org = find_organic(sym);
    if (org == nullptr)
      fail(SmilesErrorKind::kSyntax, start,
           "'" + sym + "' is not an organic-subset atom; use brackets");
    i_ += sym.size();
    int idx = g_.add_atom({ sym, 0, 0 });
    organic_.resize(idx + 1, nullptr);
    organic_[idx] = org;
    origin_.resize(idx + 1, 0);
    origin_[idx] = start;
    attach(idx, start);
  }

  int read_int() {
    int v = 0;
    int digits = 0;
    while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) {
      v = v * 10 + (s_[i_] - '0');
      ++i_;
      if (++digits > 3)
        fail(SmilesErrorKind::kSyntax, i_, "number too long");
    }
    return v;
  }

  void bracket_atom() {
    const std::size_t start = i_;
    ++i_;  // '['
    if (i_ >= s_.size())
      fail(SmilesErrorKind::kSyntax, start, "unterminated bracket atom");
    if (std::isdigit(static_cast<unsigned char>(s_[i_])))
      fail(SmilesErrorKind::kUnsupportedFeature, i_, "isotopes");
    if (s_[i_] == '*')
      fail(SmilesErrorKind::kUnsupportedFeature, i_, "wildcard atom");
    if (std::islower(static_cast<unsigned char>(s_[i_])))
      fail(SmilesErrorKind::kUnsupportedFeature, i_, "aromatic atoms");
    if (!std::isupper(static_cast<unsigned char>(s_[i_])))
      fail(SmilesErrorKind::kSyntax, i_, "expected element symbol");

    std::string sym(1, s_[i_]);
    if (i_ + 1 < s_.size() && std::islower(static_cast<unsigned char>(s_[i_ + 1]))) {
      std::string two = sym + s_[i_ + 1];
      if (is_known_element(two))
        sym = two;
    }
    if (!is_known_element(sym))
      fail(SmilesErrorKind::kSyntax, i_, "unknown element '" + sym + "'");
    i_ += sym.size();

    if (i_ < s_.size() && s_[i_] == '@')
      fail(SmilesErrorKind::kUnsupportedFeature, i_, "chirality");

    int h = 0;
    if (i_ < s_.size() && s_[i_] == 'H') {
      ++i_;
      h = 1;
      if (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_])))
        h = read_int();
    }

    int charge = 0;
    if (i_ < s_.size() && (s_[i_] == '+' || s_[i_] == '-')) {
      const char sign = s_[i_];
      ++i_;
      int mag = 1;
      if (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) {
        mag = read_int();
      } else {
        while (i_ < s_.size() && s_[i_] == sign) {
          ++mag;
          ++i_;
        }
      }
      charge = sign == '+' ? mag : -mag;
    }

    if (i_ < s_.size() && s_[i_] == ':')
      fail(SmilesErrorKind::kUnsupportedFeature, i_, "atom classes");
    if (i_ >= s_.size() || s_[i_] != ']')
      fail(SmilesErrorKind::kSyntax, i_, "expected ']'");
    ++i_;

    int idx = g_.add_atom({ sym, charge, h });
    organic_.resize(idx + 1, nullptr);
    origin_.resize(idx + 1, 0);
    origin_[idx] = start;
    attach(idx, start);
  }

  void bond_symbol() {
    if (pending_ != 0)
      fail(SmilesErrorKind::kSyntax, i_, "two consecutive bond symbols");
    if (prev_ < 0)
      fail(SmilesErrorKind::kSyntax, i_, "bond without a preceding atom");
    const char c = s_[i_];
    pending_ = c == '-' ? 1 : (c == '=' ? 2 : 3);
    ++i_;
  }

  void ring_bond() {
    const std::size_t start = i_;
    if (prev_ < 0)
      fail(SmilesErrorKind::kSyntax, i_, "ring bond without an atom");
    int number;
    if (s_[i_] == '%') {
      if (i_ + 2 >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[i_ + 1])) ||
          !std::isdigit(static_cast<unsigned char>(s_[i_ + 2])))
        fail(SmilesErrorKind::kSyntax, i_, "'%' must be followed by two digits");
      number = (s_[i_ + 1] - '0') * 10 + (s_[i_ + 2] - '0');
      i_ += 3;
    } else {
      number = s_[i_] - '0';
      ++i_;
    }

    auto it = rings_.find(number);
    if (it == rings_.end()) {
      rings_[number] = { prev_, pending_, start };
      pending_ = 0;
      return;
    }
    RingOpening open = it->second;
    rings_.erase(it);
    int order = pending_;
    if (open.order != 0 && pending_ != 0 && open.order != pending_)
      fail(SmilesErrorKind::kSyntax, start, "conflicting ring bond orders");
    if (order == 0)
      order = open.order == 0 ? 1 : open.order;
    if (open.atom == prev_)
      fail(SmilesErrorKind::kSyntax, start, "ring bond to the same atom");
    if (g_.has_bond(open.atom, prev_))
      fail(SmilesErrorKind::kSyntax, start, "duplicate bond via ring closure");
    g_.add_bond(open.atom, prev_, order);
    pending_ = 0;
  }

  void assign_implicit_hydrogens() {
    MolGraph out;
    for (int i = 0; i < g_.atom_count(); ++i) {
      Atom a = g_.atom(i);
      if (const OrganicValence *org = organic_[i]; org != nullptr) {
        const int used = weighted_degree(g_, i);
        int target = -1;
        for (int v: org->valences) {
          if (v != 0 && v >= used) {
            target = v;
            break;
          }
        }
        if (target < 0)
          fail(SmilesErrorKind::kValenceOverflow, origin_[i],
               "bond orders exceed the allowed valence of " + a.element);
        a.h_count = target - used;
      }
      out.add_atom(std::move(a));
    }
    for (const Bond &b: g_.bonds())
      out.add_bond(b.a, b.b, b.order);
    g_ = std::move(out);
  }

  std::string_view s_;
  std::size_t i_ = 0;
  MolGraph g_;
  int prev_ = -1;
  int pending_ = 0;
  std::vector<int> branches_;
  std::map<int, RingOpening> rings_;
  std::vector<const OrganicValence *> organic_;
  std::vector<std::size_t> origin_;
};

std::string bracket_text(const Atom &a) {
  std::string s = "[" + a.element;
  if (a.h_count > 0) {
    s += 'H';
    if (a.h_count > 1)
      s += std::to_string(a.h_count);
  }
  if (a.charge != 0) {
    s += a.charge > 0 ? '+' : '-';
    if (std::abs(a.charge) > 1)
      s += std::to_string(std::abs(a.charge));
  }
  s += ']';
  return s;
}

std::string bond_text(int order) {
  switch (order) {
  case 2:
    return "=";
  case 3:
    return "#";
  default:
    return "";
  }
}

std::string ring_label(int d) {
  if (d < 10)
    return std::to_string(d);
  return "%" + std::to_string(d);
}

class Writer {
 public:
  explicit Writer(const MolGraph &g)
      : g_(g), visited_(g.atom_count(), false), parent_(g.atom_count(), -1),
        children_(g.atom_count()), rings_at_(g.atom_count()) { }

  std::string run() {
    std::string out;
    for (int root = 0; root < g_.atom_count(); ++root) {
      if (visited_[root])
        continue;
      plan(root);
      if (!out.empty())
        out += '.';
      emit(root, out);
    }
    return out;
  }

 private:
  // First pass: DFS tree and ring bonds, recorded on both endpoints in
  // visitation order.
  void plan(int root) {
    std::vector<std::pair<int, std::size_t>> stack;
    visited_[root] = true;
    stack.emplace_back(root, 0);
    while (!stack.empty()) {
      auto &[u, next] = stack.back();
      auto nbrs = g_.neighbors(u);
      if (next == nbrs.size()) {
        stack.pop_back();
        continue;
      }
      auto [v, order] = nbrs[next++];
      if (v == parent_[u])
        continue;
      if (!visited_[v]) {
        visited_[v] = true;
        parent_[v] = u;
        children_[u].push_back(v);
        stack.emplace_back(v, 0);
      } else if (!is_ring_recorded(u, v)) {
        rings_at_[v].push_back(u);
        rings_at_[u].push_back(v);
      }
    }
  }

  bool is_ring_recorded(int u, int v) const {
    const auto &r = rings_at_[u];
    return std::find(r.begin(), r.end(), v) != r.end();
  }

  void emit(int root, std::string &out) {
    struct Frame {
      int atom;
      std::size_t child;
      bool branch;
    };
    std::vector<bool> written(g_.atom_count(), false);
    write_atom(root, out, written);
    std::vector<Frame> stack { { root, 0, false } };
    while (!stack.empty()) {
      Frame &f = stack.back();
      const auto &ch = children_[f.atom];
      if (f.child == ch.size()) {
        if (f.branch)
          out += ')';
        stack.pop_back();
        continue;
      }
      const int u = f.atom;
      const int v = ch[f.child++];
      const bool branch = f.child < ch.size();
      if (branch)
        out += '(';
      out += bond_text(g_.bond_order(u, v));
      write_atom(v, out, written);
      stack.push_back({ v, 0, branch });
    }
  }

  void write_atom(int u, std::string &out, std::vector<bool> &written) {
    out += bracket_text(g_.atom(u));
    for (int w: rings_at_[u]) {
      auto key = std::minmax(u, w);
      if (written[w]) {
        auto it = open_digits_.find(key);
        out += ring_label(it->second);
        free_digits_.push_back(it->second);
        std::sort(free_digits_.begin(), free_digits_.end());
        open_digits_.erase(it);
      } else {
        int d;
        if (!free_digits_.empty()) {
          d = free_digits_.front();
          free_digits_.erase(free_digits_.begin());
        } else {
          d = ++max_digit_;
        }
        open_digits_[key] = d;
        out += bond_text(g_.bond_order(u, w)) + ring_label(d);
      }
    }
    written[u] = true;
  }

  const MolGraph &g_;
  std::vector<bool> visited_;
  std::vector<int> parent_;
  std::vector<std::vector<int>> children_;
  std::vector<std::vector<int>> rings_at_;
  std::map<std::pair<int, int>, int> open_digits_;
  std::vector<int> free_digits_;
  int max_digit_ = 0;
};

}  // namespace

MolGraph parse_smiles(std::string_view text) {
  return Parser(text).run();
}

std::string write_smiles(const MolGraph &g) {
  return Writer(g).run();
}

std::vector<SmilesLine> read_smiles_file(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw FormatError(FormatErrorKind::kIo, "cannot open " + path.string());
  std::vector<SmilesLine> lines;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#')
      continue;
    auto end = line.find_first_of(" \t", first);
    lines.push_back({ number, line.substr(first, end == std::string::npos
                                                     ? std::string::npos
                                                     : end - first) });
  }
  return lines;
}

}  // namespace stgg
