//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "stgg/codec.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "stgg/hash.hpp"

namespace stgg {

DecodeError::DecodeError(std::size_t position, const std::string &detail)
    : DataError("token " + std::to_string(position) + ": " + detail),
      position_(position) { }

namespace {

struct Edge {
  int to;
  int order;
  int bond;
};

struct Closure {
  int anchor_atom;
  int order;
};

struct Plan {
  std::vector<std::vector<int>> children;
  std::vector<std::vector<Closure>> closures;  // ring bonds closed at the atom
  std::vector<int> opens;                      // [bor] count at the atom
  std::vector<int> parent_order;
  std::vector<int> visit_index;
};

// DFS spanning tree of one component. Non-tree edges always join an atom to
// an ancestor; the ancestor (visited first) gets the [bor].
void plan_component(int root, const std::vector<std::vector<Edge>> &adj,
                    std::vector<bool> &bond_used, int &clock, Plan &p) {
  struct Frame {
    int atom;
    std::size_t next;
  };
  std::vector<Frame> stack = { { root, 0 } };
  p.visit_index[root] = clock++;
  while (!stack.empty()) {
    Frame &f = stack.back();
    if (f.next == adj[f.atom].size()) {
      stack.pop_back();
      continue;
    }
    const Edge e = adj[f.atom][f.next++];
    if (bond_used[e.bond])
      continue;
    bond_used[e.bond] = true;
    if (p.visit_index[e.to] < 0) {
      p.children[f.atom].push_back(e.to);
      p.parent_order[e.to] = e.order;
      p.visit_index[e.to] = clock++;
      stack.push_back({ e.to, 0 });
    } else {
      p.closures[f.atom].push_back({ e.to, e.order });
      ++p.opens[e.to];
    }
  }
}

class Emitter {
 public:
  Emitter(const Vocab &v, const Plan &p, std::vector<int> atom_ids)
      : v_(v), p_(p), atom_ids_(std::move(atom_ids)) { }

  void component(int root) {
    struct Frame {
      int atom;
      std::size_t next;
      bool branch;
    };
    enter(root);
    std::vector<Frame> stack = { { root, 0, false } };
    while (!stack.empty()) {
      Frame &f = stack.back();
      const auto &kids = p_.children[f.atom];
      if (f.next < kids.size()) {
        const int c = kids[f.next++];
        const bool branch = f.next < kids.size();
        if (branch)
          out_.push_back(Vocab::kBranchOpen);
        out_.push_back(Vocab::bond_id(p_.parent_order[c]));
        enter(c);
        stack.push_back({ c, 0, branch });
      } else {
        if (f.branch)
          out_.push_back(Vocab::kBranchClose);
        stack.pop_back();
      }
    }
    STGG_CHECK(open_.empty(), "anchors left open at end of component");
  }

  TokenSeq take() { return std::move(out_); }
  void push(int id) { out_.push_back(id); }

 private:
  void enter(int a) {
    out_.push_back(atom_ids_[a]);
    // Oldest anchor first so the emitted indices stay small.
    std::vector<Closure> cl = p_.closures[a];
    auto slot = [&](int anchor) {
      return std::find(open_.begin(), open_.end(), anchor) - open_.begin();
    };
    std::sort(cl.begin(), cl.end(), [&](const Closure &x, const Closure &y) {
      return slot(x.anchor_atom) < slot(y.anchor_atom);
    });
    for (const Closure &c: cl) {
      const auto i = slot(c.anchor_atom);
      STGG_CHECK(i < static_cast<long>(open_.size()), "ring anchor not open");
      out_.push_back(Vocab::bond_id(c.order));
      out_.push_back(v_.ring_close_id(static_cast<int>(i) + 1));
      open_.erase(open_.begin() + i);
    }
    for (int k = 0; k < p_.opens[a]; ++k) {
      if (static_cast<int>(open_.size()) >= v_.r_max())
        throw EncodeError("more than " + std::to_string(v_.r_max()) +
                          " rings open at once");
      out_.push_back(Vocab::kRingOpen);
      open_.push_back(a);
    }
  }

  const Vocab &v_;
  const Plan &p_;
  std::vector<int> atom_ids_;
  std::vector<int> open_;
  TokenSeq out_;
};

}  // namespace

TokenSeq encode(const MolGraph &g, const Vocab &v, const Traversal &order) {
  const int n = g.atom_count();
  std::vector<int> atom_ids(n);
  for (int i = 0; i < n; ++i) {
    auto id = v.find_atom(g.atom(i));
    if (!id)
      throw EncodeError("atom " + std::to_string(i) + " (" +
                        AtomToken{ g.atom(i).element, g.atom(i).charge,
                                   g.atom(i).h_count, 0 }
                            .text() +
                        ") is not in the vocabulary");
    atom_ids[i] = *id;
  }

  std::vector<std::vector<Edge>> adj(n);
  const auto bonds = g.bonds();
  for (int b = 0; b < static_cast<int>(bonds.size()); ++b) {
    adj[bonds[b].a].push_back({ bonds[b].b, bonds[b].order, b });
    adj[bonds[b].b].push_back({ bonds[b].a, bonds[b].order, b });
  }

  const std::vector<int> labels = component_labels(g);
  const int n_comp = n == 0 ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::vector<int>> members(n_comp);
  for (int i = 0; i < n; ++i)
    members[labels[i]].push_back(i);

  std::vector<int> comp_order(n_comp);
  std::iota(comp_order.begin(), comp_order.end(), 0);
  std::vector<int> roots(n_comp);
  if (order.random) {
    Rng rng(order.seed);
    for (auto &a: adj)
      std::shuffle(a.begin(), a.end(), rng);
    std::shuffle(comp_order.begin(), comp_order.end(), rng);
    for (int c = 0; c < n_comp; ++c) {
      std::uniform_int_distribution<std::size_t> pick(0, members[c].size() - 1);
      roots[c] = members[c][pick(rng)];
    }
  } else {
    for (auto &a: adj)
      std::sort(a.begin(), a.end(),
                [](const Edge &x, const Edge &y) { return x.to < y.to; });
    for (int c = 0; c < n_comp; ++c)
      roots[c] = members[c].front();
  }

  Plan p;
  p.children.resize(n);
  p.closures.resize(n);
  p.opens.assign(n, 0);
  p.parent_order.assign(n, 0);
  p.visit_index.assign(n, -1);
  std::vector<bool> bond_used(bonds.size(), false);
  int clock = 0;
  for (int c: comp_order)
    plan_component(roots[c], adj, bond_used, clock, p);

  Emitter em(v, p, std::move(atom_ids));
  em.push(Vocab::kBos);
  for (std::size_t k = 0; k < comp_order.size(); ++k) {
    if (k > 0)
      em.push(Vocab::kDot);
    em.component(roots[comp_order[k]]);
  }
  em.push(Vocab::kEos);
  return em.take();
}

MolGraph decode(std::span<const int> ids, const Vocab &v) {
  enum class Last { kBos, kAtomLike, kBond, kBranchBond, kBranchOpen, kDot };
  auto fail = [](std::size_t pos, const std::string &msg) -> DecodeError {
    return DecodeError(pos, msg);
  };
  if (ids.empty() || ids[0] != Vocab::kBos)
    throw fail(0, "sequence must start with <bos>");

  MolGraph g;
  Last last = Last::kBos;
  int current = -1;
  int pending = 0;
  std::vector<int> branches;
  std::vector<int> anchors;
  for (std::size_t pos = 1; pos < ids.size(); ++pos) {
    const int id = ids[pos];
    if (id < 0 || id >= v.size())
      throw fail(pos, "token id " + std::to_string(id) + " out of range");
    const bool atom_like = last == Last::kAtomLike;
    switch (v.kind(id)) {
    case TokenKind::kAtom: {
      if (last != Last::kBos && last != Last::kDot && last != Last::kBond &&
          last != Last::kBranchBond)
        throw fail(pos, "atom must follow <bos>, '.' or a bond");
      const int a = g.add_atom(v.atom_token(id).atom());
      if (pending > 0)
        g.add_bond(current, a, pending);
      pending = 0;
      current = a;
      last = Last::kAtomLike;
      break;
    }
    case TokenKind::kBond:
      if (last == Last::kBranchOpen) {
        last = Last::kBranchBond;
      } else if (atom_like) {
        last = Last::kBond;
      } else {
        throw fail(pos, "bond must follow an atom or '('");
      }
      pending = Vocab::bond_order(id);
      break;
    case TokenKind::kRingClose: {
      if (last != Last::kBond)
        throw fail(pos, "ring close must follow a bond outside a branch start");
      const int i = v.ring_close_index(id);
      if (i > static_cast<int>(anchors.size()))
        throw fail(pos, "[eor-" + std::to_string(i) + "] with only " +
                            std::to_string(anchors.size()) + " open anchors");
      const int anchor = anchors[i - 1];
      if (anchor == current)
        throw fail(pos, "ring closes onto its own atom");
      if (g.has_bond(anchor, current))
        throw fail(pos, "ring bond duplicates an existing bond");
      g.add_bond(current, anchor, pending);
      anchors.erase(anchors.begin() + (i - 1));
      pending = 0;
      last = Last::kAtomLike;
      break;
    }
    case TokenKind::kRingOpen:
      if (!atom_like)
        throw fail(pos, "[bor] must follow an atom");
      if (static_cast<int>(anchors.size()) >= v.r_max())
        throw fail(pos, "ring capacity exceeded");
      anchors.push_back(current);
      break;
    case TokenKind::kBranchOpen:
      if (!atom_like)
        throw fail(pos, "'(' must follow an atom");
      branches.push_back(current);
      last = Last::kBranchOpen;
      break;
    case TokenKind::kBranchClose:
      if (!atom_like)
        throw fail(pos, "')' must follow an atom");
      if (branches.empty())
        throw fail(pos, "')' without open branch");
      current = branches.back();
      branches.pop_back();
      break;
    case TokenKind::kDot:
    case TokenKind::kEos:
      if (!atom_like)
        throw fail(pos, "component must end after an atom");
      if (!branches.empty())
        throw fail(pos, "unclosed branch");
      if (!anchors.empty())
        throw fail(pos, "unclosed ring");
      if (v.kind(id) == TokenKind::kEos) {
        if (pos + 1 != ids.size())
          throw fail(pos + 1, "tokens after <eos>");
        return g;
      }
      last = Last::kDot;
      break;
    case TokenKind::kBos:
    case TokenKind::kPad:
      throw fail(pos, "unexpected " + v.token_text(id));
    }
  }
  throw fail(ids.size(), "missing <eos>");
}

std::string to_text(std::span<const int> ids, const Vocab &v) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0)
      s += ' ';
    s += v.token_text(ids[i]);
  }
  return s;
}

TokenSeq from_text(std::string_view text, const Vocab &v) {
  std::istringstream in{ std::string(text) };
  TokenSeq out;
  std::string tok;
  while (in >> tok) {
    auto id = v.parse_token(tok);
    if (!id)
      throw DecodeError(out.size(), "unknown token '" + tok + "'");
    out.push_back(*id);
  }
  return out;
}

AnchorTrack::AnchorTrack(std::span<const int> ids, const Vocab &v) {
  open_count_.reserve(ids.size());
  for (int id: ids)
    push(id, v);
}

void AnchorTrack::push(int id, const Vocab &v) {
  const int pos = static_cast<int>(open_count_.size());
  const TokenKind k = v.kind(id);
  if (k == TokenKind::kRingOpen) {
    open_.push_back(pos);
  } else if (k == TokenKind::kRingClose) {
    const int i = v.ring_close_index(id);
    if (i > static_cast<int>(open_.size()))
      throw DecodeError(pos, "ring close past open anchors");
    open_.erase(open_.begin() + (i - 1));
  }
  open_count_.push_back(static_cast<int>(open_.size()));
  flat_.insert(flat_.end(), open_.begin(), open_.end());
  offset_.push_back(flat_.size());
}

}  // namespace stgg
