//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "stgg/molgraph.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <queue>
#include <string>
#include <vector>

#include "stgg/elements.hpp"
#include "stgg/error.hpp"
#include "stgg/hash.hpp"

namespace stgg {

int MolGraph::add_atom(Atom atom) {
  if (!is_known_element(atom.element))
    throw ArgumentError("unknown element symbol '" + atom.element + "'");
  if (atom.h_count < 0)
    throw ArgumentError("negative hydrogen count");
  atoms_.push_back(std::move(atom));
  adjacency_.emplace_back();
  return static_cast<int>(atoms_.size()) - 1;
}

void MolGraph::add_bond(int a, int b, int order) {
  const int n = atom_count();
  if (a < 0 || b < 0 || a >= n || b >= n)
    throw ArgumentError("bond endpoint out of range");
  if (a == b)
    throw ArgumentError("bond from an atom to itself");
  if (order < 1 || order > 3)
    throw ArgumentError("bond order must be 1, 2 or 3");
  if (has_bond(a, b))
    throw ArgumentError("duplicate bond between " + std::to_string(a) +
                        " and " + std::to_string(b));
  bonds_.push_back({ a, b, order });
  adjacency_[a].emplace_back(b, order);
  adjacency_[b].emplace_back(a, order);
}

int MolGraph::bond_order(int a, int b) const {
  const auto &adj = adjacency_.at(a);
  for (auto [nbr, order]: adj)
    if (nbr == b)
      return order;
  return 0;
}

int weighted_degree(const MolGraph &g, int atom_index) {
  if (atom_index < 0 || atom_index >= g.atom_count())
    throw ArgumentError("atom index out of range");
  int sum = 0;
  for (auto [nbr, order]: g.neighbors(atom_index))
    sum += order;
  return sum;
}

double molecular_weight(const MolGraph &g) {
  double total = 0.0;
  for (const Atom &a: g.atoms()) {
    auto m = atomic_mass(a.element);
    if (!m)
      throw ArgumentError("unknown element symbol '" + a.element + "'");
    total += *m + a.h_count * kHydrogenMass;
  }
  return total;
}

std::vector<int> component_labels(const MolGraph &g) {
  std::vector<int> label(g.atom_count(), -1);
  int next = 0;
  std::vector<int> stack;
  for (int root = 0; root < g.atom_count(); ++root) {
    if (label[root] >= 0)
      continue;
    label[root] = next;
    stack.push_back(root);
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (auto [v, order]: g.neighbors(u)) {
        if (label[v] < 0) {
          label[v] = next;
          stack.push_back(v);
        }
      }
    }
    ++next;
  }
  return label;
}

int connected_components(const MolGraph &g) {
  auto labels = component_labels(g);
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

int ring_count(const MolGraph &g) {
  return g.bond_count() - g.atom_count() + connected_components(g);
}

int heavy_atom_count(const MolGraph &g) {
  return static_cast<int>(std::count_if(
      g.atoms().begin(), g.atoms().end(),
      [](const Atom &a) { return a.element != "H"; }));
}

MolGraph permute_atoms(const MolGraph &g, std::span<const int> perm) {
  const int n = g.atom_count();
  if (static_cast<int>(perm.size()) != n)
    throw ArgumentError("permutation size mismatch");
  std::vector<int> inverse(n, -1);
  for (int i = 0; i < n; ++i) {
    if (perm[i] < 0 || perm[i] >= n || inverse[perm[i]] >= 0)
      throw ArgumentError("not a permutation");
    inverse[perm[i]] = i;
  }
  MolGraph out;
  for (int j = 0; j < n; ++j)
    out.add_atom(g.atom(inverse[j]));
  for (const Bond &b: g.bonds())
    out.add_bond(perm[b.a], perm[b.b], b.order);
  return out;
}

std::vector<MolGraph> split_components(const MolGraph &g) {
  auto labels = component_labels(g);
  const int nc = labels.empty()
                     ? 0
                     : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<MolGraph> parts(nc);
  std::vector<int> local(g.atom_count());
  for (int i = 0; i < g.atom_count(); ++i)
    local[i] = parts[labels[i]].add_atom(g.atom(i));
  for (const Bond &b: g.bonds())
    parts[labels[b.a]].add_bond(local[b.a], local[b.b], b.order);
  return parts;
}

std::vector<int> smallest_cycle_sizes(const MolGraph &g) {
  const int n = g.atom_count();
  std::vector<int> result(n, 0);
  std::vector<int> dist(n), branch(n);
  std::vector<int> queue;
  queue.reserve(n);
  for (int s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    std::fill(branch.begin(), branch.end(), -1);
    queue.clear();
    dist[s] = 0;
    branch[s] = s;
    queue.push_back(s);
    int best = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      int u = queue[head];
      for (auto [v, order]: g.neighbors(u)) {
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          branch[v] = (u == s) ? v : branch[u];
          queue.push_back(v);
        } else if (u != s && v != s && branch[v] != branch[u]) {
          // Non-tree edge joining two different subtrees of s closes a cycle.
          int len = dist[u] + dist[v] + 1;
          if (best == 0 || len < best)
            best = len;
        }
      }
    }
    result[s] = best;
  }
  return result;
}

namespace {

std::uint64_t atom_label_hash(const Atom &a) {
  std::uint64_t h = fnv1a64(a.element);
  h = hash_combine(h, static_cast<std::uint64_t>(a.charge + 1024));
  return hash_combine(h, static_cast<std::uint64_t>(a.h_count));
}

std::uint64_t initial_color(const MolGraph &g, int i) {
  std::uint64_t h = atom_label_hash(g.atom(i));
  h = hash_combine(h, g.neighbors(i).size());
  int wd = 0;
  for (auto [v, order]: g.neighbors(i))
    wd += order;
  return hash_combine(h, static_cast<std::uint64_t>(wd));
}

std::vector<std::uint64_t> refine_once(const MolGraph &g,
                                       const std::vector<std::uint64_t> &c) {
  std::vector<std::uint64_t> next(c.size());
  std::vector<std::uint64_t> nbr;
  for (int i = 0; i < g.atom_count(); ++i) {
    nbr.clear();
    for (auto [v, order]: g.neighbors(i))
      nbr.push_back(hash_combine(static_cast<std::uint64_t>(order), c[v]));
    std::sort(nbr.begin(), nbr.end());
    std::uint64_t h = c[i];
    for (auto x: nbr)
      h = hash_combine(h, x);
    next[i] = h;
  }
  return next;
}

std::size_t distinct_count(std::vector<std::uint64_t> v) {
  std::sort(v.begin(), v.end());
  return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
}

class Matcher {
 public:
  Matcher(const MolGraph &a, const MolGraph &b, std::vector<std::uint64_t> ca,
          std::vector<std::uint64_t> cb, std::uint64_t budget)
      : a_(a), b_(b), ca_(std::move(ca)), cb_(std::move(cb)), budget_(budget),
        map_ab_(a.atom_count(), -1), used_b_(b.atom_count(), false) {
    build_order();
  }

  IsoResult run() {
    if (extend(0))
      return IsoResult::kIsomorphic;
    return exhausted_ ? IsoResult::kUndecided : IsoResult::kNotIsomorphic;
  }

 private:
  void build_order() {
    const int n = a_.atom_count();
    std::vector<int> freq_rank(n);
    std::vector<std::uint64_t> sorted = ca_;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < n; ++i) {
      auto range = std::equal_range(sorted.begin(), sorted.end(), ca_[i]);
      freq_rank[i] = static_cast<int>(range.second - range.first);
    }
    std::vector<bool> seen(n, false);
    std::vector<int> roots(n);
    std::iota(roots.begin(), roots.end(), 0);
    std::stable_sort(roots.begin(), roots.end(), [&](int x, int y) {
      return freq_rank[x] < freq_rank[y];
    });
    for (int r: roots) {
      if (seen[r])
        continue;
      seen[r] = true;
      std::size_t head = order_.size();
      order_.push_back(r);
      parent_.push_back(-1);
      for (; head < order_.size(); ++head) {
        int u = order_[head];
        for (auto [v, o]: a_.neighbors(u)) {
          if (!seen[v]) {
            seen[v] = true;
            order_.push_back(v);
            parent_.push_back(u);
          }
        }
      }
    }
  }

  bool feasible(int u, int v) const {
    int mapped = 0;
    for (auto [w, order]: a_.neighbors(u)) {
      int mw = map_ab_[w];
      if (mw < 0)
        continue;
      if (b_.bond_order(v, mw) != order)
        return false;
      ++mapped;
    }
    int mapped_b = 0;
    for (auto [x, order]: b_.neighbors(v))
      if (used_b_[x])
        ++mapped_b;
    return mapped == mapped_b;
  }

  bool try_candidate(std::size_t depth, int u, int v) {
    if (used_b_[v] || cb_[v] != ca_[u] || !feasible(u, v))
      return false;
    map_ab_[u] = v;
    used_b_[v] = true;
    if (extend(depth + 1))
      return true;
    map_ab_[u] = -1;
    used_b_[v] = false;
    return false;
  }

  bool extend(std::size_t depth) {
    if (depth == order_.size())
      return true;
    if (++nodes_ > budget_) {
      exhausted_ = true;
      return false;
    }
    const int u = order_[depth];
    const int p = parent_[depth];
    if (p >= 0) {
      for (auto [v, o]: b_.neighbors(map_ab_[p])) {
        if (try_candidate(depth, u, v))
          return true;
        if (exhausted_)
          return false;
      }
    } else {
      for (int v = 0; v < b_.atom_count(); ++v) {
        if (try_candidate(depth, u, v))
          return true;
        if (exhausted_)
          return false;
      }
    }
    return false;
  }

  const MolGraph &a_;
  const MolGraph &b_;
  std::vector<std::uint64_t> ca_, cb_;
  std::uint64_t budget_;
  std::uint64_t nodes_ = 0;
  bool exhausted_ = false;
  std::vector<int> order_, parent_;
  std::vector<int> map_ab_;
  std::vector<bool> used_b_;
};

}  // namespace

IsoResult match_isomorphism(const MolGraph &a, const MolGraph &b,
                            std::uint64_t node_budget) {
  if (a.atom_count() != b.atom_count() || a.bond_count() != b.bond_count())
    return IsoResult::kNotIsomorphic;
  const int n = a.atom_count();
  if (n == 0)
    return IsoResult::kIsomorphic;

  std::vector<std::uint64_t> ca(n), cb(n);
  for (int i = 0; i < n; ++i) {
    ca[i] = initial_color(a, i);
    cb[i] = initial_color(b, i);
  }
  // Joint refinement: colours are content hashes, so they are comparable
  // across the two graphs.
  std::size_t classes = 0;
  for (int round = 0; round <= n; ++round) {
    std::vector<std::uint64_t> sa = ca, sb = cb;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    if (sa != sb)
      return IsoResult::kNotIsomorphic;
    std::size_t now = distinct_count(ca);
    if (round > 0 && now == classes)
      break;
    classes = now;
    ca = refine_once(a, ca);
    cb = refine_once(b, cb);
  }
  return Matcher(a, b, std::move(ca), std::move(cb), node_budget).run();
}

bool is_isomorphic(const MolGraph &a, const MolGraph &b,
                   std::uint64_t node_budget) {
  return match_isomorphism(a, b, node_budget) == IsoResult::kIsomorphic;
}

namespace {

int diameter(const MolGraph &g) {
  const int n = g.atom_count();
  int best = 0;
  std::vector<int> dist(n);
  std::vector<int> queue;
  for (int s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    queue.assign(1, s);
    dist[s] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      int u = queue[head];
      best = std::max(best, dist[u]);
      for (auto [v, o]: g.neighbors(u)) {
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          queue.push_back(v);
        }
      }
    }
  }
  return best;
}

std::uint64_t component_digest(const MolGraph &comp) {
  const int n = comp.atom_count();
  auto cycles = smallest_cycle_sizes(comp);
  std::vector<std::uint64_t> colors(n);
  for (int i = 0; i < n; ++i)
    colors[i] = hash_combine(initial_color(comp, i),
                             static_cast<std::uint64_t>(cycles[i]));

  std::uint64_t digest = hash_combine(static_cast<std::uint64_t>(n),
                                      static_cast<std::uint64_t>(comp.bond_count()));
  auto absorb = [&](const std::vector<std::uint64_t> &c) {
    std::vector<std::uint64_t> sorted = c;
    std::sort(sorted.begin(), sorted.end());
    for (auto x: sorted)
      digest = hash_combine(digest, x);
  };
  absorb(colors);
  const int rounds = 2 * diameter(comp);
  for (int r = 0; r < rounds; ++r) {
    colors = refine_once(comp, colors);
    absorb(colors);
  }
  return digest;
}

}  // namespace

std::string canonical_key(const MolGraph &g) {
  std::vector<std::uint64_t> digests;
  for (const MolGraph &comp: split_components(g))
    digests.push_back(component_digest(comp));
  std::sort(digests.begin(), digests.end());
  std::string key;
  char buf[17];
  for (std::size_t i = 0; i < digests.size(); ++i) {
    if (i > 0)
      key += '.';
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(digests[i]));
    key += buf;
  }
  return key;
}

}  // namespace stgg
