//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef STGG_MOLGRAPH_HPP_
#define STGG_MOLGRAPH_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace stgg {

/// A heavy atom with its attached hydrogens folded in.
struct Atom {
  std::string element;
  int charge = 0;
  int h_count = 0;

  friend bool operator==(const Atom &, const Atom &) = default;
  friend auto operator<=>(const Atom &, const Atom &) = default;
};

struct Bond {
  int a = 0;
  int b = 0;
  int order = 1;

  friend bool operator==(const Bond &, const Bond &) = default;
};

/// Attributed undirected graph. Bond orders are restricted to 1, 2 and 3
/// (kekulized input); at most one bond joins any pair of atoms.
class MolGraph {
 public:
  MolGraph() = default;

  /// Throws ArgumentError for unknown elements or negative hydrogen counts.
  int add_atom(Atom atom);

  /// Throws ArgumentError for invalid indices, self loops, duplicate bonds
  /// or orders outside {1,2,3}.
  void add_bond(int a, int b, int order);

  std::span<const Atom> atoms() const noexcept { return atoms_; }
  std::span<const Bond> bonds() const noexcept { return bonds_; }
  const Atom &atom(int i) const { return atoms_.at(i); }

  int atom_count() const noexcept { return static_cast<int>(atoms_.size()); }
  int bond_count() const noexcept { return static_cast<int>(bonds_.size()); }
  bool empty() const noexcept { return atoms_.empty(); }

  /// (neighbor, bond order) pairs of an atom, in bond insertion order.
  std::span<const std::pair<int, int>> neighbors(int i) const {
    return adjacency_.at(i);
  }

  /// Order of the bond joining a and b, or 0 when they are not bonded.
  int bond_order(int a, int b) const;
  bool has_bond(int a, int b) const { return bond_order(a, b) != 0; }

 private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<std::pair<int, int>>> adjacency_;
};

/// Sum of bond orders incident to an atom. Throws ArgumentError on a bad index.
int weighted_degree(const MolGraph &g, int atom_index);

/// Sum of element masses plus attached hydrogens, in Daltons.
double molecular_weight(const MolGraph &g);

/// Cyclomatic number: |bonds| - |atoms| + components.
int ring_count(const MolGraph &g);

/// Atoms whose element is not hydrogen.
int heavy_atom_count(const MolGraph &g);

int connected_components(const MolGraph &g);

/// Component id per atom, numbered in order of each component's lowest atom.
std::vector<int> component_labels(const MolGraph &g);

/// Relabels atoms: atom i of g becomes atom perm[i] of the result.
MolGraph permute_atoms(const MolGraph &g, std::span<const int> perm);

/// Splits a graph into its connected components, atoms kept in index order.
std::vector<MolGraph> split_components(const MolGraph &g);

enum class IsoResult { kIsomorphic, kNotIsomorphic, kUndecided };

inline constexpr std::uint64_t kDefaultIsoBudget = 2'000'000;

/// Label-preserving isomorphism test (element, charge, hydrogen count, bond
/// order). Backtracking over a colour-refined partition; gives up with
/// kUndecided once node_budget search states have been expanded.
IsoResult match_isomorphism(const MolGraph &a, const MolGraph &b,
                            std::uint64_t node_budget = kDefaultIsoBudget);

/// True only when an isomorphism was found; kUndecided counts as false.
bool is_isomorphic(const MolGraph &a, const MolGraph &b,
                   std::uint64_t node_budget = kDefaultIsoBudget);

/// Order-independent key from Weisfeiler-Lehman refinement. Isomorphic graphs
/// always share a key; distinct keys imply non-isomorphic graphs.
std::string canonical_key(const MolGraph &g);

/// Length of the shortest cycle through each atom, 0 for acyclic atoms.
std::vector<int> smallest_cycle_sizes(const MolGraph &g);

}  // namespace stgg

#endif  // STGG_MOLGRAPH_HPP_
