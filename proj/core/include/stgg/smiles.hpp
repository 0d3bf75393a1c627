//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef STGG_SMILES_HPP_
#define STGG_SMILES_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "stgg/error.hpp"
#include "stgg/molgraph.hpp"

namespace stgg {

enum class SmilesErrorKind {
  kUnsupportedFeature,
  kSyntax,
  kRingMismatch,
  kValenceOverflow,
};

std::string_view to_string(SmilesErrorKind kind) noexcept;

class SmilesError : public DataError {
 public:
  SmilesError(SmilesErrorKind kind, std::size_t position,
              const std::string &detail);

  SmilesErrorKind kind() const noexcept { return kind_; }
  /// Character offset into the parsed text.
  std::size_t position() const noexcept { return position_; }

 private:
  SmilesErrorKind kind_;
  std::size_t position_;
};

/// Parses the kekulized SMILES subset: organic-subset and bracket atoms
/// (charge, explicit H count), bonds - = #, branches, ring digits and %nn,
/// and '.'-separated components. Implicit hydrogens of organic-subset atoms
/// follow the standard SMILES valence rules.
///
/// Aromatic atoms, stereo marks, isotopes, atom classes and wildcards are
/// rejected with kUnsupportedFeature.
MolGraph parse_smiles(std::string_view text);

/// Writes every atom in bracket form with its H count and charge. Each
/// component is a deterministic DFS from its lowest-index atom.
std::string write_smiles(const MolGraph &g);

struct SmilesLine {
  int line_number = 0;  ///< 1-based
  std::string smiles;
};

/// Reads a one-SMILES-per-line file. Blank lines and lines starting with '#'
/// are skipped; anything after the first whitespace is ignored.
std::vector<SmilesLine> read_smiles_file(const std::filesystem::path &path);

}  // namespace stgg

#endif  // STGG_SMILES_HPP_
