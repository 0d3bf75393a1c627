//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef STGG_VOCAB_HPP_
#define STGG_VOCAB_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "stgg/molgraph.hpp"

namespace stgg {

/// An atom signature (element, charge, hydrogens) with the largest bond-order
/// sum it was observed with.
struct AtomToken {
  std::string element;
  int charge = 0;
  int h_count = 0;
  int max_valency = 0;

  /// Text form, e.g. "CH3", "NH3+", "Zn-2".
  std::string text() const;
  Atom atom() const { return { element, charge, h_count }; }

  friend bool operator==(const AtomToken &, const AtomToken &) = default;
};

enum class TokenKind {
  kBos,
  kEos,
  kPad,
  kDot,
  kBranchOpen,
  kBranchClose,
  kRingOpen,
  kBond,
  kRingClose,
  kAtom,
};

/// Token inventory. Ids are dense and laid out as
///
///   0 <bos>, 1 <eos>, 2 <pad>, 3 ".", 4 "(", 5 ")", 6 "[bor]",
///   7 "-", 8 "=", 9 "#", 10 .. 10+r_max-1 "[eor-1]" .. "[eor-r_max]",
///   then atom tokens in lexicographic order of their text.
class Vocab {
 public:
  static constexpr int kBos = 0;
  static constexpr int kEos = 1;
  static constexpr int kPad = 2;
  static constexpr int kDot = 3;
  static constexpr int kBranchOpen = 4;
  static constexpr int kBranchClose = 5;
  static constexpr int kRingOpen = 6;
  static constexpr int kBondSingle = 7;
  static constexpr int kBondDouble = 8;
  static constexpr int kBondTriple = 9;
  static constexpr int kFirstRingClose = 10;
  static constexpr int kDefaultRMax = 100;
  static constexpr int kFormatVersion = 1;

  Vocab() = default;
  /// Sorts the atom tokens; throws ArgumentError on duplicate signatures.
  Vocab(std::vector<AtomToken> atoms, int r_max = kDefaultRMax);

  int size() const noexcept { return first_atom_id() + atom_count(); }
  int r_max() const noexcept { return r_max_; }
  int atom_count() const noexcept { return static_cast<int>(atoms_.size()); }
  int first_atom_id() const noexcept { return kFirstRingClose + r_max_; }

  std::span<const AtomToken> atom_tokens() const noexcept { return atoms_; }
  const AtomToken &atom_token(int id) const;

  TokenKind kind(int id) const;
  /// 1, 2 or 3 for bond tokens, 0 otherwise.
  static int bond_order(int id) noexcept;
  static int bond_id(int order);
  /// 1-based anchor index of a ring-close token.
  int ring_close_index(int id) const;
  int ring_close_id(int index) const;

  std::optional<int> find_atom(const Atom &atom) const;

  std::string token_text(int id) const;
  std::optional<int> parse_token(std::string_view text) const;

  /// Largest max_valency among atom tokens, -1 when there are none.
  int max_atom_valency() const noexcept { return max_valency_; }

  /// FNV-1a of the canonical JSON form.
  std::uint64_t digest() const;

  nlohmann::json to_json() const;
  static Vocab from_json(const nlohmann::json &j);

  friend bool operator==(const Vocab &a, const Vocab &b) {
    return a.r_max_ == b.r_max_ && a.atoms_ == b.atoms_;
  }

 private:
  std::vector<AtomToken> atoms_;
  int r_max_ = kDefaultRMax;
  int max_valency_ = -1;
};

/// One token per distinct atom signature in the corpus, with max_valency the
/// largest weighted degree observed for that signature. Independent of
/// corpus order. Throws ArgumentError on an empty corpus.
Vocab induce_vocab(std::span<const MolGraph> corpus,
                   int r_max = Vocab::kDefaultRMax);

void save_vocab(const Vocab &v, const std::filesystem::path &path);
/// Throws FormatError (kIo, kMalformed or kVersionMismatch).
Vocab load_vocab(const std::filesystem::path &path);

}  // namespace stgg

#endif  // STGG_VOCAB_HPP_
