//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef STGG_MASK_ENGINE_HPP_
#define STGG_MASK_ENGINE_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "stgg/codec.hpp"
#include "stgg/error.hpp"
#include "stgg/hash.hpp"
#include "stgg/vocab.hpp"

namespace stgg {

/// Mask rules. R1 structure, R2 bond valency, R3 atom valency, R4 ring open,
/// R5 ring close, R6 branches, R7 length budget, R8 termination.
enum class MaskRule { kR1, kR2, kR3, kR4, kR5, kR6, kR7, kR8 };

std::string_view to_string(MaskRule rule) noexcept;

/// Raised by advance() for a token the mask forbids.
class MaskViolation : public DataError {
 public:
  MaskViolation(MaskRule rule, int token, int position);
  MaskRule rule() const noexcept { return rule_; }
  int token() const noexcept { return token_; }
  int position() const noexcept { return position_; }

 private:
  MaskRule rule_;
  int token_;
  int position_;
};

enum class LastKind : std::uint8_t {
  kBos,
  kAtom,
  kBond,
  kBranchOpen,
  kBranchClose,
  kRingOpen,
  kRingClose,
  kDot,
  kEos,
};

/// True for the kinds after which the current atom can take attachments.
constexpr bool is_atom_like(LastKind k) noexcept {
  return k == LastKind::kAtom || k == LastKind::kRingOpen ||
         k == LastKind::kRingClose || k == LastKind::kBranchClose;
}

struct Anchor {
  int atom = -1;
  int position = -1;  ///< index of the [bor] token

  friend bool operator==(const Anchor &, const Anchor &) = default;
};

/// Incremental decoder state. A value type: copies are independent.
///
/// Valency bookkeeping: a bond of order o takes o from the current atom when
/// the bond token is read; a new atom starts at max_valency - o; [bor]
/// reserves 1 on its atom; a ring close of order o takes a further o - 1
/// from the anchor atom.
class DecoderState {
 public:
  const Vocab &vocab() const noexcept { return *vocab_; }
  int max_len() const noexcept { return max_len_; }
  int slack() const noexcept { return slack_; }
  /// Tokens consumed so far, <bos> included.
  int position() const noexcept { return position_; }
  int tokens_remaining() const noexcept { return max_len_ - position_; }
  LastKind last() const noexcept { return last_; }
  bool finished() const noexcept { return last_ == LastKind::kEos; }

  /// Order of the bond just read; 0 unless last() is kBond.
  int pending_order() const noexcept { return pending_; }
  /// The pending bond directly follows "(" and must be followed by an atom.
  bool pending_starts_branch() const noexcept { return branch_bond_; }

  /// Atom that takes the next attachment, -1 at a component start.
  int current_atom() const noexcept { return current_; }
  int atom_count() const noexcept { return static_cast<int>(rem_.size()); }
  int remaining_valency(int atom) const { return rem_.at(atom); }
  int atom_token(int atom) const { return atom_tok_.at(atom); }
  bool bonded(int a, int b) const;

  /// Atoms to return to on ")", innermost last.
  std::span<const int> branch_stack() const noexcept { return branches_; }
  /// Open ring anchors, oldest first.
  std::span<const Anchor> anchors() const noexcept { return anchors_; }
  int open_branch_count() const noexcept {
    return static_cast<int>(branches_.size());
  }
  int open_anchor_count() const noexcept {
    return static_cast<int>(anchors_.size());
  }

 private:
  friend DecoderState init_state(const Vocab &, int, int);
  friend std::optional<MaskRule> check_token(const DecoderState &, int);
  friend int closing_cost(const DecoderState &);
  friend class MaskScratch;

  void apply(int id);
  void add_bond(int a, int b);
  int closable_anchor(int order) const;

  const Vocab *vocab_ = nullptr;
  int max_len_ = 0;
  int slack_ = 0;
  int position_ = 0;
  LastKind last_ = LastKind::kBos;
  int pending_ = 0;
  bool branch_bond_ = false;
  int current_ = -1;
  int nbr_cap_ = 1;
  int max_val_ = 0;      // largest atom max_valency in the vocabulary
  int best_atom_ = -1;   // lowest-id atom token with max_val_
  std::vector<int> rem_;
  std::vector<int> atom_tok_;
  std::vector<int> degree_;
  std::vector<int> nbrs_;  // nbr_cap_ slots per atom
  std::vector<int> branches_;
  std::vector<Anchor> anchors_;
};

/// Per-token admissibility vector.
struct Mask {
  std::vector<std::uint8_t> allowed;

  bool operator[](int id) const { return allowed[id] != 0; }
  int count() const;
  /// Allowed token ids in increasing order.
  std::vector<int> ids() const;
};

/// Fresh state with <bos> consumed. Throws ArgumentError unless
/// max_len >= 3 + slack and the vocabulary has atom tokens.
DecoderState init_state(const Vocab &v, int max_len, int slack = 0);

/// First rule that forbids token id in state s, nullopt when allowed.
/// The budget rule R7 admits a token only if a deterministic closing policy
/// can still finish every open branch and ring within max_len - slack
/// tokens, which makes deadlock impossible.
std::optional<MaskRule> check_token(const DecoderState &s, int id);

/// Throws ArgumentError on a finished state.
Mask mask(const DecoderState &s);

/// Throws MaskViolation naming the violated rule.
DecoderState advance(const DecoderState &s, int id);
void advance_in_place(DecoderState &s, int id);

/// Shortest completion length found by the closing policies, or
/// kInfeasible. Zero for finished states.
inline constexpr int kInfeasible = 1 << 29;
int closing_cost(const DecoderState &s);

/// Uniform sampling over allowed tokens until <eos>. Throws InvariantError
/// on a deadlock.
TokenSeq rollout_uniform(const Vocab &v, int max_len, Rng &rng, int slack = 0);

/// Runs a complete sequence (leading <bos> included) through advance().
/// Throws MaskViolation at the first rejected token.
DecoderState replay(const Vocab &v, std::span<const int> ids, int max_len,
                    int slack = 0);

}  // namespace stgg

#endif  // STGG_MASK_ENGINE_HPP_
