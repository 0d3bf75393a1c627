//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "stgg/mask_engine.hpp"

#include <algorithm>
#include <array>

namespace stgg {

std::string_view to_string(MaskRule rule) noexcept {
  switch (rule) {
  case MaskRule::kR1:
    return "R1 structure";
  case MaskRule::kR2:
    return "R2 bond valency";
  case MaskRule::kR3:
    return "R3 atom valency";
  case MaskRule::kR4:
    return "R4 ring open";
  case MaskRule::kR5:
    return "R5 ring close";
  case MaskRule::kR6:
    return "R6 branch";
  case MaskRule::kR7:
    return "R7 budget";
  case MaskRule::kR8:
    return "R8 termination";
  }
  return "unknown rule";
}

MaskViolation::MaskViolation(MaskRule rule, int token, int position)
    : DataError("token " + std::to_string(token) + " at position " +
                std::to_string(position) + " violates " +
                std::string(to_string(rule))),
      rule_(rule), token_(token), position_(position) { }

bool DecoderState::bonded(int a, int b) const {
  const int *p = nbrs_.data() + static_cast<std::size_t>(a) * nbr_cap_;
  return std::find(p, p + degree_.at(a), b) != p + degree_[a];
}

void DecoderState::add_bond(int a, int b) {
  STGG_CHECK(degree_[a] < nbr_cap_ && degree_[b] < nbr_cap_,
             "atom degree exceeds vocabulary valency");
  nbrs_[static_cast<std::size_t>(a) * nbr_cap_ + degree_[a]++] = b;
  nbrs_[static_cast<std::size_t>(b) * nbr_cap_ + degree_[b]++] = a;
}

// Oldest anchor that a ring bond of the given order from the current atom can
// close, or -1.
int DecoderState::closable_anchor(int order) const {
  for (int i = 0; i < static_cast<int>(anchors_.size()); ++i) {
    const int a = anchors_[i].atom;
    if (a != current_ && rem_[a] >= order - 1 && !bonded(a, current_))
      return i;
  }
  return -1;
}

// Unchecked transition.
void DecoderState::apply(int id) {
  const Vocab &v = *vocab_;
  switch (v.kind(id)) {
  case TokenKind::kAtom: {
    const int n = atom_count();
    rem_.push_back(v.atom_token(id).max_valency - pending_);
    atom_tok_.push_back(id);
    degree_.push_back(0);
    nbrs_.resize(nbrs_.size() + nbr_cap_, -1);
    if (pending_ > 0)
      add_bond(current_, n);
    current_ = n;
    pending_ = 0;
    branch_bond_ = false;
    last_ = LastKind::kAtom;
    break;
  }
  case TokenKind::kBond:
    pending_ = Vocab::bond_order(id);
    rem_[current_] -= pending_;
    branch_bond_ = last_ == LastKind::kBranchOpen;
    last_ = LastKind::kBond;
    break;
  case TokenKind::kRingClose: {
    const int i = v.ring_close_index(id) - 1;
    const int a = anchors_[i].atom;
    rem_[a] -= pending_ - 1;
    add_bond(current_, a);
    anchors_.erase(anchors_.begin() + i);
    pending_ = 0;
    last_ = LastKind::kRingClose;
    break;
  }
  case TokenKind::kRingOpen:
    rem_[current_] -= 1;
    anchors_.push_back({ current_, position_ });
    last_ = LastKind::kRingOpen;
    break;
  case TokenKind::kBranchOpen:
    branches_.push_back(current_);
    last_ = LastKind::kBranchOpen;
    break;
  case TokenKind::kBranchClose:
    current_ = branches_.back();
    branches_.pop_back();
    last_ = LastKind::kBranchClose;
    break;
  case TokenKind::kDot:
    current_ = -1;
    last_ = LastKind::kDot;
    break;
  case TokenKind::kEos:
    last_ = LastKind::kEos;
    break;
  case TokenKind::kBos:
  case TokenKind::kPad:
    STGG_CHECK(false, "control token applied to decoder state");
  }
  ++position_;
}

// Internal access for the budget lookahead, masks and rollouts.
class MaskScratch {
 public:
  enum class Policy { kEager, kReserve, kBranchFirst };
  static constexpr std::array<Policy, 3> kPolicies = {
    Policy::kEager, Policy::kReserve, Policy::kBranchFirst
  };

  static void apply(DecoderState &s, int id) { s.apply(id); }

  static std::optional<MaskRule> check_local(const DecoderState &s, int id) {
    const Vocab &v = *s.vocab_;
    if (id < 0 || id >= v.size())
      throw ArgumentError("token id out of range: " + std::to_string(id));
    const TokenKind k = v.kind(id);
    const LastKind last = s.last_;

    // R1: successor structure.
    switch (last) {
    case LastKind::kEos:
      return MaskRule::kR1;
    case LastKind::kBos:
    case LastKind::kDot:
      if (k != TokenKind::kAtom)
        return MaskRule::kR1;
      break;
    case LastKind::kBond:
      if (k != TokenKind::kAtom &&
          !(k == TokenKind::kRingClose && !s.branch_bond_))
        return MaskRule::kR1;
      break;
    case LastKind::kBranchOpen:
      if (k != TokenKind::kBond)
        return MaskRule::kR1;
      break;
    default:
      if (k == TokenKind::kAtom || k == TokenKind::kRingClose ||
          k == TokenKind::kBos || k == TokenKind::kPad)
        return MaskRule::kR1;
      break;
    }

    switch (k) {
    case TokenKind::kBond: {
      const int o = Vocab::bond_order(id);
      if (s.rem_[s.current_] < o)
        return MaskRule::kR2;
      const bool must_place_atom = last == LastKind::kBranchOpen;
      if (s.max_val_ < o && (must_place_atom || s.closable_anchor(o) < 0))
        return MaskRule::kR2;
      break;
    }
    case TokenKind::kAtom:
      if (v.atom_token(id).max_valency < s.pending_)
        return MaskRule::kR3;
      break;
    case TokenKind::kRingOpen:
      if (s.rem_[s.current_] < 1 || s.open_anchor_count() >= v.r_max())
        return MaskRule::kR4;
      break;
    case TokenKind::kRingClose: {
      const int i = v.ring_close_index(id);
      if (i > s.open_anchor_count())
        return MaskRule::kR5;
      const int a = s.anchors_[i - 1].atom;
      if (a == s.current_ || s.bonded(a, s.current_) ||
          s.rem_[a] < s.pending_ - 1)
        return MaskRule::kR5;
      break;
    }
    case TokenKind::kBranchOpen:
      if (s.rem_[s.current_] < 1)
        return MaskRule::kR6;
      break;
    case TokenKind::kBranchClose:
      if (s.branches_.empty())
        return MaskRule::kR6;
      break;
    case TokenKind::kDot:
    case TokenKind::kEos:
      if (!s.branches_.empty() || !s.anchors_.empty())
        return MaskRule::kR8;
      break;
    default:
      break;
    }
    return std::nullopt;
  }

  // Next token of a closing policy, -1 when the policy is stuck. Every
  // decision is a function of the state alone, so following a policy from a
  // state it can finish never leaves that state's successor unfinishable.
  static int policy_token(const DecoderState &s, Policy p) {
    const Vocab &v = *s.vocab_;
    switch (s.last_) {
    case LastKind::kBos:
    case LastKind::kDot:
      return s.best_atom_;
    case LastKind::kBranchOpen:
      return s.max_val_ >= 1 ? Vocab::kBondSingle : -1;
    case LastKind::kBond: {
      const int o = s.pending_;
      const int i = s.branch_bond_ ? -1 : s.closable_anchor(o);
      if (i >= 0 && close_after_bond(s, p))
        return v.ring_close_id(i + 1);
      if (s.max_val_ >= o)
        return s.best_atom_;
      return i >= 0 ? v.ring_close_id(i + 1) : -1;
    }
    case LastKind::kEos:
      return -1;
    default:
      break;
    }
    const int k = s.open_anchor_count();
    const bool has_branch = !s.branches_.empty();
    if (k == 0)
      return has_branch ? Vocab::kBranchClose : Vocab::kEos;
    const int r = s.rem_[s.current_];
    const bool can_close = r >= 1 && s.closable_anchor(1) >= 0;
    const bool can_extend = r >= 1 && s.max_val_ >= 2;
    switch (p) {
    case Policy::kEager:
      if (can_close || can_extend)
        return Vocab::kBondSingle;
      break;
    case Policy::kReserve:
      if (can_close && (r >= 2 || k == 1 || s.max_val_ < 3))
        return Vocab::kBondSingle;
      if (can_extend)
        return Vocab::kBondSingle;
      break;
    case Policy::kBranchFirst:
      if (can_close && (r >= 2 || k == 1))
        return Vocab::kBondSingle;
      if (has_branch)
        return Vocab::kBranchClose;
      if (can_close || can_extend)
        return Vocab::kBondSingle;
      break;
    }
    return has_branch ? Vocab::kBranchClose : -1;
  }

  // Mirrors the pre-bond decision in policy_token: r there is rem + 1 here.
  static bool close_after_bond(const DecoderState &s, Policy p) {
    const int r = s.rem_[s.current_];
    const int k = s.open_anchor_count();
    switch (p) {
    case Policy::kEager:
      return true;
    case Policy::kReserve:
      return r >= 1 || k == 1 || s.max_val_ < 3;
    case Policy::kBranchFirst:
      return r >= 1 || k == 1 || s.branches_.empty();
    }
    return true;
  }

  // Final position reached by policy p from s, or kInfeasible once it would
  // pass limit.
  static int run_policy(DecoderState &s, Policy p, int limit) {
    while (!s.finished()) {
      if (s.position_ >= limit)
        return kInfeasible;
      const int t = policy_token(s, p);
      if (t < 0)
        return kInfeasible;
      s.apply(t);
    }
    return s.position_;
  }

  static bool feasible(const DecoderState &after, DecoderState &sim) {
    const int limit = after.max_len_ - after.slack_;
    if (after.finished())
      return after.position_ <= limit;
    for (Policy p: kPolicies) {
      sim = after;
      if (run_policy(sim, p, limit) <= limit)
        return true;
    }
    return false;
  }

  static int cost(const DecoderState &s) {
    if (s.finished())
      return 0;
    // Policies add at most four tokens per open anchor plus closers.
    const int limit = s.position_ + 8 * (s.open_anchor_count() +
                                         s.open_branch_count() + 4);
    int best = kInfeasible;
    DecoderState sim;
    for (Policy p: kPolicies) {
      sim = s;
      const int end = run_policy(sim, p, limit);
      if (end < kInfeasible)
        best = std::min(best, end - s.position_);
    }
    return best;
  }

  static Mask mask(const DecoderState &s) {
    if (s.finished())
      throw ArgumentError("mask requested for a finished sequence");
    const Vocab &v = *s.vocab_;
    Mask m;
    m.allowed.assign(v.size(), 0);
    DecoderState after;
    DecoderState sim;
    // After a bond, states reached by different atom tokens differ only in
    // the new atom's valency.
    std::vector<int> by_valency(s.max_val_ + 1, -1);
    for (int id = 0; id < v.size(); ++id) {
      if (check_local(s, id))
        continue;
      int *cached = nullptr;
      if (v.kind(id) == TokenKind::kAtom) {
        cached = &by_valency[v.atom_token(id).max_valency];
        if (*cached >= 0) {
          m.allowed[id] = static_cast<std::uint8_t>(*cached);
          continue;
        }
      }
      after = s;
      after.apply(id);
      const bool ok = feasible(after, sim);
      m.allowed[id] = ok ? 1 : 0;
      if (cached)
        *cached = ok ? 1 : 0;
    }
    return m;
  }
};

int Mask::count() const {
  return static_cast<int>(std::count(allowed.begin(), allowed.end(), 1));
}

std::vector<int> Mask::ids() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(allowed.size()); ++i)
    if (allowed[i])
      out.push_back(i);
  return out;
}

DecoderState init_state(const Vocab &v, int max_len, int slack) {
  if (slack < 0)
    throw ArgumentError("slack must be non-negative");
  if (max_len < 3 + slack)
    throw ArgumentError("max_len must be at least 3 + slack");
  if (v.atom_count() == 0)
    throw ArgumentError("vocabulary has no atom tokens");
  DecoderState s;
  s.vocab_ = &v;
  s.max_len_ = max_len;
  s.slack_ = slack;
  s.position_ = 1;
  s.last_ = LastKind::kBos;
  s.max_val_ = v.max_atom_valency();
  s.nbr_cap_ = std::max(1, s.max_val_);
  for (int k = 0; k < v.atom_count(); ++k)
    if (v.atom_tokens()[k].max_valency == s.max_val_) {
      s.best_atom_ = v.first_atom_id() + k;
      break;
    }
  return s;
}

std::optional<MaskRule> check_token(const DecoderState &s, int id) {
  if (auto r = MaskScratch::check_local(s, id))
    return r;
  DecoderState after = s;
  after.apply(id);
  DecoderState sim;
  if (!MaskScratch::feasible(after, sim))
    return MaskRule::kR7;
  return std::nullopt;
}

Mask mask(const DecoderState &s) {
  return MaskScratch::mask(s);
}

void advance_in_place(DecoderState &s, int id) {
  if (auto r = check_token(s, id))
    throw MaskViolation(*r, id, s.position());
  MaskScratch::apply(s, id);
}

DecoderState advance(const DecoderState &s, int id) {
  DecoderState next = s;
  advance_in_place(next, id);
  return next;
}

int closing_cost(const DecoderState &s) {
  return MaskScratch::cost(s);
}

TokenSeq rollout_uniform(const Vocab &v, int max_len, Rng &rng, int slack) {
  DecoderState s = init_state(v, max_len, slack);
  TokenSeq out = { Vocab::kBos };
  while (!s.finished()) {
    const std::vector<int> ids = mask(s).ids();
    if (ids.empty())
      throw InvariantError("mask deadlock at position " +
                           std::to_string(s.position()));
    std::uniform_int_distribution<std::size_t> pick(0, ids.size() - 1);
    const int t = ids[pick(rng)];
    MaskScratch::apply(s, t);
    out.push_back(t);
  }
  return out;
}

DecoderState replay(const Vocab &v, std::span<const int> ids, int max_len,
                    int slack) {
  if (ids.empty() || ids[0] != Vocab::kBos)
    throw MaskViolation(MaskRule::kR1, ids.empty() ? -1 : ids[0], 0);
  DecoderState s = init_state(v, max_len, slack);
  for (std::size_t i = 1; i < ids.size(); ++i)
    advance_in_place(s, ids[i]);
  return s;
}

}  // namespace stgg
