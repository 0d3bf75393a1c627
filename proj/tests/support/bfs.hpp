//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef STGG_TESTS_BFS_HPP_
#define STGG_TESTS_BFS_HPP_

#include <deque>
#include <string>
#include <unordered_set>
#include <vector>

#include "stgg/codec.hpp"
#include "stgg/mask_engine.hpp"

namespace stgg::testing {

/// Everything future masks can depend on: the budget, the last token, and
/// the atoms that can still take bonds (current atom, branch returns,
/// anchors) with their remaining valency and mutual bonds. Dead atoms are
/// dropped, so states that differ only in finished parts of the molecule
/// collapse.
inline std::string live_signature(const DecoderState &s) {
  std::vector<int> live;
  auto slot = [&](int atom) {
    if (atom < 0)
      return -1;
    for (std::size_t i = 0; i < live.size(); ++i)
      if (live[i] == atom)
        return static_cast<int>(i);
    live.push_back(atom);
    return static_cast<int>(live.size()) - 1;
  };
  std::string sig;
  auto put = [&](int x) {
    sig += std::to_string(x);
    sig += ',';
  };
  put(s.position());
  put(static_cast<int>(s.last()));
  put(s.pending_order());
  put(s.pending_starts_branch());
  put(slot(s.current_atom()));
  sig += '|';
  for (int a: s.branch_stack())
    put(slot(a));
  sig += '|';
  for (const auto &a: s.anchors())
    put(slot(a.atom));
  sig += '|';
  for (int a: live)
    put(s.remaining_valency(a));
  sig += '|';
  for (std::size_t i = 0; i < live.size(); ++i)
    for (std::size_t j = i + 1; j < live.size(); ++j)
      sig += s.bonded(live[i], live[j]) ? '1' : '0';
  return sig;
}

struct BfsReport {
  long states = 0;       // distinct live signatures expanded
  long transitions = 0;
  long finished = 0;     // EOS transitions
  long deadlocks = 0;    // non-final states with an empty mask
  long undecodable = 0;  // finished representatives that failed to decode
  long over_budget = 0;  // finished past max_len
  std::string first_problem;
};

/// Breadth-first search over every state reachable through allowed tokens.
/// One representative prefix per signature is kept and each finished
/// representative is decoded. With dedup off every prefix is expanded.
inline BfsReport explore_states(const Vocab &v, int max_len, int slack = 0,
                                bool dedup = true) {
  struct Node {
    DecoderState state;
    TokenSeq tokens;
  };
  BfsReport r;
  std::unordered_set<std::string> seen;
  std::deque<Node> queue;
  DecoderState s0 = init_state(v, max_len, slack);
  seen.insert(live_signature(s0));
  queue.push_back({ std::move(s0), TokenSeq{ Vocab::kBos } });
  while (!queue.empty()) {
    Node n = std::move(queue.front());
    queue.pop_front();
    ++r.states;
    const Mask m = mask(n.state);
    if (m.count() == 0) {
      if (r.deadlocks++ == 0)
        r.first_problem = "deadlock after " + to_text(n.tokens, v);
      continue;
    }
    for (int id: m.ids()) {
      ++r.transitions;
      DecoderState next = advance(n.state, id);
      TokenSeq tokens = n.tokens;
      tokens.push_back(id);
      if (next.finished()) {
        ++r.finished;
        if (static_cast<int>(tokens.size()) > max_len && r.over_budget++ == 0)
          r.first_problem = "over budget: " + to_text(tokens, v);
        try {
          decode(tokens, v);
        } catch (const DecodeError &e) {
          if (r.undecodable++ == 0)
            r.first_problem = std::string(e.what()) + ": " + to_text(tokens, v);
        }
        continue;
      }
      if (!dedup || seen.insert(live_signature(next)).second)
        queue.push_back({ std::move(next), std::move(tokens) });
    }
  }
  return r;
}

/// Three atom tokens with valencies 4, 2 and 1.
inline Vocab toy_vocab3(int r_max = Vocab::kDefaultRMax) {
  return Vocab({ { "C", 0, 0, 4 }, { "N", 0, 1, 2 }, { "F", 0, 0, 1 } }, r_max);
}

}  // namespace stgg::testing

#endif  // STGG_TESTS_BFS_HPP_
