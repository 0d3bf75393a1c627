//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef STGG_CODEC_HPP_
#define STGG_CODEC_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stgg/error.hpp"
#include "stgg/molgraph.hpp"
#include "stgg/vocab.hpp"

namespace stgg {

/// Token ids. A complete sequence starts with <bos> and ends with <eos>.
using TokenSeq = std::vector<int>;

class EncodeError : public DataError {
 public:
  using DataError::DataError;
};

/// Grammar violation in a token sequence, at token index position().
class DecodeError : public DataError {
 public:
  DecodeError(std::size_t position, const std::string &detail);
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Traversal used by encode(). Canonical: each component rooted at its
/// lowest-index atom, neighbors visited in index order, components in order
/// of their lowest atom. Random: root, neighbor order and component order all
/// drawn from seed.
struct Traversal {
  bool random = false;
  std::uint64_t seed = 0;

  static Traversal canonical() { return { }; }
  static Traversal randomized(std::uint64_t seed) { return { true, seed }; }
};

/// Spanning-tree tokenization. At each atom the emission order is: ring
/// closures to open anchors (bond, [eor-i]), [bor] marks for ring bonds to
/// atoms visited later, branches "(" bond ... ")" for all tree children but
/// the last, then the last child as main-path continuation.
///
/// Throws EncodeError for atoms missing from the vocabulary or when more
/// than r_max anchors would be open at once.
TokenSeq encode(const MolGraph &g, const Vocab &v,
                const Traversal &order = Traversal::canonical());

/// Inverse of encode(). Throws DecodeError naming the offending position.
MolGraph decode(std::span<const int> ids, const Vocab &v);

/// Whitespace-separated token text, e.g. "<bos> CH4 <eos>".
std::string to_text(std::span<const int> ids, const Vocab &v);
/// Throws DecodeError at the index of an unknown token.
TokenSeq from_text(std::string_view text, const Vocab &v);

/// Per-position ring bookkeeping read off a (possibly incomplete) prefix.
/// open_count[t] is the number of open anchors after token t;
/// anchor_positions(t) lists the [bor] positions of those anchors, oldest
/// first.
class AnchorTrack {
 public:
  AnchorTrack() = default;
  /// Throws DecodeError when a ring close refers past the open anchors.
  AnchorTrack(std::span<const int> ids, const Vocab &v);

  std::size_t size() const noexcept { return open_count_.size(); }
  int open_count(std::size_t t) const { return open_count_.at(t); }
  std::span<const int> anchor_positions(std::size_t t) const {
    return { flat_.data() + offset_.at(t), flat_.data() + offset_.at(t + 1) };
  }

  /// Appends one token, for incremental use during sampling.
  void push(int id, const Vocab &v);

 private:
  std::vector<int> open_count_;
  std::vector<std::size_t> offset_ = { 0 };
  std::vector<int> flat_;
  std::vector<int> open_;
};

}  // namespace stgg

#endif  // STGG_CODEC_HPP_
