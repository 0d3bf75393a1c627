//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef STGG_FINGERPRINT_HPP_
#define STGG_FINGERPRINT_HPP_

#include <cstdint>
#include <vector>

#include "stgg/molgraph.hpp"

namespace stgg {

/// Fixed-length bit vector of hashed circular atom environments.
class Fingerprint {
 public:
  /// n_bits must be a positive power of two.
  explicit Fingerprint(int n_bits = 2048, int radius = 2);

  int n_bits() const noexcept { return n_bits_; }
  int radius() const noexcept { return radius_; }

  void set(int bit);
  bool test(int bit) const;
  int count() const noexcept;

  const std::vector<std::uint64_t> &words() const noexcept { return words_; }

 private:
  int n_bits_;
  int radius_;
  std::vector<std::uint64_t> words_;
};

/// Morgan-style fingerprint: for every atom and every r <= radius, the
/// identifier of its r-neighbourhood is hashed onto one bit.
Fingerprint circular_fingerprint(const MolGraph &g, int radius = 2,
                                 int n_bits = 2048);

/// |a & b| / |a | b|, and 1.0 when both are empty.
double tanimoto(const Fingerprint &a, const Fingerprint &b);

}  // namespace stgg

#endif  // STGG_FINGERPRINT_HPP_
