//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "stgg/fingerprint.hpp"

#include <algorithm>
#include <bit>

#include "stgg/error.hpp"
#include "stgg/hash.hpp"

namespace stgg {

Fingerprint::Fingerprint(int n_bits, int radius)
    : n_bits_(n_bits), radius_(radius) {
  if (n_bits <= 0 || !std::has_single_bit(static_cast<unsigned>(n_bits)))
    throw ArgumentError("fingerprint length must be a positive power of two");
  if (radius < 0)
    throw ArgumentError("fingerprint radius must be non-negative");
  words_.assign((n_bits + 63) / 64, 0);
}

void Fingerprint::set(int bit) {
  words_.at(bit / 64) |= std::uint64_t { 1 } << (bit % 64);
}

bool Fingerprint::test(int bit) const {
  return (words_.at(bit / 64) >> (bit % 64)) & 1U;
}

int Fingerprint::count() const noexcept {
  int c = 0;
  for (auto w: words_)
    c += std::popcount(w);
  return c;
}

Fingerprint circular_fingerprint(const MolGraph &g, int radius, int n_bits) {
  Fingerprint fp(n_bits, radius);
  const int n = g.atom_count();
  const auto mask = static_cast<std::uint64_t>(n_bits - 1);

  std::vector<std::uint64_t> ids(n), next(n);
  for (int i = 0; i < n; ++i) {
    const Atom &a = g.atom(i);
    std::uint64_t h = fnv1a64(a.element);
    h = hash_combine(h, static_cast<std::uint64_t>(a.charge + 1024));
    h = hash_combine(h, static_cast<std::uint64_t>(a.h_count));
    h = hash_combine(h, g.neighbors(i).size());
    ids[i] = h;
    fp.set(static_cast<int>(h & mask));
  }

  std::vector<std::uint64_t> env;
  for (int r = 1; r <= radius; ++r) {
    for (int i = 0; i < n; ++i) {
      env.clear();
      for (auto [v, order]: g.neighbors(i))
        env.push_back(hash_combine(static_cast<std::uint64_t>(order), ids[v]));
      std::sort(env.begin(), env.end());
      std::uint64_t h = hash_combine(static_cast<std::uint64_t>(r), ids[i]);
      for (auto e: env)
        h = hash_combine(h, e);
      next[i] = h;
      fp.set(static_cast<int>(h & mask));
    }
    ids.swap(next);
  }
  return fp;
}

double tanimoto(const Fingerprint &a, const Fingerprint &b) {
  if (a.n_bits() != b.n_bits())
    throw ArgumentError("fingerprint lengths differ");
  int inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.words().size(); ++i) {
    inter += std::popcount(a.words()[i] & b.words()[i]);
    uni += std::popcount(a.words()[i] | b.words()[i]);
  }
  if (uni == 0)
    return 1.0;
  return static_cast<double>(inter) / uni;
}

}  // namespace stgg
