//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "stgg/vocab.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <string_view>
#include <tuple>

#include "stgg/error.hpp"
#include "stgg/hash.hpp"

namespace stgg {
namespace {

constexpr std::array<std::string_view, 10> kSpecialText = {
  "<bos>", "<eos>", "<pad>", ".", "(", ")", "[bor]", "-", "=", "#",
};

}  // namespace

std::string AtomToken::text() const {
  std::string s = element;
  if (h_count > 0) {
    s += 'H';
    if (h_count > 1)
      s += std::to_string(h_count);
  }
  if (charge != 0) {
    s += charge > 0 ? '+' : '-';
    if (std::abs(charge) > 1)
      s += std::to_string(std::abs(charge));
  }
  return s;
}

Vocab::Vocab(std::vector<AtomToken> atoms, int r_max)
    : atoms_(std::move(atoms)), r_max_(r_max) {
  if (r_max < 1)
    throw ArgumentError("r_max must be at least 1");
  std::sort(atoms_.begin(), atoms_.end(),
            [](const AtomToken &a, const AtomToken &b) {
              return a.text() < b.text();
            });
  for (std::size_t i = 1; i < atoms_.size(); ++i)
    if (atoms_[i].text() == atoms_[i - 1].text())
      throw ArgumentError("duplicate atom token " + atoms_[i].text());
  for (const auto &a: atoms_) {
    if (a.max_valency < 0)
      throw ArgumentError("negative max_valency for " + a.text());
    max_valency_ = std::max(max_valency_, a.max_valency);
  }
}

const AtomToken &Vocab::atom_token(int id) const {
  const int k = id - first_atom_id();
  if (k < 0 || k >= atom_count())
    throw ArgumentError("token " + std::to_string(id) + " is not an atom");
  return atoms_[k];
}

TokenKind Vocab::kind(int id) const {
  if (id < 0 || id >= size())
    throw ArgumentError("token id out of range: " + std::to_string(id));
  switch (id) {
  case kBos:
    return TokenKind::kBos;
  case kEos:
    return TokenKind::kEos;
  case kPad:
    return TokenKind::kPad;
  case kDot:
    return TokenKind::kDot;
  case kBranchOpen:
    return TokenKind::kBranchOpen;
  case kBranchClose:
    return TokenKind::kBranchClose;
  case kRingOpen:
    return TokenKind::kRingOpen;
  case kBondSingle:
  case kBondDouble:
  case kBondTriple:
    return TokenKind::kBond;
  default:
    return id < first_atom_id() ? TokenKind::kRingClose : TokenKind::kAtom;
  }
}

int Vocab::bond_order(int id) noexcept {
  if (id >= kBondSingle && id <= kBondTriple)
    return id - kBondSingle + 1;
  return 0;
}

int Vocab::bond_id(int order) {
  if (order < 1 || order > 3)
    throw ArgumentError("bond order must be 1, 2 or 3");
  return kBondSingle + order - 1;
}

int Vocab::ring_close_index(int id) const {
  if (id < kFirstRingClose || id >= first_atom_id())
    throw ArgumentError("token " + std::to_string(id) + " is not a ring close");
  return id - kFirstRingClose + 1;
}

int Vocab::ring_close_id(int index) const {
  if (index < 1 || index > r_max_)
    throw ArgumentError("ring index out of range: " + std::to_string(index));
  return kFirstRingClose + index - 1;
}

std::optional<int> Vocab::find_atom(const Atom &atom) const {
  for (int k = 0; k < atom_count(); ++k) {
    const AtomToken &t = atoms_[k];
    if (t.element == atom.element && t.charge == atom.charge &&
        t.h_count == atom.h_count)
      return first_atom_id() + k;
  }
  return std::nullopt;
}

std::string Vocab::token_text(int id) const {
  switch (kind(id)) {
  case TokenKind::kRingClose:
    return "[eor-" + std::to_string(ring_close_index(id)) + "]";
  case TokenKind::kAtom:
    return atom_token(id).text();
  default:
    return std::string(kSpecialText[id]);
  }
}

std::optional<int> Vocab::parse_token(std::string_view text) const {
  for (int i = 0; i < static_cast<int>(kSpecialText.size()); ++i)
    if (kSpecialText[i] == text)
      return i;
  if (text.starts_with("[eor-") && text.ends_with("]")) {
    auto digits = text.substr(5, text.size() - 6);
    if (digits.empty() || digits.size() > 6)
      return std::nullopt;
    int idx = 0;
    for (char c: digits) {
      if (c < '0' || c > '9')
        return std::nullopt;
      idx = idx * 10 + (c - '0');
    }
    if (idx < 1 || idx > r_max_)
      return std::nullopt;
    return ring_close_id(idx);
  }
  for (int k = 0; k < atom_count(); ++k)
    if (atoms_[k].text() == text)
      return first_atom_id() + k;
  return std::nullopt;
}

std::uint64_t Vocab::digest() const {
  return fnv1a64(to_json().dump());
}

nlohmann::json Vocab::to_json() const {
  nlohmann::json atoms = nlohmann::json::array();
  for (int k = 0; k < atom_count(); ++k) {
    const AtomToken &t = atoms_[k];
    atoms.push_back({ { "id", first_atom_id() + k },
                      { "token", t.text() },
                      { "element", t.element },
                      { "charge", t.charge },
                      { "h_count", t.h_count },
                      { "max_valency", t.max_valency } });
  }
  nlohmann::json special = nlohmann::json::array();
  for (auto s: kSpecialText)
    special.push_back(std::string(s));
  return {
    { "format", "stgg-vocab" },
    { "version", kFormatVersion },
    { "r_max", r_max_ },
    { "special", special },
    { "id_layout",
      "special tokens 0-9, [eor-1]..[eor-r_max] from 10, atom tokens after" },
    { "atom_tokens", atoms },
  };
}

Vocab Vocab::from_json(const nlohmann::json &j) {
  try {
    if (!j.is_object() || j.value("format", "") != "stgg-vocab")
      throw FormatError(FormatErrorKind::kMalformed, "not a vocab file");
    const int version = j.at("version").get<int>();
    if (version != kFormatVersion)
      throw FormatError(FormatErrorKind::kVersionMismatch,
                        "unsupported vocab version " + std::to_string(version));
    std::vector<AtomToken> atoms;
    for (const auto &a: j.at("atom_tokens")) {
      AtomToken t;
      t.element = a.at("element").get<std::string>();
      t.charge = a.at("charge").get<int>();
      t.h_count = a.at("h_count").get<int>();
      t.max_valency = a.at("max_valency").get<int>();
      atoms.push_back(std::move(t));
    }
    return Vocab(std::move(atoms), j.at("r_max").get<int>());
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(FormatErrorKind::kMalformed,
                      std::string("malformed vocab: ") + e.what());
  } catch (const ArgumentError &e) {
    throw FormatError(FormatErrorKind::kMalformed,
                      std::string("invalid vocab: ") + e.what());
  }
}

Vocab induce_vocab(std::span<const MolGraph> corpus, int r_max) {
  if (corpus.empty())
    throw ArgumentError("cannot induce a vocabulary from an empty corpus");
  std::map<std::tuple<std::string, int, int>, int> valency;
  for (const MolGraph &g: corpus) {
    for (int i = 0; i < g.atom_count(); ++i) {
      const Atom &a = g.atom(i);
      auto [it, inserted] =
          valency.try_emplace({ a.element, a.charge, a.h_count }, 0);
      it->second = std::max(it->second, weighted_degree(g, i));
    }
  }
  std::vector<AtomToken> atoms;
  for (const auto &[sig, v]: valency)
    atoms.push_back({ std::get<0>(sig), std::get<1>(sig), std::get<2>(sig), v });
  return Vocab(std::move(atoms), r_max);
}

void save_vocab(const Vocab &v, const std::filesystem::path &path) {
  std::ofstream out(path);
  if (!out)
    throw FormatError(FormatErrorKind::kIo, "cannot write " + path.string());
  out << v.to_json().dump(2) << '\n';
  if (!out)
    throw FormatError(FormatErrorKind::kIo, "write failed: " + path.string());
}

Vocab load_vocab(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw FormatError(FormatErrorKind::kIo, "cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(FormatErrorKind::kMalformed,
                      path.string() + ": " + e.what());
  }
  return Vocab::from_json(j);
}

}  // namespace stgg
