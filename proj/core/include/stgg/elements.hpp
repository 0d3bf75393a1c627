//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef STGG_ELEMENTS_HPP_
#define STGG_ELEMENTS_HPP_

#include <optional>
#include <string_view>

namespace stgg {

/// Standard atomic weight (conventional value) of an element symbol.
std::optional<double> atomic_mass(std::string_view symbol) noexcept;

bool is_known_element(std::string_view symbol) noexcept;

inline constexpr double kHydrogenMass = 1.008;

}  // namespace stgg

#endif  // STGG_ELEMENTS_HPP_
