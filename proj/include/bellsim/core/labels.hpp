#pragma once

#include <cstdint>
#include <string_view>

namespace bellsim {

enum class Spin : std::uint8_t { Up = 0, Down = 1 };

constexpr Spin flipped(Spin s) noexcept { return s == Spin::Up ? Spin::Down : Spin::Up; }

constexpr std::string_view to_string(Spin s) noexcept { return s == Spin::Up ? "up" : "down"; }

/// +1 for up, -1 for down.
constexpr int sign(Spin s) noexcept { return s == Spin::Up ? 1 : -1; }

}  // namespace bellsim
