#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace idss {

// 128-bit opaque identifier, ordered as an unsigned integer on the ring.
struct Key128 {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;

  auto operator<=>(const Key128&) const = default;
  bool is_zero() const { return hi == 0 && lo == 0; }

  std::string hex() const;
  static Key128 from_hex(std::string_view s);
};

// SHA-256 truncated to 128 bits.
Key128 hash128(std::string_view data);

}  // namespace idss

template <>
struct std::hash<idss::Key128> {
  std::size_t operator()(const idss::Key128& k) const noexcept {
    return static_cast<std::size_t>(k.hi ^ (k.lo * 0x9e3779b97f4a7c15ULL));
  }
};
