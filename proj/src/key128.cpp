#include "idss/key128.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <stdexcept>

namespace idss {

std::string Key128::hex() const {
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(hi),
                static_cast<unsigned long long>(lo));
  return std::string(buf, 32);
}

Key128 Key128::from_hex(std::string_view s) {
  if (s.size() != 32) throw std::invalid_argument("key hex must be 32 characters");
  auto parse_half = [](std::string_view h) {
    std::uint64_t v = 0;
    for (char c : h) {
      v <<= 4;
      if (c >= '0' && c <= '9') v |= static_cast<std::uint64_t>(c - '0');
      else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint64_t>(c - 'a' + 10);
      else if (c >= 'A' && c <= 'F') v |= static_cast<std::uint64_t>(c - 'A' + 10);
      else throw std::invalid_argument("invalid hex digit in key");
    }
    return v;
  };
  return Key128{parse_half(s.substr(0, 16)), parse_half(s.substr(16, 16))};
}

Key128 hash128(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr);
  auto load64 = [&](std::size_t off) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < 8; ++i) v = (v << 8) | digest[off + i];
    return v;
  };
  return Key128{load64(0), load64(8)};
}

}  // namespace idss
