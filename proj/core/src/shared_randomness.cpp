#include "infocomp/shared_randomness.hpp"

#include <stdexcept>

namespace infocomp {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

SharedSeed SharedSeed::from_hex(std::string_view hex) {
  if (hex.size() != 32)
    throw std::invalid_argument("SharedSeed: expected 32 hex characters");
  std::uint64_t words[2] = {0, 0};
  for (std::size_t i = 0; i < 32; ++i) {
    const int v = hex_value(hex[i]);
    if (v < 0) throw std::invalid_argument("SharedSeed: invalid hex character");
    words[i / 16] = (words[i / 16] << 4) | static_cast<std::uint64_t>(v);
  }
  return SharedSeed{words[0], words[1]};
}

std::string SharedSeed::to_hex() const {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(32, '0');
  for (int i = 0; i < 16; ++i) {
    out[i] = digits[(hi >> (60 - 4 * i)) & 0xf];
    out[16 + i] = digits[(lo >> (60 - 4 * i)) & 0xf];
  }
  return out;
}

}  // namespace infocomp
