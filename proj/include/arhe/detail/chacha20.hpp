#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace arhe::detail {

// ChaCha20 block function and keystream per RFC 8439 (32-byte key, 12-byte
// nonce, 32-bit block counter). Verified against the RFC vectors in tests.

inline void chacha20_block(const std::array<std::uint8_t, 32>& key, std::uint32_t counter,
                           const std::array<std::uint8_t, 12>& nonce,
                           std::array<std::uint8_t, 64>& out) {
  const auto load32le = [](const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  };
  std::array<std::uint32_t, 16> state{};
  state[0] = 0x61707865u;
  state[1] = 0x3320646eu;
  state[2] = 0x79622d32u;
  state[3] = 0x6b206574u;
  for (int i = 0; i < 8; ++i) state[4 + i] = load32le(key.data() + i * 4);
  state[12] = counter;
  for (int i = 0; i < 3; ++i) state[13 + i] = load32le(nonce.data() + i * 4);

  auto x = state;
  const auto rotl = [](std::uint32_t v, int n) { return (v << n) | (v >> (32 - n)); };
  const auto quarter = [&](int a, int b, int c, int d) {
    x[a] += x[b]; x[d] ^= x[a]; x[d] = rotl(x[d], 16);
    x[c] += x[d]; x[b] ^= x[c]; x[b] = rotl(x[b], 12);
    x[a] += x[b]; x[d] ^= x[a]; x[d] = rotl(x[d], 8);
    x[c] += x[d]; x[b] ^= x[c]; x[b] = rotl(x[b], 7);
  };
  for (int round = 0; round < 10; ++round) {
    quarter(0, 4, 8, 12);
    quarter(1, 5, 9, 13);
    quarter(2, 6, 10, 14);
    quarter(3, 7, 11, 15);
    quarter(0, 5, 10, 15);
    quarter(1, 6, 11, 12);
    quarter(2, 7, 8, 13);
    quarter(3, 4, 9, 14);
  }
  for (int i = 0; i < 16; ++i) x[i] += state[i];
  for (int i = 0; i < 16; ++i) {
    out[i * 4 + 0] = static_cast<std::uint8_t>(x[i]);
    out[i * 4 + 1] = static_cast<std::uint8_t>(x[i] >> 8);
    out[i * 4 + 2] = static_cast<std::uint8_t>(x[i] >> 16);
    out[i * 4 + 3] = static_cast<std::uint8_t>(x[i] >> 24);
  }
}

inline std::vector<std::uint8_t> chacha20_keystream(const std::array<std::uint8_t, 32>& key,
                                                    const std::array<std::uint8_t, 12>& nonce,
                                                    std::uint32_t initial_counter,
                                                    std::size_t length) {
  std::vector<std::uint8_t> out;
  out.reserve(length);
  std::array<std::uint8_t, 64> block{};
  std::uint32_t counter = initial_counter;
  while (out.size() < length) {
    chacha20_block(key, counter++, nonce, block);
    const std::size_t take = std::min<std::size_t>(64, length - out.size());
    out.insert(out.end(), block.begin(), block.begin() + static_cast<std::ptrdiff_t>(take));
  }
  return out;
}

}  // namespace arhe::detail
