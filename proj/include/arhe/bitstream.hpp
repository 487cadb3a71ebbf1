#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "arhe/error.hpp"

namespace arhe {

// MSB-first bit packing. The writer zero-fills the trailing partial byte, so
// taking the buffer at any point yields a canonically padded stream.
class BitWriter {
 public:
  void put_bit(bool bit) {
    const std::size_t byte = bits_ >> 3;
    if (byte == buf_.size()) buf_.push_back(0);
    if (bit) buf_[byte] |= static_cast<std::uint8_t>(0x80u >> (bits_ & 7));
    ++bits_;
  }

  void put_bits(std::uint64_t value, int count) {
    for (int i = count - 1; i >= 0; --i) put_bit((value >> i) & 1u);
  }

  /// Unsigned exp-Golomb: code number n is floor(log2(n+1)) zeros, then n+1 in binary.
  void put_ue(std::uint64_t n) {
    if (n >= kMaxCodeNumber) fail(Errc::corrupt_payload, "exp-Golomb code number too large");
    const std::uint64_t v = n + 1;
    int width = 0;
    while ((v >> width) > 1) ++width;
    put_bits(0, width);
    put_bits(v, width + 1);
  }

  /// Signed exp-Golomb: k>0 maps to 2k-1, k<=0 maps to -2k.
  void put_se(std::int64_t k) { put_ue(se_to_code(k)); }

  std::uint64_t bit_count() const { return bits_; }
  const std::vector<std::uint8_t>& bytes() const { return buf_; }
  std::vector<std::uint8_t> take() { bits_ = 0; return std::move(buf_); }

  static std::uint64_t se_to_code(std::int64_t k) {
    return k > 0 ? 2 * static_cast<std::uint64_t>(k) - 1
                 : 2 * static_cast<std::uint64_t>(-k);
  }
  static std::int64_t code_to_se(std::uint64_t n) {
    return (n & 1u) ? static_cast<std::int64_t>((n + 1) / 2)
                    : -static_cast<std::int64_t>(n / 2);
  }

  static constexpr std::uint64_t kMaxCodeNumber = 1ull << 62;

 private:
  std::vector<std::uint8_t> buf_;
  std::uint64_t bits_ = 0;
};

class BitReader {
 public:
  BitReader(std::span<const std::uint8_t> bytes, std::uint64_t bit_limit)
      : buf_(bytes), limit_(bit_limit) {
    if (limit_ > 8 * static_cast<std::uint64_t>(buf_.size()))
      fail(Errc::truncated_stream, "bit limit exceeds buffer");
  }
  explicit BitReader(std::span<const std::uint8_t> bytes)
      : BitReader(bytes, 8 * static_cast<std::uint64_t>(bytes.size())) {}

  bool get_bit() {
    if (pos_ >= limit_) fail(Errc::truncated_stream, "bit read past end of stream");
    const bool bit = (buf_[pos_ >> 3] >> (7 - (pos_ & 7))) & 1u;
    ++pos_;
    return bit;
  }

  std::uint64_t get_bits(int count) {
    std::uint64_t v = 0;
    for (int i = 0; i < count; ++i) v = (v << 1) | (get_bit() ? 1u : 0u);
    return v;
  }

  std::uint64_t get_ue() {
    int zeros = 0;
    while (!get_bit()) {
      if (++zeros > 61) fail(Errc::corrupt_payload, "exp-Golomb prefix too long");
    }
    const std::uint64_t rest = get_bits(zeros);
    return ((1ull << zeros) | rest) - 1;
  }

  std::int64_t get_se() { return BitWriter::code_to_se(get_ue()); }

  std::uint64_t position() const { return pos_; }
  std::uint64_t remaining() const { return limit_ - pos_; }

 private:
  std::span<const std::uint8_t> buf_;
  std::uint64_t limit_;
  std::uint64_t pos_ = 0;
};

}  // namespace arhe
