#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "arhe/error.hpp"

namespace arhe {

// .arhe container: 21-byte big-endian fixed header, then frame_count frames of
// tile_cols*tile_rows TileRecords in raster order. See docs/format.md.

inline constexpr std::array<std::uint8_t, 4> kContainerMagic{0x41, 0x52, 0x48, 0x45};  // "ARHE"
inline constexpr std::uint8_t kContainerVersion = 1;
inline constexpr std::size_t kContainerHeaderBytes = 21;

struct ContainerHeader {
  std::uint8_t version = kContainerVersion;
  std::uint16_t width = 0;   // luma pixels, multiple of 16
  std::uint16_t height = 0;  // luma pixels, multiple of 16
  std::uint8_t fps = 30;
  std::uint8_t qp = 32;      // [0,51]
  std::uint8_t tile_cols = 1;
  std::uint8_t tile_rows = 1;
  std::uint32_t frame_count = 0;
  std::uint32_t salt = 0;    // cipher nonce salt

  std::size_t tiles_per_frame() const {
    return static_cast<std::size_t>(tile_cols) * tile_rows;
  }

  bool operator==(const ContainerHeader&) const = default;
};

struct TileRecord {
  std::uint8_t class_id = 0;  // 0=plaintext, 1=face, 2=display_content, 3=id_card
  std::uint32_t payload_bit_length = 0;
  std::vector<std::uint8_t> payload;  // ceil(payload_bit_length/8) bytes

  bool operator==(const TileRecord&) const = default;
};

struct Container {
  ContainerHeader header;
  std::vector<std::vector<TileRecord>> frames;  // frame -> tiles in raster order

  bool operator==(const Container&) const = default;
};

inline void validate_header(const ContainerHeader& h) {
  if (h.version != kContainerVersion)
    fail(Errc::unsupported_version, "container version " + std::to_string(h.version));
  if (h.width == 0 || h.width % 16 != 0)
    fail(Errc::invalid_header, "width " + std::to_string(h.width) + " is not a positive multiple of 16");
  if (h.height == 0 || h.height % 16 != 0)
    fail(Errc::invalid_header, "height " + std::to_string(h.height) + " is not a positive multiple of 16");
  if (h.qp > 51) fail(Errc::invalid_header, "qp " + std::to_string(h.qp) + " outside [0,51]");
  if (h.tile_cols < 1 || h.tile_cols > h.width / 16)
    fail(Errc::invalid_header, "tile_cols " + std::to_string(h.tile_cols) + " outside [1,width/16]");
  if (h.tile_rows < 1 || h.tile_rows > h.height / 16)
    fail(Errc::invalid_header, "tile_rows " + std::to_string(h.tile_rows) + " outside [1,height/16]");
}

namespace detail {

inline void put_u16be(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline void put_u32be(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

class ByteCursor {
 public:
  explicit ByteCursor(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8() { need(1); return data_[pos_++]; }
  std::uint16_t u16be() { need(2); std::uint16_t v = (std::uint16_t)((data_[pos_] << 8) | data_[pos_ + 1]); pos_ += 2; return v; }
  std::uint32_t u32be() {
    need(4);
    std::uint32_t v = (static_cast<std::uint32_t>(data_[pos_]) << 24) |
                      (static_cast<std::uint32_t>(data_[pos_ + 1]) << 16) |
                      (static_cast<std::uint32_t>(data_[pos_ + 2]) << 8) |
                      static_cast<std::uint32_t>(data_[pos_ + 3]);
    pos_ += 4;
    return v;
  }
  std::span<const std::uint8_t> bytes(std::size_t n) {
    need(n);
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) fail(Errc::truncated_stream, "container ends mid-field");
  }
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::size_t payload_bytes_for_bits(std::uint64_t bits) { return static_cast<std::size_t>((bits + 7) / 8); }

inline std::vector<std::uint8_t> serialize_container(const Container& c) {
  validate_header(c.header);
  if (c.frames.size() != c.header.frame_count)
    fail(Errc::dimension_mismatch, "frame list length " + std::to_string(c.frames.size()) +
                                       " != header frame_count " + std::to_string(c.header.frame_count));
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kContainerMagic.begin(), kContainerMagic.end());
  out.push_back(c.header.version);
  detail::put_u16be(out, c.header.width);
  detail::put_u16be(out, c.header.height);
  out.push_back(c.header.fps);
  out.push_back(c.header.qp);
  out.push_back(c.header.tile_cols);
  out.push_back(c.header.tile_rows);
  detail::put_u32be(out, c.header.frame_count);
  detail::put_u32be(out, c.header.salt);

  const std::size_t tiles = c.header.tiles_per_frame();
  for (const auto& frame : c.frames) {
    if (frame.size() != tiles)
      fail(Errc::dimension_mismatch, "frame holds " + std::to_string(frame.size()) +
                                         " tiles, header wants " + std::to_string(tiles));
    for (const auto& tile : frame) {
      if (tile.class_id > 3) fail(Errc::corrupt_payload, "tile class_id out of range");
      if (tile.payload.size() != payload_bytes_for_bits(tile.payload_bit_length))
        fail(Errc::dimension_mismatch, "tile payload size does not match payload_bit_length");
      out.push_back(tile.class_id);
      detail::put_u32be(out, tile.payload_bit_length);
      out.insert(out.end(), tile.payload.begin(), tile.payload.end());
    }
  }
  return out;
}

inline Container parse_container(std::span<const std::uint8_t> data) {
  detail::ByteCursor cur(data);
  const auto magic = cur.bytes(4);
  if (!std::equal(magic.begin(), magic.end(), kContainerMagic.begin()))
    fail(Errc::bad_magic, "not an arhe container");

  Container c;
  c.header.version = cur.u8();
  if (c.header.version != kContainerVersion)
    fail(Errc::unsupported_version, "container version " + std::to_string(c.header.version));
  c.header.width = cur.u16be();
  c.header.height = cur.u16be();
  c.header.fps = cur.u8();
  c.header.qp = cur.u8();
  c.header.tile_cols = cur.u8();
  c.header.tile_rows = cur.u8();
  c.header.frame_count = cur.u32be();
  c.header.salt = cur.u32be();
  validate_header(c.header);

  const std::size_t tiles = c.header.tiles_per_frame();
  c.frames.reserve(std::min<std::size_t>(c.header.frame_count, cur.remaining() / (5 * tiles) + 1));
  for (std::uint32_t f = 0; f < c.header.frame_count; ++f) {
    std::vector<TileRecord> frame;
    frame.reserve(tiles);
    for (std::size_t t = 0; t < tiles; ++t) {
      TileRecord rec;
      rec.class_id = cur.u8();
      if (rec.class_id > 3) fail(Errc::corrupt_payload, "tile class_id out of range");
      rec.payload_bit_length = cur.u32be();
      const auto body = cur.bytes(payload_bytes_for_bits(rec.payload_bit_length));
      rec.payload.assign(body.begin(), body.end());
      frame.push_back(std::move(rec));
    }
    c.frames.push_back(std::move(frame));
  }
  if (cur.remaining() != 0) fail(Errc::corrupt_payload, "trailing bytes after last frame");
  return c;
}

}  // namespace arhe
