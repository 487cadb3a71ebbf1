#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "arhe/bitstream.hpp"
#include "arhe/codec.hpp"
#include "arhe/container.hpp"
#include "arhe/detail/chacha20.hpp"
#include "arhe/detail/parallel.hpp"
#include "arhe/detail/sha256.hpp"
#include "arhe/error.hpp"
#include "arhe/roi.hpp"

namespace arhe {

// ---------------------------------------------------------------------------
// Keys
// ---------------------------------------------------------------------------

using KeyBytes = std::array<std::uint8_t, 32>;
using MasterKey = KeyBytes;

struct ClassKey {
  SensitivityClass cls = SensitivityClass::face;
  KeyBytes key{};
};

/// The per-class keys a device holds; at most one key per class.
struct KeyBundle {
  std::map<SensitivityClass, KeyBytes> keys;
};

/// HKDF-SHA256 with a zero-filled salt and info "arhe/v1/class/<id>".
inline ClassKey derive_class_key(const MasterKey& master, SensitivityClass cls) {
  const std::array<std::uint8_t, 32> salt{};
  const std::string info = "arhe/v1/class/" + std::to_string(class_id(cls));
  const auto okm = detail::hkdf_sha256(
      master, salt, {reinterpret_cast<const std::uint8_t*>(info.data()), info.size()}, 32);
  ClassKey out{cls, {}};
  std::copy(okm.begin(), okm.end(), out.key.begin());
  return out;
}

inline KeyBundle bundle_for_classes(const MasterKey& master,
                                    const std::set<SensitivityClass>& classes) {
  KeyBundle b;
  for (const auto c : classes) b.keys[c] = derive_class_key(master, c).key;
  return b;
}

inline KeyBundle full_bundle(const MasterKey& master) {
  return bundle_for_classes(master, {kAllClasses.begin(), kAllClasses.end()});
}

// ---------------------------------------------------------------------------
// Keystream
// ---------------------------------------------------------------------------

/// (salt, frame, tile) is unique per stream; the 12-byte nonce is their
/// big-endian concatenation.
struct TileNonce {
  std::uint32_t salt = 0;
  std::uint32_t frame = 0;
  std::uint32_t tile = 0;

  std::array<std::uint8_t, 12> bytes() const {
    std::array<std::uint8_t, 12> n{};
    const auto put = [&](int off, std::uint32_t v) {
      n[off] = static_cast<std::uint8_t>(v >> 24);
      n[off + 1] = static_cast<std::uint8_t>(v >> 16);
      n[off + 2] = static_cast<std::uint8_t>(v >> 8);
      n[off + 3] = static_cast<std::uint8_t>(v);
    };
    put(0, salt);
    put(4, frame);
    put(8, tile);
    return n;
  }
};

/// ChaCha20 keystream, block counter 0; prefixes are stable across lengths.
inline std::vector<std::uint8_t> keystream(const KeyBytes& key, const TileNonce& nonce,
                                           std::size_t length) {
  return detail::chacha20_keystream(key, nonce.bytes(), 0, length);
}

// ---------------------------------------------------------------------------
// Format-compliant scrambling
// ---------------------------------------------------------------------------

inline std::size_t scramble_element_count(std::span<const CoeffBlock> blocks) {
  std::size_t n = blocks.size();  // one DC element per block
  for (const auto& b : blocks) n += b.nonzero_ac_count();
  return n;
}

/// XORs each element's exp-Golomb code number with the next 16 keystream bits.
/// Nonzero AC levels stay nonzero, zero-runs are untouched, so the result is
/// always decodable. Applying the same keystream twice is the identity.
inline void scramble_blocks(std::span<CoeffBlock> blocks, std::span<const std::uint8_t> ks) {
  std::size_t pos = 0;
  const auto next_mask = [&]() -> std::uint64_t {
    if (pos + 2 > ks.size()) fail(Errc::keystream_exhausted, "keystream shorter than element count");
    const std::uint64_t k16 =
        (static_cast<std::uint64_t>(ks[pos]) << 8) | static_cast<std::uint64_t>(ks[pos + 1]);
    pos += 2;
    return k16;
  };
  for (auto& b : blocks) {
    b.dc_delta = BitWriter::code_to_se(BitWriter::se_to_code(b.dc_delta) ^ next_mask());
    for (auto& level : b.ac) {
      if (level == 0) continue;
      const std::uint64_t cn = BitWriter::se_to_code(level);
      level = BitWriter::code_to_se(((cn - 1) ^ next_mask()) + 1);
    }
  }
}

// ---------------------------------------------------------------------------
// Stream encryption
// ---------------------------------------------------------------------------

namespace detail {

template <typename KeyForClass>
Container transform_stream(const Container& in, KeyForClass&& key_for_class) {
  validate_header(in.header);
  const TileGrid grid = grid_for_header(in.header);
  Container out = in;
  for (std::size_t f = 0; f < out.frames.size(); ++f) {
    auto& tiles = out.frames[f];
    if (tiles.size() != grid.tile_count())
      fail(Errc::dimension_mismatch, "frame tile count does not match the grid");
    parallel_for(tiles.size(), [&](std::size_t t) {
      TileRecord& rec = tiles[t];
      const auto cls = class_from_id(rec.class_id);
      if (!cls) return;
      const KeyBytes* key = key_for_class(*cls);
      if (key == nullptr) return;

      const TileRect rect = grid.rect(t);
      auto blocks = parse_tile_payload(rec.payload, rec.payload_bit_length,
                                       tile_block_count(rect.w, rect.h));
      const TileNonce nonce{in.header.salt, static_cast<std::uint32_t>(f),
                            static_cast<std::uint32_t>(t)};
      const auto ks = keystream(*key, nonce, 2 * scramble_element_count(blocks));
      scramble_blocks(blocks, ks);
      auto [payload, bits] = write_tile_payload(blocks);
      rec.payload = std::move(payload);
      rec.payload_bit_length = static_cast<std::uint32_t>(bits);
    });
  }
  return out;
}

}  // namespace detail

/// Scrambles every tile whose class is in `classes`; all other tiles are
/// byte-identical to the input.
inline Container encrypt_stream(const Container& in, const std::set<SensitivityClass>& classes,
                                const MasterKey& master) {
  if (classes.empty()) return in;
  std::map<SensitivityClass, KeyBytes> keys;
  for (const auto c : classes) keys[c] = derive_class_key(master, c).key;
  return detail::transform_stream(in, [&](SensitivityClass c) -> const KeyBytes* {
    const auto it = keys.find(c);
    return it == keys.end() ? nullptr : &it->second;
  });
}

/// Unscrambles tiles whose class has a key in the bundle; tiles without a
/// matching key pass through still scrambled.
inline Container decrypt_stream(const Container& in, const KeyBundle& bundle) {
  if (bundle.keys.empty()) return in;
  return detail::transform_stream(in, [&](SensitivityClass c) -> const KeyBytes* {
    const auto it = bundle.keys.find(c);
    return it == bundle.keys.end() ? nullptr : &it->second;
  });
}

// ---------------------------------------------------------------------------
// Cipher-cost accounting
// ---------------------------------------------------------------------------

enum class CipherCostMode {
  bitstream_level,  // 16 bits per encryptable syntax element in labeled tiles
  pixel_level,      // 12 bits per raw pixel (4:2:0) for every ROI-bearing frame
};

inline const std::set<SensitivityClass>& all_classes_set() {
  static const std::set<SensitivityClass> s{kAllClasses.begin(), kAllClasses.end()};
  return s;
}

/// Bits an encryptor must process for the selected classes. The pixel-level
/// figure is what a raw-domain scheme touches: the full 4:2:0 frame (12
/// bits/pixel) for each frame whose ROI is nonempty, since it runs before
/// compression. The bitstream-level figure is 16 bits per scrambled element.
inline std::uint64_t cipher_cost(const Container& c, const RoiTimeline& timeline,
                                 CipherCostMode mode,
                                 const std::set<SensitivityClass>& classes = all_classes_set()) {
  validate_header(c.header);
  if (classes.empty()) return 0;

  if (mode == CipherCostMode::pixel_level) {
    std::uint64_t bits = 0;
    const std::uint64_t frame_pixels =
        static_cast<std::uint64_t>(c.header.width) * c.header.height;
    for (std::uint32_t f = 0; f < c.header.frame_count; ++f) {
      bool roi_present = false;
      for (const auto& track : timeline.tracks) {
        if (!classes.contains(track.cls) || track.keyframes.empty()) continue;
        if (clip_box(interpolate_box(track, f), c.header.width, c.header.height)) {
          roi_present = true;
          break;
        }
      }
      if (roi_present) bits += 12 * frame_pixels;
    }
    return bits;
  }

  const TileGrid grid = grid_for_header(c.header);
  std::uint64_t elements = 0;
  for (const auto& frame : c.frames) {
    for (std::size_t t = 0; t < frame.size(); ++t) {
      const auto cls = class_from_id(frame[t].class_id);
      if (!cls || !classes.contains(*cls)) continue;
      const TileRect rect = grid.rect(t);
      const auto blocks = parse_tile_payload(frame[t].payload, frame[t].payload_bit_length,
                                             tile_block_count(rect.w, rect.h));
      elements += scramble_element_count(blocks);
    }
  }
  return 16 * elements;
}

// ---------------------------------------------------------------------------
// Key files
// ---------------------------------------------------------------------------

inline std::string key_to_hex(const KeyBytes& key) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(64);
  for (const auto b : key) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 0xf]);
  }
  return s;
}

inline KeyBytes key_from_hex(const std::string& hex) {
  if (hex.size() != 64) fail(Errc::bad_key, "key must be 64 hex chars, got " + std::to_string(hex.size()));
  KeyBytes out{};
  for (std::size_t i = 0; i < 32; ++i) {
    const auto nibble = [&](char ch) -> std::uint8_t {
      if (ch >= '0' && ch <= '9') return static_cast<std::uint8_t>(ch - '0');
      if (ch >= 'a' && ch <= 'f') return static_cast<std::uint8_t>(ch - 'a' + 10);
      if (ch >= 'A' && ch <= 'F') return static_cast<std::uint8_t>(ch - 'A' + 10);
      fail(Errc::bad_key, std::string("invalid hex char '") + ch + "'");
    };
    out[i] = static_cast<std::uint8_t>((nibble(hex[2 * i]) << 4) | nibble(hex[2 * i + 1]));
  }
  return out;
}

struct KeyFile {
  std::optional<MasterKey> master;
  KeyBundle bundle;
};

/// Key-file grammar: one key per line, `master:<64 hex>` or `class:<id>:<64 hex>`;
/// blank lines and lines starting with '#' are ignored.
inline KeyFile parse_key_file(std::istream& in) {
  KeyFile kf;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("master:", 0) == 0) {
      kf.master = key_from_hex(line.substr(7));
    } else if (line.rfind("class:", 0) == 0) {
      const auto second = line.find(':', 6);
      if (second == std::string::npos) fail(Errc::bad_key, "malformed class key line");
      const std::string id_str = line.substr(6, second - 6);
      if (id_str.size() != 1 || id_str[0] < '1' || id_str[0] > '3')
        fail(Errc::bad_key, "unknown class id '" + id_str + "'");
      const auto cls = *class_from_id(static_cast<std::uint8_t>(id_str[0] - '0'));
      kf.bundle.keys[cls] = key_from_hex(line.substr(second + 1));
    } else {
      fail(Errc::bad_key, "unrecognized key line: " + line);
    }
  }
  return kf;
}

inline KeyFile load_key_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_failure, "cannot open " + path.string());
  return parse_key_file(in);
}

inline std::string format_bundle(const KeyBundle& bundle) {
  std::string out;
  for (const auto& [cls, key] : bundle.keys)
    out += "class:" + std::to_string(class_id(cls)) + ":" + key_to_hex(key) + "\n";
  return out;
}

}  // namespace arhe
