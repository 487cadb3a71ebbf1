#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "arhe/bitstream.hpp"
#include "arhe/container.hpp"
#include "arhe/detail/parallel.hpp"
#include "arhe/error.hpp"
#include "arhe/frame.hpp"

namespace arhe {

// ---------------------------------------------------------------------------
// Tile grid
// ---------------------------------------------------------------------------

struct TileRect {
  std::uint32_t x0 = 0, y0 = 0;  // luma offsets
  std::uint32_t w = 0, h = 0;    // luma extents, multiples of 16
};

struct TileGrid {
  std::uint32_t cols = 0, rows = 0;
  std::vector<std::uint32_t> col_bounds;  // cols+1 entries, multiples of 16
  std::vector<std::uint32_t> row_bounds;  // rows+1 entries

  std::size_t tile_count() const { return static_cast<std::size_t>(cols) * rows; }

  TileRect rect(std::size_t index) const {
    const std::uint32_t r = static_cast<std::uint32_t>(index) / cols;
    const std::uint32_t c = static_cast<std::uint32_t>(index) % cols;
    return {col_bounds[c], row_bounds[r], col_bounds[c + 1] - col_bounds[c],
            row_bounds[r + 1] - row_bounds[r]};
  }
};

inline TileGrid make_tile_grid(std::uint32_t width, std::uint32_t height, std::uint32_t cols,
                               std::uint32_t rows) {
  if (width == 0 || width % 16 != 0 || height == 0 || height % 16 != 0)
    fail(Errc::invalid_grid, "frame dimensions must be positive multiples of 16");
  if (cols < 1 || cols > width / 16)
    fail(Errc::invalid_grid, "cols " + std::to_string(cols) + " outside [1," +
                                 std::to_string(width / 16) + "]");
  if (rows < 1 || rows > height / 16)
    fail(Errc::invalid_grid, "rows " + std::to_string(rows) + " outside [1," +
                                 std::to_string(height / 16) + "]");
  TileGrid g;
  g.cols = cols;
  g.rows = rows;
  g.col_bounds.resize(cols + 1);
  g.row_bounds.resize(rows + 1);
  const std::uint64_t wb = width / 16, hb = height / 16;
  for (std::uint32_t i = 0; i <= cols; ++i)
    g.col_bounds[i] = static_cast<std::uint32_t>(i * wb / cols * 16);
  for (std::uint32_t i = 0; i <= rows; ++i)
    g.row_bounds[i] = static_cast<std::uint32_t>(i * hb / rows * 16);
  return g;
}

inline TileGrid grid_for_header(const ContainerHeader& h) {
  return make_tile_grid(h.width, h.height, h.tile_cols, h.tile_rows);
}

// ---------------------------------------------------------------------------
// Quantization
// ---------------------------------------------------------------------------

struct QuantParams {
  std::uint8_t qp = 32;
  std::int64_t qstep = 40;  // round(2^(qp/6)); doubles every 6 qp
};

inline QuantParams make_quant_params(int qp) {
  if (qp < 0 || qp > 51) fail(Errc::invalid_header, "qp " + std::to_string(qp) + " outside [0,51]");
  return {static_cast<std::uint8_t>(qp), std::llround(std::exp2(qp / 6.0))};
}

inline std::int64_t quantize(std::int64_t coeff, const QuantParams& q) {
  return coeff >= 0 ? coeff / q.qstep : -((-coeff) / q.qstep);
}

// Dead-zone bin-center reconstruction: |error| <= qstep. Levels are clamped to
// a generous bound so hostile payloads cannot overflow the int64 pixel path.
inline std::int64_t dequantize(std::int64_t level, const QuantParams& q) {
  if (level == 0) return 0;
  constexpr std::int64_t kLevelClamp = std::int64_t{1} << 40;
  const std::int64_t mag = std::min(level >= 0 ? level : -level, kLevelClamp);
  const std::int64_t value = mag * q.qstep + q.qstep / 2;
  return level >= 0 ? value : -value;
}

// ---------------------------------------------------------------------------
// 8x8 sequency-ordered Walsh-Hadamard transform (exact integer math)
// ---------------------------------------------------------------------------

namespace detail {

constexpr std::array<std::array<int, 8>, 8> make_walsh_matrix() {
  // Natural Hadamard rows reordered so row r shows exactly r sign changes.
  std::array<int, 8> order{};
  for (int r = 0; r < 8; ++r) {
    int changes = 0;
    int prev = 1;
    for (int c = 1; c < 8; ++c) {
      const int cur = (std::popcount(static_cast<unsigned>(r & c)) & 1) ? -1 : 1;
      if (cur != prev) ++changes;
      prev = cur;
    }
    order[changes] = r;
  }
  std::array<std::array<int, 8>, 8> m{};
  for (int s = 0; s < 8; ++s)
    for (int c = 0; c < 8; ++c)
      m[s][c] = (std::popcount(static_cast<unsigned>(order[s] & c)) & 1) ? -1 : 1;
  return m;
}

inline constexpr auto kWalsh = make_walsh_matrix();

}  // namespace detail

using Block64 = std::array<std::int64_t, 64>;  // row-major 8x8

inline void fwht8_forward(const Block64& x, Block64& y) {
  const auto& w = detail::kWalsh;
  Block64 tmp{};
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      std::int64_t s = 0;
      for (int k = 0; k < 8; ++k) s += w[i][k] * x[static_cast<std::size_t>(k) * 8 + j];
      tmp[static_cast<std::size_t>(i) * 8 + j] = s;
    }
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      std::int64_t s = 0;
      for (int k = 0; k < 8; ++k) s += tmp[static_cast<std::size_t>(i) * 8 + k] * w[j][k];
      y[static_cast<std::size_t>(i) * 8 + j] = s;
    }
}

// Inverse of the forward transform: (W^T Y W) / 64. The division is exact on
// anything the forward transform produced; arbitrary coefficient blocks use the
// deterministic rounding floor((v+32)/64).
inline void fwht8_inverse(const Block64& y, Block64& x) {
  const auto& w = detail::kWalsh;
  Block64 tmp{};
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      std::int64_t s = 0;
      for (int k = 0; k < 8; ++k) s += w[k][i] * y[static_cast<std::size_t>(k) * 8 + j];
      tmp[static_cast<std::size_t>(i) * 8 + j] = s;
    }
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      std::int64_t s = 0;
      for (int k = 0; k < 8; ++k) s += tmp[static_cast<std::size_t>(i) * 8 + k] * w[k][j];
      x[static_cast<std::size_t>(i) * 8 + j] = (s + 32) >> 6;
    }
}

// ---------------------------------------------------------------------------
// Zigzag scan
// ---------------------------------------------------------------------------

namespace detail {

constexpr std::array<std::uint8_t, 64> make_zigzag() {
  std::array<std::uint8_t, 64> z{};
  int idx = 0;
  for (int d = 0; d <= 14; ++d) {
    const int lo = d > 7 ? d - 7 : 0;
    const int hi = d < 7 ? d : 7;
    if (d & 1) {
      for (int r = lo; r <= hi; ++r) z[idx++] = static_cast<std::uint8_t>(r * 8 + (d - r));
    } else {
      for (int r = hi; r >= lo; --r) z[idx++] = static_cast<std::uint8_t>(r * 8 + (d - r));
    }
  }
  return z;
}

constexpr std::array<std::uint8_t, 64> invert_scan(const std::array<std::uint8_t, 64>& fwd) {
  std::array<std::uint8_t, 64> inv{};
  for (int i = 0; i < 64; ++i) inv[fwd[i]] = static_cast<std::uint8_t>(i);
  return inv;
}

}  // namespace detail

/// Scan index -> raster position (row*8+col).
inline constexpr auto kZigzag = detail::make_zigzag();
/// Raster position -> scan index.
inline constexpr auto kZigzagInverse = detail::invert_scan(kZigzag);

inline void zigzag_scan(const Block64& block, Block64& out) {
  for (int i = 0; i < 64; ++i) out[i] = block[kZigzag[i]];
}

inline void inverse_zigzag(const Block64& scanned, Block64& out) {
  for (int i = 0; i < 64; ++i) out[kZigzag[i]] = scanned[i];
}

// ---------------------------------------------------------------------------
// Coefficient blocks and tile entropy coding
// ---------------------------------------------------------------------------

/// Quantized levels of one 8x8 block: differential DC plus 63 AC levels in
/// zigzag order. This is the unit the scrambler operates on.
struct CoeffBlock {
  std::int64_t dc_delta = 0;
  std::array<std::int64_t, 63> ac{};

  std::size_t nonzero_ac_count() const {
    std::size_t n = 0;
    for (const auto v : ac) n += (v != 0);
    return n;
  }

  bool operator==(const CoeffBlock&) const = default;
};

inline std::size_t tile_block_count(std::uint32_t luma_w, std::uint32_t luma_h) {
  const std::size_t luma = static_cast<std::size_t>(luma_w / 8) * (luma_h / 8);
  const std::size_t chroma = static_cast<std::size_t>(luma_w / 16) * (luma_h / 16);
  return luma + 2 * chroma;
}

inline void write_coeff_block(BitWriter& bw, const CoeffBlock& b) {
  bw.put_se(b.dc_delta);
  bw.put_ue(b.nonzero_ac_count());
  std::uint64_t run = 0;
  for (const auto level : b.ac) {
    if (level == 0) {
      ++run;
    } else {
      bw.put_ue(run);
      bw.put_se(level);
      run = 0;
    }
  }
}

inline CoeffBlock read_coeff_block(BitReader& br) {
  CoeffBlock b;
  b.dc_delta = br.get_se();
  const std::uint64_t nnz = br.get_ue();
  if (nnz > 63) fail(Errc::corrupt_payload, "block claims more than 63 AC levels");
  std::uint64_t pos = 0;
  for (std::uint64_t i = 0; i < nnz; ++i) {
    const std::uint64_t run = br.get_ue();
    const std::uint64_t idx = pos + run;
    if (idx > 62) fail(Errc::corrupt_payload, "AC zero-run overflows the block");
    const std::int64_t level = br.get_se();
    if (level == 0) fail(Errc::corrupt_payload, "zero level coded as nonzero AC");
    b.ac[idx] = level;
    pos = idx + 1;
  }
  return b;
}

inline std::pair<std::vector<std::uint8_t>, std::uint64_t> write_tile_payload(
    std::span<const CoeffBlock> blocks) {
  BitWriter bw;
  for (const auto& b : blocks) write_coeff_block(bw, b);
  const std::uint64_t bits = bw.bit_count();
  return {bw.take(), bits};
}

inline std::vector<CoeffBlock> parse_tile_payload(std::span<const std::uint8_t> payload,
                                                  std::uint64_t bit_length,
                                                  std::size_t block_count) {
  BitReader br(payload, bit_length);
  std::vector<CoeffBlock> blocks;
  blocks.reserve(block_count);
  for (std::size_t i = 0; i < block_count; ++i) blocks.push_back(read_coeff_block(br));
  if (br.position() != bit_length)
    fail(Errc::corrupt_payload, "payload bit length does not match its block content");
  return blocks;
}

// ---------------------------------------------------------------------------
// Tile codec
// ---------------------------------------------------------------------------

/// Tile-local reconstructed pixels (4:2:0, luma_w x luma_h).
struct TilePixels {
  std::uint32_t luma_w = 0, luma_h = 0;
  std::vector<std::uint8_t> y, u, v;

  static TilePixels allocate(std::uint32_t w, std::uint32_t h) {
    TilePixels t;
    t.luma_w = w;
    t.luma_h = h;
    t.y.assign(static_cast<std::size_t>(w) * h, 0);
    t.u.assign(static_cast<std::size_t>(w / 2) * (h / 2), 0);
    t.v.assign(static_cast<std::size_t>(w / 2) * (h / 2), 0);
    return t;
  }

  bool operator==(const TilePixels&) const = default;
};

struct TileEncodeResult {
  std::vector<std::uint8_t> payload;
  std::uint64_t payload_bits = 0;
  TilePixels recon;
};

namespace detail {

inline std::uint8_t clamp_pixel(std::int64_t v) {
  return static_cast<std::uint8_t>(std::clamp<std::int64_t>(v, 0, 255));
}

inline std::array<std::uint8_t, 64> reconstruct_block(const Block64& levels_raster,
                                                      std::int64_t pred, const QuantParams& q) {
  Block64 coeffs, pixels;
  for (int i = 0; i < 64; ++i) coeffs[i] = dequantize(levels_raster[i], q);
  fwht8_inverse(coeffs, pixels);
  std::array<std::uint8_t, 64> out{};
  for (int i = 0; i < 64; ++i) out[i] = clamp_pixel(pixels[i] + pred);
  return out;
}

inline std::int64_t block_mean(const std::array<std::uint8_t, 64>& px) {
  std::int64_t sum = 0;
  for (const auto v : px) sum += v;
  return (sum + 32) >> 6;
}

// Prediction runs left to right along each row of blocks and restarts at the
// row start (flat 128 / DC baseline 0), so nothing crosses tile boundaries.
inline void encode_plane(const std::uint8_t* src, std::size_t src_stride, std::uint32_t ox,
                         std::uint32_t oy, std::uint32_t w, std::uint32_t h,
                         const QuantParams& q, std::vector<CoeffBlock>& out_blocks,
                         std::uint8_t* recon, std::size_t recon_stride) {
  for (std::uint32_t by = 0; by < h; by += 8) {
    std::int64_t pred = 128;
    std::int64_t prev_dc = 0;
    for (std::uint32_t bx = 0; bx < w; bx += 8) {
      Block64 residual;
      for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c)
          residual[static_cast<std::size_t>(r) * 8 + c] =
              static_cast<std::int64_t>(src[(oy + by + r) * src_stride + ox + bx + c]) - pred;

      Block64 coeffs, levels;
      fwht8_forward(residual, coeffs);
      for (int i = 0; i < 64; ++i) levels[i] = quantize(coeffs[i], q);

      CoeffBlock b;
      b.dc_delta = levels[0] - prev_dc;
      prev_dc = levels[0];
      for (int s = 1; s < 64; ++s) b.ac[s - 1] = levels[kZigzag[s]];
      out_blocks.push_back(b);

      const auto px = reconstruct_block(levels, pred, q);
      for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c)
          recon[(by + r) * recon_stride + bx + c] = px[static_cast<std::size_t>(r) * 8 + c];
      pred = block_mean(px);
    }
  }
}

inline void decode_plane(std::span<const CoeffBlock> blocks, std::uint32_t w, std::uint32_t h,
                         const QuantParams& q, std::uint8_t* recon, std::size_t recon_stride) {
  constexpr std::int64_t kDcChainClamp = std::int64_t{1} << 60;
  std::size_t bi = 0;
  for (std::uint32_t by = 0; by < h; by += 8) {
    std::int64_t pred = 128;
    std::int64_t prev_dc = 0;
    for (std::uint32_t bx = 0; bx < w; bx += 8, ++bi) {
      const CoeffBlock& b = blocks[bi];
      const std::int64_t dc =
          std::clamp(prev_dc + b.dc_delta, -kDcChainClamp, kDcChainClamp);
      prev_dc = dc;

      Block64 levels{};
      levels[0] = dc;
      for (int s = 1; s < 64; ++s) levels[kZigzag[s]] = b.ac[s - 1];

      const auto px = reconstruct_block(levels, pred, q);
      for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c)
          recon[(by + r) * recon_stride + bx + c] = px[static_cast<std::size_t>(r) * 8 + c];
      pred = block_mean(px);
    }
  }
}

}  // namespace detail

/// Encodes one tile region. The returned reconstruction is byte-identical to
/// what decode_tile produces from the payload.
inline TileEncodeResult encode_tile(const FrameYUV& frame, const TileRect& rect,
                                    const QuantParams& q) {
  TileEncodeResult res;
  res.recon = TilePixels::allocate(rect.w, rect.h);
  std::vector<CoeffBlock> blocks;
  blocks.reserve(tile_block_count(rect.w, rect.h));
  detail::encode_plane(frame.y.data(), frame.width, rect.x0, rect.y0, rect.w, rect.h, q, blocks,
                       res.recon.y.data(), rect.w);
  detail::encode_plane(frame.u.data(), frame.width / 2, rect.x0 / 2, rect.y0 / 2, rect.w / 2,
                       rect.h / 2, q, blocks, res.recon.u.data(), rect.w / 2);
  detail::encode_plane(frame.v.data(), frame.width / 2, rect.x0 / 2, rect.y0 / 2, rect.w / 2,
                       rect.h / 2, q, blocks, res.recon.v.data(), rect.w / 2);
  auto [payload, bits] = write_tile_payload(blocks);
  res.payload = std::move(payload);
  res.payload_bits = bits;
  return res;
}

/// Structural truncation raises TruncatedStream; any level values decode to
/// valid pixels, so scrambled payloads come out as noise, never as a crash.
inline TilePixels decode_tile(std::span<const std::uint8_t> payload, std::uint64_t payload_bits,
                              std::uint32_t luma_w, std::uint32_t luma_h, const QuantParams& q) {
  const auto blocks = parse_tile_payload(payload, payload_bits, tile_block_count(luma_w, luma_h));
  TilePixels out = TilePixels::allocate(luma_w, luma_h);
  const std::size_t luma_blocks = static_cast<std::size_t>(luma_w / 8) * (luma_h / 8);
  const std::size_t chroma_blocks = static_cast<std::size_t>(luma_w / 16) * (luma_h / 16);
  std::span<const CoeffBlock> all(blocks);
  detail::decode_plane(all.subspan(0, luma_blocks), luma_w, luma_h, q, out.y.data(), luma_w);
  detail::decode_plane(all.subspan(luma_blocks, chroma_blocks), luma_w / 2, luma_h / 2, q,
                       out.u.data(), luma_w / 2);
  detail::decode_plane(all.subspan(luma_blocks + chroma_blocks, chroma_blocks), luma_w / 2,
                       luma_h / 2, q, out.v.data(), luma_w / 2);
  return out;
}

// ---------------------------------------------------------------------------
// Frame codec
// ---------------------------------------------------------------------------

inline std::vector<TileRecord> encode_frame(const FrameYUV& frame, const TileGrid& grid,
                                            const QuantParams& q,
                                            std::span<const std::uint8_t> tile_classes) {
  if (grid.col_bounds.back() != frame.width || grid.row_bounds.back() != frame.height)
    fail(Errc::dimension_mismatch, "tile grid does not span the frame");
  if (tile_classes.size() != grid.tile_count())
    fail(Errc::dimension_mismatch, "tile_classes length does not match the grid");

  std::vector<TileRecord> records(grid.tile_count());
  detail::parallel_for(grid.tile_count(), [&](std::size_t i) {
    auto enc = encode_tile(frame, grid.rect(i), q);
    records[i].class_id = tile_classes[i];
    records[i].payload_bit_length = static_cast<std::uint32_t>(enc.payload_bits);
    records[i].payload = std::move(enc.payload);
  });
  return records;
}

inline FrameYUV decode_frame(std::span<const TileRecord> records, const ContainerHeader& header) {
  const TileGrid grid = grid_for_header(header);
  if (records.size() != grid.tile_count())
    fail(Errc::dimension_mismatch, "record count does not match the tile grid");
  const QuantParams q = make_quant_params(header.qp);
  FrameYUV out = FrameYUV::allocate(header.width, header.height);

  detail::parallel_for(grid.tile_count(), [&](std::size_t i) {
    const TileRect r = grid.rect(i);
    const TilePixels px = decode_tile(records[i].payload, records[i].payload_bit_length, r.w, r.h, q);
    for (std::uint32_t row = 0; row < r.h; ++row)
      std::copy_n(px.y.data() + static_cast<std::size_t>(row) * r.w, r.w,
                  out.y.data() + static_cast<std::size_t>(r.y0 + row) * out.width + r.x0);
    const std::uint32_t cw = r.w / 2, ch = r.h / 2;
    for (std::uint32_t row = 0; row < ch; ++row) {
      std::copy_n(px.u.data() + static_cast<std::size_t>(row) * cw, cw,
                  out.u.data() + static_cast<std::size_t>(r.y0 / 2 + row) * (out.width / 2) + r.x0 / 2);
      std::copy_n(px.v.data() + static_cast<std::size_t>(row) * cw, cw,
                  out.v.data() + static_cast<std::size_t>(r.y0 / 2 + row) * (out.width / 2) + r.x0 / 2);
    }
  });
  return out;
}

}  // namespace arhe
