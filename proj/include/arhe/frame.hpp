#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "arhe/error.hpp"

namespace arhe {

/// One planar 4:2:0 8-bit frame. Chroma planes are (width/2) x (height/2).
struct FrameYUV {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> y;
  std::vector<std::uint8_t> u;
  std::vector<std::uint8_t> v;

  static FrameYUV allocate(std::uint32_t w, std::uint32_t h) {
    FrameYUV f;
    f.width = w;
    f.height = h;
    f.y.assign(static_cast<std::size_t>(w) * h, 0);
    f.u.assign(static_cast<std::size_t>(w / 2) * (h / 2), 0);
    f.v.assign(static_cast<std::size_t>(w / 2) * (h / 2), 0);
    return f;
  }

  bool operator==(const FrameYUV&) const = default;
};

inline std::size_t frame_byte_size(std::uint32_t w, std::uint32_t h) {
  return static_cast<std::size_t>(w) * h * 3 / 2;
}

inline std::vector<FrameYUV> read_yuv_sequence(const std::filesystem::path& path,
                                               std::uint32_t width, std::uint32_t height,
                                               std::uint32_t frame_count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io_failure, "cannot open " + path.string());
  std::vector<FrameYUV> frames;
  frames.reserve(frame_count);
  for (std::uint32_t i = 0; i < frame_count; ++i) {
    FrameYUV f = FrameYUV::allocate(width, height);
    in.read(reinterpret_cast<char*>(f.y.data()), static_cast<std::streamsize>(f.y.size()));
    in.read(reinterpret_cast<char*>(f.u.data()), static_cast<std::streamsize>(f.u.size()));
    in.read(reinterpret_cast<char*>(f.v.data()), static_cast<std::streamsize>(f.v.size()));
    if (!in)
      fail(Errc::truncated_stream, "truncated input: " + path.string() + " holds fewer than " +
                                       std::to_string(frame_count) + " frames of " +
                                       std::to_string(width) + "x" + std::to_string(height));
    frames.push_back(std::move(f));
  }
  return frames;
}

inline void write_yuv_sequence(const std::filesystem::path& path,
                               const std::vector<FrameYUV>& frames) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::io_failure, "cannot open " + path.string() + " for writing");
  for (const auto& f : frames) {
    out.write(reinterpret_cast<const char*>(f.y.data()), static_cast<std::streamsize>(f.y.size()));
    out.write(reinterpret_cast<const char*>(f.u.data()), static_cast<std::streamsize>(f.u.size()));
    out.write(reinterpret_cast<const char*>(f.v.data()), static_cast<std::streamsize>(f.v.size()));
  }
  if (!out) fail(Errc::io_failure, "write failed: " + path.string());
}

}  // namespace arhe
