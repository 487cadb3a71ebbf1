#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "arhe/codec.hpp"
#include "arhe/error.hpp"
#include "arhe/frame.hpp"

namespace arhe {

// ---------------------------------------------------------------------------
// Sensitivity classes
// ---------------------------------------------------------------------------

enum class SensitivityClass : std::uint8_t {
  face = 1,
  display_content = 2,
  id_card = 3,
};

inline constexpr std::array<SensitivityClass, 3> kAllClasses{
    SensitivityClass::face, SensitivityClass::display_content, SensitivityClass::id_card};

/// face outranks display_content outranks id_card.
inline int importance_rank(SensitivityClass c) {
  switch (c) {
    case SensitivityClass::face: return 3;
    case SensitivityClass::display_content: return 2;
    case SensitivityClass::id_card: return 1;
  }
  return 0;
}

inline std::string class_name(SensitivityClass c) {
  switch (c) {
    case SensitivityClass::face: return "face";
    case SensitivityClass::display_content: return "display_content";
    case SensitivityClass::id_card: return "id_card";
  }
  return "?";
}

inline std::optional<SensitivityClass> class_from_name(const std::string& name) {
  for (const auto c : kAllClasses)
    if (class_name(c) == name) return c;
  return std::nullopt;
}

inline std::optional<SensitivityClass> class_from_id(std::uint8_t id) {
  if (id >= 1 && id <= 3) return static_cast<SensitivityClass>(id);
  return std::nullopt;
}

inline std::uint8_t class_id(SensitivityClass c) { return static_cast<std::uint8_t>(c); }

// ---------------------------------------------------------------------------
// Boxes, tracks, timelines
// ---------------------------------------------------------------------------

struct RoiBox {
  std::int32_t x = 0, y = 0;
  std::int32_t w = 1, h = 1;

  bool operator==(const RoiBox&) const = default;
};

struct RoiKeyframe {
  std::uint32_t frame = 0;
  RoiBox box;
};

struct RoiTrack {
  std::string object_id;
  SensitivityClass cls = SensitivityClass::face;
  std::vector<RoiKeyframe> keyframes;  // frame indices strictly increasing
};

struct RoiTimeline {
  std::uint32_t frame_count = 0;
  std::vector<RoiTrack> tracks;
};

/// Intersects a box with the frame; nullopt when nothing remains.
inline std::optional<RoiBox> clip_box(const RoiBox& b, std::uint32_t frame_w, std::uint32_t frame_h) {
  const std::int64_t x0 = std::max<std::int64_t>(b.x, 0);
  const std::int64_t y0 = std::max<std::int64_t>(b.y, 0);
  const std::int64_t x1 = std::min<std::int64_t>(static_cast<std::int64_t>(b.x) + b.w, frame_w);
  const std::int64_t y1 = std::min<std::int64_t>(static_cast<std::int64_t>(b.y) + b.h, frame_h);
  if (x1 <= x0 || y1 <= y0) return std::nullopt;
  return RoiBox{static_cast<std::int32_t>(x0), static_cast<std::int32_t>(y0),
                static_cast<std::int32_t>(x1 - x0), static_cast<std::int32_t>(y1 - y0)};
}

namespace detail {

// round-half-up of (a*(span-t) + b*t) / span; operands are non-negative.
inline std::int32_t lerp_round(std::int64_t a, std::int64_t b, std::int64_t t, std::int64_t span) {
  const std::int64_t num = a * (span - t) + b * t;
  return static_cast<std::int32_t>((2 * num + span) / (2 * span));
}

}  // namespace detail

/// Linear interpolation between bracketing keyframes, clamped outside the range.
inline RoiBox interpolate_box(const RoiTrack& track, std::uint32_t frame) {
  if (track.keyframes.empty()) fail(Errc::empty_track, "track '" + track.object_id + "' has no keyframes");
  const auto& kfs = track.keyframes;
  if (frame <= kfs.front().frame) return kfs.front().box;
  if (frame >= kfs.back().frame) return kfs.back().box;
  std::size_t hi = 1;
  while (kfs[hi].frame < frame) ++hi;
  const auto& a = kfs[hi - 1];
  const auto& b = kfs[hi];
  if (b.frame == frame) return b.box;
  const std::int64_t span = b.frame - a.frame;
  const std::int64_t t = frame - a.frame;
  return RoiBox{detail::lerp_round(a.box.x, b.box.x, t, span),
                detail::lerp_round(a.box.y, b.box.y, t, span),
                detail::lerp_round(a.box.w, b.box.w, t, span),
                detail::lerp_round(a.box.h, b.box.h, t, span)};
}

// ---------------------------------------------------------------------------
// Box -> tile labels
// ---------------------------------------------------------------------------

/// Any-pixel overlap labels the tile; on conflicts the higher importance rank
/// wins. Label 0 means plaintext.
inline std::vector<std::uint8_t> boxes_to_tile_classes(
    std::span<const std::pair<RoiBox, SensitivityClass>> boxes, const TileGrid& grid) {
  std::vector<std::uint8_t> labels(grid.tile_count(), 0);
  for (std::size_t i = 0; i < grid.tile_count(); ++i) {
    const TileRect r = grid.rect(i);
    int best_rank = 0;
    for (const auto& [box, cls] : boxes) {
      const bool overlaps = box.x < static_cast<std::int64_t>(r.x0) + r.w &&
                            box.x + box.w > static_cast<std::int64_t>(r.x0) &&
                            box.y < static_cast<std::int64_t>(r.y0) + r.h &&
                            box.y + box.h > static_cast<std::int64_t>(r.y0);
      if (overlaps && importance_rank(cls) > best_rank) {
        best_rank = importance_rank(cls);
        labels[i] = class_id(cls);
      }
    }
  }
  return labels;
}

/// Interpolates every track at `frame`, clips to the frame, and labels tiles.
inline std::vector<std::uint8_t> tile_labels_for_frame(const RoiTimeline& timeline,
                                                       const TileGrid& grid, std::uint32_t frame,
                                                       std::uint32_t frame_w,
                                                       std::uint32_t frame_h) {
  std::vector<std::pair<RoiBox, SensitivityClass>> boxes;
  for (const auto& track : timeline.tracks) {
    if (track.keyframes.empty()) continue;
    if (const auto clipped = clip_box(interpolate_box(track, frame), frame_w, frame_h))
      boxes.emplace_back(*clipped, track.cls);
  }
  return boxes_to_tile_classes(boxes, grid);
}

// ---------------------------------------------------------------------------
// SAD tracker
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t box_sad(const FrameYUV& prev, const FrameYUV& cur, const RoiBox& at,
                             std::int32_t dx, std::int32_t dy) {
  std::uint64_t sad = 0;
  for (std::int32_t r = 0; r < at.h; ++r) {
    const std::uint8_t* p = prev.y.data() + static_cast<std::size_t>(at.y + r) * prev.width + at.x;
    const std::uint8_t* c =
        cur.y.data() + static_cast<std::size_t>(at.y + dy + r) * cur.width + at.x + dx;
    for (std::int32_t k = 0; k < at.w; ++k)
      sad += static_cast<std::uint64_t>(p[k] > c[k] ? p[k] - c[k] : c[k] - p[k]);
  }
  return sad;
}

}  // namespace detail

inline constexpr std::int32_t kTrackSearchRange = 8;

/// Tracks a fixed-size box frame to frame by exhaustive SAD over luma with
/// displacement in [-8,8]^2. Ties prefer smaller |dy|, then smaller |dx|, then
/// the negative sign. Deterministic by construction.
inline RoiTrack track_box(std::span<const FrameYUV> frames, std::uint32_t start_frame,
                          std::uint32_t end_frame, const RoiBox& init, SensitivityClass cls,
                          std::string object_id) {
  if (frames.empty() || end_frame <= start_frame || end_frame >= frames.size())
    fail(Errc::out_of_bounds, "frame range [" + std::to_string(start_frame) + "," +
                                  std::to_string(end_frame) + "] invalid for " +
                                  std::to_string(frames.size()) + " frames");
  const auto& first = frames[start_frame];
  if (init.w < 1 || init.h < 1 || init.x < 0 || init.y < 0 ||
      init.x + init.w > static_cast<std::int64_t>(first.width) ||
      init.y + init.h > static_cast<std::int64_t>(first.height))
    fail(Errc::out_of_bounds, "initial box exceeds frame bounds");

  RoiTrack track{std::move(object_id), cls, {}};
  track.keyframes.push_back({start_frame, init});
  RoiBox box = init;
  for (std::uint32_t f = start_frame + 1; f <= end_frame; ++f) {
    const FrameYUV& prev = frames[f - 1];
    const FrameYUV& cur = frames[f];
    std::uint64_t best = UINT64_MAX;
    std::int32_t best_dx = 0, best_dy = 0;
    // Candidates enumerated in tie-break order: |dy| outer, |dx| inner,
    // negative sign first; only a strictly better SAD replaces the best.
    for (std::int32_t ay = 0; ay <= kTrackSearchRange; ++ay)
      for (std::int32_t ax = 0; ax <= kTrackSearchRange; ++ax)
        for (int sy = 0; sy < (ay == 0 ? 1 : 2); ++sy)
          for (int sx = 0; sx < (ax == 0 ? 1 : 2); ++sx) {
            const std::int32_t dy = sy == 0 ? -ay : ay;
            const std::int32_t dx = sx == 0 ? -ax : ax;
            const std::int64_t nx = box.x + dx, ny = box.y + dy;
            if (nx < 0 || ny < 0 || nx + box.w > static_cast<std::int64_t>(cur.width) ||
                ny + box.h > static_cast<std::int64_t>(cur.height))
              continue;
            const std::uint64_t sad = detail::box_sad(prev, cur, box, dx, dy);
            if (sad < best) {
              best = sad;
              best_dx = dx;
              best_dy = dy;
            }
          }
    box.x += best_dx;
    box.y += best_dy;
    track.keyframes.push_back({f, box});
  }
  return track;
}

// ---------------------------------------------------------------------------
// JSON sidecar
// ---------------------------------------------------------------------------

inline void validate_timeline(const RoiTimeline& t) {
  for (const auto& track : t.tracks) {
    std::int64_t prev = -1;
    for (const auto& kf : track.keyframes) {
      if (static_cast<std::int64_t>(kf.frame) <= prev)
        fail(Errc::invalid_header, "track '" + track.object_id + "' keyframes not strictly increasing");
      if (kf.frame >= t.frame_count)
        fail(Errc::invalid_header, "track '" + track.object_id + "' keyframe " +
                                       std::to_string(kf.frame) + " >= frame_count");
      if (kf.box.w < 1 || kf.box.h < 1)
        fail(Errc::invalid_header, "track '" + track.object_id + "' has a degenerate box");
      prev = kf.frame;
    }
  }
}

inline nlohmann::json timeline_to_json(const RoiTimeline& t) {
  nlohmann::json tracks = nlohmann::json::array();
  for (const auto& track : t.tracks) {
    nlohmann::json kfs = nlohmann::json::array();
    for (const auto& kf : track.keyframes)
      kfs.push_back({{"frame", kf.frame},
                     {"x", kf.box.x},
                     {"y", kf.box.y},
                     {"w", kf.box.w},
                     {"h", kf.box.h}});
    tracks.push_back({{"object_id", track.object_id},
                      {"class", class_name(track.cls)},
                      {"keyframes", std::move(kfs)}});
  }
  return {{"frame_count", t.frame_count}, {"tracks", std::move(tracks)}};
}

inline RoiTimeline timeline_from_json(const nlohmann::json& j) {
  RoiTimeline t;
  try {
    t.frame_count = j.at("frame_count").get<std::uint32_t>();
    for (const auto& jt : j.at("tracks")) {
      RoiTrack track;
      track.object_id = jt.at("object_id").get<std::string>();
      const auto cls = class_from_name(jt.at("class").get<std::string>());
      if (!cls) fail(Errc::invalid_header, "unknown sensitivity class in roi file");
      track.cls = *cls;
      for (const auto& jk : jt.at("keyframes")) {
        RoiKeyframe kf;
        kf.frame = jk.at("frame").get<std::uint32_t>();
        kf.box = {jk.at("x").get<std::int32_t>(), jk.at("y").get<std::int32_t>(),
                  jk.at("w").get<std::int32_t>(), jk.at("h").get<std::int32_t>()};
        track.keyframes.push_back(kf);
      }
      t.tracks.push_back(std::move(track));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::invalid_header, std::string("malformed roi json: ") + e.what());
  }
  validate_timeline(t);
  return t;
}

inline RoiTimeline load_roi_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_failure, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::invalid_header, "malformed roi json in " + path.string() + ": " + e.what());
  }
  return timeline_from_json(j);
}

inline void save_roi_file(const std::filesystem::path& path, const RoiTimeline& t) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(Errc::io_failure, "cannot open " + path.string() + " for writing");
  out << timeline_to_json(t).dump(2) << "\n";
}

}  // namespace arhe
