#pragma once

#include <stdexcept>
#include <string>

namespace arhe {

enum class Errc {
  bad_magic,
  unsupported_version,
  truncated_stream,
  invalid_header,
  dimension_mismatch,
  invalid_grid,
  corrupt_payload,
  keystream_exhausted,
  unknown_tier,
  no_region,
  empty_track,
  out_of_bounds,
  bad_key,
  io_failure,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::bad_magic: return "BadMagic";
    case Errc::unsupported_version: return "UnsupportedVersion";
    case Errc::truncated_stream: return "TruncatedStream";
    case Errc::invalid_header: return "InvalidHeader";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::invalid_grid: return "InvalidGrid";
    case Errc::corrupt_payload: return "CorruptPayload";
    case Errc::keystream_exhausted: return "KeystreamExhausted";
    case Errc::unknown_tier: return "UnknownTier";
    case Errc::no_region: return "NoRegion";
    case Errc::empty_track: return "EmptyTrack";
    case Errc::out_of_bounds: return "OutOfBounds";
    case Errc::bad_key: return "BadKey";
    case Errc::io_failure: return "IoFailure";
  }
  return "Error";
}

/// All data/format failures in the library throw this one type; code() tells them apart.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace arhe
