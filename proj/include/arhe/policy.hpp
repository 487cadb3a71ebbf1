#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "arhe/crypt.hpp"
#include "arhe/error.hpp"
#include "arhe/roi.hpp"

namespace arhe {

// ---------------------------------------------------------------------------
// Device tiers
// ---------------------------------------------------------------------------

enum class DeviceTier : std::uint8_t {
  projector = 0,   // public display, lowest privacy safety
  smartphone = 1,
  glasses = 2,     // personal display, highest privacy safety
};

inline constexpr std::array<DeviceTier, 3> kAllTiers{DeviceTier::projector, DeviceTier::smartphone,
                                                     DeviceTier::glasses};

inline int privacy_safety_rank(DeviceTier t) { return static_cast<int>(t); }

inline std::string tier_name(DeviceTier t) {
  switch (t) {
    case DeviceTier::projector: return "projector";
    case DeviceTier::smartphone: return "smartphone";
    case DeviceTier::glasses: return "glasses";
  }
  return "?";
}

inline std::optional<DeviceTier> tier_from_name(const std::string& name) {
  for (const auto t : kAllTiers)
    if (tier_name(t) == name) return t;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Policy matrix
// ---------------------------------------------------------------------------

/// Per-tier set of classes to encrypt. Valid matrices nest monotonically:
/// a safer tier never encrypts a class a less safe tier leaves plaintext.
struct PolicyMatrix {
  std::map<DeviceTier, std::set<SensitivityClass>> tiers;
};

inline PolicyMatrix default_policy() {
  PolicyMatrix m;
  m.tiers[DeviceTier::projector] = {SensitivityClass::face, SensitivityClass::display_content,
                                    SensitivityClass::id_card};
  m.tiers[DeviceTier::smartphone] = {SensitivityClass::face, SensitivityClass::display_content};
  m.tiers[DeviceTier::glasses] = {SensitivityClass::face};
  return m;
}

inline const std::set<SensitivityClass>& encrypt_set(const PolicyMatrix& m, DeviceTier tier) {
  const auto it = m.tiers.find(tier);
  if (it == m.tiers.end()) fail(Errc::unknown_tier, "policy has no tier '" + tier_name(tier) + "'");
  return it->second;
}

/// A device gets keys exactly for the classes it may view (broadcast-once
/// deployment): all classes minus its encrypt set.
inline KeyBundle key_bundle_for(const PolicyMatrix& m, DeviceTier tier, const MasterKey& master) {
  const auto& encrypted = encrypt_set(m, tier);
  std::set<SensitivityClass> viewable;
  for (const auto c : kAllClasses)
    if (!encrypted.contains(c)) viewable.insert(c);
  return bundle_for_classes(master, viewable);
}

struct PolicyViolation {
  DeviceTier less_safe;
  DeviceTier safer;
  SensitivityClass cls;  // encrypted for the safer tier but not the less safe one

  bool operator==(const PolicyViolation&) const = default;
};

/// Checks monotone nesting across every tier pair present in the matrix.
inline std::vector<PolicyViolation> validate_policy(const PolicyMatrix& m) {
  std::vector<PolicyViolation> violations;
  for (const auto& [a, set_a] : m.tiers)
    for (const auto& [b, set_b] : m.tiers) {
      if (privacy_safety_rank(a) >= privacy_safety_rank(b)) continue;
      for (const auto c : set_b)
        if (!set_a.contains(c)) violations.push_back({a, b, c});
    }
  return violations;
}

// ---------------------------------------------------------------------------
// Policy file
// ---------------------------------------------------------------------------

inline nlohmann::json policy_to_json(const PolicyMatrix& m) {
  nlohmann::json tiers = nlohmann::json::object();
  for (const auto& [tier, classes] : m.tiers) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto c : classes) arr.push_back(class_name(c));
    tiers[tier_name(tier)] = std::move(arr);
  }
  return {{"tiers", std::move(tiers)}};
}

/// Tiers omitted from the file fall back to the default matrix.
inline PolicyMatrix policy_from_json(const nlohmann::json& j) {
  PolicyMatrix m = default_policy();
  try {
    for (const auto& [name, arr] : j.at("tiers").items()) {
      const auto tier = tier_from_name(name);
      if (!tier) fail(Errc::unknown_tier, "unknown tier '" + name + "' in policy file");
      std::set<SensitivityClass> classes;
      for (const auto& cname : arr) {
        const auto cls = class_from_name(cname.get<std::string>());
        if (!cls) fail(Errc::invalid_header, "unknown class '" + cname.get<std::string>() + "' in policy file");
        classes.insert(*cls);
      }
      m.tiers[*tier] = std::move(classes);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::invalid_header, std::string("malformed policy json: ") + e.what());
  }
  return m;
}

inline PolicyMatrix load_policy_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_failure, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::invalid_header, "malformed policy json in " + path.string() + ": " + e.what());
  }
  return policy_from_json(j);
}

}  // namespace arhe
