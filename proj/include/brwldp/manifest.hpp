#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace brwldp {

/// Library version string.
std::string version();

/// Everything that determines a run. Serialised as canonical JSON (sorted
/// keys, no whitespace); the hash is FNV-1a 64 of that text.
struct ExperimentManifest {
  std::string command;
  std::string offspring = "1:0.5,2:0.5";
  std::string step = "rademacher";
  std::string set = "(-inf,0]";
  double p = 0.75;
  std::vector<int> n_grid;
  std::uint64_t replicas = 0;
  std::string method;
  std::optional<double> eps;
  std::optional<double> eta;
  std::optional<int> d;
  std::optional<double> alpha_iter;
  std::uint64_t seed = 1;
  std::string out;

  nlohmann::json to_json() const;
  static ExperimentManifest from_json(const nlohmann::json& j);
  /// Canonical serialised form.
  std::string canonical() const;
  /// 16 hex digits.
  std::string hash() const;

  friend bool operator==(const ExperimentManifest&, const ExperimentManifest&) = default;
};

/// FNV-1a 64.
std::uint64_t fnv1a64(const std::string& text);

}  // namespace brwldp
