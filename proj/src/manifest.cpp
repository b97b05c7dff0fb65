#include "brwldp/manifest.hpp"

#include <cstdio>
#include <stdexcept>

namespace brwldp {

std::string version() { return BRWLDP_VERSION; }

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

nlohmann::json ExperimentManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["offspring"] = offspring;
  j["step"] = step;
  j["set"] = set;
  j["p"] = p;
  j["n_grid"] = n_grid;
  j["replicas"] = replicas;
  j["method"] = method;
  j["eps"] = eps ? nlohmann::json(*eps) : nlohmann::json(nullptr);
  j["eta"] = eta ? nlohmann::json(*eta) : nlohmann::json(nullptr);
  j["d"] = d ? nlohmann::json(*d) : nlohmann::json(nullptr);
  j["alpha_iter"] = alpha_iter ? nlohmann::json(*alpha_iter) : nlohmann::json(nullptr);
  j["seed"] = seed;
  j["out"] = out;
  return j;
}

ExperimentManifest ExperimentManifest::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("manifest: expected a JSON object");
  ExperimentManifest m;
  auto opt_d = [&](const char* k) -> std::optional<double> {
    if (!j.contains(k) || j[k].is_null()) return std::nullopt;
    return j[k].get<double>();
  };
  try {
    m.command = j.value("command", m.command);
    m.offspring = j.value("offspring", m.offspring);
    m.step = j.value("step", m.step);
    m.set = j.value("set", m.set);
    m.p = j.value("p", m.p);
    m.n_grid = j.value("n_grid", m.n_grid);
    m.replicas = j.value("replicas", m.replicas);
    m.method = j.value("method", m.method);
    m.eps = opt_d("eps");
    m.eta = opt_d("eta");
    if (j.contains("d") && !j["d"].is_null()) m.d = j["d"].get<int>();
    m.alpha_iter = opt_d("alpha_iter");
    m.seed = j.value("seed", m.seed);
    m.out = j.value("out", m.out);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("manifest: ") + e.what());
  }
  return m;
}

std::string ExperimentManifest::canonical() const { return to_json().dump(); }

std::string ExperimentManifest::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical())));
  return buf;
}

}  // namespace brwldp
