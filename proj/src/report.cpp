#include "boltz/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace boltz {

namespace {

// Fixed key order and fixed float formatting keep the JSON byte-stable, which
// the manifest checksum contract depends on.
nlohmann::ordered_json num_map(const std::map<std::string, double>& m) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m) j[k] = v;
  return j;
}

}  // namespace

std::string certificate_json(const Certificate& c) {
  nlohmann::ordered_json j;
  j["lemma"] = c.lemma;
  j["inputs"] = num_map(c.inputs);
  j["measured"] = num_map(c.measured);
  j["threshold"] = num_map(c.threshold);
  j["pass"] = c.pass;
  if (!c.detail.empty()) j["detail"] = c.detail;
  return j.dump(2) + "\n";
}

std::string manifest_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["config_hash"] = m.config_hash;
  nlohmann::ordered_json xs = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m.xsection) xs[k] = v;
  j["xsection"] = xs;
  nlohmann::ordered_json gr = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m.grid) gr[k] = v;
  j["grid"] = gr;
  j["artifacts"] = nlohmann::ordered_json::array();
  for (const auto& a : m.artifacts)
    j["artifacts"].push_back({{"path", a.path}, {"checksum", a.checksum}});
  j["timings_s"] = nlohmann::ordered_json::object();
  for (const auto& [phase, s] : m.timings_s) j["timings_s"][phase] = s;
  return j.dump(2) + "\n";
}

std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

bool emit_artifact(RunManifest& m, const std::string& dir, const std::string& rel,
                   const std::string& bytes, std::string* err) {
  std::filesystem::path p = std::filesystem::path(dir) / rel;
  std::error_code ec;
  std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary);
  if (!out) {
    if (err) *err = "cannot write " + p.string();
    return false;
  }
  out << bytes;
  out.close();
  if (!out) {
    if (err) *err = "short write to " + p.string();
    return false;
  }
  m.artifacts.push_back({rel, hex64(fnv1a64_str(bytes))});
  return true;
}

}  // namespace boltz
