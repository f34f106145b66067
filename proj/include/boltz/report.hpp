#pragma once

#include <map>
#include <string>
#include <vector>

#include "boltz/core.hpp"

// Machine-readable run artifacts: one JSON certificate per verified estimate
// ({lemma, inputs, measured, threshold, pass}) and a manifest listing every
// emitted file with its checksum, so a rerun of the same config can be
// compared byte for byte.

namespace boltz {

struct Certificate {
  std::string lemma;  // stable label of the estimate this certifies
  std::map<std::string, double> inputs;
  std::map<std::string, double> measured;
  std::map<std::string, double> threshold;
  bool pass = false;
  std::string detail;
};

std::string certificate_json(const Certificate& c);

struct Artifact {
  std::string path;      // relative to the output directory
  std::string checksum;  // 64-bit FNV-1a over the bytes, lowercase hex
};

struct RunManifest {
  std::string config_hash;  // FNV-1a of the effective key = value view
  std::map<std::string, std::string> xsection;
  std::map<std::string, std::string> grid;
  std::vector<Artifact> artifacts;
  std::vector<std::pair<std::string, double>> timings_s;  // phase, seconds
};

std::string manifest_json(const RunManifest& m);

// Shortest representation that parses back to the same double.
std::string fmt17(double x);

// Write bytes to dir/rel and append (rel, checksum) to the manifest.
bool emit_artifact(RunManifest& m, const std::string& dir, const std::string& rel,
                   const std::string& bytes, std::string* err);

}  // namespace boltz
