#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hybridlab/config.hpp"
#include "hybridlab/stability.hpp"

namespace hybridlab {

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& text);
std::string hex64(std::uint64_t value);

/// Creates `dir` (and parents) if needed; returns it.
std::string ensure_directory(const std::string& dir);
std::string join_path(const std::string& dir, const std::string& file);

struct RunManifest {
  std::string command;
  ExperimentConfig config;
  std::vector<std::string> files;  // relative to the run directory
  double seconds = 0.0;
  std::string status = "ok";
};

/// manifest.json: command, config hash and full config, seed, library and
/// compiler versions, artifact list.
void write_manifest(const std::string& dir, const RunManifest& manifest);

/// tau_s, p, rightmost_re, label
void write_chart_csv(const std::string& path, const StabilityGrid& grid);
/// curve, tau_s, p, omega_rad_s
void write_boundaries_csv(const std::string& path, const std::vector<BoundaryCurve>& curves);

}  // namespace hybridlab
