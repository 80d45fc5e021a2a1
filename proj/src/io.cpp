#include "hybridlab/io.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

#ifndef HYBRIDLAB_VERSION
#define HYBRIDLAB_VERSION "dev"
#endif

namespace hybridlab {

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << value;
  return s.str();
}

std::string ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir + ": " + ec.message());
  return dir;
}

std::string join_path(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

void write_manifest(const std::string& dir, const RunManifest& m) {
  using nlohmann::json;
  const std::string cfg_text = config_to_json(m.config, -1);
  std::ostringstream compiler;
#if defined(__clang__)
  compiler << "clang " << __clang_major__ << '.' << __clang_minor__ << '.' << __clang_patchlevel__;
#elif defined(__GNUC__)
  compiler << "gcc " << __GNUC__ << '.' << __GNUC_MINOR__ << '.' << __GNUC_PATCHLEVEL__;
#else
  compiler << "unknown";
#endif
  json j = {
      {"command", m.command},
      {"status", m.status},
      {"seed", m.config.seed},
      {"config_hash", hex64(fnv1a(cfg_text))},
      {"config", json::parse(cfg_text)},
      {"versions",
       {{"hybridlab", HYBRIDLAB_VERSION},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                      "." + std::to_string(EIGEN_MINOR_VERSION)},
        {"compiler", compiler.str()},
        {"cxx_standard", static_cast<long>(__cplusplus)}}},
      {"files", m.files},
      {"seconds", m.seconds},
  };
  std::ofstream out(join_path(dir, "manifest.json"));
  if (!out) throw std::runtime_error("cannot write manifest in " + dir);
  out << j.dump(2) << '\n';
}

void write_chart_csv(const std::string& path, const StabilityGrid& grid) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << std::setprecision(12) << "tau_s,p,rightmost_re,label\n";
  for (const auto& c : grid.cells)
    out << c.tau << ',' << c.p << ',' << c.rightmost_re << ',' << to_string(c.label) << '\n';
}

void write_boundaries_csv(const std::string& path, const std::vector<BoundaryCurve>& curves) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << std::setprecision(12) << "curve,tau_s,p,omega_rad_s\n";
  for (std::size_t i = 0; i < curves.size(); ++i)
    for (const auto& p : curves[i].points)
      out << i << ',' << p.tau << ',' << p.p << ',' << p.omega << '\n';
}

}  // namespace hybridlab
