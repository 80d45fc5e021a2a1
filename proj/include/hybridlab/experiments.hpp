#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hybridlab/config.hpp"
#include "hybridlab/continuation.hpp"
#include "hybridlab/oracle.hpp"
#include "hybridlab/stability.hpp"

namespace hybridlab {

// Each run writes its artifacts and manifest.json into `dir`; an empty `dir`
// skips all file output.

struct ChartRun {
  StabilityGrid grid;
  std::vector<BoundaryCurve> boundaries;
  std::vector<std::string> files;
};

ChartRun run_chart(const ExperimentConfig& cfg, const std::string& dir);

struct FrfCase {
  double mass_ratio = 0.0;
  FrfBranch branch;
  /// Storey-3 amplitude of the emulated assembly at each branch frequency.
  std::vector<double> oracle_amplitude;
};

struct FrfRun {
  std::vector<FrfCase> cases;
  ComplexFrf oracle;  // on the oracle grid
  std::vector<std::string> files;
};

FrfRun run_frf(const ExperimentConfig& cfg, const std::string& dir);

struct NonlinearRun {
  std::vector<FrfBranch> branches;  // in the order low, high
  std::vector<std::string> labels;
  std::optional<RefinedPoint> refined;
  std::optional<SweepResult> up, down;
  std::vector<std::string> files;
};

NonlinearRun run_frf_nl(const ExperimentConfig& cfg, const std::string& dir);

/// "p0.5"-style tag used in file names.
std::string ratio_tag(double p);

/// Fundamental-only natural solve at `f_hz` followed by the higher-harmonic
/// refinement of the nonlinear section.
RefinedPoint refine_nonlinear_point(const ExperimentConfig& cfg, double f_hz, double h);

}  // namespace hybridlab
