#pragma once

#include <string>
#include <vector>

#include "cscore/io.hpp"

namespace cscore {

// Published 30-epoch training trajectories of three CNN backbones on a
// binary chest X-ray task (class 0 = Normal, class 1 = Pneumonia): per-epoch
// AUC/accuracy plus C-Scores at epochs 1, 5, 10, 15, 20, 25, 30. Used as
// replay fixtures for the trajectory detectors.
struct ReferenceTrajectory {
  std::string architecture;
  std::vector<EpochMetrics> metrics;
  std::vector<ScoreRow> scores;  // per-class rows plus reported global rows
};

inline constexpr std::size_t kReferenceNormalSupport = 317;
inline constexpr std::size_t kReferencePneumoniaSupport = 855;

std::vector<ReferenceTrajectory> reference_trajectories();

/// Writes <dir>/<architecture>/epoch_metrics.csv and scores.csv for every
/// reference trajectory. Returns the architecture directories written.
std::vector<fs::path> write_reference_fixtures(const fs::path& dir);

}  // namespace cscore
