#pragma once

#include <iosfwd>
#include <string>

#include "prodyn/metrics.hpp"
#include "prodyn/progressive.hpp"
#include "prodyn/scene.hpp"

namespace prodyn {

enum class RunMode { kDirectAllLevels, kProgressive, kTracks, kEmbedded };

RunMode runModeFromName(const std::string& name);
std::string runModeName(RunMode mode);

struct RunSummary {
  RunMode mode = RunMode::kProgressive;
  std::vector<double> levelSeconds;
  std::vector<Trajectory> trajectories;  // one per level
  std::string directory;
};

/// Runs the scene and persists everything reproducible into `outDir`:
///   manifest.json            config hash, seed, counts, timings
///   frames/level{l}/         per-frame binary positions (+ solver targets)
///   frames/level{l}/*.obj    boundary surface export
///   metrics/*.csv            progressive mode only
RunSummary runScene(const Scene& scene, RunMode mode, const std::string& outDir);

/// Reloads a stored run as trajectories (positions + targets).
std::vector<Trajectory> loadRunTrajectories(const std::string& runDir);

/// Recomputes metric traces for a stored progressive run.
MetricTraces recomputeMetrics(const Scene& scene, const std::string& runDir);

/// Timing table, speedup ratio, and metric roll-ups for a completed run.
void writeReport(const std::string& runDir, std::ostream& out);

void writeFramePositions(const MatX& positions, const std::string& path);
MatX readFramePositions(const std::string& path);
void writeBoundaryObj(const SimplicialMesh& mesh, const BoundarySurface& boundary,
                      const MatX& positions, const std::string& path);

}  // namespace prodyn
