#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prodyn/mesh.hpp"

namespace prodyn {

/// Ordered list of meshes of the same domain, index 0 coarsest.
struct Hierarchy {
  std::vector<SimplicialMesh> levels;

  int numLevels() const { return static_cast<int>(levels.size()); }
  int dim() const { return levels.empty() ? 0 : levels.front().dim; }
};

struct HierarchyReport {
  struct LevelStats {
    int vertices = 0;
    int elements = 0;
    double volume = 0.0;
    VecD bboxLo, bboxHi;
    // max distance from this level's boundary vertices to the next finer
    // boundary; the decimation-gap knob. NaN for the finest level.
    double boundaryGap = 0.0;
  };
  std::vector<LevelStats> levels;
  std::vector<std::string> warnings;

  std::string toString() const;
};

/// Validates an already-assembled hierarchy (dim consistency, bbox overlap,
/// monotone counts as a warning) and fills the per-level report.
void validateHierarchy(const Hierarchy& hierarchy, HierarchyReport* report = nullptr);

/// Loads the ordered mesh list named by a manifest: a JSON file
/// {"levels":[{"path": "...", "label": "..."}, ...]} with paths relative
/// to the manifest location.
Hierarchy loadHierarchy(const std::string& manifestPath, HierarchyReport* report = nullptr);
Hierarchy loadHierarchy(const std::vector<std::string>& meshPaths,
                        HierarchyReport* report = nullptr);

void saveHierarchy(const Hierarchy& hierarchy, const std::string& directory,
                   const std::string& baseName, const std::string& manifestName);

/// Builds a `levels`-deep hierarchy by repeated red refinement of `base`.
/// jitter > 0 displaces interior vertices and resamples boundary vertices
/// along a smoothed, outward-pushed boundary so that levels are deliberately
/// non-nested. jitter is a fraction of the mean edge length, in [0, 0.3].
Hierarchy synthesizeTestHierarchy(const SimplicialMesh& base, int levels, double jitter,
                                  std::uint64_t seed = 17);

}  // namespace prodyn
