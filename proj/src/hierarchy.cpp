#include "prodyn/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "prodyn/geometry.hpp"
#include "prodyn/meshgen.hpp"
#include "prodyn/rng.hpp"

namespace prodyn {

namespace {

double boxVolume(const VecD& lo, const VecD& hi) {
  double volume = 1.0;
  for (int k = 0; k < lo.size(); ++k) volume *= std::max(0.0, hi[k] - lo[k]);
  return volume;
}

double bboxJaccard(const SimplicialMesh& a, const SimplicialMesh& b) {
  VecD alo, ahi, blo, bhi;
  a.bbox(alo, ahi);
  b.bbox(blo, bhi);
  const double inter = boxVolume(alo.cwiseMax(blo), ahi.cwiseMin(bhi));
  const double uni = boxVolume(alo, ahi) + boxVolume(blo, bhi) - inter;
  return uni > 0 ? inter / uni : 0.0;
}

// Max over coarse boundary vertices of the distance to the fine boundary.
double boundaryGap(const SimplicialMesh& coarse, const SimplicialMesh& fine) {
  const BoundarySurface coarseBoundary = extractBoundary(coarse);
  const BoundarySurface fineBoundary = extractBoundary(fine);
  std::set<int> coarseVerts;
  for (int f = 0; f < coarseBoundary.numFacets(); ++f)
    for (int k = 0; k < coarse.dim; ++k) coarseVerts.insert(coarseBoundary.facets(k, f));

  double gap = 0.0;
  MatX corners(fine.dim, fine.dim);
  for (int v : coarseVerts) {
    const VecD p = coarse.vertex(v);
    double best = std::numeric_limits<double>::infinity();
    for (int f = 0; f < fineBoundary.numFacets(); ++f) {
      for (int k = 0; k < fine.dim; ++k) corners.col(k) = fine.vertex(fineBoundary.facets(k, f));
      best = std::min(best, closestPointOnFacet(p, corners).distance);
    }
    gap = std::max(gap, best);
  }
  return gap;
}

}  // namespace

std::string HierarchyReport::toString() const {
  std::ostringstream out;
  out << "level  vertices  elements      volume  boundary_gap\n";
  for (size_t l = 0; l < levels.size(); ++l) {
    const auto& s = levels[l];
    out << l << "  " << s.vertices << "  " << s.elements << "  " << s.volume << "  ";
    if (std::isnan(s.boundaryGap))
      out << "-";
    else
      out << s.boundaryGap;
    out << "\n";
  }
  for (const auto& w : warnings) out << "warning: " << w << "\n";
  return out.str();
}

void validateHierarchy(const Hierarchy& hierarchy, HierarchyReport* report) {
  if (hierarchy.numLevels() < 2) throw configError("hierarchy: need at least 2 levels");
  const int dim = hierarchy.levels.front().dim;
  HierarchyReport localReport;
  for (int l = 0; l < hierarchy.numLevels(); ++l) {
    const auto& mesh = hierarchy.levels[l];
    if (mesh.dim != dim)
      throw configError("hierarchy: dim mismatch at level " + std::to_string(l));
    HierarchyReport::LevelStats stats;
    stats.vertices = mesh.numVertices();
    stats.elements = mesh.numElements();
    stats.volume = mesh.totalRestVolume();
    mesh.bbox(stats.bboxLo, stats.bboxHi);
    stats.boundaryGap = std::numeric_limits<double>::quiet_NaN();
    localReport.levels.push_back(stats);
  }
  for (int l = 0; l + 1 < hierarchy.numLevels(); ++l) {
    const auto& coarse = hierarchy.levels[l];
    const auto& fine = hierarchy.levels[l + 1];
    if (bboxJaccard(coarse, fine) < 0.5)
      throw configError("hierarchy: levels " + std::to_string(l) + " and " +
                        std::to_string(l + 1) + " do not overlap");
    if (fine.numVertices() < coarse.numVertices())
      localReport.warnings.push_back("vertex count decreases from level " + std::to_string(l) +
                                     " to " + std::to_string(l + 1));
    const double gap = boundaryGap(coarse, fine);
    localReport.levels[l].boundaryGap = gap;
    if (gap > 0.1 * fine.bboxDiagonal())
      localReport.warnings.push_back("boundary gap " + std::to_string(gap) + " at level " +
                                     std::to_string(l) + " exceeds 0.1 x fine bbox diagonal");
  }
  if (report) *report = std::move(localReport);
}

Hierarchy loadHierarchy(const std::vector<std::string>& meshPaths, HierarchyReport* report) {
  if (meshPaths.size() < 2) throw configError("hierarchy: need at least 2 mesh paths");
  Hierarchy hierarchy;
  for (size_t l = 0; l < meshPaths.size(); ++l) {
    SimplicialMesh mesh = loadMesh(meshPaths[l]);
    mesh.level_id = static_cast<int>(l);
    hierarchy.levels.push_back(std::move(mesh));
  }
  validateHierarchy(hierarchy, report);
  return hierarchy;
}

Hierarchy loadHierarchy(const std::string& manifestPath, HierarchyReport* report) {
  std::ifstream in(manifestPath);
  if (!in) throw configError("cannot open hierarchy manifest " + manifestPath);
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const std::exception& e) {
    throw configError("hierarchy manifest parse error: " + std::string(e.what()));
  }
  if (!manifest.contains("levels") || !manifest["levels"].is_array())
    throw configError("hierarchy manifest: missing 'levels' array");
  const auto base = std::filesystem::path(manifestPath).parent_path();
  std::vector<std::string> paths;
  for (const auto& level : manifest["levels"]) {
    std::string p = level.is_string() ? level.get<std::string>()
                                      : level.at("path").get<std::string>();
    paths.push_back((base / p).string());
  }
  return loadHierarchy(paths, report);
}

void saveHierarchy(const Hierarchy& hierarchy, const std::string& directory,
                   const std::string& baseName, const std::string& manifestName) {
  std::filesystem::create_directories(directory);
  nlohmann::json manifest;
  manifest["levels"] = nlohmann::json::array();
  for (int l = 0; l < hierarchy.numLevels(); ++l) {
    const std::string name = baseName + "_l" + std::to_string(l) + ".vmesh";
    saveMeshBinary(hierarchy.levels[l], (std::filesystem::path(directory) / name).string());
    manifest["levels"].push_back({{"path", name}, {"label", "level " + std::to_string(l)}});
  }
  std::ofstream out(std::filesystem::path(directory) / manifestName);
  if (!out) throw configError("cannot write hierarchy manifest");
  out << manifest.dump(2) << "\n";
}

namespace {

double meanEdgeLength(const SimplicialMesh& mesh) {
  std::set<std::pair<int, int>> edges;
  for (int e = 0; e < mesh.numElements(); ++e)
    for (int a = 0; a <= mesh.dim; ++a)
      for (int b = a + 1; b <= mesh.dim; ++b)
        edges.insert(std::minmax(mesh.elements(a, e), mesh.elements(b, e)));
  double total = 0.0;
  for (const auto& [a, b] : edges) total += (mesh.vertex(a) - mesh.vertex(b)).norm();
  return total / static_cast<double>(edges.size());
}

// Displaces vertices one at a time; a move that inverts or degenerates an
// incident element is retried with a fresh sample, up to 10 times.
void jitterMesh(SimplicialMesh& mesh, double jitter, Rng& rng) {
  const double step = jitter * meanEdgeLength(mesh);
  const BoundarySurface boundary = extractBoundary(mesh);
  const Adjacency adjacency = buildAdjacency(mesh);

  std::vector<char> onBoundary(mesh.numVertices(), 0);
  std::vector<std::vector<int>> boundaryNeighbors(mesh.numVertices());
  MatX vertexNormal = MatX::Zero(mesh.dim, mesh.numVertices());
  for (int f = 0; f < boundary.numFacets(); ++f) {
    const VecD n = facetNormal(mesh, boundary, f);
    for (int k = 0; k < mesh.dim; ++k) {
      const int v = boundary.facets(k, f);
      onBoundary[v] = 1;
      vertexNormal.col(v) += n;
      for (int j = 0; j < mesh.dim; ++j)
        if (j != k) boundaryNeighbors[v].push_back(boundary.facets(j, f));
    }
  }

  const double volFloor = 1e-12 * std::pow(mesh.bboxDiagonal(), mesh.dim);
  const MatX smoothedRest = mesh.rest;  // smoothing uses pre-jitter neighbors

  for (int v = 0; v < mesh.numVertices(); ++v) {
    const VecD original = mesh.vertex(v);
    bool placed = false;
    for (int attempt = 0; attempt < 10 && !placed; ++attempt) {
      VecD candidate = original;
      if (onBoundary[v]) {
        // resample along the smoothed boundary, pushed outward so finer
        // levels are not nested inside their parents
        VecD smoothed = VecD::Zero(mesh.dim);
        for (int u : boundaryNeighbors[v]) smoothed += smoothedRest.col(u);
        smoothed /= static_cast<double>(boundaryNeighbors[v].size());
        candidate = original + 0.3 * jitter * (smoothed - original);
        const double normalNorm = vertexNormal.col(v).norm();
        if (normalNorm > 0)
          candidate += (vertexNormal.col(v) / normalNorm) * step * rng.uniform(0.3, 1.0);
      } else {
        for (int k = 0; k < mesh.dim; ++k) candidate[k] += step * rng.uniform(-0.5, 0.5);
      }
      mesh.rest.col(v) = candidate;
      placed = true;
      for (int e : adjacency.vertexElements[v])
        if (mesh.restVolume(e) <= volFloor) {
          placed = false;
          break;
        }
      if (!placed) mesh.rest.col(v) = original;
    }
    if (!placed && onBoundary[v])
      throw numericalError("synthesizeTestHierarchy: jitter inverted an element at vertex " +
                           std::to_string(v) + " after 10 retries");
  }
}

}  // namespace

Hierarchy synthesizeTestHierarchy(const SimplicialMesh& base, int levels, double jitter,
                                  std::uint64_t seed) {
  if (levels < 2) throw configError("synthesizeTestHierarchy: levels must be >= 2");
  if (jitter < 0.0 || jitter > 0.3)
    throw configError("synthesizeTestHierarchy: jitter must be in [0, 0.3]");
  Hierarchy hierarchy;
  hierarchy.levels.push_back(base);
  hierarchy.levels.front().level_id = 0;
  Rng rng(seed);
  for (int l = 1; l < levels; ++l) {
    SimplicialMesh fine = meshgen::redRefine(hierarchy.levels.back());
    if (jitter > 0.0) jitterMesh(fine, jitter, rng);
    fine.level_id = l;
    hierarchy.levels.push_back(std::move(fine));
  }
  validateHierarchy(hierarchy);
  return hierarchy;
}

}  // namespace prodyn
