#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prodyn/binding.hpp"
#include "prodyn/hierarchy.hpp"
#include "prodyn/integrator.hpp"
#include "prodyn/prolongation.hpp"

namespace prodyn {

struct MaterialRegion {
  std::string material;
  VecD boxLo, boxHi;  // classifies level-0 elements by rest centroid
};

struct DirichletRegion {
  VecD boxLo, boxHi;  // fixes vertices whose rest position falls inside
};

struct StaticColliderConfig {
  std::string path;  // mesh file; its boundary becomes the collider facets
  double mu = 0.0;
};

struct ProgressiveSection {
  double penaltyWeight = 0.0;  // consistency penalty w (default off)
  ProlongationKind kind = ProlongationKind::kBarycentric;
  double phongBlend = 0.5;
};

/// Parsed scene file. The exact JSON grammar is documented in the README;
/// every path is resolved relative to the scene file's directory.
struct SceneConfig {
  std::string hierarchyManifest;
  double h = 0.01;
  int steps = 100;
  VecD gravity;
  std::vector<std::string> materialNames;
  std::vector<MaterialParams> materials;
  std::string defaultMaterial;
  std::vector<MaterialRegion> materialRegions;
  std::vector<HalfPlane> planes;
  std::vector<StaticColliderConfig> staticColliders;
  bool selfContact = false;
  std::vector<DirichletRegion> dirichlet;
  BarrierParams barrier;
  ProgressiveSection progressive;
  SolverSettings solver;
  VecD initialVelocity;  // uniform; zero when absent
  std::uint64_t seed = 0;

  std::string canonical;  // canonical JSON dump, input to the config hash
  std::string baseDir;
};

SceneConfig loadSceneConfig(const std::string& path);

/// FNV-1a over the canonical config dump; keys the run manifest.
std::string configHash(const SceneConfig& config);

/// A scene assembled for simulation: hierarchy plus one simulator per level.
/// Move-only (simulators point into the hierarchy's meshes).
struct Scene {
  SceneConfig config;
  Hierarchy hierarchy;
  HierarchyReport hierarchyReport;
  std::vector<std::vector<int>> materialAssignment;  // per level, per element
  std::vector<LevelSimulator> simulators;

  Scene() = default;
  Scene(const Scene&) = delete;
  Scene& operator=(const Scene&) = delete;
  Scene(Scene&&) = default;
  Scene& operator=(Scene&&) = default;

  int numLevels() const { return hierarchy.numLevels(); }
};

Scene buildScene(const SceneConfig& config);
inline Scene buildScene(const std::string& path) { return buildScene(loadSceneConfig(path)); }

/// Prolongation operator for the (level, level+1) pair per the config's
/// progressive section.
ProlongationOperator buildOperator(const Scene& scene, int coarseLevel);
ProlongationOperator buildOperator(const Scene& scene, int coarseLevel, ProlongationKind kind);
std::vector<ProlongationOperator> buildAllOperators(const Scene& scene);

}  // namespace prodyn
