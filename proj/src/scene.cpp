#include "prodyn/scene.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "prodyn/materials.hpp"

namespace prodyn {

namespace {

using nlohmann::json;

VecD parseVec(const json& value, const char* what) {
  if (!value.is_array() || (value.size() != 2 && value.size() != 3))
    throw configError(std::string("scene: ") + what + " must be a 2- or 3-vector");
  VecD out(value.size());
  for (size_t i = 0; i < value.size(); ++i) out[static_cast<int>(i)] = value[i].get<double>();
  return out;
}

void parseBox(const json& value, VecD& lo, VecD& hi, const char* what) {
  if (!value.is_array() || value.size() != 2)
    throw configError(std::string("scene: ") + what + " box must be [lo, hi]");
  lo = parseVec(value[0], what);
  hi = parseVec(value[1], what);
  if (lo.size() != hi.size() || (lo.array() > hi.array()).any())
    throw configError(std::string("scene: ") + what + " box corners are inverted");
}

}  // namespace

SceneConfig loadSceneConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw configError("cannot open scene " + path);
  json root;
  try {
    in >> root;
  } catch (const std::exception& e) {
    throw configError("scene parse error: " + std::string(e.what()));
  }

  SceneConfig config;
  config.baseDir = std::filesystem::path(path).parent_path().string();
  config.canonical = root.dump();

  try {
    config.hierarchyManifest = root.at("hierarchy").get<std::string>();
    config.h = root.at("time").at("h").get<double>();
    config.steps = root.at("time").at("steps").get<int>();
    config.gravity = parseVec(root.at("gravity"), "gravity");

    for (const auto& m : root.at("materials")) {
      MaterialParams params;
      params.model = materialModelFromName(m.at("model").get<std::string>());
      params.young = m.at("young").get<double>();
      params.poisson = m.at("poisson").get<double>();
      params.density = m.at("density").get<double>();
      params.validate();
      config.materialNames.push_back(m.at("name").get<std::string>());
      config.materials.push_back(params);
    }
    const auto& assignment = root.at("material_assignment");
    config.defaultMaterial = assignment.at("default").get<std::string>();
    if (assignment.contains("regions"))
      for (const auto& r : assignment["regions"]) {
        MaterialRegion region;
        region.material = r.at("material").get<std::string>();
        parseBox(r.at("box"), region.boxLo, region.boxHi, "material region");
        config.materialRegions.push_back(region);
      }

    if (root.contains("colliders")) {
      const auto& colliders = root["colliders"];
      if (colliders.contains("planes"))
        for (const auto& p : colliders["planes"]) {
          HalfPlane plane;
          plane.normal = parseVec(p.at("normal"), "plane normal").normalized();
          plane.offset = p.at("offset").get<double>();
          plane.mu = p.value("mu", 0.0);
          config.planes.push_back(plane);
        }
      if (colliders.contains("static_meshes"))
        for (const auto& s : colliders["static_meshes"]) {
          StaticColliderConfig collider;
          collider.path = s.at("path").get<std::string>();
          collider.mu = s.value("mu", 0.0);
          config.staticColliders.push_back(collider);
        }
      config.selfContact = colliders.value("self_contact", false);
    }

    if (root.contains("dirichlet"))
      for (const auto& d : root["dirichlet"]) {
        DirichletRegion region;
        parseBox(d.at("box"), region.boxLo, region.boxHi, "dirichlet");
        config.dirichlet.push_back(region);
      }

    if (root.contains("barrier")) {
      const auto& b = root["barrier"];
      config.barrier.dhat = b.value("dhat", config.barrier.dhat);
      config.barrier.kappa = b.value("kappa", config.barrier.kappa);
      config.barrier.epsV = b.value("eps_v", config.barrier.epsV);
      config.barrier.selfMu = b.value("self_mu", config.barrier.selfMu);
      config.barrier.validate();
    }

    if (root.contains("progressive")) {
      const auto& p = root["progressive"];
      config.progressive.penaltyWeight = p.value("w", 0.0);
      const std::string kind = p.value("kind", std::string("bary"));
      if (kind == "bary" || kind == "barycentric")
        config.progressive.kind = ProlongationKind::kBarycentric;
      else if (kind == "biharmonic")
        config.progressive.kind = ProlongationKind::kBiharmonic;
      else if (kind == "phong")
        config.progressive.kind = ProlongationKind::kPhong;
      else
        throw configError("scene: unknown prolongation kind '" + kind + "'");
      config.progressive.phongBlend = p.value("phong_blend", 0.5);
      if (config.progressive.penaltyWeight < 0)
        throw configError("scene: consistency weight must be >= 0");
    }

    if (root.contains("solver")) {
      const auto& s = root["solver"];
      config.solver.newtonTol = s.value("newton_tol", config.solver.newtonTol);
      config.solver.maxIters = s.value("max_iters", config.solver.maxIters);
      config.solver.lineSearchShrink = s.value("shrink", config.solver.lineSearchShrink);
      config.solver.projectPsd = s.value("project_psd", true);
      config.solver.validate();
    }

    if (root.contains("initial_velocity"))
      config.initialVelocity = parseVec(root["initial_velocity"], "initial_velocity");
    config.seed = root.value("seed", 0ull);
  } catch (const json::exception& e) {
    throw configError("scene: " + std::string(e.what()));
  }

  if (config.h <= 0) throw configError("scene: h must be > 0");
  if (config.steps < 0) throw configError("scene: steps must be >= 0");
  return config;
}

std::string configHash(const SceneConfig& config) {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : config.canonical) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  char buffer[20];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(hash));
  return buffer;
}

namespace {

int materialIndex(const SceneConfig& config, const std::string& name) {
  for (size_t i = 0; i < config.materialNames.size(); ++i)
    if (config.materialNames[i] == name) return static_cast<int>(i);
  throw configError("scene: unknown material '" + name + "'");
}

bool inBox(const VecD& p, const VecD& lo, const VecD& hi) {
  for (int k = 0; k < p.size(); ++k)
    if (p[k] < lo[k] || p[k] > hi[k]) return false;
  return true;
}

}  // namespace

Scene buildScene(const SceneConfig& config) {
  Scene scene;
  scene.config = config;
  const auto resolve = [&](const std::string& p) {
    return (std::filesystem::path(config.baseDir) / p).string();
  };
  scene.hierarchy = loadHierarchy(resolve(config.hierarchyManifest), &scene.hierarchyReport);
  const int dim = scene.hierarchy.dim();
  if (config.gravity.size() != dim) throw configError("scene: gravity dimension mismatch");

  // level-0 material assignment from region boxes, then across levels
  const SimplicialMesh& base = scene.hierarchy.levels.front();
  std::vector<int> level0(base.numElements(), materialIndex(config, config.defaultMaterial));
  for (int e = 0; e < base.numElements(); ++e) {
    const VecD centroid = elementCentroid(base, e);
    for (const auto& region : config.materialRegions)
      if (inBox(centroid, region.boxLo, region.boxHi))
        level0[e] = materialIndex(config, region.material);
  }
  scene.materialAssignment = propagateMaterials(scene.hierarchy, level0);

  std::vector<StaticCollider> statics;
  for (const auto& colliderConfig : config.staticColliders) {
    const SimplicialMesh mesh = loadMesh(resolve(colliderConfig.path));
    if (mesh.dim != dim) throw configError("scene: collider dimension mismatch");
    const BoundarySurface boundary = extractBoundary(mesh);
    StaticCollider collider;
    collider.positions = mesh.rest;
    collider.facets = boundary.facets;
    collider.mu = colliderConfig.mu;
    statics.push_back(std::move(collider));
  }

  const bool anyContact = !config.planes.empty() || !statics.empty() || config.selfContact;
  for (int l = 0; l < scene.numLevels(); ++l) {
    const SimplicialMesh& mesh = scene.hierarchy.levels[l];
    LevelContext context;
    context.mesh = &mesh;

    VecX density(mesh.numElements());
    for (int e = 0; e < mesh.numElements(); ++e)
      density[e] = config.materials[scene.materialAssignment[l][e]].density;
    context.mass = lumpedMass(mesh, density);

    context.elastic = std::make_shared<ElasticEnergy>(mesh, config.materials,
                                                      scene.materialAssignment[l]);
    if (anyContact)
      context.contact = std::make_shared<ContactModel>(mesh, config.planes, statics,
                                                       config.barrier, config.selfContact);
    context.gravity = config.gravity;
    context.h = config.h;
    context.solver = config.solver;

    for (int v = 0; v < mesh.numVertices(); ++v)
      for (const auto& region : config.dirichlet)
        if (inBox(mesh.vertex(v), region.boxLo, region.boxHi)) {
          context.dirichletVertices.push_back(v);
          break;
        }
    context.dirichletPositions.resize(dim, static_cast<long>(context.dirichletVertices.size()));
    for (size_t i = 0; i < context.dirichletVertices.size(); ++i)
      context.dirichletPositions.col(static_cast<long>(i)) =
          mesh.vertex(context.dirichletVertices[i]);

    context.initialPositions = mesh.rest;
    context.initialVelocities = MatX::Zero(dim, mesh.numVertices());
    if (config.initialVelocity.size() == dim)
      context.initialVelocities.colwise() = config.initialVelocity;

    scene.simulators.emplace_back(std::move(context));
  }
  return scene;
}

ProlongationOperator buildOperator(const Scene& scene, int coarseLevel, ProlongationKind kind) {
  const SimplicialMesh& coarse = scene.hierarchy.levels.at(coarseLevel);
  const SimplicialMesh& fine = scene.hierarchy.levels.at(coarseLevel + 1);
  switch (kind) {
    case ProlongationKind::kBarycentric:
      return buildBarycentric(bindRobust(fine, coarse), coarse);
    case ProlongationKind::kBiharmonic:
      return buildBiharmonic(fine, coarse, bindRobust(coarse, fine));
    case ProlongationKind::kPhong:
      return buildPhong(bindRobust(fine, coarse), fine, coarse,
                        scene.config.progressive.phongBlend);
  }
  throw std::logic_error("unreachable");
}

ProlongationOperator buildOperator(const Scene& scene, int coarseLevel) {
  return buildOperator(scene, coarseLevel, scene.config.progressive.kind);
}

std::vector<ProlongationOperator> buildAllOperators(const Scene& scene) {
  std::vector<ProlongationOperator> operators;
  for (int l = 0; l + 1 < scene.numLevels(); ++l) operators.push_back(buildOperator(scene, l));
  return operators;
}

}  // namespace prodyn
