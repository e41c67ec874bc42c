#include "prodyn/scenegen.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "prodyn/hierarchy.hpp"
#include "prodyn/meshgen.hpp"

namespace prodyn::scenegen {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void writeJson(const fs::path& path, const json& value) {
  std::ofstream out(path);
  if (!out) throw configError("cannot write " + path.string());
  out << value.dump(2) << "\n";
}

json baseScene(double h, int steps, int dim) {
  json scene;
  scene["hierarchy"] = "manifest.json";
  scene["time"] = {{"h", h}, {"steps", steps}};
  scene["gravity"] = dim == 2 ? json::array({0.0, -9.81}) : json::array({0.0, 0.0, -9.81});
  scene["materials"] = json::array({{{"name", "soft"},
                                     {"model", "neohookean"},
                                     {"young", 2e4},
                                     {"poisson", 0.4},
                                     {"density", 1000.0}}});
  scene["material_assignment"] = {{"default", "soft"}};
  scene["colliders"] = {{"planes", json::array({{{"normal", dim == 2 ? json::array({0.0, 1.0})
                                                                     : json::array({0.0, 0.0, 1.0})},
                                                 {"offset", 0.0},
                                                 {"mu", 0.1}}})},
                        {"self_contact", false}};
  scene["barrier"] = {{"dhat", 1e-3}, {"kappa", 1e5}, {"eps_v", 1e-3}};
  scene["progressive"] = {{"w", 0.0}, {"kind", "bary"}, {"phong_blend", 0.5}};
  scene["solver"] = {{"newton_tol", 1e-6}, {"max_iters", 200}};
  scene["seed"] = 0;
  return scene;
}

void saveLevels(const fs::path& dir, const std::vector<SimplicialMesh>& levels) {
  fs::create_directories(dir);
  json manifest;
  manifest["levels"] = json::array();
  for (size_t l = 0; l < levels.size(); ++l) {
    const std::string name = "level" + std::to_string(l) + ".vmesh";
    SimplicialMesh mesh = levels[l];
    mesh.level_id = static_cast<int>(l);
    saveMeshBinary(mesh, (dir / name).string());
    manifest["levels"].push_back({{"path", name}});
  }
  writeJson(dir / "manifest.json", manifest);
}

}  // namespace

std::string ballOnSpike(const std::string& root) {
  const fs::path dir = fs::path(root) / "ball_on_spike";
  fs::create_directories(dir);

  // nearly centered over the apex: the bounce direction is then maximally
  // resolution-sensitive, which is what the scene is for
  const VecD center = (VecD(2) << 0.005, 0.62).finished();
  std::vector<SimplicialMesh> levels;
  for (int rings : {4, 6, 10}) levels.push_back(meshgen::disk2D(center, 0.25, rings));
  saveLevels(dir, levels);

  // sharp static spike: a single thin triangle, apex under the ball center
  SimplicialMesh spike;
  spike.dim = 2;
  spike.rest.resize(2, 3);
  spike.rest << -0.02, 0.02, 0.00,
                 0.00, 0.00, 0.32;
  spike.elements.resize(3, 1);
  spike.elements << 0, 1, 2;
  validateMesh(spike);
  saveMeshObj2D(spike, (dir / "spike.obj").string());

  json scene = baseScene(0.005, 220, 2);
  scene["colliders"]["static_meshes"] = json::array({{{"path", "spike.obj"}, {"mu", 0.1}}});
  scene["barrier"] = {{"dhat", 2e-3}, {"kappa", 1e5}, {"eps_v", 1e-3}};
  writeJson(dir / "scene.json", scene);
  return (dir / "scene.json").string();
}

std::vector<std::string> slitArray(const std::string& root, const std::vector<double>& weights) {
  const fs::path dir = fs::path(root) / "slit_array";
  // tilted so the comb lands on a corner and topples; the slow roll keeps
  // the run dynamic for the whole window, which is what stresses cross-level
  // consistency at this large time step
  SimplicialMesh base = meshgen::slitArray2D(8, 1.0, 0.5, 3, 0.5);
  const double tilt = 0.18, c = std::cos(tilt), s = std::sin(tilt);
  for (int v = 0; v < base.numVertices(); ++v) {
    const double x = base.rest(0, v) - 0.5, y = base.rest(1, v) - 0.25;
    base.rest(0, v) = c * x - s * y;
    base.rest(1, v) = s * x + c * y + 0.55;
  }
  validateMesh(base);
  const Hierarchy hierarchy = synthesizeTestHierarchy(base, 4, 0.0);
  saveLevels(dir, hierarchy.levels);

  std::vector<std::string> paths;
  for (double w : weights) {
    json scene = baseScene(0.04, 60, 2);
    scene["barrier"] = {{"dhat", 2e-3}, {"kappa", 1e5}, {"eps_v", 1e-3}};
    scene["progressive"]["w"] = w;
    char name[40];
    std::snprintf(name, sizeof(name), "scene_w%04d.json", static_cast<int>(w * 1000 + 0.5));
    writeJson(dir / name, scene);
    paths.push_back((dir / name).string());
  }
  return paths;
}

std::string tightContact(const std::string& root) {
  const fs::path dir = fs::path(root) / "tight_contact";
  const VecD center = (VecD(2) << 0.0, 0.262).finished();
  std::vector<SimplicialMesh> levels;
  levels.push_back(meshgen::disk2D(center, 0.25, 2));
  levels.push_back(meshgen::disk2D(center, 0.25, 6));
  saveLevels(dir, levels);
  json scene = baseScene(0.01, 50, 2);
  writeJson(dir / "scene.json", scene);
  return (dir / "scene.json").string();
}

std::string previewSpeedup(const std::string& root) {
  const fs::path dir = fs::path(root) / "preview_speedup";
  const VecD center = (VecD(2) << 0.0, 0.36).finished();
  std::vector<SimplicialMesh> levels;
  for (int rings : {3, 8, 16}) levels.push_back(meshgen::disk2D(center, 0.3, rings));
  saveLevels(dir, levels);
  json scene = baseScene(0.01, 40, 2);
  writeJson(dir / "scene.json", scene);
  return (dir / "scene.json").string();
}

std::string identityBall(const std::string& root) {
  const fs::path dir = fs::path(root) / "identity_ball";
  fs::create_directories(dir);
  const SimplicialMesh ball = meshgen::disk2D((VecD(2) << 0.0, 0.28).finished(), 0.25, 3);
  saveMeshBinary(ball, (dir / "ball.vmesh").string());
  json manifest;
  manifest["levels"] = json::array({{{"path", "ball.vmesh"}}, {{"path", "ball.vmesh"}}});
  writeJson(dir / "manifest.json", manifest);
  json scene = baseScene(0.01, 100, 2);
  scene["solver"]["newton_tol"] = 1e-7;
  writeJson(dir / "scene.json", scene);
  return (dir / "scene.json").string();
}

std::string boxDrop3D(const std::string& root) {
  const fs::path dir = fs::path(root) / "box_drop_3d";
  SimplicialMesh base = meshgen::boxGrid3D(2, 2, 1, (VecD(3) << -0.15, -0.15, 0.05).finished(),
                                           (VecD(3) << 0.15, 0.15, 0.2).finished());
  const Hierarchy hierarchy = synthesizeTestHierarchy(base, 2, 0.1, 5);
  saveLevels(dir, hierarchy.levels);
  json scene = baseScene(0.01, 25, 3);
  scene["colliders"]["planes"][0]["mu"] = 0.3;
  writeJson(dir / "scene.json", scene);
  return (dir / "scene.json").string();
}

std::vector<std::string> writeAllScenes(const std::string& root) {
  std::vector<std::string> paths;
  paths.push_back(ballOnSpike(root));
  for (auto& p : slitArray(root)) paths.push_back(p);
  paths.push_back(tightContact(root));
  paths.push_back(previewSpeedup(root));
  paths.push_back(identityBall(root));
  paths.push_back(boxDrop3D(root));
  return paths;
}

}  // namespace prodyn::scenegen
