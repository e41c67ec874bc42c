#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "prodyn/binding.hpp"
#include "prodyn/metrics.hpp"
#include "prodyn/runner.hpp"
#include "prodyn/scene.hpp"

namespace fs = std::filesystem;
using namespace prodyn;

namespace {

ProlongationKind kindFromFlag(const std::string& kind) {
  if (kind == "bary" || kind == "barycentric") return ProlongationKind::kBarycentric;
  if (kind == "biharmonic") return ProlongationKind::kBiharmonic;
  if (kind == "phong") return ProlongationKind::kPhong;
  throw configError("unknown prolongation kind '" + kind + "'");
}

int runBind(const std::string& scenePath, const std::string& outDir, bool alsoNaive) {
  Scene scene = buildScene(scenePath);
  fs::create_directories(outDir);
  std::ofstream report(fs::path(outDir) / "binding_report.txt");
  report << scene.hierarchyReport.toString() << "\n";

  for (int l = 0; l + 1 < scene.numLevels(); ++l) {
    const SimplicialMesh& coarse = scene.hierarchy.levels[l];
    const SimplicialMesh& fine = scene.hierarchy.levels[l + 1];
    const BindingMap robust = bindRobust(fine, coarse);
    saveBinding(robust, (fs::path(outDir) /
                         ("binding_l" + std::to_string(l) + "_l" + std::to_string(l + 1) + ".txt"))
                            .string());
    const auto robustIsolation = bindingIsolation(fine, coarse, robust);

    report << "pair " << l << " -> " << l + 1 << ": " << robust.size() << " vertices, "
           << robust.countExtrapolated() << " extrapolated, min weight " << robust.minWeight()
           << ", max weight " << robust.maxWeight() << "\n";
    int robustFar = 0;
    for (int v = 0; v < fine.numVertices(); ++v) robustFar += robustIsolation[v] > 3;
    report << "  robust hosts graph-far (>3 hops) from all neighbor hosts: " << robustFar << "\n";

    if (alsoNaive) {
      const BindingMap naive = bindNaiveClosest(fine, coarse);
      saveBinding(naive, (fs::path(outDir) / ("binding_naive_l" + std::to_string(l) + "_l" +
                                              std::to_string(l + 1) + ".txt"))
                             .string());
      const auto naiveIsolation = bindingIsolation(fine, coarse, naive);
      int naiveFar = 0, hostDiffers = 0;
      for (int v = 0; v < fine.numVertices(); ++v) {
        naiveFar += naiveIsolation[v] > 3;
        hostDiffers += naive.hostElement[v] != robust.hostElement[v];
      }
      report << "  naive hosts graph-far (>3 hops): " << naiveFar << " (cross-gap misbindings)\n";
      report << "  hosts differing robust vs naive: " << hostDiffers << "\n";
    }
  }
  std::cout << "binding report written to " << (fs::path(outDir) / "binding_report.txt").string()
            << "\n";
  return 0;
}

int runProlong(const std::string& scenePath, const std::string& outDir,
               const std::string& kindFlag) {
  Scene scene = buildScene(scenePath);
  fs::create_directories(outDir);
  const ProlongationKind kind =
      kindFlag.empty() ? scene.config.progressive.kind : kindFromFlag(kindFlag);
  std::ofstream report(fs::path(outDir) / "prolongation_report.txt");
  for (int l = 0; l + 1 < scene.numLevels(); ++l) {
    const ProlongationOperator op = buildOperator(scene, l, kind);
    const std::string name = "P_" + std::to_string(l) + "_" + std::to_string(l + 1);
    exportMatrixMarket(op.weights, (fs::path(outDir) / (name + ".mtx")).string());
    const auto& diag = op.diagnostics;
    report << name << " (" << kindName(op.kind) << "): " << op.rows() << " x " << op.cols()
           << ", nnz " << op.weights.nonZeros() << "\n"
           << "  frobenius " << diag.frobeniusNorm << " (sqrt(m) = "
           << std::sqrt(static_cast<double>(op.rows())) << ", bound "
           << (diag.frobeniusBoundApplies ? (diag.frobeniusBoundHolds ? "holds" : "VIOLATED")
                                          : "n/a: negative entries")
           << ")\n"
           << "  two-norm est " << diag.twoNormEstimate << ", entries [" << diag.minEntry << ", "
           << diag.maxEntry << "], row-sum max deviation " << diag.rowSumMaxDeviation << "\n";
  }
  std::cout << "operators written to " << outDir << "\n";
  return 0;
}

int runSimulate(const std::string& scenePath, const std::string& outDir,
                const std::string& modeFlag, const std::string& kindFlag, int levelLimit) {
  SceneConfig config = loadSceneConfig(scenePath);
  if (!kindFlag.empty()) config.progressive.kind = kindFromFlag(kindFlag);
  Scene scene = buildScene(config);
  if (levelLimit > 0 && levelLimit < scene.numLevels()) {
    scene.hierarchy.levels.resize(levelLimit);
    scene.simulators.erase(scene.simulators.begin() + levelLimit, scene.simulators.end());
    scene.materialAssignment.resize(levelLimit);
  }
  const RunMode mode = runModeFromName(modeFlag);
  const RunSummary summary = runScene(scene, mode, outDir);
  std::cout << "run complete: " << summary.directory << "\n";
  for (size_t l = 0; l < summary.levelSeconds.size(); ++l)
    std::cout << "  level " << l << ": " << summary.levelSeconds[l] << " s\n";
  return 0;
}

int runMetrics(const std::string& scenePath, const std::string& runDir) {
  Scene scene = buildScene(scenePath);
  const MetricTraces traces = recomputeMetrics(scene, runDir);
  emitTraces(traces, (fs::path(runDir) / "metrics").string());
  std::cout << "metrics written to " << (fs::path(runDir) / "metrics").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"progressive level-of-detail volumetric elastodynamics"};
  app.require_subcommand(1);

  std::string scenePath, outDir = "out", runDir, modeFlag = "progressive", kindFlag;
  bool naive = false;
  int levelLimit = 0;

  auto* bind = app.add_subcommand("bind", "bind fine vertices to coarse elements per level pair");
  bind->add_option("--scene", scenePath, "scene config")->required();
  bind->add_option("--out", outDir, "output directory");
  bind->add_flag("--naive", naive, "also run the closest-point baseline and compare");

  auto* prolongCmd = app.add_subcommand("prolong", "build and export prolongation operators");
  prolongCmd->add_option("--scene", scenePath, "scene config")->required();
  prolongCmd->add_option("--out", outDir, "output directory");
  prolongCmd->add_option("--kind", kindFlag, "bary | biharmonic | phong");

  auto* simulate = app.add_subcommand("simulate", "run a scene and persist trajectories");
  simulate->add_option("--scene", scenePath, "scene config")->required();
  simulate->add_option("--out", outDir, "run directory");
  simulate->add_option("--mode", modeFlag, "direct-all-levels | progressive | tracks | embedded");
  simulate->add_option("--kind", kindFlag, "override the prolongation kind");
  simulate->add_option("--levels", levelLimit, "use only the first N hierarchy levels");

  auto* metricsCmd = app.add_subcommand("metrics", "recompute metric traces for a stored run");
  metricsCmd->add_option("--scene", scenePath, "scene config")->required();
  metricsCmd->add_option("--run", runDir, "run directory")->required();

  auto* reportCmd = app.add_subcommand("report", "summarize a completed run");
  reportCmd->add_option("--run", runDir, "run directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (bind->parsed()) return runBind(scenePath, outDir, naive);
    if (prolongCmd->parsed()) return runProlong(scenePath, outDir, kindFlag);
    if (simulate->parsed()) return runSimulate(scenePath, outDir, modeFlag, kindFlag, levelLimit);
    if (metricsCmd->parsed()) return runMetrics(scenePath, runDir);
    if (reportCmd->parsed()) {
      writeReport(runDir, std::cout);
      return 0;
    }
  } catch (const Error& error) {
    nlohmann::json record = {
        {"error",
         {{"kind", error.kind() == ErrorKind::kConfig ? "config" : "numerical"},
          {"message", error.what()}}}};
    std::cerr << record.dump() << "\n";
    return error.kind() == ErrorKind::kConfig ? 2 : 3;
  } catch (const std::exception& error) {
    nlohmann::json record = {{"error", {{"kind", "numerical"}, {"message", error.what()}}}};
    std::cerr << record.dump() << "\n";
    return 3;
  }
  return 0;
}
