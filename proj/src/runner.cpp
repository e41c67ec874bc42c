#include "prodyn/runner.hpp"

#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>

#include <json.hpp>

namespace prodyn {

namespace fs = std::filesystem;
using nlohmann::json;

RunMode runModeFromName(const std::string& name) {
  if (name == "direct-all-levels" || name == "direct") return RunMode::kDirectAllLevels;
  if (name == "progressive") return RunMode::kProgressive;
  if (name == "tracks") return RunMode::kTracks;
  if (name == "embedded") return RunMode::kEmbedded;
  throw configError("unknown run mode '" + name + "'");
}

std::string runModeName(RunMode mode) {
  switch (mode) {
    case RunMode::kDirectAllLevels: return "direct-all-levels";
    case RunMode::kProgressive: return "progressive";
    case RunMode::kTracks: return "tracks";
    case RunMode::kEmbedded: return "embedded";
  }
  return "unknown";
}

namespace {
constexpr char kFrameMagic[4] = {'P', 'D', 'F', 'R'};
}

void writeFramePositions(const MatX& positions, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw configError("cannot write " + path);
  out.write(kFrameMagic, 4);
  const std::int32_t dim = static_cast<std::int32_t>(positions.rows());
  const std::int64_t n = positions.cols();
  out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(reinterpret_cast<const char*>(positions.data()),
            static_cast<std::streamsize>(sizeof(double) * positions.size()));
}

MatX readFramePositions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw configError("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kFrameMagic, 4) != 0)
    throw configError(path + ": not a frame dump");
  std::int32_t dim = 0;
  std::int64_t n = 0;
  in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  MatX positions(dim, n);
  in.read(reinterpret_cast<char*>(positions.data()),
          static_cast<std::streamsize>(sizeof(double) * positions.size()));
  if (!in) throw configError(path + ": truncated frame");
  return positions;
}

void writeBoundaryObj(const SimplicialMesh& mesh, const BoundarySurface& boundary,
                      const MatX& positions, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw configError("cannot write " + path);
  out.precision(17);
  for (int v = 0; v < positions.cols(); ++v) {
    out << "v " << positions(0, v) << " " << positions(1, v) << " "
        << (mesh.dim == 3 ? positions(2, v) : 0.0) << "\n";
  }
  for (int f = 0; f < boundary.numFacets(); ++f) {
    out << (mesh.dim == 3 ? "f" : "l");
    for (int k = 0; k < mesh.dim; ++k) out << " " << boundary.facets(k, f) + 1;
    out << "\n";
  }
}

namespace {

std::string frameName(const char* prefix, int t, const char* ext) {
  char buffer[48];
  std::snprintf(buffer, sizeof(buffer), "%s%05d.%s", prefix, t, ext);
  return buffer;
}

void writeLevelFrames(const fs::path& dir, const SimplicialMesh& mesh,
                      const Trajectory& trajectory) {
  fs::create_directories(dir);
  const BoundarySurface boundary = extractBoundary(mesh);
  for (int t = 0; t < static_cast<int>(trajectory.positions.size()); ++t) {
    writeFramePositions(trajectory.positions[t], (dir / frameName("frame", t, "bin")).string());
    writeBoundaryObj(mesh, boundary, trajectory.positions[t],
                     (dir / frameName("frame", t, "obj")).string());
    if (t >= 1 && trajectory.targets[t].size() > 0)
      writeFramePositions(trajectory.targets[t], (dir / frameName("target", t, "bin")).string());
  }
}

}  // namespace

RunSummary runScene(const Scene& scene, RunMode mode, const std::string& outDir) {
  RunSummary summary;
  summary.mode = mode;
  summary.directory = outDir;
  const int levels = scene.numLevels();
  const int steps = scene.config.steps;
  summary.levelSeconds.assign(levels, 0.0);

  std::vector<ProlongationOperator> operators;
  if (mode != RunMode::kDirectAllLevels) operators = buildAllOperators(scene);

  switch (mode) {
    case RunMode::kDirectAllLevels: {
      for (int l = 0; l < levels; ++l) {
        const auto start = std::chrono::steady_clock::now();
        summary.trajectories.push_back(directRollout(scene.simulators[l], steps));
        summary.levelSeconds[l] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      }
      break;
    }
    case RunMode::kProgressive: {
      const SolutionGrid grid =
          runProgressive(scene.simulators, operators, steps, scene.config.progressive.penaltyWeight);
      summary.levelSeconds = grid.rowSeconds;
      for (int l = 0; l < levels; ++l) summary.trajectories.push_back(grid.rowTrajectory(l));
      const MetricTraces traces = computeTraces(grid, scene.simulators, operators);
      emitTraces(traces, (fs::path(outDir) / "metrics").string());
      break;
    }
    case RunMode::kTracks: {
      if (levels != 2) throw configError("tracks mode requires exactly two levels");
      auto start = std::chrono::steady_clock::now();
      const Trajectory coarse = directRollout(scene.simulators[0], steps);
      summary.levelSeconds[0] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      start = std::chrono::steady_clock::now();
      summary.trajectories.push_back(coarse);
      summary.trajectories.push_back(runTracksBaseline(
          scene.simulators[1], coarse, operators[0], scene.config.progressive.penaltyWeight));
      summary.levelSeconds[1] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      break;
    }
    case RunMode::kEmbedded: {
      const auto start = std::chrono::steady_clock::now();
      const Trajectory coarse = directRollout(scene.simulators[0], steps);
      summary.levelSeconds[0] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      summary.trajectories.push_back(coarse);
      // chain the per-pair operators up the hierarchy; every level keeps the
      // coarse frame count
      SpMat chained;
      for (int l = 1; l < levels; ++l) {
        chained = l == 1 ? operators[0].weights : SpMat(operators[l - 1].weights * chained);
        ProlongationOperator composite;
        composite.weights = chained;
        composite.kind = operators[0].kind;
        summary.trajectories.push_back(
            runEmbeddedBaseline(coarse, composite, scene.config.h));
      }
      break;
    }
  }

  // persist
  fs::create_directories(outDir);
  for (int l = 0; l < levels; ++l)
    writeLevelFrames(fs::path(outDir) / "frames" / ("level" + std::to_string(l)),
                     scene.hierarchy.levels[l], summary.trajectories[l]);

  // one solve record per step per level, JSON lines
  {
    std::ofstream log(fs::path(outDir) / "solve_log.jsonl");
    for (int l = 0; l < levels; ++l)
      for (size_t t = 1; t < summary.trajectories[l].reports.size(); ++t) {
        const SolveReport& r = summary.trajectories[l].reports[t];
        json record = {{"level", l},
                       {"step", t},
                       {"iterations", r.iterations},
                       {"decrement", r.finalDecrement},
                       {"line_search_steps", r.lineSearchSteps},
                       {"min_alpha", r.minAlpha}};
        record["min_distance"] =
            std::isfinite(r.minDistance) ? json(r.minDistance) : json(nullptr);
        log << record.dump() << "\n";
      }
  }

  json manifest;
  manifest["mode"] = runModeName(mode);
  manifest["config_hash"] = configHash(scene.config);
  manifest["seed"] = scene.config.seed;
  manifest["h"] = scene.config.h;
  manifest["steps"] = steps;
  manifest["prolongation"] = kindName(scene.config.progressive.kind);
  manifest["consistency_weight"] = scene.config.progressive.penaltyWeight;
  manifest["format_version"] = 1;
  manifest["levels"] = json::array();
  for (int l = 0; l < levels; ++l) {
    json level;
    level["vertices"] = scene.hierarchy.levels[l].numVertices();
    level["elements"] = scene.hierarchy.levels[l].numElements();
    level["seconds"] = summary.levelSeconds[l];
    double minDistance = std::numeric_limits<double>::infinity();
    for (const auto& x : summary.trajectories[l].positions)
      minDistance = std::min(minDistance, scene.simulators[l].minContactDistance(x));
    level["min_contact_distance"] =
        std::isfinite(minDistance) ? json(minDistance) : json(nullptr);
    manifest["levels"].push_back(level);
  }
  std::ofstream manifestOut(fs::path(outDir) / "manifest.json");
  if (!manifestOut) throw configError("cannot write manifest");
  manifestOut << manifest.dump(2) << "\n";
  return summary;
}

std::vector<Trajectory> loadRunTrajectories(const std::string& runDir) {
  std::ifstream manifestIn(fs::path(runDir) / "manifest.json");
  if (!manifestIn) throw configError("no manifest in " + runDir);
  json manifest;
  manifestIn >> manifest;
  const int levels = static_cast<int>(manifest.at("levels").size());
  const int steps = manifest.at("steps").get<int>();

  std::vector<Trajectory> trajectories;
  for (int l = 0; l < levels; ++l) {
    const fs::path dir = fs::path(runDir) / "frames" / ("level" + std::to_string(l));
    Trajectory trajectory;
    for (int t = 0; t <= steps; ++t) {
      char name[32];
      std::snprintf(name, sizeof(name), "frame%05d.bin", t);
      trajectory.positions.push_back(readFramePositions((dir / name).string()));
      std::snprintf(name, sizeof(name), "target%05d.bin", t);
      if (fs::exists(dir / name))
        trajectory.targets.push_back(readFramePositions((dir / name).string()));
      else
        trajectory.targets.emplace_back();
      trajectory.reports.emplace_back();
    }
    for (int t = 0; t <= steps; ++t)
      trajectory.velocities.push_back(
          t == 0 ? MatX::Zero(trajectory.positions[0].rows(), trajectory.positions[0].cols())
                 : MatX((trajectory.positions[t] - trajectory.positions[t - 1]) /
                        manifest.at("h").get<double>()));
    trajectories.push_back(std::move(trajectory));
  }
  return trajectories;
}

MetricTraces recomputeMetrics(const Scene& scene, const std::string& runDir) {
  const std::vector<Trajectory> trajectories = loadRunTrajectories(runDir);
  if (static_cast<int>(trajectories.size()) != scene.numLevels())
    throw configError("recomputeMetrics: level count mismatch");
  const int steps = static_cast<int>(trajectories[0].positions.size()) - 1;
  SolutionGrid grid(scene.numLevels(), steps, scene.config.h);
  for (int l = 0; l < scene.numLevels(); ++l) {
    grid.setInitial(l, trajectories[l].positions[0], trajectories[l].velocities[0]);
    for (int t = 1; t <= steps; ++t)
      grid.setCell(l, t, trajectories[l].positions[t], trajectories[l].targets[t], {});
  }
  return computeTraces(grid, scene.simulators, buildAllOperators(scene));
}

void writeReport(const std::string& runDir, std::ostream& out) {
  std::ifstream manifestIn(fs::path(runDir) / "manifest.json");
  if (!manifestIn) throw configError("no manifest in " + runDir + " (incomplete run)");
  json manifest;
  manifestIn >> manifest;

  out << "run: " << runDir << "\n";
  out << "mode: " << manifest.at("mode").get<std::string>() << "\n";
  out << "config hash: " << manifest.at("config_hash").get<std::string>() << "\n";
  out << "steps: " << manifest.at("steps").get<int>()
      << "  h: " << manifest.at("h").get<double>() << "\n\n";

  out << "level  vertices  elements     seconds   s/step      min_dist\n";
  const auto& levels = manifest.at("levels");
  const int steps = std::max(1, manifest.at("steps").get<int>());
  std::vector<double> seconds;
  for (size_t l = 0; l < levels.size(); ++l) {
    const double s = levels[l].at("seconds").get<double>();
    seconds.push_back(s);
    out << std::setw(5) << l << "  " << std::setw(8) << levels[l].at("vertices").get<int>()
        << "  " << std::setw(8) << levels[l].at("elements").get<int>() << "  " << std::setw(10)
        << std::fixed << std::setprecision(3) << s << "  " << std::setw(8)
        << std::setprecision(5) << s / steps << "  ";
    if (levels[l].at("min_contact_distance").is_null())
      out << "      (no contact)";
    else
      out << std::scientific << std::setprecision(3)
          << levels[l].at("min_contact_distance").get<double>() << std::fixed;
    out << "\n";
  }
  const double speedup = seconds.front() > 0 ? seconds.back() / seconds.front() : 1.0;
  out << "\npreview speedup (level " << levels.size() - 1 << " time / level 0 time): "
      << std::setprecision(2) << (seconds.size() > 1 ? speedup : 1.0) << "x\n";
  for (size_t l = 1; l < seconds.size(); ++l)
    if (seconds[l] < seconds[l - 1])
      out << "warning: level " << l << " ran faster than level " << l - 1 << "\n";

  const fs::path consistency = fs::path(runDir) / "metrics" / "consistency.csv";
  if (fs::exists(consistency)) {
    std::ifstream in(consistency);
    std::string line;
    std::getline(in, line);  // header
    std::map<int, std::pair<double, int>> perLevel;
    while (std::getline(in, line)) {
      const auto c1 = line.find(',');
      const auto c2 = line.find(',', c1 + 1);
      const int level = std::stoi(line.substr(0, c1));
      const double d = std::stod(line.substr(c2 + 1));
      perLevel[level].first += d;
      perLevel[level].second += 1;
    }
    out << "\nconsistency (mean d per level):\n";
    for (const auto& [level, acc] : perLevel)
      out << "  level " << level << ": " << std::scientific << std::setprecision(6)
          << acc.first / std::max(acc.second, 1) << "\n";
  }
}

}  // namespace prodyn
