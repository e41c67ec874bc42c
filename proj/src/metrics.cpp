#include "prodyn/metrics.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace prodyn {

double massNormSquared(const MatX& field, const LumpedMass& mass) {
  double total = 0.0;
  for (int v = 0; v < field.cols(); ++v) total += mass.m[v] * field.col(v).squaredNorm();
  return total;
}

ContinuityResult continuityError(const LevelSimulator& simulator, const Trajectory& trajectory,
                                 int t) {
  const int steps = trajectory.steps();
  if (t < 1 || t > steps - 1)
    throw configError("continuityError: t must lie in [1, N-1], got " + std::to_string(t));
  const double h = simulator.h();
  const LumpedMass& mass = simulator.mass();
  const int d = static_cast<int>(trajectory.positions[t].rows());
  const int n = static_cast<int>(trajectory.positions[t].cols());

  // force gradient at y^{t+1} with friction lagged from y^t, as in the solve
  const VecX forceGrad = simulator.forceGradient(trajectory.positions[t + 1],
                                                 trajectory.positions[t]);
  MatX accel(d, n);
  for (int v = 0; v < n; ++v) accel.col(v) = forceGrad.segment(d * v, d) / mass.m[v];

  const MatX stencil = 0.5 * (trajectory.positions[t + 1] - 2.0 * trajectory.positions[t] +
                              trajectory.positions[t - 1]) +
                       (0.5 * h * h) * accel;

  ContinuityResult result;
  result.e = massNormSquared(stencil, mass);

  const MatX& target = trajectory.targets[t + 1];
  if (target.size() == 0)
    throw configError("continuityError: trajectory carries no solver targets");
  const MatX residual = (trajectory.positions[t + 1] - target) + (h * h) * accel;
  result.eHat = massNormSquared(residual, mass);
  result.n = result.eHat > 0 ? result.e / result.eHat : 0.0;
  return result;
}

double consistencyError(const MatX& xFine, const MatX& xCoarse, const Projection& projection,
                        const LumpedMass& coarseMass) {
  const MatX projected = projection.apply(xFine);
  return massNormSquared(MatX(projected - xCoarse), coarseMass);
}

MetricTraces computeTraces(const SolutionGrid& grid, const std::vector<LevelSimulator>& simulators,
                           const std::vector<ProlongationOperator>& operators) {
  if (static_cast<int>(simulators.size()) != grid.numLevels())
    throw configError("computeTraces: one simulator per level required");
  MetricTraces traces;
  for (int level = 0; level < grid.numLevels(); ++level) {
    const Trajectory row = grid.rowTrajectory(level);
    for (int t = 1; t + 1 <= grid.numSteps(); ++t) {
      const ContinuityResult r = continuityError(simulators[level], row, t);
      traces.continuity.push_back({static_cast<double>(level), static_cast<double>(t), r.e,
                                   r.eHat, r.n});
    }
  }
  for (int level = 1; level < grid.numLevels(); ++level) {
    const Projection projection(operators[level - 1]);
    const LumpedMass& coarseMass = simulators[level - 1].mass();
    for (int t = 1; t <= grid.numSteps(); ++t) {
      const double d = consistencyError(grid.x(level, t), grid.x(level - 1, t), projection,
                                        coarseMass);
      traces.consistency.push_back({static_cast<double>(level), static_cast<double>(t), d});
    }
  }
  return traces;
}

namespace {

std::string formatNumber(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

}  // namespace

void emitTraces(const MetricTraces& traces, const std::string& directory) {
  std::filesystem::create_directories(directory);
  {
    std::ofstream out(std::filesystem::path(directory) / "continuity.csv");
    if (!out) throw configError("cannot write continuity.csv");
    out << "level,step,e,e_hat,n\n";
    for (const auto& row : traces.continuity)
      out << static_cast<long>(row[0]) << "," << static_cast<long>(row[1]) << ","
          << formatNumber(row[2]) << "," << formatNumber(row[3]) << "," << formatNumber(row[4])
          << "\n";
  }
  {
    std::ofstream out(std::filesystem::path(directory) / "consistency.csv");
    if (!out) throw configError("cannot write consistency.csv");
    out << "level,step,d\n";
    for (const auto& row : traces.consistency)
      out << static_cast<long>(row[0]) << "," << static_cast<long>(row[1]) << ","
          << formatNumber(row[2]) << "\n";
  }
}

}  // namespace prodyn
