#include "prodyn/progressive.hpp"

#include <chrono>

namespace prodyn {

SolutionGrid::SolutionGrid(int numLevels, int numSteps, double h)
    : numSteps_(numSteps), h_(h) {
  if (numLevels < 1 || numSteps < 0) throw configError("SolutionGrid: bad shape");
  rows_.assign(numLevels, std::vector<Cell>(numSteps + 1));
}

const SolutionGrid::Cell& SolutionGrid::cell(int level, int t) const {
  if (level < 0 || level >= numLevels() || t < 0 || t > numSteps_)
    throw configError("SolutionGrid: cell (" + std::to_string(level) + "," + std::to_string(t) +
                      ") out of range");
  const Cell& c = rows_[level][t];
  if (!c.filled)
    throw numericalError("SolutionGrid: cell (" + std::to_string(level) + "," +
                         std::to_string(t) + ") read before being filled");
  return c;
}

bool SolutionGrid::filled(int level, int t) const { return rows_[level][t].filled; }
const MatX& SolutionGrid::x(int level, int t) const { return cell(level, t).x; }
const MatX& SolutionGrid::v(int level, int t) const { return cell(level, t).v; }
const MatX& SolutionGrid::target(int level, int t) const { return cell(level, t).target; }
const SolveReport& SolutionGrid::report(int level, int t) const { return cell(level, t).report; }

void SolutionGrid::setInitial(int level, MatX x, MatX v) {
  Cell& c = rows_[level][0];
  c.x = std::move(x);
  c.v = std::move(v);
  c.filled = true;
}

void SolutionGrid::setCell(int level, int t, MatX x, MatX target, SolveReport report) {
  if (t < 1) throw configError("SolutionGrid: use setInitial for t = 0");
  // diagonal dependency: (l, t) needs (l, t-1) and, above the base row,
  // (l-1, t-1) and (l-1, t-2)
  if (!filled(level, t - 1))
    throw numericalError("SolutionGrid: cell (" + std::to_string(level) + "," +
                         std::to_string(t) + ") set before its predecessor");
  if (level >= 1 && (!filled(level - 1, t - 1) || !filled(level - 1, std::max(t - 2, 0))))
    throw numericalError("SolutionGrid: cell (" + std::to_string(level) + "," +
                         std::to_string(t) + ") set before its coarse dependencies");
  Cell& c = rows_[level][t];
  c.v = (x - rows_[level][t - 1].x) / h_;
  c.x = std::move(x);
  c.target = std::move(target);
  c.report = report;
  c.filled = true;
}

bool SolutionGrid::rowComplete(int level) const {
  for (int t = 0; t <= numSteps_; ++t)
    if (!rows_[level][t].filled) return false;
  return true;
}

Trajectory SolutionGrid::rowTrajectory(int level) const {
  Trajectory trajectory;
  for (int t = 0; t <= numSteps_; ++t) {
    const Cell& c = cell(level, t);
    trajectory.positions.push_back(c.x);
    trajectory.velocities.push_back(c.v);
    trajectory.targets.push_back(c.target);
    trajectory.reports.push_back(c.report);
  }
  return trajectory;
}

MatX prolongedVelocityTarget(const MatX& xFine, const ProlongationOperator& op, const MatX& xCoarseT,
                  const MatX& xCoarseTm1) {
  if (xCoarseT.cols() != op.cols() || xCoarseTm1.cols() != op.cols() ||
      xFine.cols() != op.rows())
    throw configError("prolongedVelocityTarget: size mismatch");
  return xFine + prolong(op, MatX(xCoarseT - xCoarseTm1));
}

void runCoarsest(SolutionGrid& grid, const LevelSimulator& simulator) {
  const auto start = std::chrono::steady_clock::now();
  grid.setInitial(0, simulator.context().initialPositions, simulator.context().initialVelocities);
  for (int t = 1; t <= grid.numSteps(); ++t) {
    const MatX& x = grid.x(0, t - 1);
    const MatX target = x + grid.h() * grid.v(0, t - 1);
    SolveReport report;
    MatX next;
    try {
      next = simulator.stepFromTarget(x, target, nullptr, &report);
    } catch (const SolveFailure& failure) {
      throw numericalError("runCoarsest: step " + std::to_string(t) + ": " + failure.what());
    }
    grid.setCell(0, t, std::move(next), target, report);
  }
  if (grid.rowSeconds.empty()) grid.rowSeconds.assign(grid.numLevels(), 0.0);
  grid.rowSeconds[0] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void advanceLevel(SolutionGrid& grid, int level, const LevelSimulator& simulator,
                  const ProlongationOperator& op, double penaltyWeight) {
  if (level < 1 || level >= grid.numLevels()) throw configError("advanceLevel: bad level");
  if (!grid.rowComplete(level - 1))
    throw numericalError("advanceLevel: row " + std::to_string(level - 1) + " incomplete");
  const auto start = std::chrono::steady_clock::now();

  grid.setInitial(level, simulator.context().initialPositions,
                  simulator.context().initialVelocities);
  for (int t = 1; t <= grid.numSteps(); ++t) {
    // the diagonal update at (level, t) prolongs the coarse velocity one
    // column back; at the first step the coarse history is the start state
    const MatX& xFine = grid.x(level, t - 1);
    const MatX& coarseT = grid.x(level - 1, t - 1);
    const MatX& coarseTm1 = grid.x(level - 1, std::max(t - 2, 0));
    const MatX target = prolongedVelocityTarget(xFine, op, coarseT, coarseTm1);

    PenaltyTerm penalty;
    const PenaltyTerm* penaltyPtr = nullptr;
    if (penaltyWeight > 0) {
      penalty.weight = penaltyWeight;
      penalty.target = prolong(op, grid.x(level - 1, t));
      penaltyPtr = &penalty;
    }
    SolveReport report;
    MatX next;
    try {
      next = simulator.stepFromTarget(xFine, target, penaltyPtr, &report);
    } catch (const SolveFailure& failure) {
      throw numericalError("advanceLevel: level " + std::to_string(level) + " step " +
                           std::to_string(t) + ": " + failure.what());
    }
    grid.setCell(level, t, std::move(next), target, report);
  }
  if (grid.rowSeconds.empty()) grid.rowSeconds.assign(grid.numLevels(), 0.0);
  grid.rowSeconds[level] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

SolutionGrid runProgressive(const std::vector<LevelSimulator>& simulators,
                            const std::vector<ProlongationOperator>& operators, int steps,
                            double penaltyWeight) {
  if (simulators.empty()) throw configError("runProgressive: no levels");
  if (operators.size() + 1 != simulators.size())
    throw configError("runProgressive: need one operator per level pair");
  SolutionGrid grid(static_cast<int>(simulators.size()), steps, simulators.front().h());
  grid.rowSeconds.assign(grid.numLevels(), 0.0);
  runCoarsest(grid, simulators.front());
  for (int level = 1; level < grid.numLevels(); ++level)
    advanceLevel(grid, level, simulators[level], operators[level - 1], penaltyWeight);
  return grid;
}

Trajectory runTracksBaseline(const LevelSimulator& fineSimulator, const Trajectory& coarse,
                             const ProlongationOperator& op, double penaltyWeight) {
  std::vector<MatX> targets;
  targets.reserve(coarse.positions.size());
  for (const MatX& xc : coarse.positions) targets.push_back(prolong(op, xc));
  return directRollout(fineSimulator, coarse.steps(), penaltyWeight, &targets);
}

Trajectory runEmbeddedBaseline(const Trajectory& coarse, const ProlongationOperator& op,
                               double h) {
  Trajectory fine;
  for (size_t t = 0; t < coarse.positions.size(); ++t) {
    fine.positions.push_back(prolong(op, coarse.positions[t]));
    fine.velocities.push_back(t == 0 ? MatX::Zero(fine.positions[0].rows(),
                                                  fine.positions[0].cols())
                                     : MatX((fine.positions[t] - fine.positions[t - 1]) / h));
    fine.targets.emplace_back();
    fine.reports.emplace_back();
  }
  return fine;
}

}  // namespace prodyn
