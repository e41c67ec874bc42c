#pragma once

#include <vector>

#include "prodyn/integrator.hpp"
#include "prodyn/prolongation.hpp"

namespace prodyn {

/// States over the (time, level) grid. Cells fill under the diagonal
/// dependency rule: cell (l, t) requires (l, t-1) plus, for l >= 1, the
/// coarser cells (l-1, t-1) and (l-1, t-2) that its momentum target reads.
/// Velocities are derived, never stored independently, so the implicit-Euler
/// identity v = (x^t - x^{t-1})/h holds by construction.
class SolutionGrid {
 public:
  SolutionGrid(int numLevels, int numSteps, double h);

  void setInitial(int level, MatX x, MatX v);
  void setCell(int level, int t, MatX x, MatX target, SolveReport report);

  bool filled(int level, int t) const;
  const MatX& x(int level, int t) const;
  const MatX& v(int level, int t) const;
  const MatX& target(int level, int t) const;  // momentum target that produced x
  const SolveReport& report(int level, int t) const;

  int numLevels() const { return static_cast<int>(rows_.size()); }
  int numSteps() const { return numSteps_; }
  double h() const { return h_; }

  bool rowComplete(int level) const;
  Trajectory rowTrajectory(int level) const;

  std::vector<double> rowSeconds;  // wall time per level row, filled by runners

 private:
  struct Cell {
    MatX x, v, target;
    SolveReport report;
    bool filled = false;
  };
  const Cell& cell(int level, int t) const;

  std::vector<std::vector<Cell>> rows_;
  int numSteps_ = 0;
  double h_ = 0.0;
};

/// Momentum target with the prolonged coarse velocity:
/// xHat = xFine + P (xCoarseT - xCoarseTm1).
MatX prolongedVelocityTarget(const MatX& xFine, const ProlongationOperator& op, const MatX& xCoarseT,
                  const MatX& xCoarseTm1);

/// Fills row 0 by direct rollout of the coarsest simulator.
void runCoarsest(SolutionGrid& grid, const LevelSimulator& simulator);

/// Fills row `level` (>= 1): prolonged velocity targets from row level-1,
/// plus the optional mass-weighted consistency penalty toward the prolonged
/// coarse state (weight w, target P x_coarse^{t+1}).
void advanceLevel(SolutionGrid& grid, int level, const LevelSimulator& simulator,
                  const ProlongationOperator& op, double penaltyWeight);

/// Whole grid, row by row (each row's cells depend only on the previous
/// row's earlier columns, so row order satisfies the diagonal dependency).
SolutionGrid runProgressive(const std::vector<LevelSimulator>& simulators,
                            const std::vector<ProlongationOperator>& operators, int steps,
                            double penaltyWeight);

/// Tracking baseline: fine direct rollout with its own momentum update plus
/// the per-step penalty w ||x - P x_coarse^{t+1}||_M^2 (no velocity
/// prolongation).
Trajectory runTracksBaseline(const LevelSimulator& fineSimulator, const Trajectory& coarse,
                             const ProlongationOperator& op, double penaltyWeight);

/// Embedded upsampling baseline: x_fine^t = P x_coarse^t, no solves.
Trajectory runEmbeddedBaseline(const Trajectory& coarse, const ProlongationOperator& op,
                               double h);

}  // namespace prodyn
