#pragma once

#include <array>
#include <string>
#include <vector>

#include "prodyn/integrator.hpp"
#include "prodyn/progressive.hpp"

namespace prodyn {

/// Temporal-continuity stencil residual at step t (1 <= t <= N-1):
///   e = || (y^{t+1} - 2 y^t + y^{t-1})/2 + (h^2/2) M^{-1} grad F(y^{t+1}) ||_M^2
/// normalized by the solver's own step residual
///   eHat = || (x^{t+1} - xHat^t) + h^2 M^{-1} grad F(x^{t+1}) ||_M^2
/// where xHat is the momentum target the integrator actually used.
struct ContinuityResult {
  double e = 0.0;
  double eHat = 0.0;
  double n = 0.0;  // e / eHat, dimensionless (0 when both vanish)
};

ContinuityResult continuityError(const LevelSimulator& simulator, const Trajectory& trajectory,
                                 int t);

/// Cross-level consistency: d = || projection(x_fine^t) - x_coarse^t ||_{M_coarse}^2.
double consistencyError(const MatX& xFine, const MatX& xCoarse, const Projection& projection,
                        const LumpedMass& coarseMass);

double massNormSquared(const MatX& field, const LumpedMass& mass);

struct MetricTraces {
  // continuity rows: (level, t, e, eHat, n) for 1 <= t <= N-1
  // consistency rows: (level, t, d) for level >= 1, 0 <= t <= N
  std::vector<std::array<double, 5>> continuity;
  std::vector<std::array<double, 3>> consistency;
};

MetricTraces computeTraces(const SolutionGrid& grid, const std::vector<LevelSimulator>& simulators,
                           const std::vector<ProlongationOperator>& operators);

/// Writes continuity.csv and consistency.csv with deterministic formatting.
void emitTraces(const MetricTraces& traces, const std::string& directory);

}  // namespace prodyn
