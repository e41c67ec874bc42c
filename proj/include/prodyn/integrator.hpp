#pragma once

#include <memory>
#include <vector>

#include "prodyn/contact.hpp"
#include "prodyn/materials.hpp"
#include "prodyn/mesh.hpp"

namespace prodyn {

struct SolverSettings {
  // Newton decrement sqrt(g^T H^{-1} g / total mass): meters, so the same
  // tolerance means the same thing at every resolution.
  double newtonTol = 1e-6;
  int maxIters = 100;
  double lineSearchShrink = 0.5;
  double armijo = 1e-4;
  bool projectPsd = true;

  void validate() const;
};

struct SolveReport {
  int iterations = 0;
  double finalDecrement = 0.0;
  int lineSearchSteps = 0;
  double minAlpha = 1.0;
  double minDistance = std::numeric_limits<double>::infinity();
  bool converged = false;
  std::vector<double> energyTrace;  // accepted energy per iteration, initial first
};

/// Mass-weighted quadratic pull toward a target state: w ||x - target||_M^2.
struct PenaltyTerm {
  double weight = 0.0;
  MatX target;
};

/// One implicit-Euler incremental potential:
/// (1/2h^2)||x - xTilde||_M^2 + elastic + barrier + friction + gravity work
/// (+ optional consistency penalty), with per-vertex Dirichlet elimination.
class StepProblem {
 public:
  StepProblem(const SimplicialMesh& mesh, const LumpedMass& mass, double h, MatX xTilde);

  void setElastic(const ElasticEnergy* elastic) { elastic_ = elastic; }
  /// xPrevious seeds the lagged friction pair set (one fixed-point update
  /// per step) and anchors tangential displacements.
  void setContact(const ContactModel* contact, const MatX& xPrevious);
  void setGravity(const VecD& gravity) { gravity_ = gravity; }
  void setDirichlet(std::vector<int> vertices, MatX positions);
  void setPenalty(PenaltyTerm penalty);

  double energy(const MatX& x) const;
  double energyWithDerivatives(const MatX& x, VecX& gradient, std::vector<Triplet>* hessian,
                               bool projectPsd) const;

  /// Gradient of the force potential alone (elastic + barrier + lagged
  /// friction + gravity work; no inertia, no penalty).
  VecX forceGradient(const MatX& x) const;

  const SimplicialMesh& mesh() const { return mesh_; }
  const LumpedMass& mass() const { return mass_; }
  const MatX& xTilde() const { return xTilde_; }
  double h() const { return h_; }
  const ContactModel* contact() const { return contact_; }
  const std::vector<int>& dirichletVertices() const { return dirichletVertices_; }
  const MatX& dirichletPositions() const { return dirichletPositions_; }
  const MatX& xPrevious() const { return xPrevious_; }

 private:
  const SimplicialMesh& mesh_;
  const LumpedMass& mass_;
  double h_;
  MatX xTilde_;
  const ElasticEnergy* elastic_ = nullptr;
  const ContactModel* contact_ = nullptr;
  MatX xPrevious_;
  std::vector<LaggedContact> laggedFriction_;
  VecD gravity_;
  std::vector<int> dirichletVertices_;
  MatX dirichletPositions_;
  PenaltyTerm penalty_;
};

class SolveFailure : public Error {
 public:
  SolveFailure(const std::string& what, MatX bestIterate, SolveReport report)
      : Error(ErrorKind::kNumerical, what),
        bestIterate(std::move(bestIterate)),
        report(report) {}
  MatX bestIterate;
  SolveReport report;
};

/// Projected Newton with backtracking line search capped by the
/// intersection-free step filter; terminates on the Newton decrement.
MatX solveStep(const StepProblem& problem, const MatX& x0, const SolverSettings& settings,
               SolveReport* report = nullptr);

/// Everything fixed about one level's simulation.
struct LevelContext {
  const SimplicialMesh* mesh = nullptr;
  LumpedMass mass;
  std::shared_ptr<ElasticEnergy> elastic;
  std::shared_ptr<ContactModel> contact;
  VecD gravity;
  std::vector<int> dirichletVertices;
  MatX dirichletPositions;
  double h = 0.01;
  SolverSettings solver;
  MatX initialPositions;
  MatX initialVelocities;
};

class LevelSimulator {
 public:
  explicit LevelSimulator(LevelContext context);

  /// One implicit-Euler step toward an explicit momentum target xHat.
  MatX stepFromTarget(const MatX& x, const MatX& xHat, const PenaltyTerm* penalty,
                      SolveReport* report) const;
  /// Standard update xHat = x + h v.
  MatX step(const MatX& x, const MatX& v, const PenaltyTerm* penalty, SolveReport* report) const;

  /// Force-potential gradient at x with friction lagged from xPrevious,
  /// mirroring the step that produced x.
  VecX forceGradient(const MatX& x, const MatX& xPrevious) const;

  const LevelContext& context() const { return context_; }
  double h() const { return context_.h; }
  const LumpedMass& mass() const { return context_.mass; }
  double totalMass() const { return context_.mass.total(); }
  double minContactDistance(const MatX& x) const;

 private:
  LevelContext context_;
};

struct Trajectory {
  std::vector<MatX> positions;   // [0..N]
  std::vector<MatX> velocities;  // same length; v[0] = initial
  std::vector<MatX> targets;     // target used to reach positions[t]; [0] empty
  std::vector<SolveReport> reports;

  int steps() const { return static_cast<int>(positions.size()) - 1; }
};

/// Repeated standard steps: xTilde = x + h v, v' = (x' - x)/h. When a
/// positive penalty weight and per-step targets are given, each step t adds
/// w ||x - targets[t+1]||_M^2 (the tracking baseline).
Trajectory directRollout(const LevelSimulator& simulator, int steps, double penaltyWeight = 0.0,
                         const std::vector<MatX>* penaltyTargets = nullptr);

}  // namespace prodyn
