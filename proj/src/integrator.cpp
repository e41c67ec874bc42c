#include "prodyn/integrator.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>

namespace prodyn {

void SolverSettings::validate() const {
  if (newtonTol <= 0) throw configError("solver: newtonTol must be > 0");
  if (maxIters < 1) throw configError("solver: maxIters must be >= 1");
  if (lineSearchShrink <= 0 || lineSearchShrink >= 1)
    throw configError("solver: line-search shrink must lie in (0,1)");
}

StepProblem::StepProblem(const SimplicialMesh& mesh, const LumpedMass& mass, double h, MatX xTilde)
    : mesh_(mesh), mass_(mass), h_(h), xTilde_(std::move(xTilde)) {
  if (h_ <= 0) throw configError("step: h must be > 0");
  if (xTilde_.cols() != mesh.numVertices() || xTilde_.rows() != mesh.dim)
    throw configError("step: xTilde size mismatch");
  gravity_ = VecD::Zero(mesh.dim);
}

void StepProblem::setContact(const ContactModel* contact, const MatX& xPrevious) {
  contact_ = contact;
  xPrevious_ = xPrevious;
  laggedFriction_ = contact ? contact->lagFriction(xPrevious) : std::vector<LaggedContact>{};
}

void StepProblem::setDirichlet(std::vector<int> vertices, MatX positions) {
  dirichletVertices_ = std::move(vertices);
  dirichletPositions_ = std::move(positions);
  for (int v : dirichletVertices_)
    if (v < 0 || v >= mesh_.numVertices()) throw configError("step: dirichlet index out of range");
}

void StepProblem::setPenalty(PenaltyTerm penalty) {
  if (penalty.weight < 0) throw configError("step: penalty weight must be >= 0");
  penalty_ = std::move(penalty);
}

namespace {

double inertia(const LumpedMass& mass, const MatX& x, const MatX& xTilde, double h) {
  double total = 0.0;
  for (int v = 0; v < x.cols(); ++v)
    total += mass.m[v] * (x.col(v) - xTilde.col(v)).squaredNorm();
  return total / (2.0 * h * h);
}

}  // namespace

double StepProblem::energy(const MatX& x) const {
  double total = inertia(mass_, x, xTilde_, h_);
  if (elastic_) {
    const double psi = elastic_->energy(x);
    if (!std::isfinite(psi)) return psi;
    total += psi;
  }
  if (contact_) {
    const double barrier = contact_->barrier(contact_->activePairs(x), x);
    if (!std::isfinite(barrier)) return barrier;
    total += barrier;
    total += contact_->friction(laggedFriction_, x, xPrevious_, h_);
  }
  for (int v = 0; v < x.cols(); ++v) total -= mass_.m[v] * gravity_.dot(x.col(v));
  if (penalty_.weight > 0)
    for (int v = 0; v < x.cols(); ++v)
      total += penalty_.weight * mass_.m[v] * (x.col(v) - penalty_.target.col(v)).squaredNorm();
  return total;
}

double StepProblem::energyWithDerivatives(const MatX& x, VecX& gradient,
                                          std::vector<Triplet>* hessian, bool projectPsd) const {
  const int d = mesh_.dim;
  const int n = mesh_.numVertices();
  gradient.setZero(d * n);
  double total = inertia(mass_, x, xTilde_, h_);
  const double invH2 = 1.0 / (h_ * h_);
  for (int v = 0; v < n; ++v) {
    gradient.segment(d * v, d) += mass_.m[v] * invH2 * (x.col(v) - xTilde_.col(v));
    if (hessian)
      for (int i = 0; i < d; ++i)
        hessian->emplace_back(d * v + i, d * v + i, mass_.m[v] * invH2);
  }

  if (elastic_) {
    VecX elasticGrad;
    total += elastic_->energyWithGradient(x, elasticGrad);
    gradient += elasticGrad;
    if (hessian) elastic_->hessian(x, *hessian, projectPsd);
  }

  if (contact_) {
    total += contact_->barrierWithDerivatives(contact_->activePairs(x), x, gradient, hessian,
                                              projectPsd);
    total += contact_->frictionWithDerivatives(laggedFriction_, x, xPrevious_, h_, gradient,
                                               hessian);
  }

  for (int v = 0; v < n; ++v) {
    total -= mass_.m[v] * gravity_.dot(x.col(v));
    gradient.segment(d * v, d) -= mass_.m[v] * gravity_;
  }

  if (penalty_.weight > 0)
    for (int v = 0; v < n; ++v) {
      const VecD diff = x.col(v) - penalty_.target.col(v);
      total += penalty_.weight * mass_.m[v] * diff.squaredNorm();
      gradient.segment(d * v, d) += 2.0 * penalty_.weight * mass_.m[v] * diff;
      if (hessian)
        for (int i = 0; i < d; ++i)
          hessian->emplace_back(d * v + i, d * v + i, 2.0 * penalty_.weight * mass_.m[v]);
    }
  return total;
}

VecX StepProblem::forceGradient(const MatX& x) const {
  const int d = mesh_.dim;
  const int n = mesh_.numVertices();
  VecX gradient = VecX::Zero(d * n);
  if (elastic_) {
    VecX elasticGrad;
    elastic_->energyWithGradient(x, elasticGrad);
    gradient += elasticGrad;
  }
  if (contact_) {
    contact_->barrierWithDerivatives(contact_->activePairs(x), x, gradient, nullptr, false);
    contact_->frictionWithDerivatives(laggedFriction_, x, xPrevious_, h_, gradient, nullptr);
  }
  for (int v = 0; v < n; ++v) gradient.segment(d * v, d) -= mass_.m[v] * gravity_;
  return gradient;
}

MatX solveStep(const StepProblem& problem, const MatX& x0, const SolverSettings& settings,
               SolveReport* reportOut) {
  settings.validate();
  const int d = problem.mesh().dim;
  const int n = problem.mesh().numVertices();
  const double totalMass = problem.mass().total();

  MatX x = x0;
  for (size_t i = 0; i < problem.dirichletVertices().size(); ++i)
    x.col(problem.dirichletVertices()[i]) = problem.dirichletPositions().col(static_cast<int>(i));

  // free-DOF mapping (whole vertices are fixed or free)
  std::vector<char> fixed(n, 0);
  for (int v : problem.dirichletVertices()) fixed[v] = 1;
  std::vector<int> freeIndex(d * n, -1);
  int nFree = 0;
  for (int v = 0; v < n; ++v)
    if (!fixed[v])
      for (int i = 0; i < d; ++i) freeIndex[d * v + i] = nFree++;

  SolveReport report;
  if (problem.contact()) {
    const double distance = problem.contact()->minDistance(x);
    if (distance <= 0)
      throw numericalError("solveStep: initial state infeasible (min distance " +
                           std::to_string(distance) + ")");
  }

  double energy = problem.energy(x);
  if (!std::isfinite(energy))
    throw numericalError("solveStep: initial state has non-finite energy");
  report.energyTrace.push_back(energy);

  VecX gradient;
  std::vector<Triplet> triplets;
  Eigen::SimplicialLDLT<SpMat> factorization;

  for (int iter = 0; iter < settings.maxIters; ++iter) {
    triplets.clear();
    problem.energyWithDerivatives(x, gradient, &triplets, settings.projectPsd);

    if (nFree == 0) {
      report.converged = true;
      break;
    }

    VecX gradFree(nFree);
    for (int dof = 0; dof < d * n; ++dof)
      if (freeIndex[dof] >= 0) gradFree[freeIndex[dof]] = gradient[dof];

    std::vector<Triplet> freeTriplets;
    freeTriplets.reserve(triplets.size());
    for (const Triplet& t : triplets)
      if (freeIndex[t.row()] >= 0 && freeIndex[t.col()] >= 0)
        freeTriplets.emplace_back(freeIndex[t.row()], freeIndex[t.col()], t.value());
    SpMat H(nFree, nFree);
    H.setFromTriplets(freeTriplets.begin(), freeTriplets.end());

    factorization.compute(H);
    double shift = 0.0;
    while (factorization.info() != Eigen::Success && shift < 1e8) {
      shift = shift == 0.0 ? 1e-8 * H.diagonal().cwiseAbs().maxCoeff() : 10.0 * shift;
      SpMat shifted = H;
      for (int i = 0; i < nFree; ++i) shifted.coeffRef(i, i) += shift;
      factorization.compute(shifted);
    }
    if (factorization.info() != Eigen::Success)
      throw SolveFailure("solveStep: Hessian factorization failed", x, report);

    const VecX direction = factorization.solve(-gradFree);
    const double gDotP = gradFree.dot(direction);
    const double decrement = std::sqrt(std::max(0.0, -gDotP) / totalMass);
    report.finalDecrement = decrement;
    if (decrement <= settings.newtonTol) {
      report.converged = true;
      break;
    }
    ++report.iterations;

    MatX step = MatX::Zero(d, n);
    for (int dof = 0; dof < d * n; ++dof)
      if (freeIndex[dof] >= 0) step(dof % d, dof / d) = direction[freeIndex[dof]];

    double alpha = 1.0;
    if (problem.contact()) alpha = problem.contact()->feasibleStepUpperBound(x, step);

    bool accepted = false;
    for (int ls = 0; ls < 80; ++ls) {
      const MatX trial = x + alpha * step;
      const double trialEnergy = problem.energy(trial);
      ++report.lineSearchSteps;
      if (std::isfinite(trialEnergy) && trialEnergy <= energy + settings.armijo * alpha * gDotP) {
        x = trial;
        energy = trialEnergy;
        report.energyTrace.push_back(energy);
        accepted = true;
        break;
      }
      alpha *= settings.lineSearchShrink;
    }
    if (!accepted) throw SolveFailure("solveStep: line search failed", x, report);
    report.minAlpha = std::min(report.minAlpha, alpha);
  }

  if (!report.converged)
    throw SolveFailure("solveStep: Newton did not converge within " +
                           std::to_string(settings.maxIters) + " iterations (decrement " +
                           std::to_string(report.finalDecrement) + ")",
                       x, report);
  if (problem.contact()) report.minDistance = problem.contact()->minDistance(x);
  if (reportOut) *reportOut = report;
  return x;
}

LevelSimulator::LevelSimulator(LevelContext context) : context_(std::move(context)) {
  if (!context_.mesh) throw configError("LevelSimulator: missing mesh");
  if (context_.initialPositions.size() == 0) context_.initialPositions = context_.mesh->rest;
  if (context_.initialVelocities.size() == 0)
    context_.initialVelocities = MatX::Zero(context_.mesh->dim, context_.mesh->numVertices());
}

MatX LevelSimulator::stepFromTarget(const MatX& x, const MatX& xHat, const PenaltyTerm* penalty,
                                    SolveReport* report) const {
  StepProblem problem(*context_.mesh, context_.mass, context_.h, xHat);
  problem.setElastic(context_.elastic.get());
  if (context_.contact) problem.setContact(context_.contact.get(), x);
  problem.setGravity(context_.gravity);
  problem.setDirichlet(context_.dirichletVertices, context_.dirichletPositions);
  if (penalty) problem.setPenalty(*penalty);
  return solveStep(problem, x, context_.solver, report);
}

MatX LevelSimulator::step(const MatX& x, const MatX& v, const PenaltyTerm* penalty,
                          SolveReport* report) const {
  return stepFromTarget(x, x + context_.h * v, penalty, report);
}

VecX LevelSimulator::forceGradient(const MatX& x, const MatX& xPrevious) const {
  StepProblem problem(*context_.mesh, context_.mass, context_.h, x);
  problem.setElastic(context_.elastic.get());
  if (context_.contact) problem.setContact(context_.contact.get(), xPrevious);
  problem.setGravity(context_.gravity);
  return problem.forceGradient(x);
}

double LevelSimulator::minContactDistance(const MatX& x) const {
  return context_.contact ? context_.contact->minDistance(x)
                          : std::numeric_limits<double>::infinity();
}

Trajectory directRollout(const LevelSimulator& simulator, int steps, double penaltyWeight,
                         const std::vector<MatX>* penaltyTargets) {
  const LevelContext& context = simulator.context();
  Trajectory trajectory;
  trajectory.positions.push_back(context.initialPositions);
  trajectory.velocities.push_back(context.initialVelocities);
  trajectory.targets.emplace_back();
  trajectory.reports.emplace_back();

  for (int t = 0; t < steps; ++t) {
    PenaltyTerm penalty;
    const PenaltyTerm* penaltyPtr = nullptr;
    if (penaltyWeight > 0 && penaltyTargets) {
      penalty.weight = penaltyWeight;
      penalty.target = (*penaltyTargets)[t + 1];
      penaltyPtr = &penalty;
    }
    const MatX& x = trajectory.positions.back();
    const MatX& v = trajectory.velocities.back();
    const MatX target = x + simulator.h() * v;
    SolveReport report;
    MatX next;
    try {
      next = simulator.stepFromTarget(x, target, penaltyPtr, &report);
    } catch (const SolveFailure& failure) {
      throw numericalError("directRollout: step " + std::to_string(t) + ": " + failure.what());
    }
    trajectory.targets.push_back(target);
    trajectory.velocities.push_back((next - x) / simulator.h());
    trajectory.positions.push_back(std::move(next));
    trajectory.reports.push_back(report);
  }
  return trajectory;
}

}  // namespace prodyn
