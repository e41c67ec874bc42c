// Acceptance suite: runs every shipped-quality gate end to end and prints
// one pass/fail line per criterion. Exit code 0 iff everything passed.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>

#include "fixtures.hpp"
#include "prodyn/binding.hpp"
#include "prodyn/metrics.hpp"
#include "prodyn/runner.hpp"
#include "prodyn/scenegen.hpp"

namespace fs = std::filesystem;
using namespace prodyn;
using Clock = std::chrono::steady_clock;

namespace {

struct Harness {
  int failed = 0;
  void record(int id, const std::string& what, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", id, what.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failed;
  }
};

double seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, ...) {
  char buffer[256];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buffer, sizeof(buffer), format, args);
  va_end(args);
  return buffer;
}

struct OperatorFixture {
  std::string name;
  SimplicialMesh coarse, fine;
};

std::vector<OperatorFixture> operatorFixtures() {
  std::vector<OperatorFixture> out;
  {
    const auto [coarse, fine] = fixtures::nestedPair2D();
    out.push_back({"nested-2d", coarse, fine});
  }
  {
    const auto [coarse, fine] = fixtures::jitteredPair(2);
    out.push_back({"jittered-2d", coarse, fine});
  }
  {
    const auto [coarse, fine] = fixtures::jitteredPair(3);
    out.push_back({"jittered-3d", coarse, fine});
  }
  {
    const SimplicialMesh mesh = fixtures::jitteredPair(2).second;
    out.push_back({"identical", mesh, mesh});
  }
  {
    const auto [coarse, fine] = fixtures::singleExtrapolatedPair3D();
    out.push_back({"single-extrapolated", coarse, fine});
  }
  return out;
}

ProlongationOperator buildKind(ProlongationKind kind, const SimplicialMesh& fine,
                               const SimplicialMesh& coarse, double blend = 0.5) {
  switch (kind) {
    case ProlongationKind::kBarycentric:
      return buildBarycentric(bindRobust(fine, coarse), coarse);
    case ProlongationKind::kBiharmonic:
      return buildBiharmonic(fine, coarse, bindRobust(coarse, fine));
    case ProlongationKind::kPhong:
      return buildPhong(bindRobust(fine, coarse), fine, coarse, blend);
  }
  throw std::logic_error("unreachable");
}

MatX affineField(const MatX& rest, int dim) {
  MatX T(dim, dim);
  if (dim == 2)
    T << 1.21, -0.34,
         0.17, 0.88;
  else
    T << 1.21, -0.34, 0.08,
         0.17, 0.88, -0.26,
         -0.05, 0.31, 1.12;
  VecX c = VecX::LinSpaced(dim, 0.4, 1.1);
  return (T * rest).colwise() + c;
}

VecD centerOfMass(const LumpedMass& mass, const MatX& x) {
  VecD com = VecD::Zero(x.rows());
  for (int v = 0; v < x.cols(); ++v) com += mass.m[v] * x.col(v);
  return com / mass.total();
}

double comDiscrepancy(const Scene& scene, const std::vector<Trajectory>& trajectories) {
  double total = 0.0;
  int count = 0;
  for (size_t l = 1; l < trajectories.size(); ++l)
    for (size_t t = 0; t < trajectories[0].positions.size(); ++t) {
      total += (centerOfMass(scene.simulators[l].mass(), trajectories[l].positions[t]) -
                centerOfMass(scene.simulators[0].mass(), trajectories[0].positions[t]))
                   .norm();
      ++count;
    }
  return total / count;
}

double minDistanceOverRun(const Scene& scene, const std::vector<Trajectory>& trajectories) {
  double worst = std::numeric_limits<double>::infinity();
  for (size_t l = 0; l < trajectories.size(); ++l)
    for (const MatX& x : trajectories[l].positions)
      worst = std::min(worst, scene.simulators[l].minContactDistance(x));
  return worst;
}

bool sameFileBytes(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  if (!fa || !fb) return false;
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  return sa.str() == sb.str();
}

double meanFinestConsistency(const std::string& runDir, int finestLevel) {
  std::ifstream in(fs::path(runDir) / "metrics" / "consistency.csv");
  if (!in) throw configError("missing consistency.csv in " + runDir);
  std::string line;
  std::getline(in, line);
  double sum = 0.0;
  int count = 0;
  while (std::getline(in, line)) {
    const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
    if (std::stoi(line.substr(0, c1)) != finestLevel) continue;
    sum += std::stod(line.substr(c2 + 1));
    ++count;
  }
  return sum / std::max(count, 1);
}

// Scene runs shared by several criteria, computed up front.
struct SharedRuns {
  fs::path work;

  Scene identity, spike, tight, speedup, box;
  std::vector<Scene> slit;  // w = 0, 0.025, 0.2

  RunSummary identityProg, identityDirect;
  RunSummary spikeProg, spikeDirect;
  std::vector<RunSummary> slitProg;
  RunSummary slitDirect;
  RunSummary tightProg, tightDirect, tightEmbedded;
  RunSummary speedupProg, speedupDirect;
  RunSummary boxProg, boxDirect;

  double spikeSeconds = 0.0;
  double slitSeconds = 0.0;
};

SharedRuns computeSharedRuns(const fs::path& work,
                             const std::function<std::string(const std::string&)>& scenePath) {
  SharedRuns runs;
  runs.work = work;
  auto note = [](const char* what) {
    std::printf("  %s\n", what);
    std::fflush(stdout);
  };
  note("identity");

  runs.identity = buildScene(scenePath("identity_ball"));
  runs.identityProg =
      runScene(runs.identity, RunMode::kProgressive, (work / "run_identity_prog").string());
  runs.identityDirect =
      runScene(runs.identity, RunMode::kDirectAllLevels, (work / "run_identity_direct").string());

  note("ball on spike");
  auto spikeStart = Clock::now();
  runs.spike = buildScene(scenePath("ball_on_spike"));
  runs.spikeProg = runScene(runs.spike, RunMode::kProgressive, (work / "run_spike_prog").string());
  runs.spikeDirect =
      runScene(runs.spike, RunMode::kDirectAllLevels, (work / "run_spike_direct").string());
  runs.spikeSeconds = seconds(spikeStart);

  note("slit array sweep");
  const auto slitStart = Clock::now();
  for (const char* tag : {"0000", "0025", "0200"}) {
    runs.slit.push_back(buildScene(scenePath(std::string("scene_w") + tag)));
    runs.slitProg.push_back(runScene(runs.slit.back(), RunMode::kProgressive,
                                     (work / (std::string("run_slit_") + tag)).string()));
  }
  runs.slitDirect =
      runScene(runs.slit.front(), RunMode::kDirectAllLevels, (work / "run_slit_direct").string());
  runs.slitSeconds = seconds(slitStart);

  note("tight contact");
  runs.tight = buildScene(scenePath("tight_contact"));
  runs.tightProg = runScene(runs.tight, RunMode::kProgressive, (work / "run_tight_prog").string());
  runs.tightDirect =
      runScene(runs.tight, RunMode::kDirectAllLevels, (work / "run_tight_direct").string());
  runs.tightEmbedded =
      runScene(runs.tight, RunMode::kEmbedded, (work / "run_tight_embedded").string());

  note("preview speedup");
  runs.speedup = buildScene(scenePath("preview_speedup"));
  runs.speedupProg =
      runScene(runs.speedup, RunMode::kProgressive, (work / "run_speedup").string());
  runs.speedupDirect =
      runScene(runs.speedup, RunMode::kDirectAllLevels, (work / "run_speedup_direct").string());

  note("box drop 3d");
  runs.box = buildScene(scenePath("box_drop_3d"));
  runs.boxProg = runScene(runs.box, RunMode::kProgressive, (work / "run_box_prog").string());
  runs.boxDirect =
      runScene(runs.box, RunMode::kDirectAllLevels, (work / "run_box_direct").string());
  return runs;
}

}  // namespace

int main() {
  Harness harness;
  const fs::path work = fs::temp_directory_path() / "prodyn_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);
  const auto scenePaths = scenegen::writeAllScenes((work / "scenes").string());
  const auto scenePath = [&](const std::string& fragment) -> std::string {
    for (const auto& p : scenePaths)
      if (p.find(fragment) != std::string::npos) return p;
    throw configError("no shipped scene matching " + fragment);
  };

  std::printf("building shared scene runs...\n");
  std::fflush(stdout);
  SharedRuns runs = computeSharedRuns(work, scenePath);

  // 1. prolongation correctness: three kinds on five fixtures ---------------
  {
    const auto start = Clock::now();
    double worstRowSum = 0.0, worstAffine = 0.0;
    for (const auto& fixture : operatorFixtures())
      for (auto kind : {ProlongationKind::kBarycentric, ProlongationKind::kBiharmonic,
                        ProlongationKind::kPhong}) {
        const ProlongationOperator op = buildKind(kind, fixture.fine, fixture.coarse);
        worstRowSum = std::max(worstRowSum, op.diagnostics.rowSumMaxDeviation);
        const MatX mapped = prolong(op, affineField(fixture.coarse.rest, fixture.coarse.dim));
        const MatX expected = affineField(fixture.fine.rest, fixture.fine.dim);
        worstAffine = std::max(worstAffine, (mapped - expected).cwiseAbs().maxCoeff());
      }
    const double elapsed = seconds(start);
    harness.record(1, "prolongation row sums and affine reproduction",
                   worstRowSum <= 1e-10 && worstAffine <= 1e-8 && elapsed < 10.0,
                   fmt("row-sum dev %.2e (<=1e-10), affine err %.2e (<=1e-8), %.1fs (<10s)",
                       worstRowSum, worstAffine, elapsed));
  }

  // 2. biharmonic sparse KKT vs dense oracle --------------------------------
  {
    bool small = true;
    double worstDiff = 0.0, worstInterp = 0.0;
    for (int dim : {2, 3}) {
      const auto [coarse, fine] = fixtures::jitteredPair(dim);
      small = small && fine.numVertices() <= 60;
      const BiharmonicSystem system =
          solveBiharmonicSystem(fine, coarse, bindRobust(coarse, fine));
      const int nf = fine.numVertices(), nc = coarse.numVertices();
      MatX kkt = MatX::Zero(nf + nc, nf + nc);
      kkt.topLeftCorner(nf, nf) = MatX(system.A);
      kkt.block(nf, 0, nc, nf) = MatX(system.B);
      kkt.block(0, nf, nf, nc) = MatX(system.B).transpose();
      MatX rhs = MatX::Zero(nf + nc, nc);
      rhs.bottomRows(nc).setIdentity();
      const MatX oracle = Eigen::FullPivLU<MatX>(kkt).solve(rhs).topRows(nf);
      worstDiff = std::max(worstDiff, (system.W - oracle).cwiseAbs().maxCoeff());
      worstInterp = std::max(worstInterp, (MatX(system.B) * system.W - MatX::Identity(nc, nc))
                                              .cwiseAbs()
                                              .maxCoeff());
    }
    harness.record(2, "biharmonic weights match the dense KKT oracle",
                   small && worstDiff <= 1e-8 && worstInterp <= 1e-8,
                   fmt("max |W - oracle| %.2e, |BW - I| %.2e (<=1e-8)", worstDiff, worstInterp));
  }

  // 3. binding robustness on the U fixture ----------------------------------
  {
    const fixtures::UPair pair = fixtures::uPair2D();
    const BindingMap robust = bindRobust(pair.fine, pair.coarse);
    const BindingMap naive = bindNaiveClosest(pair.fine, pair.coarse);
    const auto robustIso = bindingIsolation(pair.fine, pair.coarse, robust);
    const auto naiveIso = bindingIsolation(pair.fine, pair.coarse, naive);
    int robustFar = 0, naiveFar = 0;
    for (int v = 0; v < pair.fine.numVertices(); ++v) {
      robustFar += robustIso[v] > 3;
      naiveFar += naiveIso[v] > 3;
    }
    harness.record(3, "robust binding avoids cross-gap hosts on the U fixture",
                   naiveFar >= 1 && robustFar == 0,
                   fmt("graph-far hosts: naive %d (>=1), robust %d (==0)", naiveFar, robustFar));
  }

  // 4. energy derivatives against finite differences ------------------------
  {
    const auto start = Clock::now();
    double worstGrad = 0.0, worstHess = 0.0;
    const SimplicialMesh mesh = fixtures::jitteredPair(2).second;
    const double step = 1e-6 * mesh.bboxDiagonal();
    auto rng = fixtures::testRng(404);

    for (auto model : {MaterialModel::kNeoHookean, MaterialModel::kStVK,
                       MaterialModel::kCorotational}) {
      MaterialParams params;
      params.model = model;
      params.young = 1e4;
      params.poisson = 0.35;
      const ElasticEnergy energy(mesh, {params}, std::vector<int>(mesh.numElements(), 0));
      for (int trial = 0; trial < 20; ++trial) {
        MatX x = mesh.rest;
        for (int v = 0; v < x.cols(); ++v)
          for (int i = 0; i < 2; ++i) x(i, v) += 0.03 * rng.uniform(-1.0, 1.0);
        VecX grad;
        energy.energyWithGradient(x, grad);
        VecX fd(grad.size());
        MatX probe = x;
        for (int dof = 0; dof < grad.size(); ++dof) {
          probe(dof % 2, dof / 2) = x(dof % 2, dof / 2) + step;
          const double plus = energy.energy(probe);
          probe(dof % 2, dof / 2) = x(dof % 2, dof / 2) - step;
          const double minus = energy.energy(probe);
          probe(dof % 2, dof / 2) = x(dof % 2, dof / 2);
          fd[dof] = (plus - minus) / (2 * step);
        }
        worstGrad = std::max(worstGrad, (grad - fd).norm() / std::max(fd.norm(), 1e-12));

        std::vector<Triplet> triplets;
        energy.hessian(x, triplets, false);
        SpMat H(grad.size(), grad.size());
        H.setFromTriplets(triplets.begin(), triplets.end());
        MatX dir(2, x.cols());
        for (int v = 0; v < x.cols(); ++v)
          for (int i = 0; i < 2; ++i) dir(i, v) = rng.uniform(-1.0, 1.0);
        VecX gPlus, gMinus;
        energy.energyWithGradient(x + step * dir, gPlus);
        energy.energyWithGradient(x - step * dir, gMinus);
        const VecX fdH = (gPlus - gMinus) / (2 * step);
        VecX w(grad.size());
        for (int v = 0; v < x.cols(); ++v) w.segment(2 * v, 2) = dir.col(v);
        worstHess =
            std::max(worstHess, (VecX(H * w) - fdH).norm() / std::max(fdH.norm(), 1e-12));
      }
    }

    // barrier + friction on near-contact states
    HalfPlane plane;
    plane.normal = (VecD(2) << 0, 1).finished();
    plane.offset = -0.25;
    plane.mu = 0.4;
    BarrierParams barrierParams;
    barrierParams.dhat = 0.3;
    barrierParams.kappa = 50.0;
    barrierParams.epsV = 1e-3;
    const ContactModel contact(mesh, {plane}, {}, barrierParams, false);
    const MatX anchor = mesh.rest;
    const auto lagged = contact.lagFriction(anchor);
    for (int trial = 0; trial < 20; ++trial) {
      MatX x = mesh.rest;
      for (int v = 0; v < x.cols(); ++v)
        for (int i = 0; i < 2; ++i) x(i, v) += 0.01 * rng.uniform(-1.0, 1.0);
      VecX grad = VecX::Zero(x.size());
      contact.barrierWithDerivatives(contact.activePairs(x), x, grad, nullptr, false);
      contact.frictionWithDerivatives(lagged, x, anchor, 0.01, grad, nullptr);
      VecX fd(x.size());
      MatX probe = x;
      const double cStep = 1e-7;
      auto total = [&](const MatX& state) {
        return contact.barrier(contact.activePairs(state), state) +
               contact.friction(lagged, state, anchor, 0.01);
      };
      for (int dof = 0; dof < fd.size(); ++dof) {
        probe(dof % 2, dof / 2) = x(dof % 2, dof / 2) + cStep;
        const double plus = total(probe);
        probe(dof % 2, dof / 2) = x(dof % 2, dof / 2) - cStep;
        const double minus = total(probe);
        probe(dof % 2, dof / 2) = x(dof % 2, dof / 2);
        fd[dof] = (plus - minus) / (2 * cStep);
      }
      worstGrad = std::max(worstGrad, (grad - fd).norm() / std::max(fd.norm(), 1e-12));
    }

    const double elapsed = seconds(start);
    harness.record(4, "analytic derivatives match finite differences",
                   worstGrad <= 1e-4 && worstHess <= 1e-4 && elapsed < 30.0,
                   fmt("grad rel err %.2e, hess rel err %.2e (<=1e-4), %.1fs (<30s)", worstGrad,
                       worstHess, elapsed));
  }

  // 5. integrator exactness on gravity-only free fall ------------------------
  {
    const SimplicialMesh mesh = fixtures::unitSquare2D();
    LevelContext context;
    context.mesh = &mesh;
    context.mass = lumpedMass(mesh, 1000.0);
    context.gravity = (VecD(2) << 0, -9.81).finished();
    context.h = 0.01;
    context.solver.newtonTol = 1e-10;
    const LevelSimulator simulator(context);
    const Trajectory trajectory = directRollout(simulator, 100);
    double worst = 0.0;
    for (int t = 0; t <= 100; ++t) {
      MatX expected = mesh.rest;
      expected.row(1).array() += 0.01 * 0.01 * -9.81 * (t * (t + 1.0) / 2.0);
      worst = std::max(worst, (trajectory.positions[t] - expected).cwiseAbs().maxCoeff());
    }
    harness.record(5, "implicit Euler reproduces the free-fall recurrence", worst <= 1e-10,
                   fmt("max deviation %.2e (<=1e-10) over 100 steps", worst));
  }

  // 6. progressive == direct under the identity hierarchy -------------------
  {
    const double tolerance = 10.0 * runs.identity.config.solver.newtonTol;
    const LumpedMass& mass = runs.identity.simulators[0].mass();
    double worst = 0.0;
    for (size_t t = 0; t < runs.identityProg.trajectories[0].positions.size(); ++t) {
      const MatX diff = runs.identityProg.trajectories[1].positions[t] -
                        runs.identityProg.trajectories[0].positions[t];
      worst = std::max(worst, std::sqrt(massNormSquared(diff, mass) / mass.total()));
    }
    harness.record(6, "identity-hierarchy progressive matches direct per step", worst <= tolerance,
                   fmt("max mass-norm diff %.2e (<= %.0e) over %d contact steps", worst, tolerance,
                       runs.identity.config.steps));
  }

  // 7. global feasibility over every shipped scene, both solve modes --------
  {
    double worst = std::numeric_limits<double>::infinity();
    worst = std::min(worst, minDistanceOverRun(runs.spike, runs.spikeProg.trajectories));
    worst = std::min(worst, minDistanceOverRun(runs.spike, runs.spikeDirect.trajectories));
    for (size_t i = 0; i < runs.slit.size(); ++i)
      worst = std::min(worst, minDistanceOverRun(runs.slit[i], runs.slitProg[i].trajectories));
    worst = std::min(worst, minDistanceOverRun(runs.slit.front(), runs.slitDirect.trajectories));
    worst = std::min(worst, minDistanceOverRun(runs.tight, runs.tightProg.trajectories));
    worst = std::min(worst, minDistanceOverRun(runs.tight, runs.tightDirect.trajectories));
    worst = std::min(worst, minDistanceOverRun(runs.speedup, runs.speedupProg.trajectories));
    worst = std::min(worst, minDistanceOverRun(runs.speedup, runs.speedupDirect.trajectories));
    worst = std::min(worst, minDistanceOverRun(runs.box, runs.boxProg.trajectories));
    worst = std::min(worst, minDistanceOverRun(runs.box, runs.boxDirect.trajectories));
    worst = std::min(worst, minDistanceOverRun(runs.identity, runs.identityProg.trajectories));
    worst = std::min(worst, minDistanceOverRun(runs.identity, runs.identityDirect.trajectories));
    harness.record(7, "every frame of every shipped scene stays intersection-free", worst > 0.0,
                   fmt("min contact distance over all runs %.3e (> 0)", worst));
  }

  // 8. consistency-penalty monotonicity on the slit array --------------------
  {
    std::vector<double> means;
    for (const char* tag : {"0000", "0025", "0200"})
      means.push_back(meanFinestConsistency((work / (std::string("run_slit_") + tag)).string(),
                                            runs.slit.front().numLevels() - 1));
    const bool monotone = means[1] <= 1.05 * means[0] && means[2] <= 1.05 * means[1];
    harness.record(8, "consistency error is non-increasing in the penalty weight",
                   monotone && runs.slitSeconds < 600.0,
                   fmt("mean d %.4e / %.4e / %.4e for w=0/0.025/0.2 (5%% band), %.0fs (<600s)",
                       means[0], means[1], means[2], runs.slitSeconds));
  }

  // 9. divergence contrast on the ball-on-spike scene ------------------------
  {
    const double progressiveD = comDiscrepancy(runs.spike, runs.spikeProg.trajectories);
    const double directD = comDiscrepancy(runs.spike, runs.spikeDirect.trajectories);
    harness.record(9, "progressive halves the cross-level trajectory divergence",
                   directD >= 2.0 * progressiveD && runs.spikeSeconds < 600.0,
                   fmt("COM discrepancy direct %.4e vs progressive %.4e (ratio %.2f >= 2), %.0fs",
                       directD, progressiveD, directD / progressiveD, runs.spikeSeconds));
  }

  // 10. embedded-baseline contact violations vs progressive refinement ------
  {
    const double dhat = runs.tight.config.barrier.dhat;
    double embeddedWorst = std::numeric_limits<double>::infinity();
    for (const MatX& x : runs.tightEmbedded.trajectories[1].positions)
      embeddedWorst = std::min(embeddedWorst, runs.tight.simulators[1].minContactDistance(x));
    double progressiveWorst = std::numeric_limits<double>::infinity();
    for (const MatX& x : runs.tightProg.trajectories[1].positions)
      progressiveWorst = std::min(progressiveWorst, runs.tight.simulators[1].minContactDistance(x));
    harness.record(10, "embedded upsampling violates contact; progressive refinement does not",
                   embeddedWorst < dhat / 100.0 && progressiveWorst > 0.0 &&
                       progressiveWorst >= dhat / 100.0,
                   fmt("embedded min %.2e (< dhat/100 = %.0e), progressive min %.2e", embeddedWorst,
                       dhat / 100.0, progressiveWorst));
  }

  // 11. norm diagnostics ------------------------------------------------------
  {
    bool boundHolds = true;
    for (const auto& fixture : operatorFixtures()) {
      const ProlongationOperator op =
          buildKind(ProlongationKind::kBarycentric, fixture.fine, fixture.coarse);
      if (!op.diagnostics.hasNegativeEntries)
        boundHolds = boundHolds &&
                     op.diagnostics.frobeniusNorm <=
                         std::sqrt(static_cast<double>(op.rows())) * (1.0 + 1e-12);
    }
    const auto [coarse, fine] = fixtures::jitteredPair(2);
    const ProlongationOperator extrapolated =
        buildKind(ProlongationKind::kBarycentric, fine, coarse);
    Hierarchy pairHierarchy;
    pairHierarchy.levels = {coarse, fine};
    HierarchyReport report;
    validateHierarchy(pairHierarchy, &report);
    const bool reported = extrapolated.diagnostics.hasNegativeEntries &&
                          extrapolated.diagnostics.minEntry < 0.0 &&
                          !extrapolated.diagnostics.frobeniusBoundApplies &&
                          std::isfinite(report.levels[0].boundaryGap);
    harness.record(11, "Frobenius bound asserted for nonnegative operators, reported otherwise",
                   boundHolds && reported,
                   fmt("extrapolated entries [%.3f, %.3f], boundary gap %.2e reported",
                       extrapolated.diagnostics.minEntry, extrapolated.diagnostics.maxEntry,
                       report.levels[0].boundaryGap));
  }

  // 12. metric sanity ----------------------------------------------------------
  {
    const SimplicialMesh mesh = fixtures::unitSquare2D();
    LevelContext context;
    context.mesh = &mesh;
    context.mass = lumpedMass(mesh, 1000.0);
    context.gravity = (VecD(2) << 0, -9.81).finished();
    context.h = 0.01;
    context.solver.newtonTol = 1e-10;
    const LevelSimulator simulator(context);
    const Trajectory freeFall = directRollout(simulator, 30);
    double worstE = 0.0;
    for (int t = 1; t < 30; ++t)
      worstE = std::max(worstE, continuityError(simulator, freeFall, t).e);

    const ProlongationOperator op = buildOperator(runs.tight, 0);
    const Projection projection(op);
    double worstD = 0.0;
    for (size_t t = 0; t < runs.tightEmbedded.trajectories[0].positions.size(); ++t)
      worstD = std::max(
          worstD, consistencyError(runs.tightEmbedded.trajectories[1].positions[t],
                                   runs.tightEmbedded.trajectories[0].positions[t], projection,
                                   runs.tight.simulators[0].mass()));
    harness.record(12, "metric sanity: free-fall continuity and embedded consistency",
                   worstE <= 1e-12 && worstD <= 1e-9,
                   fmt("free-fall e %.2e (<=1e-12), embedded d %.2e (<=1e-9)", worstE, worstD));
  }

  // 13. determinism -------------------------------------------------------------
  {
    Scene again = buildScene(scenePath("tight_contact"));
    runScene(again, RunMode::kProgressive, (work / "run_tight_repeat").string());
    bool identical = true;
    const fs::path a = work / "run_tight_prog", b = work / "run_tight_repeat";
    for (int l = 0; l < 2 && identical; ++l)
      for (int t = 0; t <= again.config.steps && identical; ++t) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame%05d.bin", t);
        identical = sameFileBytes(a / "frames" / ("level" + std::to_string(l)) / name,
                                  b / "frames" / ("level" + std::to_string(l)) / name);
      }
    identical = identical &&
                sameFileBytes(a / "metrics" / "continuity.csv", b / "metrics" / "continuity.csv") &&
                sameFileBytes(a / "metrics" / "consistency.csv", b / "metrics" / "consistency.csv");
    harness.record(13, "repeated runs are bit-identical (frames and metric traces)", identical,
                   identical ? "all frame dumps and CSVs byte-equal" : "mismatch");
  }

  // 14. preview speedup ----------------------------------------------------------
  {
    const int coarseVerts = runs.speedup.hierarchy.levels.front().numVertices();
    const int fineVerts = runs.speedup.hierarchy.levels.back().numVertices();
    std::ostringstream report;
    writeReport((work / "run_speedup").string(), report);
    const double ratio = runs.speedupProg.levelSeconds.back() / runs.speedupProg.levelSeconds.front();
    harness.record(14, "coarse preview is at least 10x faster than the finest level",
                   fineVerts >= 20 * coarseVerts && ratio >= 10.0 &&
                       report.str().find("preview speedup") != std::string::npos,
                   fmt("vertices %d -> %d (>=20x), wall-time ratio %.1fx (>=10x)", coarseVerts,
                       fineVerts, ratio));
  }

  std::printf("%s\n", harness.failed == 0 ? "ACCEPTANCE: all criteria passed"
                                          : "ACCEPTANCE: FAILURES PRESENT");
  return harness.failed == 0 ? 0 : 1;
}
