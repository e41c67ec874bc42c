#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "fixtures.hpp"
#include "prodyn/materials.hpp"
#include "prodyn/meshgen.hpp"

using namespace prodyn;

namespace {

constexpr MaterialModel kModels[] = {MaterialModel::kNeoHookean, MaterialModel::kStVK,
                                     MaterialModel::kCorotational};

ElasticEnergy makeEnergy(const SimplicialMesh& mesh, MaterialModel model) {
  MaterialParams params;
  params.model = model;
  params.young = 1e4;
  params.poisson = 0.35;
  params.density = 100;
  return ElasticEnergy(mesh, {params}, std::vector<int>(mesh.numElements(), 0));
}

MatX perturbedRest(const SimplicialMesh& mesh, double scale, std::uint64_t seed) {
  auto rng = fixtures::testRng(seed);
  MatX x = mesh.rest;
  for (int v = 0; v < x.cols(); ++v)
    for (int i = 0; i < mesh.dim; ++i) x(i, v) += scale * rng.uniform(-1.0, 1.0);
  return x;
}

// central finite differences of the energy; the independent oracle for
// analytic gradients
VecX fdGradient(const ElasticEnergy& energy, const SimplicialMesh& mesh, const MatX& x,
                double step) {
  VecX grad(mesh.dim * mesh.numVertices());
  MatX probe = x;
  for (int v = 0; v < mesh.numVertices(); ++v)
    for (int i = 0; i < mesh.dim; ++i) {
      probe(i, v) = x(i, v) + step;
      const double plus = energy.energy(probe);
      probe(i, v) = x(i, v) - step;
      const double minus = energy.energy(probe);
      probe(i, v) = x(i, v);
      grad[mesh.dim * v + i] = (plus - minus) / (2.0 * step);
    }
  return grad;
}

MatX denseHessian(const ElasticEnergy& energy, const SimplicialMesh& mesh, const MatX& x,
                  bool psd) {
  std::vector<Triplet> triplets;
  energy.hessian(x, triplets, psd);
  const int n = mesh.dim * mesh.numVertices();
  SpMat H(n, n);
  H.setFromTriplets(triplets.begin(), triplets.end());
  return MatX(H);
}

}  // namespace

TEST_CASE("lame conversion") {
  SUBCASE("Y=1, nu=0") {
    const auto [mu, lambda] = lameFromYoungPoisson(1.0, 0.0);
    CHECK(mu == doctest::Approx(0.5));
    CHECK(lambda == doctest::Approx(0.0));
  }
  SUBCASE("Y=2e4, nu=0.4") {
    const auto [mu, lambda] = lameFromYoungPoisson(2e4, 0.4);
    CHECK(mu == doctest::Approx(7142.857).epsilon(1e-4));
    CHECK(lambda == doctest::Approx(28571.43).epsilon(1e-4));
  }
  SUBCASE("incompressible limit is rejected") {
    CHECK_THROWS_AS(lameFromYoungPoisson(1.0, 0.5), Error);
  }
}

TEST_CASE("rest state: zero energy, zero gradient") {
  for (int dim : {2, 3}) {
    const SimplicialMesh mesh = fixtures::jitteredPair(dim).second;
    for (MaterialModel model : kModels) {
      const ElasticEnergy energy = makeEnergy(mesh, model);
      CHECK(energy.energy(mesh.rest) == doctest::Approx(0.0).epsilon(1e-12));
      VecX grad;
      energy.energyWithGradient(mesh.rest, grad);
      CHECK(grad.cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("rigid rotation costs nothing") {
  const SimplicialMesh mesh = fixtures::jitteredPair(3).second;
  Eigen::Matrix3d R =
      Eigen::AngleAxisd(0.8, Eigen::Vector3d(1, 2, 0.5).normalized()).toRotationMatrix();
  const MatX rotated = R * mesh.rest;
  for (MaterialModel model : kModels)
    CHECK(makeEnergy(mesh, model).energy(rotated) < 1e-10);
}

TEST_CASE("translation invariance is exact") {
  const SimplicialMesh mesh = fixtures::jitteredPair(2).second;
  // quantize so the power-of-two translation is exact in floating point;
  // the deformation gradient then sees bit-identical edge vectors
  MatX x = perturbedRest(mesh, 0.02, 3);
  for (int v = 0; v < x.cols(); ++v)
    for (int i = 0; i < 2; ++i) x(i, v) = std::round(x(i, v) * 1048576.0) / 1048576.0;
  MatX shifted = x;
  shifted.row(0).array() += 16.0;
  shifted.row(1).array() -= 8.0;
  for (MaterialModel model : kModels) {
    const ElasticEnergy energy = makeEnergy(mesh, model);
    CHECK(energy.energy(x) == energy.energy(shifted));
  }
}

TEST_CASE("analytic gradient matches central finite differences") {
  for (int dim : {2, 3}) {
    const SimplicialMesh mesh = fixtures::jitteredPair(dim).second;
    const double step = 1e-6 * mesh.bboxDiagonal();
    for (MaterialModel model : kModels) {
      const ElasticEnergy energy = makeEnergy(mesh, model);
      for (std::uint64_t trial = 0; trial < 3; ++trial) {
        const MatX x = perturbedRest(mesh, 0.03, 100 + trial);
        VecX grad;
        energy.energyWithGradient(x, grad);
        const VecX fd = fdGradient(energy, mesh, x, step);
        const double relErr = (grad - fd).norm() / std::max(fd.norm(), 1e-12);
        CHECK(relErr < 1e-4);
      }
    }
  }
}

TEST_CASE("Hessian-vector products match gradient differences") {
  for (int dim : {2, 3}) {
  const SimplicialMesh mesh = fixtures::jitteredPair(dim).second;
  const double step = 1e-6 * mesh.bboxDiagonal();
  auto rng = fixtures::testRng(55);
  for (MaterialModel model : kModels) {
    const ElasticEnergy energy = makeEnergy(mesh, model);
    const MatX x = perturbedRest(mesh, 0.03, 200);
    const MatX H = denseHessian(energy, mesh, x, /*psd=*/false);
    for (int trial = 0; trial < 3; ++trial) {
      VecX w(H.rows());
      for (int i = 0; i < w.size(); ++i) w[i] = rng.uniform(-1.0, 1.0);
      w.normalize();
      MatX dir(mesh.dim, mesh.numVertices());
      for (int v = 0; v < mesh.numVertices(); ++v)
        dir.col(v) = w.segment(mesh.dim * v, mesh.dim);
      VecX gPlus, gMinus;
      energy.energyWithGradient(x + step * dir, gPlus);
      energy.energyWithGradient(x - step * dir, gMinus);
      const VecX fd = (gPlus - gMinus) / (2.0 * step);
      const VecX hv = H * w;
      CHECK((hv - fd).norm() / std::max(fd.norm(), 1e-12) < 1e-4);
    }
  }
  }
}

TEST_CASE("energy nonnegativity on random states") {
  const SimplicialMesh mesh = fixtures::jitteredPair(2).second;
  for (MaterialModel model : kModels) {
    const ElasticEnergy energy = makeEnergy(mesh, model);
    for (std::uint64_t trial = 0; trial < 10; ++trial) {
      const double value = energy.energy(perturbedRest(mesh, 0.05, 300 + trial));
      CHECK(value >= -1e-12);
    }
  }
}

TEST_CASE("NeoHookean reports infinite energy past inversion") {
  const SimplicialMesh mesh = meshgen::referenceSimplex(2);
  const ElasticEnergy energy = makeEnergy(mesh, MaterialModel::kNeoHookean);
  MatX x = mesh.rest;
  x.col(2) = -x.col(2);  // flips the triangle
  CHECK(std::isinf(energy.energy(x)));
  VecX grad;
  CHECK_THROWS_AS(energy.energyWithGradient(x, grad), Error);
}

TEST_CASE("PSD projection caps the smallest eigenvalue") {
  const SimplicialMesh mesh = fixtures::jitteredPair(2).second;
  for (MaterialModel model : kModels) {
    const ElasticEnergy energy = makeEnergy(mesh, model);
    const MatX x = perturbedRest(mesh, 0.08, 400);
    const MatX H = denseHessian(energy, mesh, x, /*psd=*/true);
    Eigen::SelfAdjointEigenSolver<MatX> eig(0.5 * (H + H.transpose()));
    const double norm = eig.eigenvalues().cwiseAbs().maxCoeff();
    CHECK(eig.eigenvalues().minCoeff() >= -1e-8 * norm);
  }
}

TEST_CASE("material propagation across levels") {
  SUBCASE("uniform assignment stays uniform") {
    const Hierarchy h = synthesizeTestHierarchy(fixtures::unitSquare2D(), 3, 0.1);
    const auto perLevel = propagateMaterials(h, std::vector<int>(2, 5));
    for (const auto& assignment : perLevel)
      for (int id : assignment) CHECK(id == 5);
  }
  SUBCASE("two-material split lands near the coarse boundary") {
    const SimplicialMesh base = meshgen::rectGrid2D(4, 2, (VecD(2) << 0, 0).finished(),
                                                    (VecD(2) << 2, 1).finished());
    const Hierarchy h = synthesizeTestHierarchy(base, 3, 0.0);
    std::vector<int> coarse(base.numElements());
    for (int e = 0; e < base.numElements(); ++e)
      coarse[e] = elementCentroid(base, e)[0] < 1.0 ? 0 : 1;
    const auto perLevel = propagateMaterials(h, coarse);
    // coarse element width is 0.5; every misclassified centroid must lie
    // within one coarse-element width of the x=1 interface
    const double width = 0.5;
    for (int l = 1; l < h.numLevels(); ++l)
      for (int e = 0; e < h.levels[l].numElements(); ++e) {
        const double cx = elementCentroid(h.levels[l], e)[0];
        const int expected = cx < 1.0 ? 0 : 1;
        if (perLevel[l][e] != expected) CHECK(std::abs(cx - 1.0) <= width);
      }
  }
  SUBCASE("single element per level propagates identically") {
    Hierarchy h;
    h.levels.push_back(meshgen::referenceSimplex(2));
    h.levels.push_back(meshgen::referenceSimplex(2));
    const auto perLevel = propagateMaterials(h, {3});
    CHECK(perLevel[1] == std::vector<int>{3});
  }
}
