#pragma once

#include <memory>
#include <string>

#include <Eigen/SparseCholesky>

#include "prodyn/binding.hpp"
#include "prodyn/mesh.hpp"

namespace prodyn {

enum class ProlongationKind { kBarycentric, kBiharmonic, kPhong };

std::string kindName(ProlongationKind kind);

struct OperatorDiagnostics {
  double frobeniusNorm = 0.0;
  double twoNormEstimate = 0.0;  // 100 power iterations
  double minEntry = 0.0;
  double maxEntry = 0.0;
  double rowSumMaxDeviation = 0.0;
  bool hasNegativeEntries = false;
  // sqrt(m) Frobenius bound; asserted only for nonnegative operators
  bool frobeniusBoundApplies = false;
  bool frobeniusBoundHolds = false;
};

/// Sparse linear map from coarse per-vertex data to fine per-vertex data.
/// One scalar weight per (fine, coarse) vertex pair, applied to every
/// coordinate, so the same matrix prolongs positions and velocities.
struct ProlongationOperator {
  SpMat weights;  // nFine x nCoarse
  ProlongationKind kind = ProlongationKind::kBarycentric;
  OperatorDiagnostics diagnostics;

  int rows() const { return static_cast<int>(weights.rows()); }
  int cols() const { return static_cast<int>(weights.cols()); }
};

/// Row i holds vertex i's host-element barycentric weights.
ProlongationOperator buildBarycentric(const BindingMap& binding, const SimplicialMesh& coarse);

/// Smoothness system behind the biharmonic weights: min trace(W^T A W)/2
/// subject to B W = I, solved through the symmetric KKT system.
struct BiharmonicSystem {
  SpMat A;  // fine-mesh squared-Laplacian smoothness energy, PSD
  SpMat B;  // coarse-in-fine interpolation matrix, B * fineField = coarseField
  MatX W;   // solved coordinates, nFine x nCoarse
};

/// reverseBinding binds coarse vertices into fine elements (the same binding
/// machinery with the roles swapped). The fine mesh must be connected.
BiharmonicSystem solveBiharmonicSystem(const SimplicialMesh& fine, const SimplicialMesh& coarse,
                                       const BindingMap& reverseBinding);

ProlongationOperator buildBiharmonic(const SimplicialMesh& fine, const SimplicialMesh& coarse,
                                     const BindingMap& reverseBinding);

/// Vertex-averaged deformation-gradient interpolation blended with plain
/// barycentric interpolation. blend = 0 reproduces the barycentric operator;
/// both branches are affine-exact, so any blend reproduces affine motion.
ProlongationOperator buildPhong(const BindingMap& binding, const SimplicialMesh& fine,
                                const SimplicialMesh& coarse, double blend);

/// fineField = P * coarseField, applied coordinate-wise (fields are
/// dim x nVertices).
MatX prolong(const ProlongationOperator& op, const MatX& coarseField);

/// Least-squares left inverse (P^T P)^{-1} P^T with a cached factorization.
class Projection {
 public:
  explicit Projection(const ProlongationOperator& op);

  MatX apply(const MatX& fineField) const;  // dim x nFine -> dim x nCoarse
  VecX apply(const VecX& fineField) const;

 private:
  SpMat transposed_;
  Eigen::SimplicialLDLT<SpMat> normalFactorization_;
};

OperatorDiagnostics normReport(const SpMat& weights);

void exportMatrixMarket(const SpMat& matrix, const std::string& path);

}  // namespace prodyn
