#include "prodyn/prolongation.hpp"

#include <cmath>
#include <fstream>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include "prodyn/rng.hpp"

namespace prodyn {

std::string kindName(ProlongationKind kind) {
  switch (kind) {
    case ProlongationKind::kBarycentric: return "barycentric";
    case ProlongationKind::kBiharmonic: return "biharmonic";
    case ProlongationKind::kPhong: return "phong";
  }
  return "unknown";
}

namespace {

SpMat interpolationMatrix(const BindingMap& binding, const SimplicialMesh& coarse) {
  if (!binding.complete()) throw configError("prolongation: incomplete binding");
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<size_t>(binding.size()) * (coarse.dim + 1));
  for (int v = 0; v < binding.size(); ++v) {
    const int host = binding.hostElement[v];
    for (int k = 0; k <= coarse.dim; ++k)
      triplets.emplace_back(v, coarse.elements(k, host), binding.coords(k, v));
  }
  SpMat weights(binding.size(), coarse.numVertices());
  weights.setFromTriplets(triplets.begin(), triplets.end());
  weights.makeCompressed();
  return weights;
}

}  // namespace

ProlongationOperator buildBarycentric(const BindingMap& binding, const SimplicialMesh& coarse) {
  ProlongationOperator op;
  op.kind = ProlongationKind::kBarycentric;
  op.weights = interpolationMatrix(binding, coarse);
  op.diagnostics = normReport(op.weights);
  return op;
}

namespace {

// Per-element constant hat-function gradients: column k is the gradient of
// the barycentric basis of local vertex k.
MatX elementBasisGradients(const SimplicialMesh& mesh, int e) {
  const int d = mesh.dim;
  MatD edges(d, d);
  const VecD p0 = mesh.vertex(mesh.elements(0, e));
  for (int k = 1; k <= d; ++k) edges.col(k - 1) = mesh.vertex(mesh.elements(k, e)) - p0;
  const MatD inv = edges.inverse();
  MatX gradients(d, d + 1);
  for (int k = 1; k <= d; ++k) gradients.col(k) = inv.row(k - 1).transpose();
  gradients.col(0) = -gradients.rightCols(d).rowwise().sum();
  return gradients;
}

// Squared-Laplacian smoothness energy with affine functions in its kernel:
// the pointwise FEM Laplacian (consistent only at interior vertices, hence
// restricted to interior rows) mass-normalized and squared, plus a
// facet gradient-jump term that removes the discrete-harmonic null space.
SpMat assembleSmoothnessEnergy(const SimplicialMesh& mesh) {
  const int n = mesh.numVertices();
  const int d = mesh.dim;

  // linear FEM stiffness (Laplacian)
  std::vector<Triplet> stiffness;
  for (int e = 0; e < mesh.numElements(); ++e) {
    const MatX g = elementBasisGradients(mesh, e);
    const double vol = mesh.restVolume(e);
    for (int a = 0; a <= d; ++a)
      for (int b = 0; b <= d; ++b)
        stiffness.emplace_back(mesh.elements(a, e), mesh.elements(b, e),
                               vol * g.col(a).dot(g.col(b)));
  }
  SpMat laplacian(n, n);
  laplacian.setFromTriplets(stiffness.begin(), stiffness.end());

  const BoundarySurface boundary = extractBoundary(mesh);
  std::vector<char> onBoundary(n, 0);
  for (int f = 0; f < boundary.numFacets(); ++f)
    for (int k = 0; k < d; ++k) onBoundary[boundary.facets(k, f)] = 1;

  std::vector<int> interiorRow(n, -1);
  int nInterior = 0;
  for (int v = 0; v < n; ++v)
    if (!onBoundary[v]) interiorRow[v] = nInterior++;

  const LumpedMass mass = lumpedMass(mesh, 1.0);
  SpMat A(n, n);
  if (nInterior > 0) {
    std::vector<Triplet> interior;
    for (int col = 0; col < laplacian.outerSize(); ++col)
      for (SpMat::InnerIterator it(laplacian, col); it; ++it)
        if (interiorRow[it.row()] >= 0)
          interior.emplace_back(interiorRow[it.row()], static_cast<int>(it.col()), it.value());
    SpMat laplacianInterior(nInterior, n);
    laplacianInterior.setFromTriplets(interior.begin(), interior.end());
    VecX invMass(nInterior);
    for (int v = 0; v < n; ++v)
      if (interiorRow[v] >= 0) invMass[interiorRow[v]] = 1.0 / mass.m[v];
    A = laplacianInterior.transpose() * invMass.asDiagonal() * laplacianInterior;
  }

  // gradient-jump consistency term across interior facets; its null space is
  // exactly the affine functions, which keeps the constrained solve unique
  const Adjacency adjacency = buildAdjacency(mesh);
  std::vector<Triplet> jump;
  std::vector<int> localVertex;
  for (int e = 0; e < mesh.numElements(); ++e) {
    const MatX ge = elementBasisGradients(mesh, e);
    for (int f : adjacency.elementElement[e]) {
      if (f < e) continue;  // each interior facet once
      const MatX gf = elementBasisGradients(mesh, f);
      // union of the two elements' vertices; shared facet vertices < d+1 deep
      localVertex.clear();
      for (int k = 0; k <= d; ++k) localVertex.push_back(mesh.elements(k, e));
      for (int k = 0; k <= d; ++k) {
        const int v = mesh.elements(k, f);
        if (std::find(localVertex.begin(), localVertex.end(), v) == localVertex.end())
          localVertex.push_back(v);
      }
      const int nLocal = static_cast<int>(localVertex.size());
      MatX jumpOp = MatX::Zero(d, nLocal);
      for (int k = 0; k <= d; ++k) {
        const int ve = mesh.elements(k, e);
        const int vf = mesh.elements(k, f);
        const auto idxE = std::find(localVertex.begin(), localVertex.end(), ve) - localVertex.begin();
        const auto idxF = std::find(localVertex.begin(), localVertex.end(), vf) - localVertex.begin();
        jumpOp.col(idxE) += ge.col(k);
        jumpOp.col(idxF) -= gf.col(k);
      }
      // facet measure / centroid spacing makes the term scale with A
      const double spacing = (elementCentroid(mesh, e) - elementCentroid(mesh, f)).norm();
      const double facetMeasure =
          (mesh.restVolume(e) + mesh.restVolume(f)) / std::max(spacing, 1e-300);
      const MatX quadratic = (facetMeasure / spacing) * (jumpOp.transpose() * jumpOp);
      for (int a = 0; a < nLocal; ++a)
        for (int b = 0; b < nLocal; ++b)
          jump.emplace_back(localVertex[a], localVertex[b], quadratic(a, b));
    }
  }
  SpMat J(n, n);
  J.setFromTriplets(jump.begin(), jump.end());
  A += J;
  A.makeCompressed();
  return A;
}

}  // namespace

BiharmonicSystem solveBiharmonicSystem(const SimplicialMesh& fine, const SimplicialMesh& coarse,
                                       const BindingMap& reverseBinding) {
  if (reverseBinding.size() != coarse.numVertices())
    throw configError("buildBiharmonic: reverse binding must bind coarse vertices into fine elements");
  BiharmonicSystem system;
  system.A = assembleSmoothnessEnergy(fine);
  system.B = interpolationMatrix(reverseBinding, fine);
  const int nf = fine.numVertices();
  const int nc = coarse.numVertices();

  // rank condition: the affine kernel of A must stay visible through B
  MatX affineBasis(nf, fine.dim + 1);
  affineBasis.col(0).setOnes();
  affineBasis.rightCols(fine.dim) = fine.rest.transpose();
  const MatX sampled = system.B * affineBasis;
  Eigen::ColPivHouseholderQR<MatX> qr(sampled);
  if (qr.rank() < fine.dim + 1)
    throw numericalError("buildBiharmonic: coarse control points are affinely degenerate (rank " +
                         std::to_string(qr.rank()) + ")");

  std::vector<Triplet> kkt;
  for (int col = 0; col < system.A.outerSize(); ++col)
    for (SpMat::InnerIterator it(system.A, col); it; ++it)
      kkt.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int col = 0; col < system.B.outerSize(); ++col)
    for (SpMat::InnerIterator it(system.B, col); it; ++it) {
      kkt.emplace_back(nf + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
      kkt.emplace_back(static_cast<int>(it.col()), nf + static_cast<int>(it.row()), it.value());
    }
  SpMat kktMatrix(nf + nc, nf + nc);
  kktMatrix.setFromTriplets(kkt.begin(), kkt.end());
  kktMatrix.makeCompressed();

  Eigen::SparseLU<SpMat> solver;
  solver.compute(kktMatrix);
  if (solver.info() != Eigen::Success) {
    std::string rankReport = "n/a";
    if (static_cast<long>(nf) * nc <= 4'000'000) {
      Eigen::ColPivHouseholderQR<MatX> bqr(MatX(system.B));
      rankReport = std::to_string(bqr.rank()) + "/" + std::to_string(nc);
    }
    throw numericalError("buildBiharmonic: KKT factorization failed (B rank " + rankReport + ")");
  }

  MatX rhs = MatX::Zero(nf + nc, nc);
  rhs.bottomRows(nc).setIdentity();
  const MatX solution = solver.solve(rhs);
  system.W = solution.topRows(nf);

  const double interpolationResidual = (system.B * system.W - MatX::Identity(nc, nc))
                                           .cwiseAbs()
                                           .maxCoeff();
  if (interpolationResidual > 1e-8)
    throw numericalError("buildBiharmonic: BW = I residual " +
                         std::to_string(interpolationResidual));
  return system;
}

ProlongationOperator buildBiharmonic(const SimplicialMesh& fine, const SimplicialMesh& coarse,
                                     const BindingMap& reverseBinding) {
  const BiharmonicSystem system = solveBiharmonicSystem(fine, coarse, reverseBinding);
  ProlongationOperator op;
  op.kind = ProlongationKind::kBiharmonic;
  op.weights = system.W.sparseView(1.0, 1e-300);  // drop exact zeros only
  op.weights.makeCompressed();
  op.diagnostics = normReport(op.weights);
  return op;
}

ProlongationOperator buildPhong(const BindingMap& binding, const SimplicialMesh& fine,
                                const SimplicialMesh& coarse, double blend) {
  if (!binding.complete()) throw configError("buildPhong: incomplete binding");
  if (blend < 0.0 || blend > 1.0) throw configError("buildPhong: blend must be in [0,1]");
  const int d = coarse.dim;

  // per coarse vertex: volume-weighted average of incident element
  // deformation gradients, expressed as d-vectors h_{v,j} with
  // F_v(x) = sum_j x_j h_{v,j}^T (linear in coarse positions)
  const Adjacency adjacency = buildAdjacency(coarse);
  std::vector<std::vector<std::pair<int, VecD>>> gradientModel(coarse.numVertices());
  for (int v = 0; v < coarse.numVertices(); ++v) {
    double volumeSum = 0.0;
    for (int e : adjacency.vertexElements[v]) volumeSum += coarse.restVolume(e);
    std::vector<std::pair<int, VecD>>& model = gradientModel[v];
    for (int e : adjacency.vertexElements[v]) {
      const double scale = coarse.restVolume(e) / volumeSum;
      const MatX g = elementBasisGradients(coarse, e);
      for (int k = 0; k <= d; ++k) {
        const int j = coarse.elements(k, e);
        auto it = std::find_if(model.begin(), model.end(),
                               [j](const auto& entry) { return entry.first == j; });
        if (it == model.end())
          model.emplace_back(j, (scale * g.col(k)).eval());
        else
          it->second += scale * g.col(k);
      }
    }
  }

  std::vector<Triplet> triplets;
  for (int i = 0; i < binding.size(); ++i) {
    const int host = binding.hostElement[i];
    for (int k = 0; k <= d; ++k) {
      const int vk = coarse.elements(k, host);
      const double w = binding.coords(k, i);
      triplets.emplace_back(i, vk, w);
      if (blend == 0.0 || w == 0.0) continue;
      const VecD offset = fine.vertex(i) - coarse.vertex(vk);
      for (const auto& [j, h] : gradientModel[vk])
        triplets.emplace_back(i, j, blend * w * h.dot(offset));
    }
  }
  ProlongationOperator op;
  op.kind = ProlongationKind::kPhong;
  op.weights.resize(binding.size(), coarse.numVertices());
  op.weights.setFromTriplets(triplets.begin(), triplets.end());
  op.weights.makeCompressed();
  op.weights.prune(0.0, 0.0);
  op.diagnostics = normReport(op.weights);
  return op;
}

MatX prolong(const ProlongationOperator& op, const MatX& coarseField) {
  if (coarseField.cols() != op.cols())
    throw configError("prolong: field has " + std::to_string(coarseField.cols()) +
                      " columns, operator expects " + std::to_string(op.cols()));
  return (op.weights * coarseField.transpose()).transpose();
}

Projection::Projection(const ProlongationOperator& op) {
  transposed_ = op.weights.transpose();
  const SpMat normal = transposed_ * op.weights;
  normalFactorization_.compute(normal);
  if (normalFactorization_.info() != Eigen::Success)
    throw numericalError("projection: P^T P factorization failed (rank-deficient operator)");
  // LDLT of a singular Gram matrix can "succeed"; reject near-zero pivots
  const VecX diag = normalFactorization_.vectorD();
  if (diag.minCoeff() <= 1e-12 * diag.maxCoeff())
    throw numericalError("projection: P is (numerically) column rank-deficient");
}

VecX Projection::apply(const VecX& fineField) const {
  return normalFactorization_.solve(transposed_ * fineField);
}

MatX Projection::apply(const MatX& fineField) const {
  MatX out(fineField.rows(), transposed_.rows());
  for (int k = 0; k < fineField.rows(); ++k)
    out.row(k) = apply(VecX(fineField.row(k).transpose())).transpose();
  return out;
}

OperatorDiagnostics normReport(const SpMat& weights) {
  OperatorDiagnostics diag;
  double frobenius2 = 0.0;
  double minEntry = std::numeric_limits<double>::infinity();
  double maxEntry = -minEntry;
  for (int col = 0; col < weights.outerSize(); ++col)
    for (SpMat::InnerIterator it(weights, col); it; ++it) {
      frobenius2 += it.value() * it.value();
      minEntry = std::min(minEntry, it.value());
      maxEntry = std::max(maxEntry, it.value());
    }
  if (weights.nonZeros() == 0) minEntry = maxEntry = 0.0;
  diag.frobeniusNorm = std::sqrt(frobenius2);
  diag.minEntry = minEntry;
  diag.maxEntry = maxEntry;
  diag.hasNegativeEntries = minEntry < 0.0;

  const VecX rowSums = weights * VecX::Ones(weights.cols());
  diag.rowSumMaxDeviation = (rowSums.array() - 1.0).abs().maxCoeff();

  // two-norm by power iteration on P^T P, fixed 100 rounds, seeded
  Rng rng(20250807);
  VecX v(weights.cols());
  for (int i = 0; i < v.size(); ++i) v[i] = rng.uniform(-1.0, 1.0);
  v.normalize();
  double sigma2 = 0.0;
  for (int iter = 0; iter < 100; ++iter) {
    VecX w = weights.transpose() * (weights * v);
    sigma2 = w.norm();
    if (sigma2 <= 0) break;
    v = w / sigma2;
  }
  diag.twoNormEstimate = std::sqrt(sigma2);

  diag.frobeniusBoundApplies = !diag.hasNegativeEntries;
  diag.frobeniusBoundHolds =
      diag.frobeniusNorm <= std::sqrt(static_cast<double>(weights.rows())) * (1.0 + 1e-12);
  return diag;
}

void exportMatrixMarket(const SpMat& matrix, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw configError("cannot write " + path);
  out.precision(17);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << matrix.rows() << " " << matrix.cols() << " " << matrix.nonZeros() << "\n";
  for (int col = 0; col < matrix.outerSize(); ++col)
    for (SpMat::InnerIterator it(matrix, col); it; ++it)
      out << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
}

}  // namespace prodyn
