#include "prodyn/materials.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "prodyn/aabb_tree.hpp"
#include "prodyn/binding.hpp"

namespace prodyn {

MaterialModel materialModelFromName(const std::string& name) {
  if (name == "neohookean") return MaterialModel::kNeoHookean;
  if (name == "stvk") return MaterialModel::kStVK;
  if (name == "corotational") return MaterialModel::kCorotational;
  throw configError("unknown material model '" + name + "'");
}

std::string materialModelName(MaterialModel model) {
  switch (model) {
    case MaterialModel::kNeoHookean: return "neohookean";
    case MaterialModel::kStVK: return "stvk";
    case MaterialModel::kCorotational: return "corotational";
  }
  return "unknown";
}

void MaterialParams::validate() const {
  if (young <= 0) throw configError("material: young modulus must be > 0");
  if (poisson <= -1.0 || poisson >= 0.5)
    throw configError("material: poisson ratio must lie in (-1, 0.5)");
  if (density <= 0) throw configError("material: density must be > 0");
}

std::pair<double, double> lameFromYoungPoisson(double young, double poisson) {
  if (poisson <= -1.0 || poisson >= 0.5)
    throw configError("lameFromYoungPoisson: poisson ratio must lie in (-1, 0.5)");
  const double mu = young / (2.0 * (1.0 + poisson));
  const double lambda = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
  return {mu, lambda};
}

std::vector<ElementRestData> computeRestData(const SimplicialMesh& mesh,
                                             const std::vector<int>& materialPerElement) {
  if (static_cast<int>(materialPerElement.size()) != mesh.numElements())
    throw configError("computeRestData: assignment size mismatch");
  std::vector<ElementRestData> rest(mesh.numElements());
  const int d = mesh.dim;
  MatD shape(d, d);
  for (int e = 0; e < mesh.numElements(); ++e) {
    const VecD p0 = mesh.vertex(mesh.elements(0, e));
    for (int k = 1; k <= d; ++k) shape.col(k - 1) = mesh.vertex(mesh.elements(k, e)) - p0;
    rest[e].inverseRestShape = shape.inverse();
    rest[e].volume = mesh.restVolume(e);
    rest[e].material = materialPerElement[e];
  }
  return rest;
}

namespace {

MatD deformationGradient(const SimplicialMesh& mesh, const ElementRestData& rest, int e,
                         const MatX& x) {
  const int d = mesh.dim;
  MatD shape(d, d);
  const VecD p0 = x.col(mesh.elements(0, e));
  for (int k = 1; k <= d; ++k) shape.col(k - 1) = x.col(mesh.elements(k, e)) - p0;
  return shape * rest.inverseRestShape;
}

struct Polar {
  MatD R, S;
  double trS = 0.0;
};

Polar polarDecomposition(const MatD& F) {
  Eigen::JacobiSVD<MatD> svd(F, Eigen::ComputeFullU | Eigen::ComputeFullV);
  MatD U = svd.matrixU();
  const MatD V = svd.matrixV();
  VecD sigma = svd.singularValues();
  // reflection fix: det R = +1
  if ((U * V.transpose()).determinant() < 0) {
    U.col(F.rows() - 1) *= -1.0;
    sigma[F.rows() - 1] *= -1.0;
  }
  Polar polar;
  polar.R = U * V.transpose();
  polar.S = V * sigma.asDiagonal() * V.transpose();
  polar.trS = sigma.sum();
  return polar;
}

// dR for a differential dF about the polar decomposition F = R S.
MatD rotationDifferential(const Polar& polar, const MatD& dF) {
  const int d = static_cast<int>(dF.rows());
  const MatD G = polar.R.transpose() * dF - dF.transpose() * polar.R;  // = Omega S + S Omega
  MatD omega(d, d);
  if (d == 2) {
    const double w = G(1, 0) / polar.trS;
    omega << 0, -w, w, 0;
  } else {
    Eigen::Vector3d g(G(2, 1), G(0, 2), G(1, 0));
    MatD lhs = polar.trS * MatD::Identity(3, 3) - polar.S;
    const Eigen::Vector3d w = lhs.inverse() * g;
    omega.resize(3, 3);
    omega << 0, -w[2], w[1],
             w[2], 0, -w[0],
             -w[1], w[0], 0;
  }
  return polar.R * omega;
}

struct ModelEval {
  double psi = 0.0;
  MatD stress;  // P(F)
};

ModelEval evalModel(MaterialModel model, const MatD& F, double mu, double lambda) {
  const int d = static_cast<int>(F.rows());
  ModelEval out;
  switch (model) {
    case MaterialModel::kNeoHookean: {
      const double J = F.determinant();
      if (J <= 0) {
        out.psi = std::numeric_limits<double>::infinity();
        return out;
      }
      const double logJ = std::log(J);
      out.psi = 0.5 * mu * (F.squaredNorm() - d) - mu * logJ + 0.5 * lambda * logJ * logJ;
      const MatD FinvT = F.inverse().transpose();
      out.stress = mu * (F - FinvT) + lambda * logJ * FinvT;
      return out;
    }
    case MaterialModel::kStVK: {
      const MatD E = 0.5 * (F.transpose() * F - MatD::Identity(d, d));
      out.psi = mu * E.squaredNorm() + 0.5 * lambda * E.trace() * E.trace();
      out.stress = F * (2.0 * mu * E + lambda * E.trace() * MatD::Identity(d, d));
      return out;
    }
    case MaterialModel::kCorotational: {
      const Polar polar = polarDecomposition(F);
      const MatD diff = F - polar.R;
      const double dilation = polar.trS - d;  // tr(R^T F - I)
      out.psi = mu * diff.squaredNorm() + 0.5 * lambda * dilation * dilation;
      out.stress = 2.0 * mu * diff + lambda * dilation * polar.R;
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

// Differential dP(F)[dF] per model; F assumed valid (J > 0 for NeoHookean).
MatD stressDifferential(MaterialModel model, const MatD& F, const MatD& dF, double mu,
                        double lambda, const Polar* polar) {
  const int d = static_cast<int>(F.rows());
  switch (model) {
    case MaterialModel::kNeoHookean: {
      const double J = F.determinant();
      const double logJ = std::log(J);
      const MatD Finv = F.inverse();
      const MatD FinvT = Finv.transpose();
      return mu * dF + (mu - lambda * logJ) * FinvT * dF.transpose() * FinvT +
             lambda * (Finv * dF).trace() * FinvT;
    }
    case MaterialModel::kStVK: {
      const MatD E = 0.5 * (F.transpose() * F - MatD::Identity(d, d));
      const MatD dE = 0.5 * (dF.transpose() * F + F.transpose() * dF);
      return dF * (2.0 * mu * E + lambda * E.trace() * MatD::Identity(d, d)) +
             F * (2.0 * mu * dE + lambda * dE.trace() * MatD::Identity(d, d));
    }
    case MaterialModel::kCorotational: {
      const MatD dR = rotationDifferential(*polar, dF);
      const double dilation = polar->trS - d;
      const double dDilation = (polar->R.transpose() * dF).trace();
      return 2.0 * mu * (dF - dR) + lambda * (dDilation * polar->R + dilation * dR);
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

ElasticEnergy::ElasticEnergy(const SimplicialMesh& mesh, std::vector<MaterialParams> materials,
                             std::vector<int> materialPerElement)
    : mesh_(mesh), materials_(std::move(materials)), assignment_(std::move(materialPerElement)) {
  if (materials_.empty()) throw configError("ElasticEnergy: no materials");
  for (const auto& m : materials_) {
    m.validate();
    lame_.push_back(lameFromYoungPoisson(m.young, m.poisson));
  }
  for (int id : assignment_)
    if (id < 0 || id >= static_cast<int>(materials_.size()))
      throw configError("ElasticEnergy: material id out of range");
  restData_ = computeRestData(mesh, assignment_);
}

double ElasticEnergy::energy(const MatX& x) const {
  double total = 0.0;
  for (int e = 0; e < mesh_.numElements(); ++e) {
    const auto& rest = restData_[e];
    const auto [mu, lambda] = lame_[rest.material];
    const MatD F = deformationGradient(mesh_, rest, e, x);
    const double psi = evalModel(materials_[rest.material].model, F, mu, lambda).psi;
    if (!std::isfinite(psi)) return std::numeric_limits<double>::infinity();
    total += rest.volume * psi;
  }
  return total;
}

double ElasticEnergy::energyWithGradient(const MatX& x, VecX& gradient) const {
  const int d = mesh_.dim;
  gradient.setZero(d * mesh_.numVertices());
  double total = 0.0;
  for (int e = 0; e < mesh_.numElements(); ++e) {
    const auto& rest = restData_[e];
    const auto [mu, lambda] = lame_[rest.material];
    const MatD F = deformationGradient(mesh_, rest, e, x);
    const ModelEval eval = evalModel(materials_[rest.material].model, F, mu, lambda);
    if (!std::isfinite(eval.psi))
      throw numericalError("elastic gradient evaluated at an inverted element " +
                           std::to_string(e));
    total += rest.volume * eval.psi;
    // force block: columns 1..d are P * Dm^{-T}; vertex 0 balances them
    const MatD forces = rest.volume * eval.stress * rest.inverseRestShape.transpose();
    VecD f0 = VecD::Zero(d);
    for (int k = 1; k <= d; ++k) {
      gradient.segment(d * mesh_.elements(k, e), d) += forces.col(k - 1);
      f0 -= forces.col(k - 1);
    }
    gradient.segment(d * mesh_.elements(0, e), d) += f0;
  }
  return total;
}

void ElasticEnergy::hessian(const MatX& x, std::vector<Triplet>& triplets,
                            bool projectPsd) const {
  const int d = mesh_.dim;
  const int block = d * (d + 1);
  MatX dPdF(d * d, d * d);
  MatX G(d * d, block);
  MatX H(block, block);
  MatD dF(d, d);

  for (int e = 0; e < mesh_.numElements(); ++e) {
    const auto& rest = restData_[e];
    const auto [mu, lambda] = lame_[rest.material];
    const MaterialModel model = materials_[rest.material].model;
    const MatD F = deformationGradient(mesh_, rest, e, x);
    if (model == MaterialModel::kNeoHookean && F.determinant() <= 0)
      throw numericalError("elastic hessian evaluated at an inverted element " +
                           std::to_string(e));
    Polar polar;
    if (model == MaterialModel::kCorotational) polar = polarDecomposition(F);

    for (int j = 0; j < d; ++j)
      for (int i = 0; i < d; ++i) {
        dF.setZero(d, d);
        dF(i, j) = 1.0;
        const MatD dP = stressDifferential(model, F, dF, mu, lambda, &polar);
        for (int q = 0; q < d; ++q)
          for (int p = 0; p < d; ++p) dPdF(p + d * q, i + d * j) = dP(p, q);
      }

    // dvec(F)/dx: vertex m >= 1 contributes Dm^{-1}(m-1, j) on coordinate i,
    // vertex 0 the negated column sums
    G.setZero();
    const MatD& B = rest.inverseRestShape;
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < d; ++i) {
        double colSum = 0.0;
        for (int m = 1; m <= d; ++m) {
          G(i + d * j, m * d + i) = B(m - 1, j);
          colSum += B(m - 1, j);
        }
        G(i + d * j, i) = -colSum;
      }

    H = rest.volume * G.transpose() * dPdF * G;
    if (projectPsd) {
      Eigen::SelfAdjointEigenSolver<MatX> eig(0.5 * (H + H.transpose()));
      VecX clamped = eig.eigenvalues().cwiseMax(0.0);
      H = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
    }

    for (int a = 0; a <= d; ++a)
      for (int b = 0; b <= d; ++b) {
        const int va = mesh_.elements(a, e), vb = mesh_.elements(b, e);
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j)
            triplets.emplace_back(d * va + i, d * vb + j, H(a * d + i, b * d + j));
      }
  }
}

std::vector<std::vector<int>> propagateMaterials(const Hierarchy& hierarchy,
                                                 const std::vector<int>& coarseAssignment) {
  if (static_cast<int>(coarseAssignment.size()) != hierarchy.levels.front().numElements())
    throw configError("propagateMaterials: assignment must cover every level-0 element");
  std::vector<std::vector<int>> perLevel;
  perLevel.push_back(coarseAssignment);
  for (int l = 1; l < hierarchy.numLevels(); ++l) {
    const SimplicialMesh& coarse = hierarchy.levels[l - 1];
    const SimplicialMesh& fine = hierarchy.levels[l];
    const std::vector<int>& parent = perLevel.back();

    MatX lo(coarse.dim, coarse.numElements()), hi(coarse.dim, coarse.numElements());
    for (int e = 0; e < coarse.numElements(); ++e) {
      VecD boxLo = coarse.vertex(coarse.elements(0, e));
      VecD boxHi = boxLo;
      for (int k = 1; k <= coarse.dim; ++k) {
        boxLo = boxLo.cwiseMin(coarse.vertex(coarse.elements(k, e)));
        boxHi = boxHi.cwiseMax(coarse.vertex(coarse.elements(k, e)));
      }
      lo.col(e) = boxLo;
      hi.col(e) = boxHi;
    }
    const AabbTree tree = AabbTree::build(lo, hi);

    std::vector<int> assignment(fine.numElements(), -1);
    for (int e = 0; e < fine.numElements(); ++e) {
      const VecD centroid = elementCentroid(fine, e);
      int host = -1;
      for (int candidate : tree.queryPoint(centroid, 1e-9 * coarse.bboxDiagonal())) {
        if (barycentricInElement(coarse, candidate, centroid).minCoeff() >= -1e-10) {
          host = candidate;
          break;
        }
      }
      if (host < 0) {  // outside: nearest coarse-element centroid
        double best = std::numeric_limits<double>::infinity();
        for (int candidate = 0; candidate < coarse.numElements(); ++candidate) {
          const double dist = (elementCentroid(coarse, candidate) - centroid).norm();
          if (dist < best) {
            best = dist;
            host = candidate;
          }
        }
      }
      assignment[e] = parent[host];
    }
    perLevel.push_back(std::move(assignment));
  }
  return perLevel;
}

}  // namespace prodyn
