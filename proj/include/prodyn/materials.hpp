#pragma once

#include <string>
#include <vector>

#include "prodyn/hierarchy.hpp"
#include "prodyn/mesh.hpp"

namespace prodyn {

enum class MaterialModel { kNeoHookean, kStVK, kCorotational };

MaterialModel materialModelFromName(const std::string& name);
std::string materialModelName(MaterialModel model);

struct MaterialParams {
  MaterialModel model = MaterialModel::kNeoHookean;
  double young = 1e5;     // Pa
  double poisson = 0.4;
  double density = 1000;  // kg / m^dim

  void validate() const;
};

/// mu = Y / (2(1+nu)), lambda = Y nu / ((1+nu)(1-2nu)). Rejects nu == 0.5.
std::pair<double, double> lameFromYoungPoisson(double young, double poisson);

struct ElementRestData {
  MatD inverseRestShape;  // Dm^{-1}
  double volume = 0.0;
  int material = 0;
};

std::vector<ElementRestData> computeRestData(const SimplicialMesh& mesh,
                                             const std::vector<int>& materialPerElement);

/// Total elastic energy over the mesh with per-element material assignment.
/// Positions are dim x nV; gradients are flattened vertex-major (dim * nV).
/// NeoHookean returns +infinity past inversion so line searches reject it.
class ElasticEnergy {
 public:
  ElasticEnergy(const SimplicialMesh& mesh, std::vector<MaterialParams> materials,
                std::vector<int> materialPerElement);

  double energy(const MatX& x) const;
  double energyWithGradient(const MatX& x, VecX& gradient) const;
  /// Accumulates Hessian triplets; per-element eigenvalue clamp at zero
  /// when projectPsd is set.
  void hessian(const MatX& x, std::vector<Triplet>& triplets, bool projectPsd) const;

  const std::vector<ElementRestData>& restData() const { return restData_; }
  const std::vector<MaterialParams>& materials() const { return materials_; }

 private:
  const SimplicialMesh& mesh_;
  std::vector<MaterialParams> materials_;
  std::vector<std::pair<double, double>> lame_;  // per material
  std::vector<int> assignment_;
  std::vector<ElementRestData> restData_;
};

/// Carries the coarsest-level per-element assignment to every level: each
/// finer element adopts the material of the coarse element containing its
/// rest centroid (nearest coarse centroid when outside).
std::vector<std::vector<int>> propagateMaterials(const Hierarchy& hierarchy,
                                                 const std::vector<int>& coarseAssignment);

}  // namespace prodyn
