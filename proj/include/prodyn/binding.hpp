#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prodyn/mesh.hpp"

namespace prodyn {

enum class BindStatus : std::uint8_t { kInside, kExtrapolated };

/// Host coarse element plus barycentric coordinates for every fine vertex.
/// Extrapolated bindings carry negative weights; weights always sum to 1.
struct BindingMap {
  Eigen::VectorXi hostElement;       // -1 while unassigned
  MatX coords;                       // (coarseDim+1) x nFineVertices
  std::vector<BindStatus> status;

  int size() const { return static_cast<int>(hostElement.size()); }
  bool complete() const;
  int countExtrapolated() const;
  double minWeight() const;
  double maxWeight() const;
};

/// Barycentric coordinates of `point` in the given element, by direct linear
/// solve; entries may be negative (extrapolation), and always sum to 1.
VecDp1 barycentricInElement(const SimplicialMesh& mesh, int element, const VecD& point);

struct ContainmentResult {
  BindingMap map;
  std::vector<int> unassigned;  // ascending vertex indices
};

/// Binds every fine vertex lying inside a coarse element (min weight
/// >= -1e-10); containment ties resolve to the lowest element index.
/// Accelerated by an AABB tree over coarse elements.
ContainmentResult bindContainment(const SimplicialMesh& fine, const SimplicialMesh& coarse);

/// Brute-force O(V*T) containment scan, kept as the test oracle for the
/// tree-accelerated path.
ContainmentResult bindContainmentBruteForce(const SimplicialMesh& fine,
                                            const SimplicialMesh& coarse);

/// Assigns the remaining exterior vertices by frontier propagation: pick the
/// unassigned vertex with the most assigned neighbors (ties: lowest index),
/// cast rays along its incident edges against the coarse boundary and take
/// the parent element of the closest hit; with no hit, adopt the neighbor
/// host whose centroid is nearest. Coordinates are extrapolated barycentric.
BindingMap bindExteriorRobust(const SimplicialMesh& fine, const SimplicialMesh& coarse,
                              ContainmentResult containment);

/// Containment followed by robust exterior assignment.
BindingMap bindRobust(const SimplicialMesh& fine, const SimplicialMesh& coarse);

/// Baseline: exterior vertices bind to the parent element of the Euclidean
/// closest point on the coarse boundary. Known to jump across gaps.
BindingMap bindNaiveClosest(const SimplicialMesh& fine, const SimplicialMesh& coarse);

/// Per-vertex element-graph distance from the vertex's host to the nearest
/// host among its fine-mesh neighbors (0 when sharing a host; INT_MAX/2 when
/// unreachable; -1 for vertices with no neighbors). High values flag
/// topologically incoherent bindings.
std::vector<int> bindingIsolation(const SimplicialMesh& fine, const SimplicialMesh& coarse,
                                  const BindingMap& map);

void saveBinding(const BindingMap& map, const std::string& path);
BindingMap loadBinding(const std::string& path);

}  // namespace prodyn
