#pragma once

#include <optional>
#include <vector>

#include "prodyn/aabb_tree.hpp"
#include "prodyn/mesh.hpp"

namespace prodyn {

struct HalfPlane {
  VecD normal;          // unit
  double offset = 0.0;  // signed distance of a point p is normal . p - offset
  double mu = 0.0;

  void validate() const;
};

/// Rigid obstacle given as a facet soup: segments in 2D, triangles in 3D.
struct StaticCollider {
  MatX positions;  // dim x n
  MatXi facets;    // dim x nFacets
  double mu = 0.0;
};

struct BarrierParams {
  double dhat = 1e-3;   // activation distance, meters
  double kappa = 1e4;   // barrier stiffness
  double epsV = 1e-3;   // friction smoothing velocity, m/s
  double selfMu = 0.0;  // friction coefficient for self contact

  void validate() const;
};

enum class PairKind : std::uint8_t { kPlane, kStatic, kSelf };

struct ContactPair {
  PairKind kind;
  int vertex = -1;    // mesh vertex
  int collider = -1;  // plane / static collider index
  int facet = -1;     // facet within the collider or the self boundary
};

/// log-barrier value for one pair distance: -(d - dhat)^2 log(d / dhat)
/// below dhat, 0 at and above it (C2 on (0, dhat)).
double barrierFunction(double distance, double dhat);
double barrierFirstDerivative(double distance, double dhat);
double barrierSecondDerivative(double distance, double dhat);

/// Frozen friction data for one contact, built from the previous step's
/// state (semi-implicit lagging: one fixed-point update per time step).
struct LaggedContact {
  ContactPair pair;
  double normalForce = 0.0;  // kappa * |b'(d)|
  double mu = 0.0;
  MatX tangent;              // dim x (dim-1) orthonormal tangent basis
  VecDp1 facetWeights;       // closest-point weights on the facet (self only)
};

/// Barrier contact of one deformable mesh against half-planes, static
/// colliders, and (optionally) its own boundary, with IPC-style lagged
/// friction and a conservative intersection-free step filter.
class ContactModel {
 public:
  ContactModel(const SimplicialMesh& mesh, std::vector<HalfPlane> planes,
               std::vector<StaticCollider> statics, BarrierParams params,
               bool selfContact);

  const BarrierParams& params() const { return params_; }
  bool hasColliders() const;

  /// All pairs with distance < dhat at x. Broad phase: static AABB trees
  /// inflated by dhat, rebuilt per call for the deforming boundary.
  std::vector<ContactPair> activePairs(const MatX& x) const;

  double pairDistance(const ContactPair& pair, const MatX& x) const;
  /// Minimum distance over active candidates (+inf when contact-free).
  double minDistance(const MatX& x) const;

  double barrier(const std::vector<ContactPair>& pairs, const MatX& x) const;
  /// Adds gradient and (optionally) PSD-projected Hessian contributions.
  double barrierWithDerivatives(const std::vector<ContactPair>& pairs, const MatX& x,
                                VecX& gradient, std::vector<Triplet>* hessian,
                                bool projectPsd) const;

  std::vector<LaggedContact> lagFriction(const MatX& xPrevious) const;

  double friction(const std::vector<LaggedContact>& lagged, const MatX& x,
                  const MatX& xPrevious, double h) const;
  double frictionWithDerivatives(const std::vector<LaggedContact>& lagged, const MatX& x,
                                 const MatX& xPrevious, double h, VecX& gradient,
                                 std::vector<Triplet>* hessian) const;

  /// Largest step fraction in (0,1] along dx that provably keeps every
  /// candidate distance positive (per-pair additive conservative advance).
  double feasibleStepUpperBound(const MatX& x, const MatX& dx) const;

  const BoundarySurface& boundary() const { return boundary_; }

 private:
  std::vector<ContactPair> candidatePairs(const MatX& x, const MatX* dx) const;

  const SimplicialMesh& mesh_;
  BoundarySurface boundary_;
  std::vector<int> boundaryVertices_;
  std::vector<std::vector<int>> incidentFacets_;  // per vertex, self boundary
  std::vector<HalfPlane> planes_;
  std::vector<StaticCollider> statics_;
  std::vector<AabbTree> staticTrees_;
  BarrierParams params_;
  bool selfContact_ = false;
};

}  // namespace prodyn
