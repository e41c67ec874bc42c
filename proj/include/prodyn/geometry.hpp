#pragma once

#include "prodyn/types.hpp"

namespace prodyn {

// Closest-point region on a simplex facet, used to pick the distance kernel
// whose derivatives are smooth on that region.
enum class FacetRegion {
  kVertex0,
  kVertex1,
  kVertex2,
  kEdge01,
  kEdge12,
  kEdge20,
  kInterior,
};

struct ClosestPoint {
  VecD point;
  double distance = 0.0;
  FacetRegion region = FacetRegion::kInterior;
};

/// Closest point on segment [a,b] (dim 2 or 3).
ClosestPoint closestPointOnSegment(const VecD& p, const VecD& a, const VecD& b);

/// Closest point on triangle (a,b,c) in 3D.
ClosestPoint closestPointOnTriangle(const VecD& p, const VecD& a, const VecD& b, const VecD& c);

/// Closest point on a facet given as dim columns of `corners`
/// (segment in 2D, triangle in 3D).
ClosestPoint closestPointOnFacet(const VecD& p, const MatX& corners);

struct RayHit {
  bool hit = false;
  double t = 0.0;  // parameter along the unit-direction ray
};

/// Ray/segment intersection in 2D; direction must be unit length. `tol` is
/// relative slack on the segment parameter so grazing hits register.
RayHit raySegment(const VecD& origin, const VecD& dir, const VecD& a, const VecD& b,
                  double tol = 1e-12);

/// Ray/triangle intersection in 3D (Moller-Trumbore), unit direction,
/// relative slack on barycentric bounds.
RayHit rayTriangle(const VecD& origin, const VecD& dir, const VecD& a, const VecD& b,
                   const VecD& c, double tol = 1e-12);

}  // namespace prodyn
