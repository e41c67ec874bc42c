#include "prodyn/geometry.hpp"

#include <Eigen/Geometry>

#include <cmath>

namespace prodyn {

ClosestPoint closestPointOnSegment(const VecD& p, const VecD& a, const VecD& b) {
  const VecD e = b - a;
  const double len2 = e.squaredNorm();
  ClosestPoint result;
  if (len2 == 0.0) {
    result.point = a;
    result.region = FacetRegion::kVertex0;
  } else {
    const double t = (p - a).dot(e) / len2;
    if (t <= 0.0) {
      result.point = a;
      result.region = FacetRegion::kVertex0;
    } else if (t >= 1.0) {
      result.point = b;
      result.region = FacetRegion::kVertex1;
    } else {
      result.point = a + t * e;
      result.region = FacetRegion::kInterior;
    }
  }
  result.distance = (p - result.point).norm();
  return result;
}

// Ericson, Real-Time Collision Detection, 5.1.5.
ClosestPoint closestPointOnTriangle(const VecD& p, const VecD& a, const VecD& b, const VecD& c) {
  ClosestPoint result;
  const VecD ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) {
    result.point = a;
    result.region = FacetRegion::kVertex0;
    result.distance = (p - a).norm();
    return result;
  }
  const VecD bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) {
    result.point = b;
    result.region = FacetRegion::kVertex1;
    result.distance = (p - b).norm();
    return result;
  }
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    result.point = a + v * ab;
    result.region = FacetRegion::kEdge01;
    result.distance = (p - result.point).norm();
    return result;
  }
  const VecD cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) {
    result.point = c;
    result.region = FacetRegion::kVertex2;
    result.distance = (p - c).norm();
    return result;
  }
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    result.point = a + w * ac;
    result.region = FacetRegion::kEdge20;
    result.distance = (p - result.point).norm();
    return result;
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    result.point = b + w * (c - b);
    result.region = FacetRegion::kEdge12;
    result.distance = (p - result.point).norm();
    return result;
  }
  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom, w = vc * denom;
  result.point = a + v * ab + w * ac;
  result.region = FacetRegion::kInterior;
  result.distance = (p - result.point).norm();
  return result;
}

ClosestPoint closestPointOnFacet(const VecD& p, const MatX& corners) {
  if (corners.cols() == 2) return closestPointOnSegment(p, corners.col(0), corners.col(1));
  return closestPointOnTriangle(p, corners.col(0), corners.col(1), corners.col(2));
}

RayHit raySegment(const VecD& origin, const VecD& dir, const VecD& a, const VecD& b, double tol) {
  RayHit result;
  const VecD e = b - a;
  const double det = dir[0] * (-e[1]) - dir[1] * (-e[0]);  // [dir, -e]
  const double scale = std::max(1.0, e.norm());
  if (std::abs(det) <= 1e-300) return result;
  const VecD rhs = a - origin;
  const double t = (rhs[0] * (-e[1]) - rhs[1] * (-e[0])) / det;
  const double s = (dir[0] * rhs[1] - dir[1] * rhs[0]) / det;
  if (t >= -tol * scale && s >= -tol && s <= 1.0 + tol) {
    result.hit = true;
    result.t = std::max(t, 0.0);
  }
  return result;
}

RayHit rayTriangle(const VecD& origin, const VecD& dir, const VecD& a, const VecD& b,
                   const VecD& c, double tol) {
  RayHit result;
  const Eigen::Vector3d e1 = b - a, e2 = c - a;
  const Eigen::Vector3d d3 = dir, o3 = origin, a3 = a;
  const Eigen::Vector3d pvec = d3.cross(e2);
  const double det = e1.dot(pvec);
  const double scale = std::max({1.0, e1.norm(), e2.norm()});
  if (std::abs(det) <= 1e-300) return result;
  const double invDet = 1.0 / det;
  const Eigen::Vector3d tvec = o3 - a3;
  const double u = tvec.dot(pvec) * invDet;
  if (u < -tol || u > 1.0 + tol) return result;
  const Eigen::Vector3d qvec = tvec.cross(e1);
  const double v = d3.dot(qvec) * invDet;
  if (v < -tol || u + v > 1.0 + tol) return result;
  const double t = e2.dot(qvec) * invDet;
  if (t < -tol * scale) return result;
  result.hit = true;
  result.t = std::max(t, 0.0);
  return result;
}

}  // namespace prodyn
