#include "prodyn/mesh.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>

namespace prodyn {

double SimplicialMesh::signedVolume(int e, const MatX& positions) const {
  MatD edges(dim, dim);
  const int v0 = elements(0, e);
  for (int k = 1; k <= dim; ++k)
    edges.col(k - 1) = positions.col(elements(k, e)) - positions.col(v0);
  const double det = (dim == 2) ? edges(0, 0) * edges(1, 1) - edges(0, 1) * edges(1, 0)
                                : edges.determinant();
  return det / (dim == 2 ? 2.0 : 6.0);
}

double SimplicialMesh::totalRestVolume() const {
  double total = 0.0;
  for (int e = 0; e < numElements(); ++e) total += restVolume(e);
  return total;
}

void SimplicialMesh::bbox(VecD& lo, VecD& hi) const {
  lo = rest.rowwise().minCoeff();
  hi = rest.rowwise().maxCoeff();
}

double SimplicialMesh::bboxDiagonal() const {
  VecD lo, hi;
  bbox(lo, hi);
  return (hi - lo).norm();
}

void validateMesh(SimplicialMesh& mesh, MeshLoadReport* report) {
  const int nV = mesh.numVertices();
  const int nE = mesh.numElements();
  if (mesh.dim != 2 && mesh.dim != 3) throw configError("mesh: dim must be 2 or 3");
  if (mesh.rest.rows() != mesh.dim) throw configError("mesh: position dim mismatch");
  if (mesh.elements.rows() != mesh.dim + 1)
    throw configError("mesh: element arity does not match dim");

  for (int e = 0; e < nE; ++e)
    for (int k = 0; k <= mesh.dim; ++k) {
      const int v = mesh.elements(k, e);
      if (v < 0 || v >= nV)
        throw configError("mesh: vertex index out of range in element " + std::to_string(e));
    }

  // scale-invariant degeneracy floor
  VecD lo, hi;
  mesh.bbox(lo, hi);
  double scale = 1.0;
  for (int k = 0; k < mesh.dim; ++k) scale *= std::max(hi[k] - lo[k], 1e-300);
  const double volFloor = 1e-14 * scale;

  int reoriented = 0;
  for (int e = 0; e < nE; ++e) {
    double vol = mesh.restVolume(e);
    if (vol < 0) {
      std::swap(mesh.elements(0, e), mesh.elements(1, e));
      vol = -vol;
      ++reoriented;
    }
    if (vol <= volFloor)
      throw configError("mesh: degenerate element " + std::to_string(e) +
                        " (volume " + std::to_string(vol) + ")");
  }
  if (report) report->reorientedElements = reoriented;

  std::set<std::array<int, 4>> seen;
  for (int e = 0; e < nE; ++e) {
    std::array<int, 4> key = {-1, -1, -1, -1};
    for (int k = 0; k <= mesh.dim; ++k) key[k] = mesh.elements(k, e);
    std::sort(key.begin(), key.end());
    if (!seen.insert(key).second)
      throw configError("mesh: duplicate element " + std::to_string(e));
  }
}

namespace {

// Outward facet opposite each local vertex, for a positively oriented element.
// 3D: tet (v0,v1,v2,v3) -> (v1,v2,v3),(v0,v3,v2),(v0,v1,v3),(v0,v2,v1).
// 2D: tri (v0,v1,v2) ccw -> edges (v1,v2),(v2,v0),(v0,v1).
void oppositeFacet(const SimplicialMesh& mesh, int e, int localVertex, int* out) {
  const auto& el = mesh.elements;
  if (mesh.dim == 2) {
    switch (localVertex) {
      case 0: out[0] = el(1, e); out[1] = el(2, e); return;
      case 1: out[0] = el(2, e); out[1] = el(0, e); return;
      default: out[0] = el(0, e); out[1] = el(1, e); return;
    }
  }
  switch (localVertex) {
    case 0: out[0] = el(1, e); out[1] = el(2, e); out[2] = el(3, e); return;
    case 1: out[0] = el(0, e); out[1] = el(3, e); out[2] = el(2, e); return;
    case 2: out[0] = el(0, e); out[1] = el(1, e); out[2] = el(3, e); return;
    default: out[0] = el(0, e); out[1] = el(2, e); out[2] = el(1, e); return;
  }
}

std::array<int, 3> sortedKey(const int* f, int n) {
  std::array<int, 3> key = {-1, -1, -1};
  for (int i = 0; i < n; ++i) key[i] = f[i];
  std::sort(key.begin(), key.begin() + n);
  return key;
}

}  // namespace

BoundarySurface extractBoundary(const SimplicialMesh& mesh) {
  struct FacetUse {
    int count = 0;
    int element = -1;
    std::array<int, 3> oriented = {-1, -1, -1};
  };
  std::map<std::array<int, 3>, FacetUse> uses;

  int facet[3];
  for (int e = 0; e < mesh.numElements(); ++e)
    for (int k = 0; k <= mesh.dim; ++k) {
      oppositeFacet(mesh, e, k, facet);
      auto& use = uses[sortedKey(facet, mesh.dim)];
      if (++use.count > 2)
        throw configError("mesh: non-manifold facet shared by >2 elements (element " +
                          std::to_string(e) + ")");
      use.element = e;
      for (int i = 0; i < mesh.dim; ++i) use.oriented[i] = facet[i];
    }

  BoundarySurface boundary;
  std::vector<std::array<int, 3>> facets;
  for (const auto& [key, use] : uses)
    if (use.count == 1) {
      facets.push_back(use.oriented);
      boundary.parent.push_back(use.element);
    }

  boundary.facets.resize(mesh.dim, static_cast<int>(facets.size()));
  for (size_t f = 0; f < facets.size(); ++f)
    for (int i = 0; i < mesh.dim; ++i) boundary.facets(i, static_cast<int>(f)) = facets[f][i];
  return boundary;
}

LumpedMass lumpedMass(const SimplicialMesh& mesh, double density) {
  return lumpedMass(mesh, VecX::Constant(mesh.numElements(), density));
}

LumpedMass lumpedMass(const SimplicialMesh& mesh, const VecX& densityPerElement) {
  if (densityPerElement.size() != mesh.numElements())
    throw configError("lumpedMass: density count mismatch");
  if (densityPerElement.minCoeff() <= 0) throw configError("lumpedMass: density must be > 0");
  LumpedMass mass;
  mass.m = VecX::Zero(mesh.numVertices());
  const double share = 1.0 / (mesh.dim + 1);
  for (int e = 0; e < mesh.numElements(); ++e) {
    const double elementMass = densityPerElement[e] * mesh.restVolume(e);
    for (int k = 0; k <= mesh.dim; ++k) mass.m[mesh.elements(k, e)] += share * elementMass;
  }
  return mass;
}

Adjacency buildAdjacency(const SimplicialMesh& mesh) {
  Adjacency adj;
  const int nV = mesh.numVertices();
  adj.vertexVertex.assign(nV, {});
  adj.vertexElements.assign(nV, {});
  adj.elementElement.assign(mesh.numElements(), {});

  std::vector<std::set<int>> vv(nV);
  for (int e = 0; e < mesh.numElements(); ++e)
    for (int a = 0; a <= mesh.dim; ++a) {
      const int va = mesh.elements(a, e);
      adj.vertexElements[va].push_back(e);
      for (int b = 0; b <= mesh.dim; ++b)
        if (a != b) vv[va].insert(mesh.elements(b, e));
    }
  for (int v = 0; v < nV; ++v) {
    adj.vertexVertex[v].assign(vv[v].begin(), vv[v].end());
    std::sort(adj.vertexElements[v].begin(), adj.vertexElements[v].end());
  }

  std::map<std::array<int, 3>, std::vector<int>> facetElements;
  int facet[3];
  for (int e = 0; e < mesh.numElements(); ++e)
    for (int k = 0; k <= mesh.dim; ++k) {
      oppositeFacet(mesh, e, k, facet);
      facetElements[sortedKey(facet, mesh.dim)].push_back(e);
    }
  for (const auto& [key, els] : facetElements)
    if (els.size() == 2) {
      adj.elementElement[els[0]].push_back(els[1]);
      adj.elementElement[els[1]].push_back(els[0]);
    }
  for (auto& nbrs : adj.elementElement) std::sort(nbrs.begin(), nbrs.end());
  return adj;
}

VecD elementCentroid(const SimplicialMesh& mesh, int e) {
  VecD c = VecD::Zero(mesh.dim);
  for (int k = 0; k <= mesh.dim; ++k) c += mesh.rest.col(mesh.elements(k, e));
  return c / (mesh.dim + 1);
}

VecD facetNormal(const SimplicialMesh& mesh, const BoundarySurface& boundary, int f) {
  if (mesh.dim == 2) {
    const VecD a = mesh.rest.col(boundary.facets(0, f));
    const VecD b = mesh.rest.col(boundary.facets(1, f));
    VecD n(2);
    n << b[1] - a[1], a[0] - b[0];
    return n.normalized();
  }
  const Eigen::Vector3d a = mesh.rest.col(boundary.facets(0, f));
  const Eigen::Vector3d b = mesh.rest.col(boundary.facets(1, f));
  const Eigen::Vector3d c = mesh.rest.col(boundary.facets(2, f));
  VecD n = ((b - a).cross(c - a)).normalized();
  return n;
}

}  // namespace prodyn
