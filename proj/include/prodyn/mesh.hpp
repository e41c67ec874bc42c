#pragma once

#include <string>
#include <vector>

#include "prodyn/types.hpp"

namespace prodyn {

/// Simplicial mesh at one resolution level: triangles when dim == 2,
/// tetrahedra when dim == 3. Positions are meters. Immutable by convention
/// once loaded/validated; all simulation state lives outside the mesh.
struct SimplicialMesh {
  int dim = 3;
  MatX rest;          // dim x nV rest positions
  MatXi elements;     // (dim+1) x nE vertex indices
  int level_id = 0;

  int numVertices() const { return static_cast<int>(rest.cols()); }
  int numElements() const { return static_cast<int>(elements.cols()); }
  int vertsPerElement() const { return dim + 1; }

  VecD vertex(int v) const { return rest.col(v); }

  // Signed area (2D) / volume (3D) of element e under `positions`.
  double signedVolume(int e, const MatX& positions) const;
  double restVolume(int e) const { return signedVolume(e, rest); }
  double totalRestVolume() const;

  // Axis-aligned bounding box of the rest shape.
  void bbox(VecD& lo, VecD& hi) const;
  double bboxDiagonal() const;
};

/// Boundary of a simplicial mesh: outward-oriented edges (2D) or
/// triangles (3D), each tagged with the element it came from.
struct BoundarySurface {
  MatXi facets;              // dim x nF, oriented outward
  std::vector<int> parent;   // element index per facet

  int numFacets() const { return static_cast<int>(facets.cols()); }
};

/// Diagonal (lumped) mass matrix, one entry per vertex, kilograms.
struct LumpedMass {
  VecX m;
  double total() const { return m.sum(); }
};

struct Adjacency {
  std::vector<std::vector<int>> vertexVertex;    // sorted, symmetric
  std::vector<std::vector<int>> vertexElements;  // sorted incidence
  std::vector<std::vector<int>> elementElement;  // share a facet; sorted
};

enum class MeshFormat { kAuto, kNodeEle, kObj2D, kBinary };

struct MeshLoadReport {
  int reorientedElements = 0;
};

/// Reads a mesh from disk and validates it. Formats:
///   - .node/.ele ASCII pair (pass the .node path; 1- or 0-based indices
///     auto-detected),
///   - .obj with triangle faces, treated as 2D when all z are zero,
///   - .vmesh internal binary dump (bit-exact round trips).
/// Elements with negative orientation are reordered (counted in the report);
/// degenerate elements (|volume| <= 1e-14 * bbox^dim) are rejected.
SimplicialMesh loadMesh(const std::string& path,
                        MeshFormat format = MeshFormat::kAuto,
                        MeshLoadReport* report = nullptr);

void saveMeshBinary(const SimplicialMesh& mesh, const std::string& path);
void saveMeshNodeEle(const SimplicialMesh& mesh, const std::string& nodePath);
void saveMeshObj2D(const SimplicialMesh& mesh, const std::string& path);

/// Validates invariants (index ranges, positive volumes, duplicates) and
/// reorients inverted elements in place. Throws on degeneracy.
void validateMesh(SimplicialMesh& mesh, MeshLoadReport* report = nullptr);

/// Facets appearing in exactly one element, outward-oriented.
/// Throws on non-manifold facets (shared by more than two elements).
BoundarySurface extractBoundary(const SimplicialMesh& mesh);

/// Each vertex receives 1/(dim+1) of the mass of every incident element.
LumpedMass lumpedMass(const SimplicialMesh& mesh, double density);
LumpedMass lumpedMass(const SimplicialMesh& mesh, const VecX& densityPerElement);

Adjacency buildAdjacency(const SimplicialMesh& mesh);

/// Barycenter of element e at rest.
VecD elementCentroid(const SimplicialMesh& mesh, int e);

/// Outward unit normal of boundary facet f (2D edge normal / 3D triangle
/// normal) evaluated on the rest positions.
VecD facetNormal(const SimplicialMesh& mesh, const BoundarySurface& boundary, int f);

}  // namespace prodyn
