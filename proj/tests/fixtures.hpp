#pragma once

#include <filesystem>
#include <string>

#include "prodyn/hierarchy.hpp"
#include "prodyn/mesh.hpp"
#include "prodyn/meshgen.hpp"
#include "prodyn/rng.hpp"

namespace fixtures {

using namespace prodyn;

inline std::filesystem::path tempDir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("prodyn_" + name);
  std::filesystem::create_directories(dir);
  return dir;
}

inline SimplicialMesh unitSquare2D() {
  SimplicialMesh mesh;
  mesh.dim = 2;
  mesh.rest.resize(2, 4);
  mesh.rest << 0, 1, 1, 0,
               0, 0, 1, 1;
  mesh.elements.resize(3, 2);
  mesh.elements << 0, 0,
                   1, 2,
                   2, 3;
  validateMesh(mesh);
  return mesh;
}

inline SimplicialMesh twoTets() {
  SimplicialMesh mesh;
  mesh.dim = 3;
  mesh.rest.resize(3, 5);
  mesh.rest << 0, 1, 0, 0, 1,
               0, 0, 1, 0, 1,
               0, 0, 0, 1, 1;
  mesh.elements.resize(4, 2);
  mesh.elements << 0, 1,
                   1, 2,
                   2, 4,
                   3, 3;
  validateMesh(mesh);
  return mesh;
}

// Strip of 3 triangles whose element-element graph is a 2-edge path.
inline SimplicialMesh triStrip3() {
  SimplicialMesh mesh;
  mesh.dim = 2;
  mesh.rest.resize(2, 5);
  mesh.rest << 0, 1, 0.5, 1.5, 2,
               0, 0, 1.0, 1.0, 0;
  mesh.elements.resize(3, 3);
  mesh.elements << 0, 1, 1,
                   1, 3, 4,
                   2, 2, 3;
  validateMesh(mesh);
  return mesh;
}

// (coarse, fine) pair where the fine mesh is a strict red refinement of the
// coarse one, so every fine vertex lies inside a coarse element.
inline std::pair<SimplicialMesh, SimplicialMesh> nestedPair2D() {
  const SimplicialMesh coarse =
      meshgen::rectGrid2D(2, 2, (VecD(2) << 0, 0).finished(), (VecD(2) << 1, 1).finished());
  return {coarse, meshgen::redRefine(coarse)};
}

inline std::pair<SimplicialMesh, SimplicialMesh> jitteredPair(int dim, double jitter = 0.2) {
  SimplicialMesh base;
  if (dim == 2)
    base = meshgen::rectGrid2D(2, 2, (VecD(2) << 0, 0).finished(), (VecD(2) << 1, 1).finished());
  else
    base = meshgen::boxGrid3D(1, 1, 1, (VecD(3) << 0, 0, 0).finished(),
                              (VecD(3) << 1, 1, 1).finished());
  const Hierarchy h = synthesizeTestHierarchy(base, 2, jitter, 99);
  return {h.levels[0], h.levels[1]};
}

// Coarse reference tet; fine is its red refinement plus one spike vertex
// poking out of the slanted face, so exactly one fine vertex extrapolates
// while the two meshes still cover the same domain (the reverse binding
// needed by the biharmonic operator stays well-posed).
inline std::pair<SimplicialMesh, SimplicialMesh> singleExtrapolatedPair3D() {
  const SimplicialMesh coarse = meshgen::referenceSimplex(3);
  SimplicialMesh fine = meshgen::redRefine(coarse);

  auto findVertex = [&](double x, double y, double z) {
    for (int v = 0; v < fine.numVertices(); ++v)
      if ((fine.vertex(v) - (VecD(3) << x, y, z).finished()).norm() < 1e-12) return v;
    throw std::runtime_error("singleExtrapolatedPair3D: midpoint not found");
  };
  const int m01 = findVertex(0.5, 0.5, 0.0);
  const int m12 = findVertex(0.0, 0.5, 0.5);
  const int m02 = findVertex(0.5, 0.0, 0.5);

  const int w = fine.numVertices();
  MatX rest(3, w + 1);
  rest.leftCols(w) = fine.rest;
  rest.col(w) << 0.4, 0.4, 0.4;  // past the x+y+z = 1 face
  MatXi elements(4, fine.numElements() + 1);
  elements.leftCols(fine.numElements()) = fine.elements;
  elements.col(fine.numElements()) << m01, m12, m02, w;
  fine.rest = rest;
  fine.elements = elements;
  validateMesh(fine);
  return {coarse, fine};
}

// U-shaped domain pair: the coarse slot is wider than the fine slot, and the
// fine mesh carries a spike vertex protruding into the slot past the coarse
// midline, so Euclidean-closest binding jumps to the far arm.
struct UPair {
  SimplicialMesh coarse;
  SimplicialMesh fine;
  int spikeVertex = -1;
};

inline UPair uPair2D() {
  UPair pair;
  pair.coarse = meshgen::uShape2D(6, 3.0, 4.0, 0.5, 1.0);
  SimplicialMesh fine = meshgen::uShape2D(12, 3.0, 4.0, 0.25, 1.0);

  auto findVertex = [&](double x, double y) {
    for (int v = 0; v < fine.numVertices(); ++v)
      if (std::abs(fine.rest(0, v) - x) < 1e-12 && std::abs(fine.rest(1, v) - y) < 1e-12)
        return v;
    throw std::runtime_error("uPair2D: wall vertex not found");
  };
  const int a = findVertex(1.25, 2.25);
  const int b = findVertex(1.25, 2.50);

  const int w = fine.numVertices();
  MatX rest(2, w + 1);
  rest.leftCols(w) = fine.rest;
  rest.col(w) << 1.8, 2.4;
  MatXi elements(3, fine.numElements() + 1);
  elements.leftCols(fine.numElements()) = fine.elements;
  elements.col(fine.numElements()) << a, b, w;
  fine.rest = rest;
  fine.elements = elements;
  validateMesh(fine);
  pair.fine = fine;
  pair.spikeVertex = w;
  return pair;
}

inline prodyn::Rng testRng(std::uint64_t seed = 42) { return prodyn::Rng(seed); }

}  // namespace fixtures
