#pragma once

#include <functional>

#include "prodyn/mesh.hpp"

namespace prodyn::meshgen {

/// Single positively oriented reference simplex: unit triangle (dim 2)
/// or unit tetrahedron (dim 3).
SimplicialMesh referenceSimplex(int dim);

/// Structured triangulation of [lo,hi], nx-by-ny cells, two triangles each.
SimplicialMesh rectGrid2D(int nx, int ny, const VecD& lo, const VecD& hi);

/// Structured grid keeping only cells where keep(i,j) is true. Unreferenced
/// vertices are dropped; vertex order follows the grid scan.
SimplicialMesh maskedGrid2D(int nx, int ny, const VecD& lo, const VecD& hi,
                            const std::function<bool(int, int)>& keep);

/// Concentric-ring disk: ring i carries 6*i vertices, so `rings` = k gives
/// 1 + 3k(k+1) vertices and 6k^2 triangles.
SimplicialMesh disk2D(const VecD& center, double radius, int rings);

/// Kuhn (6-tet) subdivision of an nx-by-ny-by-nz hex grid on [lo,hi].
SimplicialMesh boxGrid3D(int nx, int ny, int nz, const VecD& lo, const VecD& hi);

/// Uniform red refinement: every triangle splits into 4, every tet into 8
/// (corner tets plus an octahedron split along a fixed diagonal).
SimplicialMesh redRefine(const SimplicialMesh& mesh);

/// U-shaped 2D domain on [0,width]x[0,height]: a bar at the bottom and two
/// arms separated by a slot of the given half-width around the centerline.
/// Cell size is chosen from `cellsAcross` (cells along x).
SimplicialMesh uShape2D(int cellsAcross, double width, double height,
                        double slotHalfWidth, double barHeight);

/// Comb-shaped 2D body: a top bar with `teeth` downward teeth separated by
/// vertical slits, on [0,width]x[0,height].
SimplicialMesh slitArray2D(int cellsAcross, double width, double height,
                           int teeth, double barFraction);

}  // namespace prodyn::meshgen
