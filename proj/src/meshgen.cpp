#include "prodyn/meshgen.hpp"

#include <cmath>
#include <map>
#include <vector>

namespace prodyn::meshgen {

namespace {

SimplicialMesh finalize(int dim, const std::vector<VecD>& verts,
                        const std::vector<std::vector<int>>& elements) {
  SimplicialMesh mesh;
  mesh.dim = dim;
  mesh.rest.resize(dim, static_cast<long>(verts.size()));
  for (size_t v = 0; v < verts.size(); ++v) mesh.rest.col(static_cast<long>(v)) = verts[v];
  mesh.elements.resize(dim + 1, static_cast<long>(elements.size()));
  for (size_t e = 0; e < elements.size(); ++e)
    for (int k = 0; k <= dim; ++k) mesh.elements(k, static_cast<long>(e)) = elements[e][k];
  validateMesh(mesh);
  return mesh;
}

}  // namespace

SimplicialMesh referenceSimplex(int dim) {
  std::vector<VecD> verts;
  std::vector<std::vector<int>> elements;
  VecD p = VecD::Zero(dim);
  verts.push_back(p);
  for (int k = 0; k < dim; ++k) {
    p.setZero();
    p[k] = 1.0;
    verts.push_back(p);
  }
  std::vector<int> el(dim + 1);
  for (int k = 0; k <= dim; ++k) el[k] = k;
  elements.push_back(el);
  return finalize(dim, verts, elements);
}

SimplicialMesh maskedGrid2D(int nx, int ny, const VecD& lo, const VecD& hi,
                            const std::function<bool(int, int)>& keep) {
  const double dx = (hi[0] - lo[0]) / nx;
  const double dy = (hi[1] - lo[1]) / ny;
  std::vector<int> vertexId((nx + 1) * (ny + 1), -1);
  auto gridIndex = [&](int i, int j) { return j * (nx + 1) + i; };

  std::vector<VecD> verts;
  std::vector<std::vector<int>> elements;
  auto vertexAt = [&](int i, int j) {
    int& id = vertexId[gridIndex(i, j)];
    if (id < 0) {
      id = static_cast<int>(verts.size());
      VecD p(2);
      p << lo[0] + i * dx, lo[1] + j * dy;
      verts.push_back(p);
    }
    return id;
  };

  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      if (!keep(i, j)) continue;
      const int v00 = vertexAt(i, j);
      const int v10 = vertexAt(i + 1, j);
      const int v01 = vertexAt(i, j + 1);
      const int v11 = vertexAt(i + 1, j + 1);
      // alternate the diagonal for an isotropic pattern
      if ((i + j) % 2 == 0) {
        elements.push_back({v00, v10, v11});
        elements.push_back({v00, v11, v01});
      } else {
        elements.push_back({v00, v10, v01});
        elements.push_back({v10, v11, v01});
      }
    }
  if (elements.empty()) throw configError("maskedGrid2D: empty mask");
  return finalize(2, verts, elements);
}

SimplicialMesh rectGrid2D(int nx, int ny, const VecD& lo, const VecD& hi) {
  return maskedGrid2D(nx, ny, lo, hi, [](int, int) { return true; });
}

SimplicialMesh disk2D(const VecD& center, double radius, int rings) {
  if (rings < 1) throw configError("disk2D: rings must be >= 1");
  std::vector<VecD> verts;
  verts.push_back(center);
  auto ringStart = [](int i) { return 1 + 3 * i * (i - 1); };
  for (int i = 1; i <= rings; ++i) {
    const double r = radius * i / rings;
    const int count = 6 * i;
    for (int m = 0; m < count; ++m) {
      const double theta = 2.0 * M_PI * m / count;
      VecD p(2);
      p << center[0] + r * std::cos(theta), center[1] + r * std::sin(theta);
      verts.push_back(p);
    }
  }

  std::vector<std::vector<int>> elements;
  for (int m = 0; m < 6; ++m) elements.push_back({0, 1 + m, 1 + (m + 1) % 6});
  for (int i = 2; i <= rings; ++i) {
    const int inner = 6 * (i - 1), outer = 6 * i;
    auto innerIdx = [&](int m) { return ringStart(i - 1) + ((m % inner) + inner) % inner; };
    auto outerIdx = [&](int m) { return ringStart(i) + ((m % outer) + outer) % outer; };
    for (int s = 0; s < 6; ++s) {
      for (int t = 0; t < i; ++t)
        elements.push_back({outerIdx(s * i + t), outerIdx(s * i + t + 1), innerIdx(s * (i - 1) + t)});
      for (int t = 0; t + 1 < i; ++t)
        elements.push_back(
            {innerIdx(s * (i - 1) + t), outerIdx(s * i + t + 1), innerIdx(s * (i - 1) + t + 1)});
    }
  }
  return finalize(2, verts, elements);
}

SimplicialMesh boxGrid3D(int nx, int ny, int nz, const VecD& lo, const VecD& hi) {
  const double dx = (hi[0] - lo[0]) / nx;
  const double dy = (hi[1] - lo[1]) / ny;
  const double dz = (hi[2] - lo[2]) / nz;
  std::vector<VecD> verts;
  verts.reserve((nx + 1) * (ny + 1) * (nz + 1));
  auto id = [&](int i, int j, int k) { return (k * (ny + 1) + j) * (nx + 1) + i; };
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i) {
        VecD p(3);
        p << lo[0] + i * dx, lo[1] + j * dy, lo[2] + k * dz;
        verts.push_back(p);
      }

  // Kuhn subdivision: six tets per hex, one per permutation of the axes.
  constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  std::vector<std::vector<int>> elements;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        for (const auto& perm : perms) {
          int c[3] = {i, j, k};
          std::vector<int> tet;
          tet.push_back(id(c[0], c[1], c[2]));
          for (int step = 0; step < 3; ++step) {
            c[perm[step]] += 1;
            tet.push_back(id(c[0], c[1], c[2]));
          }
          elements.push_back(tet);
        }
  return finalize(3, verts, elements);
}

SimplicialMesh redRefine(const SimplicialMesh& mesh) {
  std::vector<VecD> verts;
  verts.reserve(mesh.numVertices());
  for (int v = 0; v < mesh.numVertices(); ++v) verts.push_back(mesh.vertex(v));

  std::map<std::pair<int, int>, int> midpointOf;
  auto midpoint = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto it = midpointOf.find(key);
    if (it != midpointOf.end()) return it->second;
    const int id = static_cast<int>(verts.size());
    verts.push_back(0.5 * (mesh.vertex(a) + mesh.vertex(b)));
    midpointOf.emplace(key, id);
    return id;
  };

  std::vector<std::vector<int>> elements;
  for (int e = 0; e < mesh.numElements(); ++e) {
    if (mesh.dim == 2) {
      const int a = mesh.elements(0, e), b = mesh.elements(1, e), c = mesh.elements(2, e);
      const int ab = midpoint(a, b), bc = midpoint(b, c), ca = midpoint(c, a);
      elements.push_back({a, ab, ca});
      elements.push_back({ab, b, bc});
      elements.push_back({ca, bc, c});
      elements.push_back({ab, bc, ca});
    } else {
      const int a = mesh.elements(0, e), b = mesh.elements(1, e), c = mesh.elements(2, e),
                d = mesh.elements(3, e);
      const int ab = midpoint(a, b), ac = midpoint(a, c), ad = midpoint(a, d);
      const int bc = midpoint(b, c), bd = midpoint(b, d), cd = midpoint(c, d);
      elements.push_back({a, ab, ac, ad});
      elements.push_back({ab, b, bc, bd});
      elements.push_back({ac, bc, c, cd});
      elements.push_back({ad, bd, cd, d});
      // octahedron split along the (ac, bd) diagonal
      const int ring[4] = {ab, ad, cd, bc};
      for (int t = 0; t < 4; ++t) elements.push_back({ac, bd, ring[t], ring[(t + 1) % 4]});
    }
  }
  SimplicialMesh out = finalize(mesh.dim, verts, elements);
  out.level_id = mesh.level_id + 1;
  return out;
}

SimplicialMesh uShape2D(int cellsAcross, double width, double height, double slotHalfWidth,
                        double barHeight) {
  const double cell = width / cellsAcross;
  const int ny = std::max(1, static_cast<int>(std::lround(height / cell)));
  return maskedGrid2D(cellsAcross, ny, (VecD(2) << 0, 0).finished(),
                      (VecD(2) << width, ny * cell).finished(), [&](int i, int j) {
                        const double cx = (i + 0.5) * cell;
                        const double cy = (j + 0.5) * cell;
                        const bool inSlot = std::abs(cx - width / 2) < slotHalfWidth && cy > barHeight;
                        return !inSlot;
                      });
}

SimplicialMesh slitArray2D(int cellsAcross, double width, double height, int teeth,
                           double barFraction) {
  const double cell = width / cellsAcross;
  const int ny = std::max(1, static_cast<int>(std::lround(height / cell)));
  const double barBottom = height * (1.0 - barFraction);
  // teeth and gaps alternate with equal width; teeth at both ends
  const int spans = 2 * teeth - 1;
  return maskedGrid2D(cellsAcross, ny, (VecD(2) << 0, 0).finished(),
                      (VecD(2) << width, ny * cell).finished(), [&](int i, int j) {
                        const double cx = (i + 0.5) * cell;
                        const double cy = (j + 0.5) * cell;
                        if (cy >= barBottom) return true;
                        const int span = std::min(spans - 1,
                                                  static_cast<int>(cx / width * spans));
                        return span % 2 == 0;
                      });
}

}  // namespace prodyn::meshgen
