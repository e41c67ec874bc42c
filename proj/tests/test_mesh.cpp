#include <doctest.h>

#include <Eigen/Geometry>

#include <fstream>
#include <map>
#include <set>

#include "fixtures.hpp"
#include "prodyn/mesh.hpp"
#include "prodyn/meshgen.hpp"

using namespace prodyn;

namespace {

void writeFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

// independent volume oracle for the mass tests
double tetVolume(const VecD& a, const VecD& b, const VecD& c, const VecD& d) {
  const Eigen::Vector3d u = b - a, v = c - a, w = d - a;
  return u.cross(v).dot(w) / 6.0;
}

}  // namespace

TEST_CASE("load reference tetrahedron from node/ele") {
  const auto dir = fixtures::tempDir("mesh_node");
  writeFile(dir / "tet.node",
            "4 3 0 0\n0 0 0 0\n1 1 0 0\n2 0 1 0\n3 0 0 1\n");
  writeFile(dir / "tet.ele", "1 4 0\n0 0 1 2 3\n");
  MeshLoadReport report;
  const SimplicialMesh mesh = loadMesh((dir / "tet.node").string(), MeshFormat::kAuto, &report);
  CHECK(mesh.dim == 3);
  CHECK(mesh.numVertices() == 4);
  CHECK(mesh.numElements() == 1);
  CHECK(mesh.restVolume(0) == doctest::Approx(1.0 / 6.0));
  CHECK(report.reorientedElements == 0);
}

TEST_CASE("node/ele with 1-based indices and inverted element") {
  const auto dir = fixtures::tempDir("mesh_node1");
  writeFile(dir / "tet.node",
            "4 3 0 0\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 1\n");
  // odd permutation: negative volume, must be reoriented
  writeFile(dir / "tet.ele", "1 4 0\n1 2 1 3 4\n");
  MeshLoadReport report;
  const SimplicialMesh mesh = loadMesh((dir / "tet.node").string(), MeshFormat::kAuto, &report);
  CHECK(report.reorientedElements == 1);
  CHECK(mesh.restVolume(0) == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("load 2-triangle unit square from OBJ") {
  const auto dir = fixtures::tempDir("mesh_obj");
  writeFile(dir / "square.obj",
            "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3\nf 1 3 4\n");
  const SimplicialMesh mesh = loadMesh((dir / "square.obj").string());
  CHECK(mesh.dim == 2);
  CHECK(mesh.numVertices() == 4);
  CHECK(mesh.totalRestVolume() == doctest::Approx(1.0));
}

TEST_CASE("degenerate element is rejected with its index") {
  const auto dir = fixtures::tempDir("mesh_degen");
  writeFile(dir / "flat.node", "4 3 0 0\n0 0 0 0\n1 1 0 0\n2 0 1 0\n3 1 1 0\n");
  writeFile(dir / "flat.ele", "1 4 0\n0 0 1 2 3\n");
  CHECK_THROWS_WITH_AS(loadMesh((dir / "flat.node").string()),
                       doctest::Contains("degenerate element 0"), Error);
}

TEST_CASE("binary dump round-trips bit-exactly") {
  const auto dir = fixtures::tempDir("mesh_bin");
  SimplicialMesh mesh = meshgen::boxGrid3D(2, 1, 1, (VecD(3) << 0, 0, 0).finished(),
                                           (VecD(3) << 2, 1, 1).finished());
  mesh.rest.col(0)[0] = 0.1234567890123456789;  // not representable exactly in text
  mesh.level_id = 3;
  saveMeshBinary(mesh, (dir / "m.vmesh").string());
  const SimplicialMesh back = loadMesh((dir / "m.vmesh").string());
  CHECK(back.level_id == 3);
  CHECK(back.rest == mesh.rest);
  CHECK(back.elements == mesh.elements);
}

TEST_CASE("extract boundary") {
  SUBCASE("single tet has 4 boundary triangles") {
    const SimplicialMesh tet = meshgen::referenceSimplex(3);
    CHECK(extractBoundary(tet).numFacets() == 4);
  }
  SUBCASE("two face-sharing tets have 6 boundary triangles") {
    CHECK(extractBoundary(fixtures::twoTets()).numFacets() == 6);
  }
  SUBCASE("2D unit square has 4 boundary edges") {
    CHECK(extractBoundary(fixtures::unitSquare2D()).numFacets() == 4);
  }
  SUBCASE("boundary normals point outward") {
    const SimplicialMesh square = fixtures::unitSquare2D();
    const BoundarySurface boundary = extractBoundary(square);
    const VecD center = (VecD(2) << 0.5, 0.5).finished();
    for (int f = 0; f < boundary.numFacets(); ++f) {
      const VecD mid =
          0.5 * (square.vertex(boundary.facets(0, f)) + square.vertex(boundary.facets(1, f)));
      CHECK(facetNormal(square, boundary, f).dot(mid - center) > 0);
    }
    const SimplicialMesh box = meshgen::boxGrid3D(1, 1, 1, (VecD(3) << 0, 0, 0).finished(),
                                                  (VecD(3) << 1, 1, 1).finished());
    const BoundarySurface boxBoundary = extractBoundary(box);
    const VecD boxCenter = (VecD(3) << 0.5, 0.5, 0.5).finished();
    for (int f = 0; f < boxBoundary.numFacets(); ++f) {
      VecD mid = VecD::Zero(3);
      for (int k = 0; k < 3; ++k) mid += box.vertex(boxBoundary.facets(k, f));
      mid /= 3.0;
      CHECK(facetNormal(box, boxBoundary, f).dot(mid - boxCenter) > 0);
    }
  }
  SUBCASE("non-manifold facet is rejected") {
    SimplicialMesh mesh;
    mesh.dim = 3;
    mesh.rest.resize(3, 6);
    mesh.rest << 0, 1, 0, 0, 1, -1,
                 0, 0, 1, 0, 1, 1,
                 0, 0, 0, 1, 1, 1;
    mesh.elements.resize(4, 3);
    mesh.elements << 0, 0, 0,
                     1, 1, 1,
                     2, 2, 2,
                     3, 4, 5;
    validateMesh(mesh);
    CHECK_THROWS_WITH_AS(extractBoundary(mesh), doctest::Contains("non-manifold"), Error);
  }
}

TEST_CASE("boundary of a closed volume is watertight") {
  // every sub-facet of the boundary is shared by exactly two boundary facets
  auto checkWatertight = [](const SimplicialMesh& mesh) {
    const BoundarySurface boundary = extractBoundary(mesh);
    std::map<std::set<int>, int> subFacetCount;
    for (int f = 0; f < boundary.numFacets(); ++f)
      for (int drop = 0; drop < mesh.dim; ++drop) {
        std::set<int> key;
        for (int k = 0; k < mesh.dim; ++k)
          if (k != drop) key.insert(boundary.facets(k, f));
        ++subFacetCount[key];
      }
    for (const auto& [key, count] : subFacetCount) CHECK(count == 2);
  };
  checkWatertight(meshgen::boxGrid3D(2, 2, 2, (VecD(3) << 0, 0, 0).finished(),
                                     (VecD(3) << 1, 1, 1).finished()));
  checkWatertight(meshgen::disk2D((VecD(2) << 0, 0).finished(), 1.0, 3));
}

TEST_CASE("lumped mass") {
  SUBCASE("unit tet, density 1: each vertex gets 1/24") {
    const LumpedMass mass = lumpedMass(meshgen::referenceSimplex(3), 1.0);
    for (int v = 0; v < 4; ++v) CHECK(mass.m[v] == doctest::Approx(1.0 / 24.0));
  }
  SUBCASE("unit square, density 2: total mass 2") {
    CHECK(lumpedMass(fixtures::unitSquare2D(), 2.0).total() == doctest::Approx(2.0));
  }
  SUBCASE("random tet mesh matches the direct volume-summation oracle") {
    const SimplicialMesh mesh = meshgen::boxGrid3D(2, 2, 1, (VecD(3) << 0, 0, 0).finished(),
                                                   (VecD(3) << 0.7, 1.3, 0.4).finished());
    REQUIRE(mesh.numElements() >= 20);
    const double density = 37.5;
    double oracle = 0.0;
    for (int e = 0; e < mesh.numElements(); ++e)
      oracle += density * tetVolume(mesh.vertex(mesh.elements(0, e)), mesh.vertex(mesh.elements(1, e)),
                                    mesh.vertex(mesh.elements(2, e)), mesh.vertex(mesh.elements(3, e)));
    CHECK(lumpedMass(mesh, density).total() ==
          doctest::Approx(oracle).epsilon(1e-12));
  }
  SUBCASE("totals are invariant under vertex reindexing") {
    SimplicialMesh mesh = fixtures::twoTets();
    const double before = lumpedMass(mesh, 3.0).total();
    // rotate vertex labels by one
    const int n = mesh.numVertices();
    MatX rest(3, n);
    for (int v = 0; v < n; ++v) rest.col((v + 1) % n) = mesh.rest.col(v);
    for (int e = 0; e < mesh.numElements(); ++e)
      for (int k = 0; k < 4; ++k) mesh.elements(k, e) = (mesh.elements(k, e) + 1) % n;
    mesh.rest = rest;
    validateMesh(mesh);
    CHECK(lumpedMass(mesh, 3.0).total() == doctest::Approx(before).epsilon(1e-14));
  }
}

TEST_CASE("adjacency") {
  SUBCASE("single tet is K4 on vertices") {
    const Adjacency adj = buildAdjacency(meshgen::referenceSimplex(3));
    for (int v = 0; v < 4; ++v) CHECK(adj.vertexVertex[v].size() == 3);
  }
  SUBCASE("two face-sharing tets: one element-element edge") {
    const Adjacency adj = buildAdjacency(fixtures::twoTets());
    CHECK(adj.elementElement[0] == std::vector<int>{1});
    CHECK(adj.elementElement[1] == std::vector<int>{0});
  }
  SUBCASE("strip of 3 triangles: element graph is a 2-edge path") {
    const Adjacency adj = buildAdjacency(fixtures::triStrip3());
    int edges = 0;
    for (const auto& nbrs : adj.elementElement) edges += static_cast<int>(nbrs.size());
    CHECK(edges == 4);  // 2 undirected edges
    CHECK(adj.elementElement[1].size() == 2);
  }
  SUBCASE("deterministic for fixed input") {
    const SimplicialMesh mesh = fixtures::triStrip3();
    const Adjacency a = buildAdjacency(mesh);
    const Adjacency b = buildAdjacency(mesh);
    CHECK(a.vertexVertex == b.vertexVertex);
    CHECK(a.elementElement == b.elementElement);
    CHECK(a.vertexElements == b.vertexElements);
  }
}
