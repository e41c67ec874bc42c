#include "prodyn/binding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>

#include <Eigen/Dense>

#include "prodyn/aabb_tree.hpp"
#include "prodyn/geometry.hpp"

namespace prodyn {

bool BindingMap::complete() const {
  for (int v = 0; v < size(); ++v)
    if (hostElement[v] < 0) return false;
  return size() > 0;
}

int BindingMap::countExtrapolated() const {
  int count = 0;
  for (const auto s : status)
    if (s == BindStatus::kExtrapolated) ++count;
  return count;
}

double BindingMap::minWeight() const { return coords.minCoeff(); }
double BindingMap::maxWeight() const { return coords.maxCoeff(); }

VecDp1 barycentricInElement(const SimplicialMesh& mesh, int element, const VecD& point) {
  const int d = mesh.dim;
  MatD edges(d, d);
  const VecD p0 = mesh.vertex(mesh.elements(0, element));
  for (int k = 1; k <= d; ++k) edges.col(k - 1) = mesh.vertex(mesh.elements(k, element)) - p0;
  Eigen::PartialPivLU<MatD> lu(edges);
  if (std::abs(lu.determinant()) <= 1e-300)
    throw numericalError("barycentricInElement: singular element " + std::to_string(element));
  const VecD w = lu.solve(point - p0);
  VecDp1 coords(d + 1);
  coords[0] = 1.0 - w.sum();
  for (int k = 0; k < d; ++k) coords[k + 1] = w[k];
  return coords;
}

namespace {

constexpr double kInsideTol = -1e-10;

// Snap roundoff-negative weights of an inside binding to the element
// boundary so Inside status implies nonnegative weights exactly.
void snapInsideWeights(VecDp1& w) {
  double sum = 0.0;
  for (int k = 0; k < w.size(); ++k) {
    if (w[k] < 0.0) w[k] = 0.0;
    sum += w[k];
  }
  w /= sum;
}

struct ElementBoxes {
  MatX lo, hi;
};

ElementBoxes elementBoxes(const SimplicialMesh& mesh) {
  ElementBoxes boxes;
  boxes.lo.resize(mesh.dim, mesh.numElements());
  boxes.hi.resize(mesh.dim, mesh.numElements());
  for (int e = 0; e < mesh.numElements(); ++e) {
    VecD lo = mesh.vertex(mesh.elements(0, e));
    VecD hi = lo;
    for (int k = 1; k <= mesh.dim; ++k) {
      const VecD p = mesh.vertex(mesh.elements(k, e));
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    boxes.lo.col(e) = lo;
    boxes.hi.col(e) = hi;
  }
  return boxes;
}

BindingMap emptyMap(const SimplicialMesh& fine, const SimplicialMesh& coarse) {
  BindingMap map;
  map.hostElement = Eigen::VectorXi::Constant(fine.numVertices(), -1);
  map.coords = MatX::Zero(coarse.dim + 1, fine.numVertices());
  map.status.assign(fine.numVertices(), BindStatus::kExtrapolated);
  return map;
}

ContainmentResult bindContainmentImpl(const SimplicialMesh& fine, const SimplicialMesh& coarse,
                                      bool bruteForce) {
  if (fine.dim != coarse.dim) throw configError("binding: dim mismatch");
  ContainmentResult result;
  result.map = emptyMap(fine, coarse);

  AabbTree tree;
  if (!bruteForce) {
    const ElementBoxes boxes = elementBoxes(coarse);
    tree = AabbTree::build(boxes.lo, boxes.hi);
  }
  const double inflate = 1e-9 * coarse.bboxDiagonal();

  std::vector<int> all(coarse.numElements());
  for (int e = 0; e < coarse.numElements(); ++e) all[e] = e;

  for (int v = 0; v < fine.numVertices(); ++v) {
    const VecD p = fine.vertex(v);
    const std::vector<int> candidates = bruteForce ? all : tree.queryPoint(p, inflate);
    bool bound = false;
    for (int e : candidates) {  // ascending: ties go to the lowest element index
      VecDp1 w = barycentricInElement(coarse, e, p);
      if (w.minCoeff() >= kInsideTol) {
        snapInsideWeights(w);
        result.map.hostElement[v] = e;
        result.map.coords.col(v) = w;
        result.map.status[v] = BindStatus::kInside;
        bound = true;
        break;
      }
    }
    if (!bound) result.unassigned.push_back(v);
  }
  return result;
}

}  // namespace

ContainmentResult bindContainment(const SimplicialMesh& fine, const SimplicialMesh& coarse) {
  return bindContainmentImpl(fine, coarse, false);
}

ContainmentResult bindContainmentBruteForce(const SimplicialMesh& fine,
                                            const SimplicialMesh& coarse) {
  return bindContainmentImpl(fine, coarse, true);
}

BindingMap bindExteriorRobust(const SimplicialMesh& fine, const SimplicialMesh& coarse,
                              ContainmentResult containment) {
  BindingMap map = std::move(containment.map);
  if (containment.unassigned.empty()) return map;

  const Adjacency fineAdjacency = buildAdjacency(fine);
  const BoundarySurface coarseBoundary = extractBoundary(coarse);
  const int nFacets = coarseBoundary.numFacets();

  std::vector<char> assigned(fine.numVertices(), 0);
  for (int v = 0; v < fine.numVertices(); ++v) assigned[v] = map.hostElement[v] >= 0;

  std::vector<int> neighborCount(fine.numVertices(), 0);
  for (int v : containment.unassigned)
    for (int u : fineAdjacency.vertexVertex[v]) neighborCount[v] += assigned[u];

  // max-heap on (assigned-neighbor count, lowest vertex index); lazy updates
  using Entry = std::pair<int, int>;  // (count, vertex)
  auto less = [](const Entry& a, const Entry& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second > b.second;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(less)> frontier(less);
  for (int v : containment.unassigned) frontier.push({neighborCount[v], v});

  const double tol = 1e-12;
  int remaining = static_cast<int>(containment.unassigned.size());

  while (remaining > 0) {
    if (frontier.empty())
      throw numericalError("bindExteriorRobust: frontier exhausted with vertices unassigned");
    const auto [count, v] = frontier.top();
    frontier.pop();
    if (assigned[v] || count != neighborCount[v]) continue;  // stale entry

    const VecD p = fine.vertex(v);
    int host = -1;

    // rays along incident edges toward each neighbor, first hit per ray,
    // closest hit (by ray parameter) across rays; grazing ties resolve to
    // the lower facet index
    double bestT = std::numeric_limits<double>::infinity();
    int bestFacet = -1;
    for (int u : fineAdjacency.vertexVertex[v]) {
      VecD dir = fine.vertex(u) - p;
      const double len = dir.norm();
      if (len <= 0) continue;
      dir /= len;
      for (int f = 0; f < nFacets; ++f) {
        RayHit hit;
        if (fine.dim == 2)
          hit = raySegment(p, dir, coarse.vertex(coarseBoundary.facets(0, f)),
                           coarse.vertex(coarseBoundary.facets(1, f)), tol);
        else
          hit = rayTriangle(p, dir, coarse.vertex(coarseBoundary.facets(0, f)),
                            coarse.vertex(coarseBoundary.facets(1, f)),
                            coarse.vertex(coarseBoundary.facets(2, f)), tol);
        if (!hit.hit) continue;
        if (bestFacet < 0) {
          bestT = hit.t;
          bestFacet = f;
          continue;
        }
        const double slack = tol * std::max(1.0, bestT);
        if (hit.t < bestT - slack || (std::abs(hit.t - bestT) <= slack && f < bestFacet)) {
          bestT = hit.t;
          bestFacet = f;
        }
      }
    }
    if (bestFacet >= 0) {
      host = coarseBoundary.parent[bestFacet];
    } else {
      // no ray hit: adopt the neighbor host with the nearest centroid
      double bestDist = std::numeric_limits<double>::infinity();
      for (int u : fineAdjacency.vertexVertex[v]) {
        if (!assigned[u]) continue;
        const int candidate = map.hostElement[u];
        const double dist = (elementCentroid(coarse, candidate) - p).norm();
        if (dist < bestDist || (dist == bestDist && candidate < host)) {
          bestDist = dist;
          host = candidate;
        }
      }
      if (host < 0)
        throw numericalError("bindExteriorRobust: vertex " + std::to_string(v) +
                             " has no ray hit and no assigned neighbor");
    }

    map.hostElement[v] = host;
    map.coords.col(v) = barycentricInElement(coarse, host, p);
    map.status[v] = BindStatus::kExtrapolated;
    assigned[v] = 1;
    --remaining;
    for (int u : fineAdjacency.vertexVertex[v])
      if (!assigned[u]) frontier.push({++neighborCount[u], u});
  }
  return map;
}

BindingMap bindRobust(const SimplicialMesh& fine, const SimplicialMesh& coarse) {
  return bindExteriorRobust(fine, coarse, bindContainment(fine, coarse));
}

BindingMap bindNaiveClosest(const SimplicialMesh& fine, const SimplicialMesh& coarse) {
  ContainmentResult containment = bindContainment(fine, coarse);
  BindingMap map = std::move(containment.map);
  if (containment.unassigned.empty()) return map;

  const BoundarySurface boundary = extractBoundary(coarse);
  MatX corners(coarse.dim, coarse.dim);
  for (int v : containment.unassigned) {
    const VecD p = fine.vertex(v);
    double bestDist = std::numeric_limits<double>::infinity();
    int bestFacet = -1;
    for (int f = 0; f < boundary.numFacets(); ++f) {
      for (int k = 0; k < coarse.dim; ++k) corners.col(k) = coarse.vertex(boundary.facets(k, f));
      const double dist = closestPointOnFacet(p, corners).distance;
      if (dist < bestDist) {
        bestDist = dist;
        bestFacet = f;
      }
    }
    const int host = boundary.parent[bestFacet];
    map.hostElement[v] = host;
    map.coords.col(v) = barycentricInElement(coarse, host, p);
    map.status[v] = BindStatus::kExtrapolated;
  }
  return map;
}

std::vector<int> bindingIsolation(const SimplicialMesh& fine, const SimplicialMesh& coarse,
                                  const BindingMap& map) {
  const Adjacency fineAdjacency = buildAdjacency(fine);
  const Adjacency coarseAdjacency = buildAdjacency(coarse);
  constexpr int kUnreachable = std::numeric_limits<int>::max() / 2;

  // all-pairs BFS is fine at the coarse element counts we bind against
  const int nE = coarse.numElements();
  std::vector<std::vector<int>> dist(nE, std::vector<int>(nE, kUnreachable));
  for (int s = 0; s < nE; ++s) {
    std::queue<int> queue;
    dist[s][s] = 0;
    queue.push(s);
    while (!queue.empty()) {
      const int e = queue.front();
      queue.pop();
      for (int f : coarseAdjacency.elementElement[e])
        if (dist[s][f] == kUnreachable) {
          dist[s][f] = dist[s][e] + 1;
          queue.push(f);
        }
    }
  }

  std::vector<int> isolation(fine.numVertices(), -1);
  for (int v = 0; v < fine.numVertices(); ++v) {
    const int host = map.hostElement[v];
    int best = kUnreachable;
    bool hasNeighbor = false;
    for (int u : fineAdjacency.vertexVertex[v]) {
      hasNeighbor = true;
      best = std::min(best, dist[host][map.hostElement[u]]);
    }
    isolation[v] = hasNeighbor ? best : -1;
  }
  return isolation;
}

void saveBinding(const BindingMap& map, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw configError("cannot write " + path);
  out.precision(17);
  out << "# vertex host status weights...\n";
  out << map.size() << " " << map.coords.rows() << "\n";
  for (int v = 0; v < map.size(); ++v) {
    out << v << " " << map.hostElement[v] << " "
        << (map.status[v] == BindStatus::kInside ? "inside" : "extrapolated");
    for (int k = 0; k < map.coords.rows(); ++k) out << " " << map.coords(k, v);
    out << "\n";
  }
}

BindingMap loadBinding(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw configError("cannot open " + path);
  std::string header;
  std::getline(in, header);
  int n = 0, arity = 0;
  in >> n >> arity;
  if (!in || n < 0 || arity < 3) throw configError(path + ": bad binding header");
  BindingMap map;
  map.hostElement.resize(n);
  map.coords.resize(arity, n);
  map.status.assign(n, BindStatus::kInside);
  for (int i = 0; i < n; ++i) {
    int v = 0;
    std::string status;
    in >> v >> map.hostElement[i] >> status;
    map.status[i] = status == "inside" ? BindStatus::kInside : BindStatus::kExtrapolated;
    for (int k = 0; k < arity; ++k) in >> map.coords(k, i);
    if (!in || v != i) throw configError(path + ": corrupt binding record");
  }
  return map;
}

}  // namespace prodyn
