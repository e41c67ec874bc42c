#include "prodyn/contact.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>

#include "prodyn/geometry.hpp"
#include "second_order.hpp"

namespace prodyn {

void HalfPlane::validate() const {
  if (std::abs(normal.norm() - 1.0) > 1e-9) throw configError("half-plane normal must be unit");
  if (mu < 0) throw configError("half-plane friction must be >= 0");
}

void BarrierParams::validate() const {
  if (dhat <= 0) throw configError("barrier: dhat must be > 0");
  if (kappa <= 0) throw configError("barrier: kappa must be > 0");
  if (epsV <= 0) throw configError("barrier: epsV must be > 0");
  if (selfMu < 0) throw configError("barrier: friction must be >= 0");
}

double barrierFunction(double d, double dhat) {
  if (d >= dhat) return 0.0;
  if (d <= 0) throw numericalError("barrier evaluated at nonpositive distance");
  const double gap = d - dhat;
  return -gap * gap * std::log(d / dhat);
}

double barrierFirstDerivative(double d, double dhat) {
  if (d >= dhat) return 0.0;
  const double gap = d - dhat;
  return -2.0 * gap * std::log(d / dhat) - gap * gap / d;
}

double barrierSecondDerivative(double d, double dhat) {
  if (d >= dhat) return 0.0;
  const double gap = d - dhat;
  return -2.0 * std::log(d / dhat) - 4.0 * gap / d + gap * gap / (d * d);
}

namespace {

// squared-distance kernels, templated for nested autodiff
template <typename Vec>
typename Vec::Scalar squaredNormOf(const Vec& v) {
  typename Vec::Scalar out = v[0] * v[0];
  for (int i = 1; i < v.size(); ++i) out += v[i] * v[i];
  return out;
}

// point-point: z = [p, q]
template <typename Vec>
typename Vec::Scalar pointPointSq(const Vec& z, int d) {
  Vec diff(d);
  for (int i = 0; i < d; ++i) diff[i] = z[i] - z[d + i];
  return squaredNormOf(diff);
}

// point-line through (a,b): z = [p, a, b]
template <typename Vec>
typename Vec::Scalar pointLineSq(const Vec& z, int d) {
  using S = typename Vec::Scalar;
  Vec e(d), r(d);
  for (int i = 0; i < d; ++i) {
    e[i] = z[2 * d + i] - z[d + i];
    r[i] = z[i] - z[d + i];
  }
  if (d == 2) {
    const S cross = e[0] * r[1] - e[1] * r[0];
    return cross * cross / squaredNormOf(e);
  }
  Vec cross(3);
  cross[0] = e[1] * r[2] - e[2] * r[1];
  cross[1] = e[2] * r[0] - e[0] * r[2];
  cross[2] = e[0] * r[1] - e[1] * r[0];
  return squaredNormOf(cross) / squaredNormOf(e);
}

// point-plane through (a,b,c): z = [p, a, b, c]
template <typename Vec>
typename Vec::Scalar pointPlaneSq(const Vec& z) {
  using S = typename Vec::Scalar;
  Vec e1(3), e2(3), r(3);
  for (int i = 0; i < 3; ++i) {
    e1[i] = z[6 + i] - z[3 + i];
    e2[i] = z[9 + i] - z[3 + i];
    r[i] = z[i] - z[3 + i];
  }
  Vec n(3);
  n[0] = e1[1] * e2[2] - e1[2] * e2[1];
  n[1] = e1[2] * e2[0] - e1[0] * e2[2];
  n[2] = e1[0] * e2[1] - e1[1] * e2[0];
  const S dot = n[0] * r[0] + n[1] * r[1] + n[2] * r[2];
  return dot * dot / squaredNormOf(n);
}

// Region -> which facet corners participate in the active smooth kernel.
std::vector<int> regionCorners(FacetRegion region, int dim) {
  if (dim == 2) {
    switch (region) {
      case FacetRegion::kVertex0: return {0};
      case FacetRegion::kVertex1: return {1};
      default: return {0, 1};
    }
  }
  switch (region) {
    case FacetRegion::kVertex0: return {0};
    case FacetRegion::kVertex1: return {1};
    case FacetRegion::kVertex2: return {2};
    case FacetRegion::kEdge01: return {0, 1};
    case FacetRegion::kEdge12: return {1, 2};
    case FacetRegion::kEdge20: return {2, 0};
    case FacetRegion::kInterior: return {0, 1, 2};
  }
  return {0, 1, 2};
}

// Affine weights of the closest point on the facet (for friction lagging).
VecDp1 closestPointWeights(const MatX& corners, const ClosestPoint& cp) {
  VecDp1 w = VecDp1::Zero(corners.cols());
  if (corners.cols() == 2) {
    const VecD e = corners.col(1) - corners.col(0);
    const double t = e.squaredNorm() > 0
                         ? (cp.point - corners.col(0)).dot(e) / e.squaredNorm()
                         : 0.0;
    w[0] = 1.0 - t;
    w[1] = t;
    return w;
  }
  // triangle barycentric via normal equations
  Eigen::Matrix<double, 3, 2> edges;
  edges.col(0) = corners.col(1) - corners.col(0);
  edges.col(1) = corners.col(2) - corners.col(0);
  const Eigen::Vector2d rhs =
      edges.transpose() * (cp.point - corners.col(0));
  const Eigen::Vector2d uv = (edges.transpose() * edges).ldlt().solve(rhs);
  w[0] = 1.0 - uv[0] - uv[1];
  w[1] = uv[0];
  w[2] = uv[1];
  return w;
}

}  // namespace

ContactModel::ContactModel(const SimplicialMesh& mesh, std::vector<HalfPlane> planes,
                           std::vector<StaticCollider> statics, BarrierParams params,
                           bool selfContact)
    : mesh_(mesh),
      planes_(std::move(planes)),
      statics_(std::move(statics)),
      params_(params),
      selfContact_(selfContact) {
  params_.validate();
  for (auto& plane : planes_) plane.validate();
  boundary_ = extractBoundary(mesh);

  std::set<int> boundarySet;
  incidentFacets_.assign(mesh.numVertices(), {});
  for (int f = 0; f < boundary_.numFacets(); ++f)
    for (int k = 0; k < mesh.dim; ++k) {
      const int v = boundary_.facets(k, f);
      boundarySet.insert(v);
      incidentFacets_[v].push_back(f);
    }
  boundaryVertices_.assign(boundarySet.begin(), boundarySet.end());

  for (const auto& collider : statics_) {
    const int nF = static_cast<int>(collider.facets.cols());
    MatX lo(mesh.dim, nF), hi(mesh.dim, nF);
    for (int f = 0; f < nF; ++f) {
      VecD boxLo = collider.positions.col(collider.facets(0, f));
      VecD boxHi = boxLo;
      for (int k = 1; k < mesh.dim; ++k) {
        const VecD p = collider.positions.col(collider.facets(k, f));
        boxLo = boxLo.cwiseMin(p);
        boxHi = boxHi.cwiseMax(p);
      }
      lo.col(f) = boxLo;
      hi.col(f) = boxHi;
    }
    staticTrees_.push_back(AabbTree::build(lo, hi));
  }
}

bool ContactModel::hasColliders() const {
  return !planes_.empty() || !statics_.empty() || selfContact_;
}

namespace {

MatX gatherFacetCorners(const MatXi& facets, int f, const MatX& positions, int dim) {
  MatX corners(dim, dim);
  for (int k = 0; k < dim; ++k) corners.col(k) = positions.col(facets(k, f));
  return corners;
}

}  // namespace

double ContactModel::pairDistance(const ContactPair& pair, const MatX& x) const {
  const VecD p = x.col(pair.vertex);
  switch (pair.kind) {
    case PairKind::kPlane:
      return planes_[pair.collider].normal.dot(p) - planes_[pair.collider].offset;
    case PairKind::kStatic: {
      const auto& collider = statics_[pair.collider];
      return closestPointOnFacet(
                 p, gatherFacetCorners(collider.facets, pair.facet, collider.positions, mesh_.dim))
          .distance;
    }
    case PairKind::kSelf:
      return closestPointOnFacet(p, gatherFacetCorners(boundary_.facets, pair.facet, x, mesh_.dim))
          .distance;
  }
  return 0.0;
}

std::vector<ContactPair> ContactModel::candidatePairs(const MatX& x, const MatX* dx) const {
  std::vector<ContactPair> pairs;
  const int d = mesh_.dim;
  const double inflate = params_.dhat;

  for (int c = 0; c < static_cast<int>(planes_.size()); ++c)
    for (int v = 0; v < mesh_.numVertices(); ++v)
      pairs.push_back({PairKind::kPlane, v, c, -1});

  auto sweptBox = [&](int v, VecD& lo, VecD& hi) {
    lo = x.col(v);
    hi = x.col(v);
    if (dx) {
      lo = lo.cwiseMin(x.col(v) + dx->col(v));
      hi = hi.cwiseMax(x.col(v) + dx->col(v));
    }
  };

  VecD lo(d), hi(d);
  for (int c = 0; c < static_cast<int>(statics_.size()); ++c)
    for (int v = 0; v < mesh_.numVertices(); ++v) {
      sweptBox(v, lo, hi);
      for (int f : staticTrees_[c].query(lo, hi, inflate))
        pairs.push_back({PairKind::kStatic, v, c, f});
    }

  if (selfContact_ && !boundaryVertices_.empty()) {
    const int nF = boundary_.numFacets();
    MatX boxLo(d, nF), boxHi(d, nF);
    for (int f = 0; f < nF; ++f) {
      VecD flo = x.col(boundary_.facets(0, f));
      VecD fhi = flo;
      for (int k = 0; k < d; ++k) {
        const int u = boundary_.facets(k, f);
        flo = flo.cwiseMin(x.col(u));
        fhi = fhi.cwiseMax(x.col(u));
        if (dx) {
          flo = flo.cwiseMin(x.col(u) + dx->col(u));
          fhi = fhi.cwiseMax(x.col(u) + dx->col(u));
        }
      }
      boxLo.col(f) = flo;
      boxHi.col(f) = fhi;
    }
    const AabbTree tree = AabbTree::build(boxLo, boxHi);
    for (int v : boundaryVertices_) {
      sweptBox(v, lo, hi);
      for (int f : tree.query(lo, hi, inflate)) {
        bool incident = false;
        for (int k = 0; k < d; ++k) incident |= boundary_.facets(k, f) == v;
        if (!incident) pairs.push_back({PairKind::kSelf, v, -1, f});
      }
    }
  }
  return pairs;
}

std::vector<ContactPair> ContactModel::activePairs(const MatX& x) const {
  std::vector<ContactPair> active;
  for (const ContactPair& pair : candidatePairs(x, nullptr))
    if (pairDistance(pair, x) < params_.dhat) active.push_back(pair);
  return active;
}

double ContactModel::minDistance(const MatX& x) const {
  double best = std::numeric_limits<double>::infinity();
  for (const ContactPair& pair : candidatePairs(x, nullptr))
    best = std::min(best, pairDistance(pair, x));
  return best;
}

double ContactModel::barrier(const std::vector<ContactPair>& pairs, const MatX& x) const {
  double total = 0.0;
  for (const ContactPair& pair : pairs) {
    const double d = pairDistance(pair, x);
    if (d <= 0) return std::numeric_limits<double>::infinity();
    total += params_.kappa * barrierFunction(d, params_.dhat);
  }
  return total;
}

double ContactModel::barrierWithDerivatives(const std::vector<ContactPair>& pairs, const MatX& x,
                                            VecX& gradient, std::vector<Triplet>* hessian,
                                            bool projectPsd) const {
  const int d = mesh_.dim;
  double total = 0.0;
  for (const ContactPair& pair : pairs) {
    const double dist = pairDistance(pair, x);
    if (dist <= 0) throw numericalError("barrier derivatives at nonpositive distance");
    if (dist >= params_.dhat) continue;
    total += params_.kappa * barrierFunction(dist, params_.dhat);
    const double db = params_.kappa * barrierFirstDerivative(dist, params_.dhat);
    const double d2b = params_.kappa * barrierSecondDerivative(dist, params_.dhat);

    if (pair.kind == PairKind::kPlane) {
      const VecD n = planes_[pair.collider].normal;
      gradient.segment(d * pair.vertex, d) += db * n;
      if (hessian) {
        MatX H = d2b * (n * n.transpose());
        if (projectPsd && d2b < 0) H.setZero();  // rank-1: clamp is exact
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j)
            hessian->emplace_back(d * pair.vertex + i, d * pair.vertex + j, H(i, j));
      }
      continue;
    }

    // facet pairs: assemble distance derivatives on the participant stack
    const bool self = pair.kind == PairKind::kSelf;
    const MatXi& facets = self ? boundary_.facets : statics_[pair.collider].facets;
    const MatX& facetPositions = self ? x : statics_[pair.collider].positions;
    const MatX corners = gatherFacetCorners(facets, pair.facet, facetPositions, d);
    const ClosestPoint cp = closestPointOnFacet(x.col(pair.vertex), corners);
    const std::vector<int> active = regionCorners(cp.region, d);

    // participants: the vertex always; facet corners only for self pairs
    std::vector<int> dofBase = {d * pair.vertex};
    if (self)
      for (int k : active) dofBase.push_back(d * facets(k, pair.facet));
    const int nParticipants = self ? 1 + static_cast<int>(active.size()) : 1;

    VecX z(nParticipants * d);
    z.segment(0, d) = x.col(pair.vertex);
    if (self)
      for (size_t k = 0; k < active.size(); ++k)
        z.segment(d * (1 + static_cast<int>(k)), d) = corners.col(active[k]);

    // frozen corner values enter static kernels as constants
    std::vector<VecD> frozen;
    if (!self)
      for (int k : active) frozen.push_back(corners.col(k));

    auto kernel = [&](const auto& zz) {
      using Vec = std::decay_t<decltype(zz)>;
      using S = typename Vec::Scalar;
      const int corners0 = static_cast<int>(active.size());
      Vec full((1 + corners0) * d);
      for (int i = 0; i < d; ++i) full[i] = zz[i];
      if (self) {
        for (int k = 0; k < corners0; ++k)
          for (int i = 0; i < d; ++i) full[d * (1 + k) + i] = zz[d * (1 + k) + i];
      } else {
        for (int k = 0; k < corners0; ++k)
          for (int i = 0; i < d; ++i) full[d * (1 + k) + i] = S(frozen[k][i]);
      }
      if (corners0 == 1) return pointPointSq(full, d);
      if (corners0 == 2) return pointLineSq(full, d);
      return pointPlaneSq(full);
    };

    const detail::SecondOrder sq = detail::secondOrder(kernel, z);
    const double invTwoD = 1.0 / (2.0 * dist);
    const VecX gradDist = sq.gradient * invTwoD;

    VecX localGrad = db * gradDist;
    MatX hessDist =
        sq.hessian * invTwoD - (sq.gradient * sq.gradient.transpose()) / (4.0 * dist * dist * dist);
    MatX localHess = d2b * (gradDist * gradDist.transpose()) + db * hessDist;

    for (int a = 0; a < nParticipants; ++a)
      gradient.segment(dofBase[a], d) += localGrad.segment(a * d, d);
    if (hessian) {
      if (projectPsd) {
        Eigen::SelfAdjointEigenSolver<MatX> eig(0.5 * (localHess + localHess.transpose()));
        localHess = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).asDiagonal() *
                    eig.eigenvectors().transpose();
      }
      for (int a = 0; a < nParticipants; ++a)
        for (int b = 0; b < nParticipants; ++b)
          for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
              hessian->emplace_back(dofBase[a] + i, dofBase[b] + j,
                                    localHess(a * d + i, b * d + j));
    }
  }
  return total;
}

std::vector<LaggedContact> ContactModel::lagFriction(const MatX& xPrevious) const {
  const int d = mesh_.dim;
  std::vector<LaggedContact> lagged;
  for (const ContactPair& pair : activePairs(xPrevious)) {
    const double dist = pairDistance(pair, xPrevious);
    if (dist >= params_.dhat || dist <= 0) continue;

    LaggedContact contact;
    contact.pair = pair;
    contact.normalForce = -params_.kappa * barrierFirstDerivative(dist, params_.dhat);

    VecD normal(d);
    if (pair.kind == PairKind::kPlane) {
      normal = planes_[pair.collider].normal;
      contact.mu = planes_[pair.collider].mu;
    } else {
      const bool self = pair.kind == PairKind::kSelf;
      const MatXi& facets = self ? boundary_.facets : statics_[pair.collider].facets;
      const MatX& facetPositions = self ? xPrevious : statics_[pair.collider].positions;
      const MatX corners = gatherFacetCorners(facets, pair.facet, facetPositions, d);
      const ClosestPoint cp = closestPointOnFacet(xPrevious.col(pair.vertex), corners);
      if (cp.distance <= 0) continue;
      normal = (xPrevious.col(pair.vertex) - cp.point) / cp.distance;
      contact.mu = self ? params_.selfMu : statics_[pair.collider].mu;
      contact.facetWeights = closestPointWeights(corners, cp);
    }
    if (contact.mu == 0.0 || contact.normalForce <= 0.0) continue;

    contact.tangent.resize(d, d - 1);
    if (d == 2) {
      contact.tangent(0, 0) = -normal[1];
      contact.tangent(1, 0) = normal[0];
    } else {
      const Eigen::Vector3d n3 = normal;
      int axis = 0;
      n3.cwiseAbs().minCoeff(&axis);
      const Eigen::Vector3d t1 = n3.cross(Eigen::Vector3d::Unit(axis)).normalized();
      contact.tangent.col(0) = t1;
      contact.tangent.col(1) = n3.cross(t1);
    }
    lagged.push_back(std::move(contact));
  }
  return lagged;
}

namespace {

// smoothed absolute value: quadratic below the smoothing width, linear above
double smoothAbs(double y, double width) {
  return y <= width ? y * y / (2.0 * width) : y - width / 2.0;
}
double smoothAbsDerivativeOverY(double y, double width) {  // f0'(y)/y, smooth at 0
  return y <= width ? 1.0 / width : 1.0 / y;
}

}  // namespace

double ContactModel::friction(const std::vector<LaggedContact>& lagged, const MatX& x,
                              const MatX& xPrevious, double h) const {
  double total = 0.0;
  const int d = mesh_.dim;
  const double width = params_.epsV * h;
  for (const LaggedContact& contact : lagged) {
    VecD rel = x.col(contact.pair.vertex) - xPrevious.col(contact.pair.vertex);
    if (contact.pair.kind == PairKind::kSelf)
      for (int k = 0; k < d; ++k) {
        const int u = boundary_.facets(k, contact.pair.facet);
        rel -= contact.facetWeights[k] * (x.col(u) - xPrevious.col(u));
      }
    const VecX ut = contact.tangent.transpose() * rel;
    total += contact.mu * contact.normalForce * smoothAbs(ut.norm(), width);
  }
  return total;
}

double ContactModel::frictionWithDerivatives(const std::vector<LaggedContact>& lagged,
                                             const MatX& x, const MatX& xPrevious, double h,
                                             VecX& gradient, std::vector<Triplet>* hessian) const {
  const int d = mesh_.dim;
  const double width = params_.epsV * h;
  double total = 0.0;
  for (const LaggedContact& contact : lagged) {
    // stacked participants: vertex then (self only) facet corners, with
    // relative-displacement weights s = (1, -w_0, ..., -w_{d-1})
    std::vector<int> dofBase = {d * contact.pair.vertex};
    std::vector<double> s = {1.0};
    VecD rel = x.col(contact.pair.vertex) - xPrevious.col(contact.pair.vertex);
    if (contact.pair.kind == PairKind::kSelf)
      for (int k = 0; k < d; ++k) {
        const int u = boundary_.facets(k, contact.pair.facet);
        dofBase.push_back(d * u);
        s.push_back(-contact.facetWeights[k]);
        rel -= contact.facetWeights[k] * (x.col(u) - xPrevious.col(u));
      }

    const VecX ut = contact.tangent.transpose() * rel;
    const double y = ut.norm();
    const double scale = contact.mu * contact.normalForce;
    total += scale * smoothAbs(y, width);

    const double fPrimeOverY = smoothAbsDerivativeOverY(y, width);
    const VecD gradU = contact.tangent * (fPrimeOverY * ut);  // d phi / d rel
    for (size_t a = 0; a < dofBase.size(); ++a)
      gradient.segment(dofBase[a], d) += scale * s[a] * gradU;

    if (hessian) {
      MatX hessU;
      if (y <= width) {
        hessU = (1.0 / width) * contact.tangent * contact.tangent.transpose();
      } else {
        const VecX utHat = ut / y;
        hessU = contact.tangent *
                ((MatX::Identity(d - 1, d - 1) - utHat * utHat.transpose()) / y) *
                contact.tangent.transpose();
      }
      for (size_t a = 0; a < dofBase.size(); ++a)
        for (size_t b = 0; b < dofBase.size(); ++b) {
          const MatX block = scale * s[a] * s[b] * hessU;
          for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
              hessian->emplace_back(dofBase[a] + i, dofBase[b] + j, block(i, j));
        }
    }
  }
  return total;
}

double ContactModel::feasibleStepUpperBound(const MatX& x, const MatX& dx) const {
  double alpha = 1.0;
  for (const ContactPair& pair : candidatePairs(x, &dx)) {
    const int d = mesh_.dim;
    double lip = 0.0;
    if (pair.kind == PairKind::kPlane) {
      lip = std::max(0.0, -planes_[pair.collider].normal.dot(dx.col(pair.vertex)));
    } else {
      lip = dx.col(pair.vertex).norm();
      if (pair.kind == PairKind::kSelf) {
        double facetMax = 0.0;
        for (int k = 0; k < d; ++k)
          facetMax = std::max(facetMax, dx.col(boundary_.facets(k, pair.facet)).norm());
        lip += facetMax;
      }
    }
    if (lip <= 0.0) continue;

    const double d0 = pairDistance(pair, x);
    if (d0 <= 0) throw numericalError("feasibleStepUpperBound: infeasible current state");
    if (d0 / lip >= alpha + 1.0) continue;  // cannot cross within the step

    auto distanceAt = [&](double t) {
      const VecD p = x.col(pair.vertex) + t * dx.col(pair.vertex);
      if (pair.kind == PairKind::kPlane)
        return planes_[pair.collider].normal.dot(p) - planes_[pair.collider].offset;
      MatX corners(d, d);
      if (pair.kind == PairKind::kStatic) {
        const auto& collider = statics_[pair.collider];
        corners = gatherFacetCorners(collider.facets, pair.facet, collider.positions, d);
      } else {
        for (int k = 0; k < d; ++k) {
          const int u = boundary_.facets(k, pair.facet);
          corners.col(k) = x.col(u) + t * dx.col(u);
        }
      }
      return closestPointOnFacet(p, corners).distance;
    };

    // additive conservative advance: walk toward contact keeping a
    // 10%-of-initial-distance margin; returns 1 when the pair never closes
    const double margin = 0.1 * d0;
    double t = 0.0;
    double dist = d0;
    for (int iter = 0; iter < 100; ++iter) {
      const double step = (dist - margin) / lip;
      t += step;
      if (t >= alpha) {
        t = alpha;
        break;
      }
      dist = distanceAt(t);
      if (dist <= margin || step < 1e-12 * std::max(1.0, alpha)) break;
    }
    alpha = std::min(alpha, t);
  }
  return std::max(alpha, 1e-12);
}

}  // namespace prodyn
