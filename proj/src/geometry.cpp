#include "eqsem/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "eqsem/basis.hpp"

namespace eqsem {

namespace {
constexpr double kPi = std::numbers::pi;
}

MapPoint ElementMap::eval(const Vec2& xi) const {
  MapPoint p{position(xi), gradient(xi), 0.0};
  p.J = p.F.determinant();
  if (!(p.J > 0.0)) {
    std::ostringstream msg;
    msg << "non-positive Jacobian " << p.J << " at reference point (" << xi(0) << ", " << xi(1) << "), physical ("
        << p.x(0) << ", " << p.x(1) << ")";
    throw GeometryError(msg.str());
  }
  return p;
}

AffineMap::AffineMap(Vec2 lo, Vec2 hi) : lo_(lo), half_(0.5 * (hi - lo)) {
  if (!(half_(0) > 0.0 && half_(1) > 0.0)) throw GeometryError("affine box must have hi > lo");
}

Vec2 AffineMap::position(const Vec2& xi) const { return lo_ + half_.cwiseProduct(xi + Vec2::Ones()); }

Mat2 AffineMap::gradient(const Vec2&) const { return half_.asDiagonal(); }

SineDeformedMap::SineDeformedMap(double c, Vec2 lo, Vec2 hi) : c_(c), lo_(lo), half_(0.5 * (hi - lo)) {
  if (!(half_(0) > 0.0 && half_(1) > 0.0)) throw GeometryError("element box must have hi > lo");
}

Vec2 SineDeformedMap::deform(double c, const Vec2& X) {
  const double s = c * std::sin(kPi * X(0)) * std::sin(kPi * X(1));
  return {X(0) + s, X(1) + s};
}

Mat2 SineDeformedMap::deform_gradient(double c, const Vec2& X) {
  const double d1 = c * kPi * std::cos(kPi * X(0)) * std::sin(kPi * X(1));
  const double d2 = c * kPi * std::sin(kPi * X(0)) * std::cos(kPi * X(1));
  Mat2 F;
  F << 1.0 + d1, d2, d1, 1.0 + d2;
  return F;
}

Vec2 SineDeformedMap::position(const Vec2& xi) const {
  return deform(c_, lo_ + half_.cwiseProduct(xi + Vec2::Ones()));
}

Mat2 SineDeformedMap::gradient(const Vec2& xi) const {
  const Vec2 X = lo_ + half_.cwiseProduct(xi + Vec2::Ones());
  return deform_gradient(c_, X) * half_.asDiagonal();
}

Curve line_segment(Vec2 a, Vec2 b) {
  return {[a, b](double t) -> Vec2 { return 0.5 * (1.0 - t) * a + 0.5 * (1.0 + t) * b; },
          [a, b](double) -> Vec2 { return 0.5 * (b - a); }};
}

Curve circular_arc(Vec2 center, double r, double theta0, double theta1) {
  const double mid = 0.5 * (theta0 + theta1);
  const double half = 0.5 * (theta1 - theta0);
  return {[=](double t) -> Vec2 {
            const double th = mid + half * t;
            return center + r * Vec2(std::cos(th), std::sin(th));
          },
          [=](double t) -> Vec2 {
            const double th = mid + half * t;
            return r * half * Vec2(-std::sin(th), std::cos(th));
          }};
}

TransfiniteMap::TransfiniteMap(Curve bottom, Curve right, Curve top, Curve left)
    : bottom_(std::move(bottom)), right_(std::move(right)), top_(std::move(top)), left_(std::move(left)) {
  p00_ = bottom_.point(-1.0);
  p10_ = bottom_.point(1.0);
  p01_ = top_.point(-1.0);
  p11_ = top_.point(1.0);
  const double scale = std::max({1.0, p00_.norm(), p10_.norm(), p01_.norm(), p11_.norm()});
  const double gap = std::max({(left_.point(-1.0) - p00_).norm(), (right_.point(-1.0) - p10_).norm(),
                               (left_.point(1.0) - p01_).norm(), (right_.point(1.0) - p11_).norm()});
  if (gap > 1e-12 * scale) {
    std::ostringstream msg;
    msg << "transfinite map: boundary curves do not close at the corners (gap " << gap << ")";
    throw GeometryError(msg.str());
  }
}

Vec2 TransfiniteMap::position(const Vec2& xi) const {
  const double s = xi(0), t = xi(1);
  return 0.5 * (1 - t) * bottom_.point(s) + 0.5 * (1 + t) * top_.point(s) + 0.5 * (1 - s) * left_.point(t) +
         0.5 * (1 + s) * right_.point(t) -
         0.25 * ((1 - s) * (1 - t) * p00_ + (1 + s) * (1 - t) * p10_ + (1 - s) * (1 + t) * p01_ +
                 (1 + s) * (1 + t) * p11_);
}

Mat2 TransfiniteMap::gradient(const Vec2& xi) const {
  const double s = xi(0), t = xi(1);
  const Vec2 ds = 0.5 * (1 - t) * bottom_.tangent(s) + 0.5 * (1 + t) * top_.tangent(s) - 0.5 * left_.point(t) +
                  0.5 * right_.point(t) -
                  0.25 * (-(1 - t) * p00_ + (1 - t) * p10_ - (1 + t) * p01_ + (1 + t) * p11_);
  const Vec2 dt = -0.5 * bottom_.point(s) + 0.5 * top_.point(s) + 0.5 * (1 - s) * left_.tangent(t) +
                  0.5 * (1 + s) * right_.tangent(t) -
                  0.25 * (-(1 - s) * p00_ - (1 + s) * p10_ + (1 - s) * p01_ + (1 + s) * p11_);
  Mat2 F;
  F.col(0) = ds;
  F.col(1) = dt;
  return F;
}

Vec4 piola_stress(const Mat2& F, double J, const Vec4& sigma_hat) {
  if (!(J > 0.0)) throw GeometryError("Piola transform requires a positive Jacobian");
  Vec4 s;
  s.head<2>() = F * sigma_hat.head<2>() / J;
  s.tail<2>() = F * sigma_hat.tail<2>() / J;
  return s;
}

Vec4 piola_stress_inverse(const Mat2& F, double J, const Vec4& sigma) {
  if (!(J > 0.0)) throw GeometryError("Piola transform requires a positive Jacobian");
  const Mat2 Finv = F.inverse();
  Vec4 s;
  s.head<2>() = J * (Finv * sigma.head<2>());
  s.tail<2>() = J * (Finv * sigma.tail<2>());
  return s;
}

void check_jacobians(const MapList& maps, int order) {
  const auto gll = compute_rule(RuleKind::GaussLobatto, order);
  const auto gl = compute_rule(RuleKind::Gauss, order);
  for (const auto& map : maps)
    for (const auto* rule : {&gll, &gl})
      for (double a : rule->nodes)
        for (double b : rule->nodes) (void)map->eval(Vec2(a, b));
}

Vec2 side_point(Side s, double t) {
  switch (s) {
    case Side::Left: return {-1.0, t};
    case Side::Right: return {1.0, t};
    case Side::Bottom: return {t, -1.0};
    default: return {t, 1.0};
  }
}

SideFrame side_frame(const MapPoint& mp, Side s) {
  const bool vertical = s == Side::Left || s == Side::Right;
  const Vec2 tau = vertical ? Vec2(mp.F.col(1)) : Vec2(mp.F.col(0));
  // Rotating the tangent clockwise gives the +xi normal on Right and the
  // -xi normal on Bottom; both are outward.
  const double sign = (s == Side::Right || s == Side::Bottom) ? 1.0 : -1.0;
  SideFrame f;
  f.length = tau.norm();
  f.normal = sign * Vec2(tau(1), -tau(0)) / f.length;
  return f;
}

void check_conformity(const MeshTopology& mesh, const MapList& maps) {
  if (static_cast<int>(maps.size()) != mesh.element_count()) {
    throw GeometryError("number of element maps does not match the mesh");
  }
  for (const auto& iface : mesh.interfaces()) {
    if (iface.is_boundary()) continue;
    const Side plus = iface.vertical ? Side::Right : Side::Top;
    const Side minus = opposite(plus);
    const auto& a = *maps[iface.elem[0]];
    const auto& b = *maps[iface.elem[1]];
    double scale = 1.0, gap = 0.0;
    for (double t : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
      const Vec2 xa = a.position(side_point(plus, t));
      const Vec2 xb = b.position(side_point(minus, t));
      scale = std::max(scale, xa.norm());
      gap = std::max(gap, (xa - xb).norm());
    }
    if (gap > 1e-10 * scale) {
      std::ostringstream msg;
      msg << "elements " << iface.elem[0] << " and " << iface.elem[1]
          << " do not share a conforming interface (mismatch " << gap << ")";
      throw GeometryError(msg.str());
    }
  }
}

}  // namespace eqsem
