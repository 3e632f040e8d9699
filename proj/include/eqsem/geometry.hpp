#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eqsem/topology.hpp"

namespace eqsem {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec4 = Eigen::Vector4d;

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MapPoint {
  Vec2 x;
  Mat2 F;  // F(i, j) = dx_i / dxi_j
  double J;
};

/// Map from the reference square [-1, 1]^2 to a physical element.
class ElementMap {
 public:
  virtual ~ElementMap() = default;

  [[nodiscard]] virtual Vec2 position(const Vec2& xi) const = 0;
  [[nodiscard]] virtual Mat2 gradient(const Vec2& xi) const = 0;
  /// True when F is constant over the element.
  [[nodiscard]] virtual bool is_affine() const { return false; }

  /// Position, deformation gradient and Jacobian. Throws GeometryError when
  /// the Jacobian is not positive.
  [[nodiscard]] MapPoint eval(const Vec2& xi) const;
};

using MapList = std::vector<std::shared_ptr<const ElementMap>>;

/// Axis-aligned box [lo, hi]; F is constant and diagonal.
class AffineMap final : public ElementMap {
 public:
  AffineMap(Vec2 lo, Vec2 hi);
  [[nodiscard]] Vec2 position(const Vec2& xi) const override;
  [[nodiscard]] Mat2 gradient(const Vec2& xi) const override;
  [[nodiscard]] bool is_affine() const override { return true; }

 private:
  Vec2 lo_, half_;
};

/// The box [lo, hi] pushed through the global deformation
///   x1 = X1 + c sin(pi X1) sin(pi X2),  x2 = X2 + c sin(pi X1) sin(pi X2).
class SineDeformedMap final : public ElementMap {
 public:
  SineDeformedMap(double c, Vec2 lo, Vec2 hi);
  [[nodiscard]] Vec2 position(const Vec2& xi) const override;
  [[nodiscard]] Mat2 gradient(const Vec2& xi) const override;
  [[nodiscard]] bool is_affine() const override { return c_ == 0.0; }

  [[nodiscard]] static Vec2 deform(double c, const Vec2& X);
  [[nodiscard]] static Mat2 deform_gradient(double c, const Vec2& X);

 private:
  double c_;
  Vec2 lo_, half_;
};

/// Parametric curve on t in [-1, 1] with its derivative.
struct Curve {
  std::function<Vec2(double)> point;
  std::function<Vec2(double)> tangent;
};

[[nodiscard]] Curve line_segment(Vec2 a, Vec2 b);
/// Arc of radius r about `center` from angle theta0 to theta1, uniform in angle.
[[nodiscard]] Curve circular_arc(Vec2 center, double r, double theta0, double theta1);

/// Gordon-Hall bilinearly blended (Coons) patch through four boundary curves.
/// bottom/top are parameterised by xi1, left/right by xi2, all increasing
/// with the reference coordinate.
class TransfiniteMap final : public ElementMap {
 public:
  TransfiniteMap(Curve bottom, Curve right, Curve top, Curve left);
  [[nodiscard]] Vec2 position(const Vec2& xi) const override;
  [[nodiscard]] Mat2 gradient(const Vec2& xi) const override;

 private:
  Curve bottom_, right_, top_, left_;
  Vec2 p00_, p10_, p01_, p11_;
};

/// sigma = (1/J) blockdiag(F, F) sigma_hat, vectors ordered
/// [s11, s21, s12, s22]. Throws GeometryError for J <= 0.
[[nodiscard]] Vec4 piola_stress(const Mat2& F, double J, const Vec4& sigma_hat);
[[nodiscard]] Vec4 piola_stress_inverse(const Mat2& F, double J, const Vec4& sigma);

/// Positive Jacobian at every GLL and GL tensor point of order N.
void check_jacobians(const MapList& maps, int order);

/// Interior interfaces must be traversed in the same direction by both
/// neighbours (conforming reference orientation); throws GeometryError
/// otherwise.
void check_conformity(const MeshTopology& mesh, const MapList& maps);

/// Reference coordinate of a point on side `s` with tangential coordinate t.
[[nodiscard]] Vec2 side_point(Side s, double t);

/// Outward unit normal of side `s` at a mapped point, and the line element
/// |dx/dt| along the side.
struct SideFrame {
  Vec2 normal;
  double length = 0.0;
};
[[nodiscard]] SideFrame side_frame(const MapPoint& mp, Side s);

}  // namespace eqsem
