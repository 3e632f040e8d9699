#pragma once

#include <memory>
#include <vector>

#include "eqsem/assembly.hpp"

namespace eqsem {

/// Conforming displacement finite elements on the affine meshes of a
/// Problem: Q4 (order 1) and Q9 (order 2) Lagrange quadrilaterals, plane
/// stress, exact Gauss quadrature. Used as the kinematic counterpart of the
/// equilibrium method.
struct FemOptions {
  int order = 1;
  /// Gauss points per direction; 0 = order + 1.
  int quadrature_points = 0;
};

struct FemSample {
  int element = 0;
  Vec2 x;
  Vec2 u;
  Vec4 sigma;     // [s11, s21, s12, s22], raw element stress (no averaging)
  Vec2 residual;  // div sigma + f from second derivatives of the interpolant
};

class FemModel {
 public:
  /// Assembles and solves. Throws std::invalid_argument for curved maps,
  /// particular stress fields or an unsupported order.
  FemModel(const Problem& problem, const FemOptions& options = {});

  [[nodiscard]] int order() const { return p_; }
  [[nodiscard]] int node_count() const { return static_cast<int>(nodes_.size()); }
  [[nodiscard]] int dof_count() const { return 2 * node_count(); }
  [[nodiscard]] int free_dof_count() const { return free_count_; }
  [[nodiscard]] const Vector& displacement() const { return u_; }
  [[nodiscard]] const std::vector<Vec2>& nodes() const { return nodes_; }
  /// Global node of local node (a, b) of element e, a along xi1.
  [[nodiscard]] int node(int e, int a, int b) const { return elem_nodes_[e][b * (p_ + 1) + a]; }

  /// Stiffness before any boundary condition; its kernel holds the rigid
  /// motions.
  [[nodiscard]] const SparseMatrix& stiffness() const { return K_; }
  /// 1/2 u^T K u.
  [[nodiscard]] double strain_energy() const;
  [[nodiscard]] double solve_seconds() const { return seconds_; }

  [[nodiscard]] FemSample at(int element, const Vec2& xi) const;
  void for_each(const std::vector<double>& pts, const std::function<void(const FemSample&)>& fn) const;

  [[nodiscard]] const Problem& problem() const { return problem_; }

 private:
  const Problem& problem_;
  int p_ = 1;
  LagrangeBasis shape_;
  std::vector<Vec2> nodes_;
  std::vector<std::vector<int>> elem_nodes_;
  SparseMatrix K_;
  Vector u_;
  int free_count_ = 0;
  double seconds_ = 0.0;
};

struct FemResidual {
  Vec2 interior = Vec2::Zero();  // max |div sigma + f| per component
  double traction_jump = 0.0;    // max |[sigma n]| over interior interfaces
  Vec2 worst_point = Vec2::Zero();
};

/// Interior residual over pts x pts per element, and traction jumps at
/// `edge_points` equispaced points on every interior interface.
[[nodiscard]] FemResidual fem_equilibrium_residual(const FemModel& model, const std::vector<double>& pts,
                                                   int edge_points = 50);

}  // namespace eqsem
