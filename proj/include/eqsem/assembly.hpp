#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "eqsem/basis.hpp"
#include "eqsem/geometry.hpp"
#include "eqsem/topology.hpp"

namespace eqsem {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

/// Isotropic plane-stress material. The compliance acts on stress vectors
/// ordered [s11, s21, s12, s22]; the shear entries are (1+nu)/E because both
/// shear components appear in the vector.
struct Material {
  double E = 1.0;
  double nu = 0.3;

  [[nodiscard]] Eigen::Matrix4d compliance() const;
  /// Stiffness of the symmetric 3-component plane-stress law, acting on
  /// engineering strains [e11, e22, 2 e12].
  [[nodiscard]] Eigen::Matrix3d plane_stress_stiffness() const;
  void validate() const;
};

using ScalarField = std::function<double(const Vec2&)>;
using VectorField = std::function<Vec2(const Vec2&)>;
/// Stress field returning [s11, s21, s12, s22].
using StressField = std::function<Vec4(const Vec2&)>;
/// Surface traction as a function of position and outward unit normal.
using TractionField = std::function<Vec2(const Vec2& x, const Vec2& n)>;

enum class BcKind { Displacement, Traction };

/// Condition on one boundary face, chosen per force component so that
/// symmetry planes (u_n = 0, t_t = 0) can be expressed. Empty fields mean
/// zero.
struct FaceCondition {
  std::array<BcKind, 2> kind{BcKind::Displacement, BcKind::Displacement};
  VectorField displacement;
  TractionField traction;

  static FaceCondition clamped(VectorField u = {});
  static FaceCondition loaded(TractionField t = {});
};

class BoundarySpec {
 public:
  using Classifier = std::function<FaceCondition(int element, Side side, const Vec2& midpoint)>;

  BoundarySpec() = default;
  /// Classifier is called once for every boundary face with the physical
  /// midpoint of the face.
  BoundarySpec(const MeshTopology& mesh, const MapList& maps, const Classifier& classify);

  [[nodiscard]] const FaceCondition& at(int element, Side side) const;
  [[nodiscard]] bool has(int element, Side side) const;

 private:
  std::vector<std::array<int, 4>> index_;
  std::vector<FaceCondition> faces_;
};

/// A complete equilibrium-method problem definition.
struct Problem {
  MeshTopology mesh;
  MapList maps;
  Material material;
  BoundarySpec boundary;
  VectorField body_force;   // optional
  StressField particular;   // optional: when set, the body force is carried by it
};

struct AssemblyOptions {
  int order = 2;
  RotationGrid rotation = RotationGrid::Gauss;
  /// Gauss points per direction for the compliance matrix on non-affine
  /// elements; 0 selects max(20, 2N+2). Affine elements always use GLL.
  int curved_points = 0;
  /// Gauss points per direction per sub-cell for the body force; 0 = N+1.
  int body_force_points = 0;
  /// Gauss points per sub-face for prescribed tractions; 0 = max(12, N+2).
  int traction_points = 0;
};

/// Precomputed 1D tables shared by all element kernels of order N.
class ElementBasis {
 public:
  explicit ElementBasis(int order);

  [[nodiscard]] int order() const { return n_; }
  [[nodiscard]] const BasisSet& gll() const { return gll_; }
  [[nodiscard]] const QuadratureRule& gl_rule() const { return gl_; }
  [[nodiscard]] int local_count() const { return 4 * n_ * (n_ + 1); }

  /// Reference stress basis at xi: 4 x nloc, row f holds family f.
  void stress_basis(const Vec2& xi, Eigen::Ref<Eigen::MatrixXd> psi) const;
  [[nodiscard]] Eigen::MatrixXd stress_basis(const Vec2& xi) const;

  /// M(a, i) = wgl_a e_i(xgl_a): the one-dimensional displacement pairing.
  [[nodiscard]] const Eigen::MatrixXd& volume_1d() const { return volume_1d_; }

 private:
  int n_;
  BasisSet gll_;
  QuadratureRule gl_;
  Eigen::MatrixXd volume_1d_;
};

// Element kernels (local traction numbering of DofLayout::local_traction).
[[nodiscard]] Eigen::MatrixXd element_compliance(const ElementBasis& basis, const ElementMap& map,
                                                 const Material& material, int curved_points);
[[nodiscard]] Eigen::MatrixXd element_rotation(const ElementBasis& basis, const ElementMap& map, RotationGrid grid);
[[nodiscard]] Vector element_particular(const ElementBasis& basis, const ElementMap& map, const Material& material,
                                        const StressField& particular);

// Global operators.
[[nodiscard]] SparseMatrix assemble_H(const Problem& problem, const DofLayout& layout, const AssemblyOptions& opt);
[[nodiscard]] SparseMatrix assemble_V(const DofLayout& layout);
[[nodiscard]] SparseMatrix assemble_R(const Problem& problem, const DofLayout& layout);
/// B * u_bar on the traction DOFs (displacement-type face components only).
[[nodiscard]] Vector assemble_B(const Problem& problem, const DofLayout& layout);
/// H_p * sigma_p on the traction DOFs.
[[nodiscard]] Vector assemble_Hp(const Problem& problem, const DofLayout& layout);
/// Sub-cell integrals of f_m J over [xi_{i-1}, xi_i] x [xi_{j-1}, xi_j].
[[nodiscard]] Vector project_body_force(const VectorField& f, const MapList& maps, const DofLayout& layout,
                                        int points = 0);

struct FixedDofs {
  std::vector<int> index;
  std::vector<double> value;
};

/// Traction DOFs on traction-type face components, set to the integrated
/// prescribed traction over each sub-face (sign follows the reference normal).
[[nodiscard]] FixedDofs strong_tractions(const Problem& problem, const DofLayout& layout, int points = 0);

/// The symmetric saddle system
///   [ H    (VD)^T  R^T ] [T]   [ B u_bar - H_p s_p ]
///   [ VD   0       0   ] [u] = [ -V F              ]
///   [ R    0       0   ] [w]   [ 0                 ]
/// where R T pairs the rotation test functions with s12 - s21.
struct SaddleSystem {
  DofLayout layout;
  SparseMatrix matrix;
  Vector rhs;
  SparseMatrix incidence;   // D
  SparseMatrix volume;      // V
  SparseMatrix compliance;  // H
  SparseMatrix rotation;    // R
  Vector body_force;        // F entering the equilibrium rows (zero with a particular field)
  Vector particular_load;   // H_p s_p (empty when not used)
  FixedDofs fixed;
};

[[nodiscard]] SaddleSystem build_saddle_system(const Problem& problem, const AssemblyOptions& opt);

/// System with the strongly imposed traction DOFs eliminated by moving their
/// columns to the right-hand side.
struct ReducedSystem {
  SparseMatrix matrix;
  Vector rhs;
  std::vector<int> free;  // reduced index -> full index
  int full_size = 0;

  [[nodiscard]] Vector expand(const Vector& reduced, const FixedDofs& fixed) const;
};

[[nodiscard]] ReducedSystem apply_strong_tractions(const SaddleSystem& system);

}  // namespace eqsem
