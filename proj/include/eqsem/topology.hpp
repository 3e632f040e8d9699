#pragma once

#include <array>
#include <vector>

#include <Eigen/SparseCore>

namespace eqsem {

// Reference-element sides. Left/Right are the faces xi1 = -1/+1, Bottom/Top
// the faces xi2 = -1/+1.
enum class Side { Left = 0, Right = 1, Bottom = 2, Top = 3 };

inline constexpr std::array<Side, 4> kSides{Side::Left, Side::Right, Side::Bottom, Side::Top};

[[nodiscard]] constexpr int side_index(Side s) { return static_cast<int>(s); }
[[nodiscard]] constexpr bool is_plus_side(Side s) { return s == Side::Right || s == Side::Top; }
[[nodiscard]] constexpr Side opposite(Side s) {
  switch (s) {
    case Side::Left: return Side::Right;
    case Side::Right: return Side::Left;
    case Side::Bottom: return Side::Top;
    default: return Side::Bottom;
  }
}

enum class RotationGrid { Gauss, GaussLobatto };

struct Interface {
  // elem[0] sees the interface on its Right/Top side (+ normal), elem[1] on
  // its Left/Bottom side. Boundary interfaces have exactly one owner; the
  // missing slot is -1.
  std::array<int, 2> elem{-1, -1};
  bool vertical = true;  // normal along xi1
  [[nodiscard]] bool is_boundary() const { return elem[0] < 0 || elem[1] < 0; }
};

struct BoundaryFace {
  int element;
  Side side;
};

/// Quadrilateral mesh on a structured nx x ny lattice with an optional mask
/// of active cells. Active cells are numbered lexicographically, x1 fastest.
/// Neighbouring cells share whole faces and their reference axes agree, so
/// interface orientation is conforming by construction.
class MeshTopology {
 public:
  static MeshTopology structured(int nx, int ny);
  /// `active` has nx*ny entries, row-major with x1 fastest.
  static MeshTopology masked(int nx, int ny, const std::vector<bool>& active);

  [[nodiscard]] int nx() const { return nx_; }
  [[nodiscard]] int ny() const { return ny_; }
  [[nodiscard]] int element_count() const { return static_cast<int>(cells_.size()); }

  [[nodiscard]] std::array<int, 2> cell(int e) const { return cells_.at(e); }
  /// Element at lattice position, or -1 when outside the mesh.
  [[nodiscard]] int element_at(int ix, int iy) const;
  /// Neighbour across a side, or -1 on the boundary.
  [[nodiscard]] int neighbor(int e, Side s) const { return neighbors_.at(e)[side_index(s)]; }
  [[nodiscard]] int interface_of(int e, Side s) const { return face_iface_.at(e)[side_index(s)]; }
  /// +1 when the reference normal of the side points in the positive
  /// coordinate direction (Right/Top), -1 otherwise.
  [[nodiscard]] static int orientation(Side s) { return is_plus_side(s) ? 1 : -1; }

  [[nodiscard]] const std::vector<Interface>& interfaces() const { return interfaces_; }
  [[nodiscard]] int interior_interface_count() const;
  [[nodiscard]] int boundary_interface_count() const;
  [[nodiscard]] std::vector<BoundaryFace> boundary_faces() const;

 private:
  MeshTopology() = default;
  void connect();

  int nx_ = 0, ny_ = 0;
  std::vector<int> lattice_;  // lattice cell -> element or -1
  std::vector<std::array<int, 2>> cells_;
  std::vector<std::array<int, 4>> neighbors_;
  std::vector<std::array<int, 4>> face_iface_;
  std::vector<Interface> interfaces_;
};

/// Stress families in the fixed order [s_11, s_21, s_12, s_22] (first index
/// is the reference face normal, second the force component). Families 0, 2
/// have their normal along xi1 and carry T(i, j), i = 0..N, j = 1..N;
/// families 1, 3 have it along xi2 and carry T(i, j), i = 1..N, j = 0..N.
[[nodiscard]] constexpr int family_normal(int f) { return f % 2; }
[[nodiscard]] constexpr int family_component(int f) { return f / 2; }
[[nodiscard]] constexpr int family_of(int normal, int component) { return 2 * component + normal; }

class DofLayout {
 public:
  DofLayout(const MeshTopology& mesh, int order, RotationGrid rotation);

  [[nodiscard]] int order() const { return n_; }
  [[nodiscard]] RotationGrid rotation_grid() const { return rotation_; }
  [[nodiscard]] int element_count() const { return elements_; }

  [[nodiscard]] int family_size() const { return n_ * (n_ + 1); }
  [[nodiscard]] int local_traction_count() const { return 4 * family_size(); }
  [[nodiscard]] int local_traction(int f, int i, int j) const;
  [[nodiscard]] int traction(int e, int f, int i, int j) const {
    return element_tractions_[e][local_traction(f, i, j)];
  }
  [[nodiscard]] const std::vector<int>& element_tractions(int e) const { return element_tractions_.at(e); }

  /// Displacement / equilibrium-row index (also the body-force index) of
  /// sub-cell (i, j), i, j = 1..N, component m in {0, 1}.
  [[nodiscard]] int displacement(int e, int m, int i, int j) const {
    return ((e * 2 + m) * n_ + (j - 1)) * n_ + (i - 1);
  }
  [[nodiscard]] int rotation_nodes_1d() const { return rotation_ == RotationGrid::Gauss ? n_ : n_ + 1; }
  [[nodiscard]] int local_rotation_count() const { return rotation_nodes_1d() * rotation_nodes_1d(); }
  /// Rotation DOF at node (a, b) of the rotation grid, zero-based.
  [[nodiscard]] int rotation(int e, int a, int b) const {
    return e * local_rotation_count() + b * rotation_nodes_1d() + a;
  }

  [[nodiscard]] int traction_count() const { return traction_count_; }
  [[nodiscard]] int displacement_count() const { return 2 * elements_ * n_ * n_; }
  [[nodiscard]] int body_force_count() const { return displacement_count(); }
  [[nodiscard]] int rotation_count() const { return elements_ * local_rotation_count(); }
  [[nodiscard]] int shared_traction_count() const { return elements_ * local_traction_count() - traction_count_; }

  // Offsets of the blocks in the global unknown vector [T | u | omega].
  [[nodiscard]] int displacement_offset() const { return traction_count_; }
  [[nodiscard]] int rotation_offset() const { return traction_count_ + displacement_count(); }
  [[nodiscard]] int total_count() const { return rotation_offset() + rotation_count(); }

 private:
  int n_;
  RotationGrid rotation_;
  int elements_;
  int traction_count_ = 0;
  std::vector<std::vector<int>> element_tractions_;
};

/// Integer incidence matrix (entries -1, 0, +1 stored as doubles). Row
/// (e, m, i, j) holds T1m(i,j) - T1m(i-1,j) + T2m(i,j) - T2m(i,j-1); rows use
/// DofLayout::displacement numbering, columns global traction numbering.
[[nodiscard]] Eigen::SparseMatrix<double> build_incidence(const DofLayout& layout);

}  // namespace eqsem
