#include "eqsem/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "eqsem/parallel.hpp"

namespace eqsem {

using Eigen::MatrixXd;
using Triplets = std::vector<Eigen::Triplet<double>>;

Eigen::Matrix4d Material::compliance() const {
  Eigen::Matrix4d C;
  C << 1.0, 0.0, 0.0, -nu,  //
      0.0, 1.0 + nu, 0.0, 0.0,   //
      0.0, 0.0, 1.0 + nu, 0.0,   //
      -nu, 0.0, 0.0, 1.0;
  return C / E;
}

Eigen::Matrix3d Material::plane_stress_stiffness() const {
  Eigen::Matrix3d D;
  D << 1.0, nu, 0.0, nu, 1.0, 0.0, 0.0, 0.0, 0.5 * (1.0 - nu);
  return D * (E / (1.0 - nu * nu));
}

void Material::validate() const {
  if (!(E > 0.0)) throw std::invalid_argument("Young's modulus must be positive");
  if (!(nu > -1.0 && nu < 0.5)) throw std::invalid_argument("Poisson's ratio must lie in (-1, 0.5)");
}

FaceCondition FaceCondition::clamped(VectorField u) {
  FaceCondition c;
  c.kind = {BcKind::Displacement, BcKind::Displacement};
  c.displacement = std::move(u);
  return c;
}

FaceCondition FaceCondition::loaded(TractionField t) {
  FaceCondition c;
  c.kind = {BcKind::Traction, BcKind::Traction};
  c.traction = std::move(t);
  return c;
}

BoundarySpec::BoundarySpec(const MeshTopology& mesh, const MapList& maps, const Classifier& classify) {
  index_.assign(mesh.element_count(), {-1, -1, -1, -1});
  for (const auto& face : mesh.boundary_faces()) {
    const Vec2 mid = maps.at(face.element)->position(side_point(face.side, 0.0));
    index_[face.element][side_index(face.side)] = static_cast<int>(faces_.size());
    faces_.push_back(classify(face.element, face.side, mid));
  }
}

bool BoundarySpec::has(int element, Side side) const {
  return element >= 0 && element < static_cast<int>(index_.size()) && index_[element][side_index(side)] >= 0;
}

const FaceCondition& BoundarySpec::at(int element, Side side) const {
  if (!has(element, side)) {
    throw std::out_of_range("no boundary condition for element " + std::to_string(element) + " side " +
                            std::to_string(side_index(side)));
  }
  return faces_[index_[element][side_index(side)]];
}

// ---------------------------------------------------------------------------

ElementBasis::ElementBasis(int order)
    : n_(order), gll_(RuleKind::GaussLobatto, order), gl_(compute_rule(RuleKind::Gauss, order)) {
  volume_1d_.resize(n_, n_);
  for (int a = 0; a < n_; ++a) {
    const auto e = gll_.edge_values(gl_.nodes[a]);
    for (int i = 0; i < n_; ++i) volume_1d_(a, i) = gl_.weights[a] * e[i];
  }
}

void ElementBasis::stress_basis(const Vec2& xi, Eigen::Ref<MatrixXd> psi) const {
  const int n = n_;
  const int fs = n * (n + 1);
  double h1[kMaxBasisOrder + 1], h2[kMaxBasisOrder + 1], e1[kMaxBasisOrder], e2[kMaxBasisOrder];
  gll_.lagrange().values(xi(0), std::span<double>(h1, n + 1));
  gll_.lagrange().values(xi(1), std::span<double>(h2, n + 1));
  gll_.edge_values(xi(0), std::span<double>(e1, n));
  gll_.edge_values(xi(1), std::span<double>(e2, n));
  psi.setZero();
  for (int m = 0; m < 2; ++m) {
    const int f1 = family_of(0, m), f2 = family_of(1, m);
    for (int j = 1; j <= n; ++j)
      for (int i = 0; i <= n; ++i) psi(f1, f1 * fs + (j - 1) * (n + 1) + i) = h1[i] * e2[j - 1];
    for (int j = 0; j <= n; ++j)
      for (int i = 1; i <= n; ++i) psi(f2, f2 * fs + j * n + (i - 1)) = e1[i - 1] * h2[j];
  }
}

MatrixXd ElementBasis::stress_basis(const Vec2& xi) const {
  MatrixXd psi(4, local_count());
  stress_basis(xi, psi);
  return psi;
}

namespace {

// F^e Psi: the Piola numerator J sigma as a function of the local DOFs.
void apply_piola(const Mat2& F, const MatrixXd& psi, MatrixXd& out) {
  out.topRows<2>().noalias() = F * psi.topRows<2>();
  out.bottomRows<2>().noalias() = F * psi.bottomRows<2>();
}

QuadratureRule compliance_rule(const ElementBasis& basis, const ElementMap& map, int curved_points) {
  if (map.is_affine()) return basis.gll().rule();
  const int n = curved_points > 0 ? curved_points : std::max(20, 2 * basis.order() + 2);
  return compute_rule(RuleKind::Gauss, n);
}

int face_traction_dof(const DofLayout& layout, int e, Side side, int m, int k) {
  const int n = layout.order();
  switch (side) {
    case Side::Left: return layout.traction(e, family_of(0, m), 0, k);
    case Side::Right: return layout.traction(e, family_of(0, m), n, k);
    case Side::Bottom: return layout.traction(e, family_of(1, m), k, 0);
    default: return layout.traction(e, family_of(1, m), k, n);
  }
}

void push_dense(Triplets& trip, const std::vector<int>& rows, const std::vector<int>& cols, const MatrixXd& block) {
  for (int c = 0; c < block.cols(); ++c)
    for (int r = 0; r < block.rows(); ++r) {
      const double v = block(r, c);
      if (v != 0.0) trip.emplace_back(rows[r], cols[c], v);
    }
}

}  // namespace

MatrixXd element_compliance(const ElementBasis& basis, const ElementMap& map, const Material& material,
                            int curved_points) {
  const QuadratureRule rule = compliance_rule(basis, map, curved_points);
  const int nq = rule.size();
  const int nloc = basis.local_count();
  const Eigen::Matrix4d Lt = material.compliance().llt().matrixU();  // C = L L^T, Lt = L^T
  MatrixXd G(4 * nq * nq, nloc);
  MatrixXd psi(4, nloc), A(4, nloc);
  for (int q = 0; q < nq; ++q)
    for (int p = 0; p < nq; ++p) {
      const Vec2 xi(rule.nodes[p], rule.nodes[q]);
      const MapPoint mp = map.eval(xi);
      basis.stress_basis(xi, psi);
      apply_piola(mp.F, psi, A);
      const double s = std::sqrt(rule.weights[p] * rule.weights[q] / mp.J);
      G.middleRows<4>(4 * (q * nq + p)).noalias() = s * (Lt * A);
    }
  MatrixXd He = MatrixXd::Zero(nloc, nloc);
  He.selfadjointView<Eigen::Lower>().rankUpdate(G.transpose());
  He.triangularView<Eigen::StrictlyUpper>() = He.transpose();
  return He;
}

MatrixXd element_rotation(const ElementBasis& basis, const ElementMap& map, RotationGrid grid) {
  const int n = basis.order();
  const auto& rule = basis.gll().rule();
  const int nr = grid == RotationGrid::Gauss ? n : n + 1;
  MatrixXd phi = MatrixXd::Identity(n + 1, n + 1);  // phi(a, p): rotation function a at GLL node p
  if (grid == RotationGrid::Gauss) {
    const LagrangeBasis gl(basis.gl_rule().nodes);
    phi.resize(n, n + 1);
    for (int p = 0; p <= n; ++p) phi.col(p) = Eigen::Map<const Eigen::VectorXd>(gl.values(rule.nodes[p]).data(), n);
  }
  const int nloc = basis.local_count();
  MatrixXd Re = MatrixXd::Zero(nr * nr, nloc);
  MatrixXd psi(4, nloc), A(4, nloc);
  for (int q = 0; q <= n; ++q)
    for (int p = 0; p <= n; ++p) {
      const Vec2 xi(rule.nodes[p], rule.nodes[q]);
      const MapPoint mp = map.eval(xi);
      basis.stress_basis(xi, psi);
      apply_piola(mp.F, psi, A);
      const Eigen::RowVectorXd asym = rule.weights[p] * rule.weights[q] * (A.row(2) - A.row(1));
      for (int b = 0; b < nr; ++b)
        for (int a = 0; a < nr; ++a) {
          const double w = phi(a, p) * phi(b, q);
          if (w != 0.0) Re.row(b * nr + a) += w * asym;
        }
    }
  return Re;
}

Vector element_particular(const ElementBasis& basis, const ElementMap& map, const Material& material,
                          const StressField& particular) {
  const auto& rule = basis.gll().rule();
  const int n = basis.order();
  const Eigen::Matrix4d C = material.compliance();
  Vector out = Vector::Zero(basis.local_count());
  MatrixXd psi(4, basis.local_count()), A(4, basis.local_count());
  for (int q = 0; q <= n; ++q)
    for (int p = 0; p <= n; ++p) {
      const Vec2 xi(rule.nodes[p], rule.nodes[q]);
      const MapPoint mp = map.eval(xi);
      basis.stress_basis(xi, psi);
      apply_piola(mp.F, psi, A);
      out.noalias() += rule.weights[p] * rule.weights[q] * (A.transpose() * (C * particular(mp.x)));
    }
  return out;
}

// ---------------------------------------------------------------------------

SparseMatrix assemble_H(const Problem& problem, const DofLayout& layout, const AssemblyOptions& opt) {
  const ElementBasis basis(layout.order());
  const int ne = layout.element_count();
  std::vector<MatrixXd> blocks(ne);
  parallel_for(ne, [&](int e) {
    blocks[e] = element_compliance(basis, *problem.maps[e], problem.material, opt.curved_points);
  });
  Triplets trip;
  for (int e = 0; e < ne; ++e) {
    const auto& dofs = layout.element_tractions(e);
    push_dense(trip, dofs, dofs, blocks[e]);
    MatrixXd().swap(blocks[e]);
  }
  SparseMatrix H(layout.traction_count(), layout.traction_count());
  H.setFromTriplets(trip.begin(), trip.end());
  return H;
}

SparseMatrix assemble_V(const DofLayout& layout) {
  const int n = layout.order();
  const ElementBasis basis(n);
  const MatrixXd& M = basis.volume_1d();
  Triplets trip;
  trip.reserve(static_cast<std::size_t>(layout.displacement_count()) * n * n);
  for (int e = 0; e < layout.element_count(); ++e)
    for (int m = 0; m < 2; ++m)
      for (int b = 1; b <= n; ++b)
        for (int a = 1; a <= n; ++a)
          for (int j = 1; j <= n; ++j)
            for (int i = 1; i <= n; ++i)
              trip.emplace_back(layout.displacement(e, m, a, b), layout.displacement(e, m, i, j),
                                M(a - 1, i - 1) * M(b - 1, j - 1));
  SparseMatrix V(layout.displacement_count(), layout.displacement_count());
  V.setFromTriplets(trip.begin(), trip.end());
  return V;
}

SparseMatrix assemble_R(const Problem& problem, const DofLayout& layout) {
  const ElementBasis basis(layout.order());
  const int ne = layout.element_count();
  std::vector<MatrixXd> blocks(ne);
  parallel_for(ne, [&](int e) { blocks[e] = element_rotation(basis, *problem.maps[e], layout.rotation_grid()); });
  Triplets trip;
  const int nr = layout.rotation_nodes_1d();
  std::vector<int> rows(nr * nr);
  for (int e = 0; e < ne; ++e) {
    for (int b = 0; b < nr; ++b)
      for (int a = 0; a < nr; ++a) rows[b * nr + a] = layout.rotation(e, a, b);
    push_dense(trip, rows, layout.element_tractions(e), blocks[e]);
  }
  SparseMatrix R(layout.rotation_count(), layout.traction_count());
  R.setFromTriplets(trip.begin(), trip.end());
  return R;
}

Vector assemble_B(const Problem& problem, const DofLayout& layout) {
  const int n = layout.order();
  const ElementBasis basis(n);
  const auto& gl = basis.gl_rule();
  Vector out = Vector::Zero(layout.traction_count());
  for (const auto& face : problem.mesh.boundary_faces()) {
    const FaceCondition& cond = problem.boundary.at(face.element, face.side);
    if (!cond.displacement) continue;
    const ElementMap& map = *problem.maps[face.element];
    const int sign = MeshTopology::orientation(face.side);
    for (int b = 0; b < n; ++b) {
      const Vec2 u = cond.displacement(map.position(side_point(face.side, gl.nodes[b])));
      const auto e = basis.gll().edge_values(gl.nodes[b]);
      for (int m = 0; m < 2; ++m) {
        if (cond.kind[m] != BcKind::Displacement) continue;
        for (int k = 1; k <= n; ++k)
          out[face_traction_dof(layout, face.element, face.side, m, k)] += sign * gl.weights[b] * u[m] * e[k - 1];
      }
    }
  }
  return out;
}

Vector assemble_Hp(const Problem& problem, const DofLayout& layout) {
  Vector out = Vector::Zero(layout.traction_count());
  if (!problem.particular) return out;
  const ElementBasis basis(layout.order());
  const int ne = layout.element_count();
  std::vector<Vector> blocks(ne);
  parallel_for(ne, [&](int e) {
    blocks[e] = element_particular(basis, *problem.maps[e], problem.material, problem.particular);
  });
  for (int e = 0; e < ne; ++e) {
    const auto& dofs = layout.element_tractions(e);
    for (int k = 0; k < static_cast<int>(dofs.size()); ++k) out[dofs[k]] += blocks[e][k];
  }
  return out;
}

Vector project_body_force(const VectorField& f, const MapList& maps, const DofLayout& layout, int points) {
  Vector out = Vector::Zero(layout.body_force_count());
  if (!f) return out;
  const int n = layout.order();
  const auto& x = compute_rule(RuleKind::GaussLobatto, n).nodes;
  const int np = points > 0 ? points : n + 1;
  const auto g = compute_rule(RuleKind::Gauss, np);
  parallel_for(layout.element_count(), [&](int e) {
    const ElementMap& map = *maps[e];
    for (int j = 1; j <= n; ++j)
      for (int i = 1; i <= n; ++i) {
        const double h1 = 0.5 * (x[i] - x[i - 1]), c1 = 0.5 * (x[i] + x[i - 1]);
        const double h2 = 0.5 * (x[j] - x[j - 1]), c2 = 0.5 * (x[j] + x[j - 1]);
        Vec2 acc = Vec2::Zero();
        for (int q = 0; q < np; ++q)
          for (int p = 0; p < np; ++p) {
            const MapPoint mp = map.eval(Vec2(c1 + h1 * g.nodes[p], c2 + h2 * g.nodes[q]));
            acc += g.weights[p] * g.weights[q] * h1 * h2 * mp.J * f(mp.x);
          }
        out[layout.displacement(e, 0, i, j)] = acc(0);
        out[layout.displacement(e, 1, i, j)] = acc(1);
      }
  });
  return out;
}

FixedDofs strong_tractions(const Problem& problem, const DofLayout& layout, int points) {
  const int n = layout.order();
  const auto& x = compute_rule(RuleKind::GaussLobatto, n).nodes;
  const int np = points > 0 ? points : std::max(12, n + 2);
  const auto g = compute_rule(RuleKind::Gauss, np);
  FixedDofs fixed;
  for (const auto& face : problem.mesh.boundary_faces()) {
    const FaceCondition& cond = problem.boundary.at(face.element, face.side);
    if (cond.kind[0] != BcKind::Traction && cond.kind[1] != BcKind::Traction) continue;
    const ElementMap& map = *problem.maps[face.element];
    const int sign = MeshTopology::orientation(face.side);
    for (int k = 1; k <= n; ++k) {
      const double h = 0.5 * (x[k] - x[k - 1]), c = 0.5 * (x[k] + x[k - 1]);
      Vec2 force = Vec2::Zero();
      if (cond.traction) {
        for (int q = 0; q < np; ++q) {
          const MapPoint mp = map.eval(side_point(face.side, c + h * g.nodes[q]));
          const SideFrame sf = side_frame(mp, face.side);
          force += g.weights[q] * h * sf.length * cond.traction(mp.x, sf.normal);
        }
      }
      for (int m = 0; m < 2; ++m) {
        if (cond.kind[m] != BcKind::Traction) continue;
        fixed.index.push_back(face_traction_dof(layout, face.element, face.side, m, k));
        fixed.value.push_back(sign * force(m));
      }
    }
  }
  return fixed;
}

// ---------------------------------------------------------------------------

SaddleSystem build_saddle_system(const Problem& problem, const AssemblyOptions& opt) {
  problem.material.validate();
  if (static_cast<int>(problem.maps.size()) != problem.mesh.element_count()) {
    throw std::invalid_argument("problem has " + std::to_string(problem.maps.size()) + " element maps for " +
                                std::to_string(problem.mesh.element_count()) + " elements");
  }
  SaddleSystem sys{DofLayout(problem.mesh, opt.order, opt.rotation), {}, {}, {}, {}, {}, {}, {}, {}, {}};
  const DofLayout& layout = sys.layout;
  check_jacobians(problem.maps, opt.order);

  sys.incidence = build_incidence(layout);
  sys.volume = assemble_V(layout);
  sys.compliance = assemble_H(problem, layout, opt);
  sys.rotation = assemble_R(problem, layout);
  if (problem.particular) {
    sys.body_force = Vector::Zero(layout.body_force_count());
    sys.particular_load = assemble_Hp(problem, layout);
  } else {
    sys.body_force = project_body_force(problem.body_force, problem.maps, layout, opt.body_force_points);
  }
  sys.fixed = strong_tractions(problem, layout, opt.traction_points);

  const SparseMatrix VD = sys.volume * sys.incidence;
  const int nt = layout.traction_count();
  const int u0 = layout.displacement_offset();
  const int w0 = layout.rotation_offset();
  Triplets trip;
  trip.reserve(sys.compliance.nonZeros() + 2 * (VD.nonZeros() + sys.rotation.nonZeros()));
  auto copy = [&trip](const SparseMatrix& A, int r0, int c0, bool mirror) {
    for (int k = 0; k < A.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(A, k); it; ++it) {
        trip.emplace_back(r0 + it.row(), c0 + it.col(), it.value());
        if (mirror) trip.emplace_back(c0 + it.col(), r0 + it.row(), it.value());
      }
  };
  copy(sys.compliance, 0, 0, false);
  copy(VD, u0, 0, true);
  copy(sys.rotation, w0, 0, true);
  sys.matrix.resize(layout.total_count(), layout.total_count());
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  Triplets().swap(trip);

  sys.rhs = Vector::Zero(layout.total_count());
  sys.rhs.head(nt) = assemble_B(problem, layout);
  if (problem.particular) sys.rhs.head(nt) -= sys.particular_load;
  sys.rhs.segment(u0, layout.displacement_count()) = -(sys.volume * sys.body_force);
  return sys;
}

Vector ReducedSystem::expand(const Vector& reduced, const FixedDofs& fixed) const {
  Vector full = Vector::Zero(full_size);
  for (int k = 0; k < static_cast<int>(free.size()); ++k) full[free[k]] = reduced[k];
  for (std::size_t k = 0; k < fixed.index.size(); ++k) full[fixed.index[k]] = fixed.value[k];
  return full;
}

ReducedSystem apply_strong_tractions(const SaddleSystem& system) {
  const int n = static_cast<int>(system.matrix.rows());
  std::vector<int> map(n, 0);
  Vector xc = Vector::Zero(n);
  for (std::size_t k = 0; k < system.fixed.index.size(); ++k) {
    const int i = system.fixed.index[k];
    if (map[i] < 0) throw std::invalid_argument("traction DOF " + std::to_string(i) + " is fixed twice");
    map[i] = -1;
    xc[i] = system.fixed.value[k];
  }
  ReducedSystem red;
  red.full_size = n;
  for (int i = 0; i < n; ++i) {
    if (map[i] < 0) continue;
    map[i] = static_cast<int>(red.free.size());
    red.free.push_back(i);
  }
  const Vector shifted = system.rhs - system.matrix * xc;
  const int nf = static_cast<int>(red.free.size());
  red.rhs.resize(nf);
  for (int k = 0; k < nf; ++k) red.rhs[k] = shifted[red.free[k]];
  Triplets trip;
  trip.reserve(system.matrix.nonZeros());
  for (int c = 0; c < system.matrix.outerSize(); ++c) {
    if (map[c] < 0) continue;
    for (SparseMatrix::InnerIterator it(system.matrix, c); it; ++it)
      if (map[it.row()] >= 0) trip.emplace_back(map[it.row()], map[c], it.value());
  }
  red.matrix.resize(nf, nf);
  red.matrix.setFromTriplets(trip.begin(), trip.end());
  return red;
}

}  // namespace eqsem
