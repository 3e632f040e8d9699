#include "eqsem/baseline_fem.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include <Eigen/SparseCholesky>

namespace eqsem {

namespace {

// Local node indices (a, b) on a side, in increasing tangential coordinate.
std::vector<std::array<int, 2>> side_nodes(Side s, int p) {
  std::vector<std::array<int, 2>> out;
  for (int k = 0; k <= p; ++k) {
    switch (s) {
      case Side::Left: out.push_back({0, k}); break;
      case Side::Right: out.push_back({p, k}); break;
      case Side::Bottom: out.push_back({k, 0}); break;
      case Side::Top: out.push_back({k, p}); break;
    }
  }
  return out;
}

// Shape function values and physical derivatives at one point.
struct ShapeEval {
  Eigen::VectorXd N;
  Eigen::MatrixXd dN;   // 2 x nloc, d/dx1, d/dx2
  Eigen::MatrixXd d2N;  // 3 x nloc, d11, d22, d12
  MapPoint mp;
};

}  // namespace

FemModel::FemModel(const Problem& problem, const FemOptions& options)
    : problem_(problem), p_(options.order), shape_(compute_rule(RuleKind::GaussLobatto, options.order).nodes) {
  if (p_ != 1 && p_ != 2) throw std::invalid_argument("the displacement baseline supports Q4 (order 1) and Q9 (order 2)");
  if (problem.particular) throw std::invalid_argument("the displacement baseline does not take a particular stress field");
  problem.material.validate();
  const MeshTopology& mesh = problem.mesh;
  const int ne = mesh.element_count();
  for (const auto& m : problem.maps)
    if (!m->is_affine()) throw std::invalid_argument("the displacement baseline needs affine element maps");

  // Nodes on the refined lattice, compressed to those touched by an element.
  const int p = p_, np = p + 1;
  const int lx = mesh.nx() * p + 1;
  std::unordered_map<long, int> lattice;
  elem_nodes_.assign(ne, std::vector<int>(np * np));
  const auto& xi = shape_.nodes();
  for (int e = 0; e < ne; ++e) {
    const auto [ix, iy] = mesh.cell(e);
    for (int b = 0; b < np; ++b)
      for (int a = 0; a < np; ++a) {
        const long key = static_cast<long>(iy * p + b) * lx + (ix * p + a);
        auto [it, fresh] = lattice.try_emplace(key, static_cast<int>(nodes_.size()));
        if (fresh) nodes_.push_back(problem.maps[e]->position(Vec2(xi[a], xi[b])));
        elem_nodes_[e][b * np + a] = it->second;
      }
  }
  const int ndof = dof_count();

  const QuadratureRule g = compute_rule(RuleKind::Gauss, options.quadrature_points > 0 ? options.quadrature_points : p + 1);
  const Eigen::Matrix3d D = problem.material.plane_stress_stiffness();
  std::vector<Eigen::Triplet<double>> trip;
  Vector load = Vector::Zero(ndof);
  const int nloc = np * np;
  std::vector<double> v1(np), v2(np), d1(np), d2(np);
  for (int e = 0; e < ne; ++e) {
    Eigen::MatrixXd Ke = Eigen::MatrixXd::Zero(2 * nloc, 2 * nloc);
    Eigen::VectorXd fe = Eigen::VectorXd::Zero(2 * nloc);
    for (int q = 0; q < g.size(); ++q)
      for (int r = 0; r < g.size(); ++r) {
        const Vec2 pt(g.nodes[r], g.nodes[q]);
        const MapPoint mp = problem.maps[e]->eval(pt);
        const Mat2 G = mp.F.inverse();
        shape_.values(pt(0), v1);
        shape_.values(pt(1), v2);
        shape_.derivatives(pt(0), d1);
        shape_.derivatives(pt(1), d2);
        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(3, 2 * nloc);
        Eigen::VectorXd N(nloc);
        for (int b = 0; b < np; ++b)
          for (int a = 0; a < np; ++a) {
            const int k = b * np + a;
            N[k] = v1[a] * v2[b];
            const Vec2 dref(d1[a] * v2[b], v1[a] * d2[b]);
            const Vec2 dx = G.transpose() * dref;
            B(0, 2 * k) = dx(0);
            B(1, 2 * k + 1) = dx(1);
            B(2, 2 * k) = dx(1);
            B(2, 2 * k + 1) = dx(0);
          }
        const double w = g.weights[r] * g.weights[q] * mp.J;
        Ke += w * B.transpose() * D * B;
        if (problem.body_force) {
          const Vec2 f = problem.body_force(mp.x);
          for (int k = 0; k < nloc; ++k) {
            fe[2 * k] += w * N[k] * f(0);
            fe[2 * k + 1] += w * N[k] * f(1);
          }
        }
      }
    for (int i = 0; i < 2 * nloc; ++i) {
      const int gi = 2 * elem_nodes_[e][i / 2] + i % 2;
      load[gi] += fe[i];
      for (int j = 0; j < 2 * nloc; ++j) trip.emplace_back(gi, 2 * elem_nodes_[e][j / 2] + j % 2, Ke(i, j));
    }
  }
  K_.resize(ndof, ndof);
  K_.setFromTriplets(trip.begin(), trip.end());

  // Boundary conditions. A node on both a displacement and a traction face
  // keeps the displacement.
  std::vector<char> fixed(ndof, 0);
  u_ = Vector::Zero(ndof);
  const QuadratureRule gs = compute_rule(RuleKind::Gauss, std::max(4, p + 2));
  for (const BoundaryFace& bf : mesh.boundary_faces()) {
    if (!problem.boundary.has(bf.element, bf.side)) throw std::invalid_argument("boundary face without a condition");
    const FaceCondition& cond = problem.boundary.at(bf.element, bf.side);
    const ElementMap& map = *problem.maps[bf.element];
    const auto local = side_nodes(bf.side, p);
    for (int m = 0; m < 2; ++m) {
      if (cond.kind[m] == BcKind::Displacement) {
        for (const auto& ab : local) {
          const int node = elem_nodes_[bf.element][ab[1] * np + ab[0]];
          fixed[2 * node + m] = 1;
          u_[2 * node + m] = cond.displacement ? cond.displacement(nodes_[node])(m) : 0.0;
        }
      } else if (cond.traction) {
        for (int q = 0; q < gs.size(); ++q) {
          const MapPoint mp = map.eval(side_point(bf.side, gs.nodes[q]));
          const SideFrame sf = side_frame(mp, bf.side);
          const double t = cond.traction(mp.x, sf.normal)(m);
          const auto v = shape_.values(gs.nodes[q]);
          for (int k = 0; k <= p; ++k) {
            const int node = elem_nodes_[bf.element][local[k][1] * np + local[k][0]];
            load[2 * node + m] += gs.weights[q] * sf.length * v[k] * t;
          }
        }
      }
    }
  }

  std::vector<int> map(ndof, -1);
  for (int i = 0; i < ndof; ++i)
    if (!fixed[i]) map[i] = free_count_++;
  std::vector<Eigen::Triplet<double>> rt;
  Vector rhs = Vector::Zero(free_count_);
  for (int c = 0; c < ndof; ++c)
    for (SparseMatrix::InnerIterator it(K_, c); it; ++it) {
      const int r = map[it.row()];
      if (r < 0) continue;
      if (map[c] >= 0)
        rt.emplace_back(r, map[c], it.value());
      else
        rhs[r] -= it.value() * u_[c];
    }
  for (int i = 0; i < ndof; ++i)
    if (map[i] >= 0) rhs[map[i]] += load[i];
  SparseMatrix Kff(free_count_, free_count_);
  Kff.setFromTriplets(rt.begin(), rt.end());

  const auto t0 = std::chrono::steady_clock::now();
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(Kff);
  if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any()) {
    throw std::runtime_error("displacement stiffness is not positive definite: the supports do not remove all rigid motions");
  }
  const Vector uf = ldlt.solve(rhs);
  seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (int i = 0; i < ndof; ++i)
    if (map[i] >= 0) u_[i] = uf[map[i]];
}

double FemModel::strain_energy() const { return 0.5 * u_.dot(K_ * u_); }

FemSample FemModel::at(int e, const Vec2& xi) const {
  const int np = p_ + 1;
  const MapPoint mp = problem_.maps[e]->eval(xi);
  const Mat2 G = mp.F.inverse();
  std::vector<double> v1(np), v2(np), d1(np), d2(np), s1(np), s2(np);
  shape_.values(xi(0), v1);
  shape_.values(xi(1), v2);
  shape_.derivatives(xi(0), d1);
  shape_.derivatives(xi(1), d2);
  shape_.second_derivatives(xi(0), s1);
  shape_.second_derivatives(xi(1), s2);

  FemSample s;
  s.element = e;
  s.x = mp.x;
  s.u.setZero();
  Mat2 grad = Mat2::Zero();  // grad(m, j) = du_m / dx_j
  // hess[m](j, k) = d2 u_m / dx_j dx_k
  std::array<Mat2, 2> hess{Mat2::Zero(), Mat2::Zero()};
  for (int b = 0; b < np; ++b)
    for (int a = 0; a < np; ++a) {
      const int node = elem_nodes_[e][b * np + a];
      Mat2 href;
      href << s1[a] * v2[b], d1[a] * d2[b], d1[a] * d2[b], v1[a] * s2[b];
      const Vec2 dx = G.transpose() * Vec2(d1[a] * v2[b], v1[a] * d2[b]);
      const Mat2 hx = G.transpose() * href * G;
      for (int m = 0; m < 2; ++m) {
        const double um = u_[2 * node + m];
        s.u(m) += um * v1[a] * v2[b];
        grad.row(m) += um * dx.transpose();
        hess[m] += um * hx;
      }
    }

  const Eigen::Matrix3d D = problem_.material.plane_stress_stiffness();
  const Eigen::Vector3d eps(grad(0, 0), grad(1, 1), grad(0, 1) + grad(1, 0));
  const Eigen::Vector3d sig = D * eps;
  s.sigma << sig(0), sig(2), sig(2), sig(1);

  // div sigma: d/dx1 of row 1 and d/dx2 of the shear, and so on.
  auto dsig = [&](int k) {
    const Eigen::Vector3d de(hess[0](0, k), hess[1](1, k), hess[0](1, k) + hess[1](0, k));
    return Eigen::Vector3d(D * de);
  };
  const Eigen::Vector3d ds1 = dsig(0), ds2 = dsig(1);
  s.residual = Vec2(ds1(0) + ds2(2), ds1(2) + ds2(1));
  if (problem_.body_force) s.residual += problem_.body_force(mp.x);
  return s;
}

void FemModel::for_each(const std::vector<double>& pts, const std::function<void(const FemSample&)>& fn) const {
  for (int e = 0; e < problem_.mesh.element_count(); ++e)
    for (double b : pts)
      for (double a : pts) fn(at(e, Vec2(a, b)));
}

FemResidual fem_equilibrium_residual(const FemModel& model, const std::vector<double>& pts, int edge_points) {
  FemResidual out;
  double worst = -1.0;
  model.for_each(pts, [&](const FemSample& s) {
    out.interior = out.interior.cwiseMax(s.residual.cwiseAbs());
    if (s.residual.norm() > worst) {
      worst = s.residual.norm();
      out.worst_point = s.x;
    }
  });
  const MeshTopology& mesh = model.problem().mesh;
  for (const Interface& f : mesh.interfaces()) {
    if (f.is_boundary()) continue;
    const Side plus = f.vertical ? Side::Right : Side::Top;
    for (int k = 0; k < edge_points; ++k) {
      const double t = edge_points > 1 ? -1.0 + 2.0 * k / (edge_points - 1) : 0.0;
      const FemSample a = model.at(f.elem[0], side_point(plus, t));
      const FemSample b = model.at(f.elem[1], side_point(opposite(plus), t));
      const SideFrame sf = side_frame(model.problem().maps[f.elem[0]]->eval(side_point(plus, t)), plus);
      const Vec2& n = sf.normal;
      // traction component i = s_ji n_j with s_ji stored as [s11, s21, s12, s22]
      const Vec4 d = a.sigma - b.sigma;
      const Vec2 jump(d(0) * n(0) + d(1) * n(1), d(2) * n(0) + d(3) * n(1));
      out.traction_jump = std::max(out.traction_jump, jump.cwiseAbs().maxCoeff());
    }
  }
  return out;
}

}  // namespace eqsem
