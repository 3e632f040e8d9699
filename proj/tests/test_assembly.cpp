#include <cmath>

#include <Eigen/LU>
#include <gtest/gtest.h>

#include "eqsem/assembly.hpp"
#include "eqsem/cases.hpp"

using namespace eqsem;

namespace {

Problem single_element(Vec2 lo, Vec2 hi, const BoundarySpec::Classifier& bc, Material mat = {}) {
  Problem p{MeshTopology::structured(1, 1), {}, mat, {}, {}, {}};
  p.maps.push_back(std::make_shared<AffineMap>(lo, hi));
  p.boundary = BoundarySpec(p.mesh, p.maps, bc);
  return p;
}

FaceCondition free_face(int, Side, const Vec2&) { return FaceCondition::loaded(); }

double max_abs(const SparseMatrix& A) {
  double m = 0;
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

// Local DOF values of a constant physical stress on an axis-aligned affine
// element: each DOF integrates its component over a sub-face.
Vector constant_stress_dofs(const DofLayout& L, int e, const Vec4& s, Vec2 size) {
  const int n = L.order();
  const auto x = compute_rule(RuleKind::GaussLobatto, n).nodes;
  Vector t = Vector::Zero(L.traction_count());
  for (int m = 0; m < 2; ++m) {
    const int f1 = family_of(0, m), f2 = family_of(1, m);
    for (int k = 1; k <= n; ++k) {
      const double d2 = 0.5 * size(1) * (x[k] - x[k - 1]);  // sub-face length along x2
      const double d1 = 0.5 * size(0) * (x[k] - x[k - 1]);
      for (int i = 0; i <= n; ++i) {
        t[L.traction(e, f1, i, k)] = s(f1) * d2;
        t[L.traction(e, f2, k, i)] = s(f2) * d1;
      }
    }
  }
  return t;
}

}  // namespace

TEST(Material, ComplianceMatrix) {
  const Material m{2.0, 0.25};
  const Eigen::Matrix4d C = m.compliance();
  Eigen::Matrix4d expect;
  expect << 1, 0, 0, -0.25, 0, 1.25, 0, 0, 0, 0, 1.25, 0, -0.25, 0, 0, 1;
  EXPECT_NEAR((C - expect / 2.0).norm(), 0.0, 1e-15);
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d>(C).eigenvalues().minCoeff(), 0.0);
  EXPECT_THROW((Material{1.0, 0.5}.validate()), std::invalid_argument);
  EXPECT_THROW((Material{-1.0, 0.3}.validate()), std::invalid_argument);
}

TEST(AssembleH, GramMatrixOfStressBasisForZeroPoisson) {
  // E = 1, nu = 0: C = diag(1, 1, 1, 1), so on the identity map H is the GLL
  // Gram matrix of the reference stress basis, built here from the 1D
  // Lagrange and edge functions.
  const int n = 3;
  const Problem p = single_element({-1, -1}, {1, 1}, free_face, {1.0, 0.0});
  const DofLayout L(p.mesh, n, RotationGrid::Gauss);
  const Eigen::MatrixXd H = Eigen::MatrixXd(assemble_H(p, L, {n}));
  const BasisSet b(RuleKind::GaussLobatto, n);
  const auto& r = b.rule();
  Eigen::MatrixXd oracle = Eigen::MatrixXd::Zero(L.traction_count(), L.traction_count());
  for (int q = 0; q <= n; ++q)
    for (int pp = 0; pp <= n; ++pp) {
      const auto h1 = b.lagrange().values(r.nodes[pp]), h2 = b.lagrange().values(r.nodes[q]);
      const auto e1 = b.edge_values(r.nodes[pp]), e2 = b.edge_values(r.nodes[q]);
      Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(4, L.traction_count());
      for (int m = 0; m < 2; ++m)
        for (int k = 1; k <= n; ++k)
          for (int i = 0; i <= n; ++i) {
            psi(family_of(0, m), L.traction(0, family_of(0, m), i, k)) = h1[i] * e2[k - 1];
            psi(family_of(1, m), L.traction(0, family_of(1, m), k, i)) = e1[k - 1] * h2[i];
          }
      oracle += r.weights[pp] * r.weights[q] * psi.transpose() * psi;
    }
  EXPECT_NEAR((H - oracle).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(AssembleH, NoNormalCouplingForZeroPoisson) {
  const int n = 2;
  const Problem p = single_element({-1, -1}, {1, 1}, free_face, {1.0, 0.0});
  const DofLayout L(p.mesh, n, RotationGrid::Gauss);
  const Eigen::MatrixXd H = Eigen::MatrixXd(assemble_H(p, L, {n}));
  for (int f = 0; f < 4; ++f)
    for (int g = 0; g < 4; ++g) {
      if (f == g) continue;
      for (int a = 0; a < L.family_size(); ++a)
        for (int b = 0; b < L.family_size(); ++b)
          EXPECT_EQ(H(f * L.family_size() + a, g * L.family_size() + b), 0.0);
    }
}

TEST(AssembleH, AffineScalingAgainstOracle) {
  // A rectangle: H = sum_q w psi^T P^T C P psi / J with P = blockdiag(F, F).
  const int n = 1;
  const Material mat;
  for (double hx : {2.0, 1.0}) {
    const Problem p = single_element({0, 0}, {hx, 0.5 * hx}, free_face, mat);
    const DofLayout L(p.mesh, n, RotationGrid::Gauss);
    const Eigen::MatrixXd H = Eigen::MatrixXd(assemble_H(p, L, {n}));
    const ElementBasis eb(n);
    const auto& r = eb.gll().rule();
    const Mat2 F = Eigen::Vector2d(hx / 2, hx / 4).asDiagonal();
    Eigen::Matrix4d P = Eigen::Matrix4d::Zero();
    P.block<2, 2>(0, 0) = F;
    P.block<2, 2>(2, 2) = F;
    Eigen::MatrixXd oracle = Eigen::MatrixXd::Zero(H.rows(), H.cols());
    for (int q = 0; q <= n; ++q)
      for (int pp = 0; pp <= n; ++pp) {
        const Eigen::MatrixXd psi = eb.stress_basis({r.nodes[pp], r.nodes[q]});
        oracle += r.weights[pp] * r.weights[q] / F.determinant() * psi.transpose() * P.transpose() *
                  mat.compliance() * P * psi;
      }
    EXPECT_NEAR((H - oracle).cwiseAbs().maxCoeff(), 0.0, 1e-13) << hx;
  }
  // The aspect ratio is what matters: J and F^T F cancel for a uniform scaling.
  const Problem a = single_element({0, 0}, {2, 2}, free_face), b = single_element({0, 0}, {1, 1}, free_face);
  const DofLayout L(a.mesh, 2, RotationGrid::Gauss);
  EXPECT_NEAR(max_abs(assemble_H(a, L, {2}) - assemble_H(b, L, {2})), 0.0, 1e-13);
}

TEST(AssembleH, SymmetricOnDeformedMesh) {
  const auto mc = case_results_I();
  const Problem p = square_problem(mc, 3, 3, 0.3);
  const DofLayout L(p.mesh, 4, RotationGrid::Gauss);
  const SparseMatrix H = assemble_H(p, L, {4});
  const SparseMatrix Ht = H.transpose();
  EXPECT_LT(max_abs(H - Ht), 1e-13 * max_abs(H));
}

TEST(AssembleV, NonsingularAndBlockStructure) {
  for (int n = 1; n <= 6; ++n) {
    const DofLayout L(MeshTopology::structured(1, 1), n, RotationGrid::Gauss);
    const Eigen::MatrixXd V = Eigen::MatrixXd(assemble_V(L));
    ASSERT_EQ(V.rows(), 2 * n * n);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(V);
    const auto& s = svd.singularValues();
    EXPECT_GT(s.minCoeff() / s.maxCoeff(), 1e-6) << "n=" << n;
    // Components do not couple.
    EXPECT_EQ(V.block(0, n * n, n * n, n * n).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_NEAR((V.topLeftCorner(n * n, n * n) - V.bottomRightCorner(n * n, n * n)).norm(), 0.0, 0.0);
  }
}

TEST(AssembleV, EquilibriumBlockIsVTimesIncidenceOnDeformedGrid) {
  const auto mc = case_results_I();
  for (double c : {0.0, 0.3}) {
    const Problem p = square_problem(mc, 2, 2, c);
    const SaddleSystem sys = build_saddle_system(p, {3});
    const int nt = sys.layout.traction_count(), nu = sys.layout.displacement_count();
    const SparseMatrix block = sys.matrix.block(nt, 0, nu, nt);
    EXPECT_EQ(max_abs(block - SparseMatrix(sys.volume * sys.incidence)), 0.0);
    // V depends on the layout only, never on the map.
    EXPECT_EQ(max_abs(sys.volume - assemble_V(sys.layout)), 0.0);
  }
}

TEST(AssembleR, AnnihilatesSymmetricConstantStress) {
  for (int n = 1; n <= 5; ++n) {
    const Problem p = single_element({-1, -1}, {1, 1}, free_face);
    for (RotationGrid g : {RotationGrid::Gauss, RotationGrid::GaussLobatto}) {
      const DofLayout L(p.mesh, n, g);
      const Vector t = constant_stress_dofs(L, 0, Vec4(0.7, -0.3, -0.3, 1.9), {2, 2});
      EXPECT_LT((assemble_R(p, L) * t).cwiseAbs().maxCoeff(), 1e-13);
    }
  }
}

TEST(AssembleR, PairsGaussWeightsWithShearDifference) {
  const int n = 3;
  const Problem p = single_element({-1, -1}, {1, 1}, free_face);
  const DofLayout L(p.mesh, n, RotationGrid::Gauss);
  const Vector t = constant_stress_dofs(L, 0, Vec4(0, 0, 1, 0), {2, 2});  // s12 = 1, s21 = 0
  const Vector r = assemble_R(p, L) * t;
  const auto w = compute_rule(RuleKind::Gauss, n).weights;
  for (int b = 0; b < n; ++b)
    for (int a = 0; a < n; ++a) EXPECT_NEAR(r[L.rotation(0, a, b)], w[a] * w[b], 1e-13);
}

TEST(AssembleB, ZeroDisplacementGivesNothing) {
  const Problem p = single_element({0, 0}, {1, 1}, [](int, Side, const Vec2&) { return FaceCondition::clamped(); });
  const DofLayout L(p.mesh, 3, RotationGrid::Gauss);
  EXPECT_EQ(assemble_B(p, L).cwiseAbs().maxCoeff(), 0.0);
}

TEST(AssembleB, UnitDisplacementOnUnitEdge) {
  auto bc = [](int, Side s, const Vec2&) {
    if (s == Side::Right || s == Side::Left)
      return FaceCondition::clamped([](const Vec2&) { return Vec2(1.0, 0.0); });
    return FaceCondition::loaded();
  };
  const Problem p = single_element({0, 0}, {1, 1}, bc);
  const DofLayout L(p.mesh, 1, RotationGrid::Gauss);
  const Vector b = assemble_B(p, L);
  EXPECT_NEAR(b[L.traction(0, 0, 1, 1)], 1.0, 1e-14);   // right face, outward +x1
  EXPECT_NEAR(b[L.traction(0, 0, 0, 1)], -1.0, 1e-14);  // left face, outward -x1
  int nonzero = 0;
  for (int k = 0; k < b.size(); ++k) nonzero += b[k] != 0.0;
  EXPECT_EQ(nonzero, 2);
}

TEST(BodyForce, ConstantAndAdditive) {
  const MeshTopology mesh = MeshTopology::structured(1, 1);
  const MapList id{std::make_shared<AffineMap>(Vec2(-1, -1), Vec2(1, 1))};
  const DofLayout L1(mesh, 1, RotationGrid::Gauss);
  EXPECT_EQ(project_body_force({}, id, L1).cwiseAbs().maxCoeff(), 0.0);
  const Vector F = project_body_force([](const Vec2&) { return Vec2(1, 0); }, id, L1);
  EXPECT_NEAR(F[L1.displacement(0, 0, 1, 1)], 4.0, 1e-14);
  EXPECT_EQ(F[L1.displacement(0, 1, 1, 1)], 0.0);

  // Sub-cell integrals add up to the element integral on a curved element.
  const MapList curved{std::make_shared<SineDeformedMap>(0.3, Vec2(-1, -1), Vec2(0, 0))};
  const VectorField f = [](const Vec2& x) { return Vec2(std::exp(x(0)) * std::cos(3 * x(1)), x(0) * x(1)); };
  const int n = 5;
  const DofLayout L(mesh, n, RotationGrid::Gauss);
  const Vector Fn = project_body_force(f, curved, L, 12);
  const auto g = compute_rule(RuleKind::Gauss, 30);
  Vec2 whole = Vec2::Zero();
  for (int q = 0; q < g.size(); ++q)
    for (int p = 0; p < g.size(); ++p) {
      const MapPoint mp = curved[0]->eval({g.nodes[p], g.nodes[q]});
      whole += g.weights[p] * g.weights[q] * mp.J * f(mp.x);
    }
  for (int m = 0; m < 2; ++m) {
    double s = 0;
    for (int j = 1; j <= n; ++j)
      for (int i = 1; i <= n; ++i) s += Fn[L.displacement(0, m, i, j)];
    EXPECT_NEAR(s, whole(m), 1e-12);
  }
}

TEST(StrongTractions, ZeroAndUniform) {
  const Problem free = single_element({0, 0}, {1, 1}, free_face);
  const DofLayout L(free.mesh, 2, RotationGrid::Gauss);
  const FixedDofs z = strong_tractions(free, L);
  EXPECT_EQ(z.index.size(), 4u * 2 * 2);
  for (double v : z.value) EXPECT_EQ(v, 0.0);

  auto bc = [](int, Side s, const Vec2&) {
    if (s == Side::Right || s == Side::Left)
      return FaceCondition::loaded([](const Vec2&, const Vec2&) { return Vec2(1.0, 0.0); });
    return FaceCondition::loaded();
  };
  const Problem p = single_element({0, 0}, {1, 1}, bc);
  const FixedDofs fx = strong_tractions(p, L);
  auto value_of = [&](int dof) {
    for (std::size_t k = 0; k < fx.index.size(); ++k)
      if (fx.index[k] == dof) return fx.value[k];
    ADD_FAILURE() << "dof " << dof << " not fixed";
    return 0.0;
  };
  // N = 2: sub-faces of length 1/2. On the left face the outward normal is
  // -x1, so t1 = -s11 and the (positive-direction) DOF is -1/2.
  for (int k = 1; k <= 2; ++k) {
    EXPECT_NEAR(value_of(L.traction(0, 0, 2, k)), 0.5, 1e-14);
    EXPECT_NEAR(value_of(L.traction(0, 0, 0, k)), -0.5, 1e-14);
    EXPECT_NEAR(value_of(L.traction(0, 2, 2, k)), 0.0, 1e-14);
  }
}

TEST(SaddleSystem, SymmetricForAllVariants) {
  const auto mc = case_results_I();
  const auto en = case_energy();
  for (RotationGrid g : {RotationGrid::Gauss, RotationGrid::GaussLobatto})
    for (double c : {0.0, 0.3}) {
      for (const ManufacturedCase* m : {&mc, &en}) {
        const Problem p = square_problem(*m, 2, 2, c);
        AssemblyOptions o;
        o.order = 3;
        o.rotation = g;
        const SaddleSystem sys = build_saddle_system(p, o);
        const SparseMatrix At = sys.matrix.transpose();
        EXPECT_LE(max_abs(sys.matrix - At), 1e-12 * max_abs(sys.matrix));
      }
    }
  const PlateWithHole ph = case_plate_with_hole();
  const SaddleSystem sys = build_saddle_system(ph.problem, {4});
  const SparseMatrix At = sys.matrix.transpose();
  EXPECT_LE(max_abs(sys.matrix - At), 1e-12 * max_abs(sys.matrix));
  const ReducedSystem red = apply_strong_tractions(sys);
  const SparseMatrix Rt = red.matrix.transpose();
  EXPECT_LE(max_abs(red.matrix - Rt), 1e-13 * max_abs(red.matrix));
}

TEST(SaddleSystem, HomogeneousProblemHasZeroRhs) {
  ManufacturedCase zero = case_uniaxial(0.0);
  const Problem p = square_problem(zero, 2, 2, 0.15);
  const SaddleSystem sys = build_saddle_system(p, {3});
  EXPECT_EQ(sys.rhs.cwiseAbs().maxCoeff(), 0.0);
}

TEST(SaddleSystem, ParticularFieldMovesLoadToConstitutiveRows) {
  const auto en = case_energy();
  const Problem p = square_problem(en, 2, 2, 0.0);
  const SaddleSystem sys = build_saddle_system(p, {3});
  const int nt = sys.layout.traction_count();
  EXPECT_EQ(sys.body_force.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(sys.rhs.tail(sys.rhs.size() - nt).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT(sys.particular_load.cwiseAbs().maxCoeff(), 0.0);
}

TEST(SaddleSystem, RejectsMismatchedMaps) {
  Problem p = single_element({0, 0}, {1, 1}, free_face);
  p.maps.push_back(p.maps.front());
  EXPECT_THROW((void)build_saddle_system(p, {2}), std::invalid_argument);
}
