#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "eqsem/baseline_fem.hpp"
#include "eqsem/postproc.hpp"

using namespace eqsem;

namespace {

int kernel_dimension(const SparseMatrix& K) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(K)};
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  int k = 0;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()[i]) < 1e-10 * top) ++k;
  return k;
}

double u1_error(const ManufacturedCase& mc, int nx, int order) {
  const Problem p = square_problem(mc, nx, nx, 0.0);
  const FemModel m(p, {order});
  double err = 0.0;
  m.for_each(equispaced(5), [&](const FemSample& s) {
    err = std::max(err, std::abs(s.u(0) - mc.exact.displacement(s.x)(0)));
  });
  return err;
}

}  // namespace

class FemOrder : public ::testing::TestWithParam<int> {};

TEST_P(FemOrder, PatchTestIsExact) {
  const auto mc = case_uniaxial(1.0);
  const Problem p = square_problem(mc, 2, 2, 0.0);
  const FemModel m(p, {GetParam()});
  m.for_each(equispaced(5), [&](const FemSample& s) {
    EXPECT_NEAR((s.sigma - mc.exact.stress(s.x)).cwiseAbs().maxCoeff(), 0.0, 1e-12);
    EXPECT_NEAR((s.u - mc.exact.displacement(s.x)).cwiseAbs().maxCoeff(), 0.0, 1e-12);
    EXPECT_NEAR(s.residual.norm(), 0.0, 1e-12);
  });
}

TEST_P(FemOrder, RigidBodyKernel) {
  const Problem p = square_problem(case_uniaxial(1.0), 2, 1, 0.0);
  const FemModel m(p, {GetParam()});
  EXPECT_EQ(m.stiffness().rows(), m.dof_count());
  EXPECT_EQ(kernel_dimension(m.stiffness()), 3);
  const Eigen::MatrixXd K(m.stiffness());
  EXPECT_NEAR((K - K.transpose()).cwiseAbs().maxCoeff(), 0.0, 1e-14);
}

TEST_P(FemOrder, SingleElementConstantStressHasNoResidual) {
  const auto mc = case_uniaxial(0.8);
  const Problem p = square_problem(mc, 1, 1, 0.0);
  const FemModel m(p, {GetParam()});
  const FemResidual r = fem_equilibrium_residual(m, equispaced(6));
  EXPECT_LT(r.interior.maxCoeff(), 1e-12);
  EXPECT_EQ(r.traction_jump, 0.0);
}

INSTANTIATE_TEST_SUITE_P(Q4Q9, FemOrder, ::testing::Values(1, 2));

TEST(Fem, NodeCounts) {
  const Problem p = square_problem(case_uniaxial(1.0), 3, 2, 0.0);
  EXPECT_EQ(FemModel(p, {1}).node_count(), 4 * 3);
  EXPECT_EQ(FemModel(p, {2}).node_count(), 7 * 5);
}

TEST(Fem, Q9ConvergesFasterThanQ4) {
  const auto mc = case_results_I();
  std::vector<double> h, e1, e2;
  for (int nx : {8, 16, 32}) {
    h.push_back(2.0 / nx);
    e1.push_back(u1_error(mc, nx, 1));
    e2.push_back(u1_error(mc, nx, 2));
  }
  const double s1 = convergence_rate(h, e1).slope, s2 = convergence_rate(h, e2).slope;
  EXPECT_GT(s1, 1.5);
  EXPECT_GT(s2, s1 + 0.5);
}

TEST(Fem, RejectsUnsupportedProblems) {
  const Problem curved = case_plate_with_hole().problem;
  EXPECT_ANY_THROW(FemModel(curved, {1}));
  const Problem particular = square_problem(case_energy(), 1, 1, 0.0);
  EXPECT_ANY_THROW(FemModel(particular, {1}));
  const Problem plain = square_problem(case_uniaxial(1.0), 1, 1, 0.0);
  EXPECT_ANY_THROW(FemModel(plain, {3}));
}

TEST(Fem, DualBracketingOnLShape) {
  double fem_prev = 0.0, eq_prev = 1e300;
  for (double size : {0.1, 0.05, 0.025}) {
    const Problem p = case_l_shape(size);
    const FemModel fem(p, {1});
    const SaddleSystem sys = build_saddle_system(p, {2});
    const SolveReport r = solve(sys);
    const double ue = fem.strain_energy();
    const double uc = reported_energy(p, sys.layout, r.traction);
    EXPECT_GE(ue, fem_prev) << size;
    EXPECT_LE(uc, eq_prev) << size;
    EXPECT_LE(ue, uc) << size;
    fem_prev = ue;
    eq_prev = uc;
  }
}

TEST(Fem, LShapeResidualConcentratesAtCorner) {
  const Problem p = case_l_shape(0.05);
  const FemModel fem(p, {1});
  const FemResidual r = fem_equilibrium_residual(fem, equispaced(10));
  EXPECT_GT(r.interior.maxCoeff(), 1.0);
  EXPECT_GT(r.traction_jump, 1.0);
  // The re-entrant corner sits at (0.1, 0.1).
  EXPECT_LT((r.worst_point - Vec2(0.1, 0.1)).norm(), 0.1);
}
