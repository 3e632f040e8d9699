#include <set>

#include <Eigen/QR>
#include <gtest/gtest.h>

#include "eqsem/topology.hpp"

using namespace eqsem;

TEST(DofLayout, SingleElementCounts) {
  const auto mesh = MeshTopology::structured(1, 1);
  const DofLayout L(mesh, 2, RotationGrid::Gauss);
  EXPECT_EQ(L.family_size(), 6);
  EXPECT_EQ(L.traction_count(), 24);
  EXPECT_EQ(L.displacement_count(), 8);
  EXPECT_EQ(L.rotation_count(), 4);
  EXPECT_EQ(L.total_count(), 36);

  const DofLayout L1(mesh, 1, RotationGrid::Gauss);
  EXPECT_EQ(L1.displacement_count(), 2);
}

TEST(DofLayout, SharedInterfaceDofs) {
  const auto mesh = MeshTopology::structured(2, 1);
  const DofLayout L(mesh, 2, RotationGrid::Gauss);
  // Two families (s11, s12) with N sub-faces each on the single interface.
  EXPECT_EQ(L.shared_traction_count(), 4);
  for (int f : {0, 2})
    for (int j = 1; j <= 2; ++j) EXPECT_EQ(L.traction(0, f, 2, j), L.traction(1, f, 0, j));
}

TEST(DofLayout, GllRotationHasMoreRows) {
  const auto mesh = MeshTopology::structured(2, 2);
  for (int n = 1; n <= 5; ++n) {
    const DofLayout a(mesh, n, RotationGrid::Gauss), b(mesh, n, RotationGrid::GaussLobatto);
    EXPECT_EQ(a.rotation_count(), 4 * n * n);
    EXPECT_EQ(b.rotation_count(), 4 * (n + 1) * (n + 1));
  }
}

TEST(DofLayout, NumberingIsABijection) {
  const auto mesh = MeshTopology::structured(3, 2);
  const int n = 3;
  const DofLayout L(mesh, n, RotationGrid::Gauss);
  std::set<int> seen;
  for (int e = 0; e < mesh.element_count(); ++e)
    for (int t : L.element_tractions(e)) {
      ASSERT_GE(t, 0);
      ASSERT_LT(t, L.traction_count());
      seen.insert(t);
    }
  EXPECT_EQ(static_cast<int>(seen.size()), L.traction_count());
  // Per element and component, N^2 displacement DOFs: one per equilibrium row.
  EXPECT_EQ(L.displacement_count(), 2 * mesh.element_count() * n * n);
}

TEST(MeshTopology, InterfaceCounts) {
  for (auto [nx, ny] : {std::pair{1, 1}, {3, 2}, {4, 4}}) {
    const auto m = MeshTopology::structured(nx, ny);
    EXPECT_EQ(m.interior_interface_count(), (nx - 1) * ny + nx * (ny - 1));
    EXPECT_EQ(m.boundary_interface_count(), 2 * (nx + ny));
    EXPECT_EQ(static_cast<int>(m.boundary_faces().size()), 2 * (nx + ny));
  }
}

TEST(MeshTopology, NeighboursAreSymmetric) {
  std::vector<bool> active(16, true);
  active[5] = active[10] = false;
  const auto m = MeshTopology::masked(4, 4, active);
  EXPECT_EQ(m.element_count(), 14);
  for (int e = 0; e < m.element_count(); ++e)
    for (Side s : {Side::Left, Side::Right, Side::Bottom, Side::Top}) {
      const int nb = m.neighbor(e, s);
      if (nb >= 0) {
        EXPECT_EQ(m.neighbor(nb, opposite(s)), e);
        EXPECT_EQ(m.interface_of(e, s), m.interface_of(nb, opposite(s)));
      }
    }
  EXPECT_EQ(m.element_at(1, 1), -1);
}

class IncidenceTest : public ::testing::TestWithParam<std::tuple<int, int, int>> {};

TEST_P(IncidenceTest, IntegerEntriesAndZeroRowSums) {
  const auto [nx, ny, n] = GetParam();
  const DofLayout L(MeshTopology::structured(nx, ny), n, RotationGrid::Gauss);
  const auto D = build_incidence(L);
  ASSERT_EQ(D.rows(), L.displacement_count());
  ASSERT_EQ(D.cols(), L.traction_count());
  Eigen::VectorXd rowsum = Eigen::VectorXd::Zero(D.rows());
  for (int c = 0; c < D.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(D, c); it; ++it) {
      EXPECT_TRUE(it.value() == 1.0 || it.value() == -1.0);
      rowsum[it.row()] += it.value();
    }
  EXPECT_EQ(rowsum.cwiseAbs().maxCoeff(), 0.0);
}

// Summing every equilibrium row of a component cancels all interior
// (shared) traction columns: Newton's third law between elements.
TEST_P(IncidenceTest, SharedColumnsCancel) {
  const auto [nx, ny, n] = GetParam();
  const auto mesh = MeshTopology::structured(nx, ny);
  const DofLayout L(mesh, n, RotationGrid::Gauss);
  const auto D = build_incidence(L);
  std::vector<int> owners(L.traction_count(), 0);
  for (int e = 0; e < mesh.element_count(); ++e)
    for (int t : L.element_tractions(e)) ++owners[t];
  for (int m = 0; m < 2; ++m) {
    Eigen::RowVectorXd sel = Eigen::RowVectorXd::Zero(D.rows());
    for (int e = 0; e < mesh.element_count(); ++e)
      for (int j = 1; j <= n; ++j)
        for (int i = 1; i <= n; ++i) sel[L.displacement(e, m, i, j)] = 1.0;
    const Eigen::RowVectorXd s = sel * D;
    for (int t = 0; t < L.traction_count(); ++t)
      if (owners[t] == 2) {
        EXPECT_EQ(s[t], 0.0);
      }
  }
}

TEST_P(IncidenceTest, FullRowRank) {
  const auto [nx, ny, n] = GetParam();
  const DofLayout L(MeshTopology::structured(nx, ny), n, RotationGrid::Gauss);
  const Eigen::MatrixXd D = Eigen::MatrixXd(build_incidence(L));
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(D.transpose());
  EXPECT_EQ(qr.rank(), D.rows());
}

INSTANTIATE_TEST_SUITE_P(Meshes, IncidenceTest,
                         ::testing::Values(std::tuple{1, 1, 1}, std::tuple{1, 1, 4}, std::tuple{2, 1, 2},
                                           std::tuple{2, 3, 3}, std::tuple{3, 3, 2}));

TEST(Topology, RejectsBadInput) {
  EXPECT_ANY_THROW((void)MeshTopology::structured(0, 2));
  const auto m = MeshTopology::structured(1, 1);
  EXPECT_ANY_THROW((void)DofLayout(m, 0, RotationGrid::Gauss));
}
