#include "eqsem/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/QR>
#include <Eigen/SparseLU>

namespace eqsem {

namespace {

using Clock = std::chrono::steady_clock;
using Eigen::MatrixXd;

constexpr double kDenseRankLimit = 6e7;

struct LinearSolve {
  Vector x;
  bool ok = false;
  double seconds = 0.0;
};

LinearSolve lu_solve(const SparseMatrix& A, const Vector& b) {
  LinearSolve out;
  const auto t0 = Clock::now();
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(A);
  out.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  if (lu.info() != Eigen::Success) return out;
  out.x = lu.solve(b);
  out.ok = lu.info() == Eigen::Success && out.x.allFinite();
  // A few steps of iterative refinement; the equilibrium rows in particular
  // should hold to round-off of the traction values, not of the factorization.
  for (int step = 0; out.ok && step < 3; ++step) {
    const Vector r = b - A * out.x;
    out.x += lu.solve(r);
  }
  out.ok = out.ok && out.x.allFinite();
  return out;
}

SparseMatrix drop_indices(const SparseMatrix& A, const std::vector<int>& keep_map, int n) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(A.nonZeros());
  for (int c = 0; c < A.outerSize(); ++c) {
    if (keep_map[c] < 0) continue;
    for (SparseMatrix::InnerIterator it(A, c); it; ++it)
      if (keep_map[it.row()] >= 0) trip.emplace_back(keep_map[it.row()], keep_map[c], it.value());
  }
  SparseMatrix out(n, n);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

struct DeficientSolve {
  Vector x;                // reduced-system vector, dropped multipliers set to zero
  std::vector<int> dead;   // constraint indices (0-based within the constraint block)
  MatrixXd null_basis;     // orthonormal left null space of the constraint block
  double seconds = 0.0;
  long nonzeros = 0;
};

// Constraint block rows are the reduced indices [ntf, ntf + ncon); the first
// `neq` of them are equilibrium rows. The deficiency only shows up in the
// GLL-rotation variant on moderate meshes, so a dense column-pivoted QR of the
// constraint block is affordable and far more reliable than sparse rank
// heuristics.
DeficientSolve solve_deficient(const ReducedSystem& red, int ntf, int neq, double tol, bool reversed) {
  const int nf = static_cast<int>(red.free.size());
  const int ncon = nf - ntf;
  if (static_cast<double>(ntf) * ncon > kDenseRankLimit) {
    throw SolverError("rotation", "constraint block of " + std::to_string(ntf) + " x " + std::to_string(ncon) +
                                      " is too large for dense rank detection");
  }
  const auto t0 = Clock::now();
  const MatrixXd Kt = MatrixXd(red.matrix.block(0, ntf, ntf, ncon));
  Eigen::ColPivHouseholderQR<MatrixXd> qr(Kt);
  qr.setThreshold(tol);
  const int rank = static_cast<int>(qr.rank());
  const int nd = ncon - rank;

  DeficientSolve out;
  if (nd > 0) {
    // Null space of the constraint block: P [-R11^{-1} R12; I].
    const MatrixXd R = qr.matrixR().topRows(rank).template triangularView<Eigen::Upper>();
    MatrixXd W(ncon, nd);
    W.topRows(rank) = -R.leftCols(rank).template triangularView<Eigen::Upper>().solve(R.rightCols(nd));
    W.bottomRows(nd).setIdentity();
    const MatrixXd N = qr.colsPermutation() * W;
    Eigen::HouseholderQR<MatrixXd> hq(N);
    out.null_basis = hq.householderQ() * MatrixXd::Identity(ncon, nd);

    const double leak = neq > 0 ? out.null_basis.topRows(neq).cwiseAbs().maxCoeff() : 0.0;
    if (leak > 1e-8) {
      throw SolverError("equilibrium", "the constraint block has a null vector with displacement components (" +
                                           std::to_string(leak) +
                                           "): the problem admits a rigid or spurious displacement mode");
    }
    // Drop one rotation row per null vector; pivoting on the null basis keeps
    // the remaining rows independent.
    MatrixXd Zw = out.null_basis.bottomRows(ncon - neq).transpose();
    if (reversed) Zw = Zw.rowwise().reverse().eval();
    Eigen::ColPivHouseholderQR<MatrixXd> pick(Zw);
    const auto& P = pick.colsPermutation().indices();
    for (int k = 0; k < nd; ++k) {
      const int w = reversed ? (ncon - neq - 1 - P[k]) : P[k];
      out.dead.push_back(neq + w);
    }
    std::sort(out.dead.begin(), out.dead.end());
  }

  std::vector<int> keep(nf, 0);
  for (int d : out.dead) keep[ntf + d] = -1;
  int nk = 0;
  for (int i = 0; i < nf; ++i)
    if (keep[i] >= 0) keep[i] = nk++;
  const SparseMatrix A = drop_indices(red.matrix, keep, nk);
  Vector b(nk);
  for (int i = 0; i < nf; ++i)
    if (keep[i] >= 0) b[keep[i]] = red.rhs[i];
  const LinearSolve ls = lu_solve(A, b);
  out.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  out.nonzeros = A.nonZeros();
  if (!ls.ok) {
    throw SolverError("constitutive", "factorization failed after removing " + std::to_string(nd) +
                                          " dependent rotation constraints");
  }
  out.x = Vector::Zero(nf);
  for (int i = 0; i < nf; ++i)
    if (keep[i] >= 0) out.x[i] = ls.x[keep[i]];
  return out;
}

}  // namespace

double constraint_residual(const Vector& traction, const Vector& body_force, const SparseMatrix& incidence) {
  if (traction.size() != incidence.cols() || body_force.size() != incidence.rows()) {
    throw std::invalid_argument("constraint_residual: dimension mismatch");
  }
  if (incidence.rows() == 0) return 0.0;
  return (incidence * traction + body_force).cwiseAbs().maxCoeff();
}

SolveReport solve(const SaddleSystem& system, const SolveOptions& options) {
  const DofLayout& layout = system.layout;
  const ReducedSystem red = apply_strong_tractions(system);
  const int nf = static_cast<int>(red.free.size());
  const int nt = layout.traction_count();
  const int ntf = static_cast<int>(std::count_if(red.free.begin(), red.free.end(), [nt](int i) { return i < nt; }));

  SolveReport report;
  report.unknowns = nf;
  Vector x;
  const bool deficient_path =
      options.force_rank_detection || layout.rotation_grid() == RotationGrid::GaussLobatto;
  if (!deficient_path) {
    const LinearSolve ls = lu_solve(red.matrix, red.rhs);
    report.factor_seconds = ls.seconds;
    report.nonzeros = red.matrix.nonZeros();
    if (ls.ok) x = ls.x;
  }
  if (x.size() == 0) {
    DeficientSolve ds = solve_deficient(red, ntf, layout.displacement_count(), options.rank_tolerance, false);
    report.rank_deficiency = static_cast<int>(ds.dead.size());
    report.factor_seconds += ds.seconds;
    report.nonzeros = ds.nonzeros;
    if (report.rank_deficiency > 0) {
      // Minimum-norm multipliers: remove the left-null-space component.
      auto y = ds.x.tail(nf - ntf);
      y -= ds.null_basis * (ds.null_basis.transpose() * y);
      if (options.verify_uniqueness) {
        const DeficientSolve alt = solve_deficient(red, ntf, layout.displacement_count(), options.rank_tolerance, true);
        const int nu = layout.displacement_count();
        const double scale = std::max(1e-300, ds.x.head(ntf + nu).cwiseAbs().maxCoeff());
        report.uniqueness_gap = (ds.x.head(ntf + nu) - alt.x.head(ntf + nu)).cwiseAbs().maxCoeff() / scale;
      }
    }
    x = std::move(ds.x);
  }

  const Vector r = red.matrix * x - red.rhs;
  // Normwise backward error: |r| / (|A| |x| + |b|) in the max norm.
  double anorm = 0.0;
  {
    Vector rowsum = Vector::Zero(nf);
    for (int c = 0; c < red.matrix.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(red.matrix, c); it; ++it) rowsum[it.row()] += std::abs(it.value());
    if (nf > 0) anorm = rowsum.maxCoeff();
  }
  const double scale = (nf > 0 ? anorm * x.cwiseAbs().maxCoeff() + red.rhs.cwiseAbs().maxCoeff() : 0.0);
  report.algebraic_residual = nf > 0 ? r.cwiseAbs().maxCoeff() / (scale > 0.0 ? scale : 1.0) : 0.0;

  const Vector full = red.expand(x, system.fixed);
  report.traction = full.head(nt);
  report.displacement = full.segment(layout.displacement_offset(), layout.displacement_count());
  report.rotation = full.segment(layout.rotation_offset(), layout.rotation_count());
  report.equilibrium_residual = constraint_residual(report.traction, system.body_force, system.incidence);
  return report;
}

}  // namespace eqsem
