#pragma once

#include <stdexcept>
#include <string>

#include "eqsem/assembly.hpp"

namespace eqsem {

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& block, const std::string& what)
      : std::runtime_error(what + " [" + block + " block]"), block_(block) {}
  [[nodiscard]] const std::string& block() const { return block_; }

 private:
  std::string block_;
};

struct SolveOptions {
  /// Relative threshold (times the largest constraint-row norm) below which
  /// a constraint row is treated as linearly dependent.
  double rank_tolerance = 1e-12;
  /// Always run the rank-revealing path, even for the Gauss rotation grid.
  bool force_rank_detection = false;
  /// For rank-deficient systems, re-solve with a reversed constraint
  /// ordering and compare stresses and displacements.
  bool verify_uniqueness = true;
};

struct SolveReport {
  Vector traction;      // all traction DOFs, fixed ones included
  Vector displacement;
  Vector rotation;
  double algebraic_residual = 0.0;  // ||A x - b||_inf / ||b||_inf on the reduced system
  int rank_deficiency = 0;
  double equilibrium_residual = 0.0;  // ||D T + F||_inf
  /// Max difference of traction/displacement DOFs between the two orderings
  /// of a rank-deficient solve (relative to their magnitude); -1 if not run.
  double uniqueness_gap = -1.0;
  long nonzeros = 0;
  double factor_seconds = 0.0;
  int unknowns = 0;
};

[[nodiscard]] SolveReport solve(const SaddleSystem& system, const SolveOptions& options = {});

/// ||D T + F||_inf evaluated with the integer incidence matrix.
[[nodiscard]] double constraint_residual(const Vector& traction, const Vector& body_force,
                                         const SparseMatrix& incidence);

}  // namespace eqsem
