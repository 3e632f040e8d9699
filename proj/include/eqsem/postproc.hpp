#pragma once

#include <functional>
#include <string>
#include <vector>

#include "eqsem/assembly.hpp"
#include "eqsem/cases.hpp"
#include "eqsem/solver.hpp"

namespace eqsem {

struct FieldSample {
  int element = 0;
  Vec2 xi;
  Vec2 x;
  double J = 0.0;
  Vec4 sigma_h;   // discrete (homogeneous) stress after the Piola transform
  Vec4 sigma;     // sigma_h plus the particular field, if any
  Vec2 u;
  double omega = 0.0;
  Vec2 residual;  // pointwise force-equilibrium residual R_fe
  Vec2 f_h;       // reconstructed body force
};

/// Reconstructs the discrete fields of a solved problem at reference points.
class FieldSampler {
 public:
  FieldSampler(const Problem& problem, const SaddleSystem& system, const SolveReport& report);

  [[nodiscard]] FieldSample at(int element, const Vec2& xi) const;
  /// Calls fn for every tensor point pts x pts of every element.
  void for_each(const std::vector<double>& pts, const std::function<void(const FieldSample&)>& fn) const;

  [[nodiscard]] const Problem& problem() const { return problem_; }
  [[nodiscard]] const DofLayout& layout() const { return system_.layout; }

 private:
  const Problem& problem_;
  const SaddleSystem& system_;
  const SolveReport& report_;
  ElementBasis basis_;
  LagrangeBasis gl_;
  Vector divergence_;  // D T + F per sub-cell
};

/// k equispaced points on [-1, 1], endpoints included.
[[nodiscard]] std::vector<double> equispaced(int k);
/// GLL nodes of order N.
[[nodiscard]] std::vector<double> gll_points(int order);

/// Max |R_fe| per component over the sample grid.
[[nodiscard]] Vec2 equilibrium_residual_field(const FieldSampler& sampler, const std::vector<double>& pts);
/// Max |s12 - s21| of the discrete stress over the sample grid.
[[nodiscard]] double stress_asymmetry(const FieldSampler& sampler, const std::vector<double>& pts);

/// 1/2 int sigma^T C sigma over the mesh. `gauss_points` = 0 uses the GLL rule
/// of the stress basis (the quadrature of H on affine elements); otherwise a
/// Gauss rule with that many points per direction. With
/// `include_particular`, the particular field is added to the discrete stress.
[[nodiscard]] double complementary_energy(const Problem& problem, const DofLayout& layout, const Vector& traction,
                                          int gauss_points, bool include_particular = true);
/// Energy used for reporting: Gauss quadrature with max(20, 2N+2) points.
[[nodiscard]] double reported_energy(const Problem& problem, const DofLayout& layout, const Vector& traction);

struct ErrorReport {
  // max-norm errors of u1, u2, s11, s21, s12, s22
  std::array<double, 6> linf{};
  double h = 0.0;
  int order = 0;
  [[nodiscard]] double u1() const { return linf[0]; }
  [[nodiscard]] double u2() const { return linf[1]; }
  [[nodiscard]] double s11() const { return linf[2]; }
  [[nodiscard]] double s21() const { return linf[3]; }
  [[nodiscard]] double s12() const { return linf[4]; }
  [[nodiscard]] double s22() const { return linf[5]; }
};
inline const std::array<const char*, 6> kErrorFields{"u1", "u2", "s11", "s21", "s12", "s22"};

[[nodiscard]] ErrorReport error_norms(const FieldSampler& sampler, const ExactSolution& exact,
                                      const std::vector<double>& pts, double h);

struct RateFit {
  double slope = 0.0;
  int used = 0;
  bool sufficient = false;  // at least three points above the floor
};

/// Least-squares slope of log(error) against log(h), ignoring errors below
/// `floor`. Throws std::invalid_argument with fewer than two usable points.
[[nodiscard]] RateFit convergence_rate(const std::vector<double>& h, const std::vector<double>& error,
                                       double floor = 1e-12);

}  // namespace eqsem
