#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eqsem/assembly.hpp"

namespace eqsem {

/// Closed-form fields of a test problem. Stress is [s11, s21, s12, s22].
struct ExactSolution {
  VectorField displacement;
  StressField stress;
  VectorField body_force;  // may be empty (zero)
};

struct ManufacturedCase {
  std::string name;
  ExactSolution exact;
  StressField particular;  // optional
  Material material;
  std::optional<double> exact_energy;
};

/// u1 = sin(2 pi x1) cos(2 pi x2), u2 = cos(2 pi x1) sin(2 pi x2) on
/// [-1, 1]^2, displacements prescribed on the whole boundary.
[[nodiscard]] ManufacturedCase case_results_I(const Material& material = {});

/// u1 = u2 = sin(2 pi x1) sin(2 pi x2) (homogeneous boundary displacement)
/// with a particular stress field carrying the body force.
[[nodiscard]] ManufacturedCase case_energy(const Material& material = {});
inline constexpr double kEnergyCaseExact = 58.566883;

/// Constant uniaxial stress s11 = load with its linear displacement field.
[[nodiscard]] ManufacturedCase case_uniaxial(double load = 1.0, const Material& material = {});

struct ConsistencyReport {
  double divergence = 0.0;    // max |div sigma + f|
  double constitutive = 0.0;  // max |sigma - D eps(u)| (symmetric components)
  double symmetry = 0.0;      // max |s12 - s21|
};

/// Finite-difference check of a manufactured case at random points of
/// [lo, hi]^2 (deterministic seed).
[[nodiscard]] ConsistencyReport check_consistency(const ExactSolution& exact, const Material& material, int points,
                                                  Vec2 lo, Vec2 hi, unsigned seed = 7);
/// Max |div sigma_p + f| at random points.
[[nodiscard]] double check_particular(const StressField& particular, const VectorField& f, int points, Vec2 lo,
                                      Vec2 hi, unsigned seed = 11);

/// nx x ny elements tiling [-1, 1]^2, deformed by the global sine map with
/// amplitude c; displacements prescribed everywhere from the exact field
/// (zero for cases with a particular field).
[[nodiscard]] Problem square_problem(const ManufacturedCase& mc, int nx, int ny, double c);

/// Infinite plate with a circular hole of radius a under far-field tension
/// s11 = load (plane stress).
struct Kirsch {
  double load = 1.0;
  double radius = 0.5;
  Material material;

  [[nodiscard]] Vec4 stress(const Vec2& x) const;
  [[nodiscard]] Vec2 displacement(const Vec2& x) const;
  /// Polar components (s_rr, s_tt, s_rt) at (r, theta).
  [[nodiscard]] Eigen::Vector3d polar_stress(double r, double theta) const;
  [[nodiscard]] ExactSolution exact() const;
};

[[nodiscard]] Kirsch kirsch_solution(double load, double hole_radius, const Material& material = {});

/// Quarter of a 2x2 plate with a central hole of radius 0.5 on 8 curved
/// elements (2 radial x 4 circumferential), exact Kirsch tractions on the
/// outer edges, a traction-free hole and symmetry conditions on x1 = 0 and
/// x2 = 0.
struct PlateWithHole {
  Problem problem;
  Kirsch kirsch;
};
[[nodiscard]] PlateWithHole case_plate_with_hole(const Material& material = {});

/// L-shaped domain [0,1]x[0,0.1] U [0,0.1]x[0,1] meshed with square elements
/// of the given size: edge x2 = 1 clamped, unit downward traction on x1 = 1,
/// all other edges traction free.
[[nodiscard]] Problem case_l_shape(double element_size, const Material& material = {});
[[nodiscard]] MeshTopology l_shape_mesh(double element_size);

[[nodiscard]] const std::vector<std::string>& case_ids();

}  // namespace eqsem
