#include "eqsem/cases.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <stdexcept>

namespace eqsem {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHoleRadius = 0.5;

Vec4 symmetric_stress(double s11, double s12, double s22) { return {s11, s12, s12, s22}; }

}  // namespace

ManufacturedCase case_results_I(const Material& material) {
  const double E = material.E, nu = material.nu;
  ManufacturedCase mc;
  mc.name = "results1";
  mc.material = material;
  mc.exact.displacement = [](const Vec2& x) -> Vec2 {
    const double a = 2 * kPi * x(0), b = 2 * kPi * x(1);
    return {std::sin(a) * std::cos(b), std::cos(a) * std::sin(b)};
  };
  mc.exact.stress = [E, nu](const Vec2& x) -> Vec4 {
    const double a = 2 * kPi * x(0), b = 2 * kPi * x(1);
    const double s = std::cos(a) * std::cos(b) * 2 * E * kPi / (1 - nu);
    return symmetric_stress(s, -std::sin(a) * std::sin(b) * 2 * E * kPi / (1 + nu), s);
  };
  mc.exact.body_force = [E, nu](const Vec2& x) -> Vec2 {
    const double a = 2 * kPi * x(0), b = 2 * kPi * x(1);
    const double k = 8 * E * kPi * kPi / (1 - nu * nu);
    return {k * std::sin(a) * std::cos(b), k * std::cos(a) * std::sin(b)};
  };
  return mc;
}

ManufacturedCase case_energy(const Material& material) {
  const double E = material.E, nu = material.nu;
  ManufacturedCase mc;
  mc.name = "energy";
  mc.material = material;
  mc.exact_energy = kEnergyCaseExact;
  mc.exact.displacement = [](const Vec2& x) -> Vec2 {
    const double v = std::sin(2 * kPi * x(0)) * std::sin(2 * kPi * x(1));
    return {v, v};
  };
  mc.exact.stress = [E, nu](const Vec2& x) -> Vec4 {
    const double s1 = std::sin(2 * kPi * x(0)), c1 = std::cos(2 * kPi * x(0));
    const double s2 = std::sin(2 * kPi * x(1)), c2 = std::cos(2 * kPi * x(1));
    const double k = 2 * E * kPi / (1 - nu * nu);
    return symmetric_stress(k * (c1 * s2 + nu * s1 * c2), E * kPi * (c1 * s2 + s1 * c2) / (1 + nu),
                            k * (s1 * c2 + nu * c1 * s2));
  };
  mc.exact.body_force = [E, nu](const Vec2& x) -> Vec2 {
    const double s1 = std::sin(2 * kPi * x(0)), c1 = std::cos(2 * kPi * x(0));
    const double s2 = std::sin(2 * kPi * x(1)), c2 = std::cos(2 * kPi * x(1));
    const double f = -2 * E * kPi * kPi * ((nu + 1) * c1 * c2 + (nu - 3) * s1 * s2) / (1 - nu * nu);
    return {f, f};
  };
  mc.particular = [E, nu](const Vec2& x) -> Vec4 {
    const double s1 = std::sin(2 * kPi * x(0)), c1 = std::cos(2 * kPi * x(0));
    const double s2 = std::sin(2 * kPi * x(1)), c2 = std::cos(2 * kPi * x(1));
    const double k = E * kPi / (1 - nu * nu);
    return {k * ((nu + 1) * s1 * c2 - (nu - 3) * c1 * s2), 0.0, 0.0, k * ((nu + 1) * c1 * s2 - (nu - 3) * s1 * c2)};
  };
  return mc;
}

ManufacturedCase case_uniaxial(double load, const Material& material) {
  ManufacturedCase mc;
  mc.name = "uniaxial";
  mc.material = material;
  const double E = material.E, nu = material.nu;
  mc.exact.displacement = [=](const Vec2& x) -> Vec2 { return {load * x(0) / E, -nu * load * x(1) / E}; };
  mc.exact.stress = [=](const Vec2&) -> Vec4 { return {load, 0.0, 0.0, 0.0}; };
  return mc;
}

ConsistencyReport check_consistency(const ExactSolution& exact, const Material& material, int points, Vec2 lo,
                                    Vec2 hi, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double h = 1e-5;
  const Eigen::Matrix3d D = material.plane_stress_stiffness();
  ConsistencyReport rep;
  for (int k = 0; k < points; ++k) {
    const Vec2 x(lo(0) + (hi(0) - lo(0)) * U(rng), lo(1) + (hi(1) - lo(1)) * U(rng));
    const Vec2 e1(h, 0.0), e2(0.0, h);
    const Vec4 ds1 = (exact.stress(x + e1) - exact.stress(x - e1)) / (2 * h);
    const Vec4 ds2 = (exact.stress(x + e2) - exact.stress(x - e2)) / (2 * h);
    const Vec2 f = exact.body_force ? exact.body_force(x) : Vec2::Zero();
    // div(sigma)_m = d s_1m / dx1 + d s_2m / dx2 with s_km stored at index 2m + k
    rep.divergence = std::max(rep.divergence, std::abs(ds1(0) + ds2(1) + f(0)));
    rep.divergence = std::max(rep.divergence, std::abs(ds1(2) + ds2(3) + f(1)));
    const Vec2 du1 = (exact.displacement(x + e1) - exact.displacement(x - e1)) / (2 * h);
    const Vec2 du2 = (exact.displacement(x + e2) - exact.displacement(x - e2)) / (2 * h);
    const Eigen::Vector3d eps(du1(0), du2(1), du2(0) + du1(1));
    const Eigen::Vector3d s = D * eps;
    const Vec4 sig = exact.stress(x);
    rep.constitutive = std::max({rep.constitutive, std::abs(sig(0) - s(0)), std::abs(sig(3) - s(1)),
                                 std::abs(sig(2) - s(2)), std::abs(sig(1) - s(2))});
    rep.symmetry = std::max(rep.symmetry, std::abs(sig(1) - sig(2)));
  }
  return rep;
}

double check_particular(const StressField& particular, const VectorField& f, int points, Vec2 lo, Vec2 hi,
                        unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double h = 1e-5;
  double worst = 0.0;
  for (int k = 0; k < points; ++k) {
    const Vec2 x(lo(0) + (hi(0) - lo(0)) * U(rng), lo(1) + (hi(1) - lo(1)) * U(rng));
    const Vec4 ds1 = (particular(x + Vec2(h, 0)) - particular(x - Vec2(h, 0))) / (2 * h);
    const Vec4 ds2 = (particular(x + Vec2(0, h)) - particular(x - Vec2(0, h))) / (2 * h);
    const Vec2 fx = f ? f(x) : Vec2::Zero();
    worst = std::max({worst, std::abs(ds1(0) + ds2(1) + fx(0)), std::abs(ds1(2) + ds2(3) + fx(1))});
  }
  return worst;
}

Problem square_problem(const ManufacturedCase& mc, int nx, int ny, double c) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("mesh dimensions must be positive");
  Problem p{MeshTopology::structured(nx, ny), {}, mc.material, {}, {}, {}};
  const double hx = 2.0 / nx, hy = 2.0 / ny;
  for (int e = 0; e < p.mesh.element_count(); ++e) {
    const auto [ix, iy] = p.mesh.cell(e);
    const Vec2 lo(-1.0 + ix * hx, -1.0 + iy * hy);
    p.maps.push_back(std::make_shared<SineDeformedMap>(c, lo, lo + Vec2(hx, hy)));
  }
  check_conformity(p.mesh, p.maps);
  if (mc.particular) {
    p.particular = mc.particular;
    p.boundary = BoundarySpec(p.mesh, p.maps, [](int, Side, const Vec2&) { return FaceCondition::clamped(); });
  } else {
    p.body_force = mc.exact.body_force;
    const VectorField u = mc.exact.displacement;
    p.boundary = BoundarySpec(p.mesh, p.maps, [u](int, Side, const Vec2&) { return FaceCondition::clamped(u); });
  }
  return p;
}

// ---------------------------------------------------------------------------

Kirsch kirsch_solution(double load, double hole_radius, const Material& material) {
  if (!(hole_radius > 0.0)) throw std::invalid_argument("hole radius must be positive");
  return Kirsch{load, hole_radius, material};
}

Eigen::Vector3d Kirsch::polar_stress(double r, double theta) const {
  const double a2 = radius * radius / (r * r), a4 = a2 * a2;
  const double c2 = std::cos(2 * theta), s2 = std::sin(2 * theta);
  const double h = 0.5 * load;
  return {h * (1 - a2) + h * (1 - 4 * a2 + 3 * a4) * c2,  //
          h * (1 + a2) - h * (1 + 3 * a4) * c2,          //
          -h * (1 + 2 * a2 - 3 * a4) * s2};
}

Vec4 Kirsch::stress(const Vec2& x) const {
  const double r = x.norm(), th = std::atan2(x(1), x(0));
  const Eigen::Vector3d p = polar_stress(r, th);
  const double c = std::cos(th), s = std::sin(th);
  const double s11 = p(0) * c * c + p(1) * s * s - 2 * p(2) * s * c;
  const double s22 = p(0) * s * s + p(1) * c * c + 2 * p(2) * s * c;
  const double s12 = (p(0) - p(1)) * s * c + p(2) * (c * c - s * s);
  return {s11, s12, s12, s22};
}

Vec2 Kirsch::displacement(const Vec2& x) const {
  const double r = x.norm(), th = std::atan2(x(1), x(0));
  const double mu = material.E / (2 * (1 + material.nu));
  const double kappa = (3 - material.nu) / (1 + material.nu);
  const double a2 = radius * radius, a4 = a2 * a2;
  const double c2 = std::cos(2 * th), s2 = std::sin(2 * th);
  const double k = load / (4 * mu);
  const double ur = k * (r * ((kappa - 1) / 2 + c2) + a2 / r * (1 + (1 + kappa) * c2) - a4 / (r * r * r) * c2);
  const double ut = k * ((1 - kappa) * a2 / r - r - a4 / (r * r * r)) * s2;
  const double c = std::cos(th), s = std::sin(th);
  return {ur * c - ut * s, ur * s + ut * c};
}

ExactSolution Kirsch::exact() const {
  const Kirsch k = *this;
  return {[k](const Vec2& x) { return k.displacement(x); }, [k](const Vec2& x) { return k.stress(x); }, {}};
}

PlateWithHole case_plate_with_hole(const Material& material) {
  constexpr int ns = 2, nt = 4;
  // Two 45-degree sectors, each a linear blend (in s) between the hole arc
  // and one straight outer edge of the unit quarter plate.
  // value and d/dt at global t in [0, 1]; `upper` picks the sector so that
  // tangents at t = 1/2 (the corner x = (1, 1)) come from the element's own side.
  auto sector = [](double s, double t, bool upper) -> std::pair<Vec2, Vec2> {
    if (!upper) {
      const double u = 2 * t, th = u * kPi / 4;
      const Vec2 arc = kHoleRadius * Vec2(std::cos(th), std::sin(th));
      const Vec2 darc = kHoleRadius * (kPi / 4) * Vec2(-std::sin(th), std::cos(th)) * 2;
      return {(1 - s) * arc + s * Vec2(1.0, u), (1 - s) * darc + s * Vec2(0.0, 2.0)};
    }
    const double u = 2 * t - 1, th = kPi / 4 + u * kPi / 4;
    const Vec2 arc = kHoleRadius * Vec2(std::cos(th), std::sin(th));
    const Vec2 darc = kHoleRadius * (kPi / 4) * Vec2(-std::sin(th), std::cos(th)) * 2;
    return {(1 - s) * arc + s * Vec2(1.0 - u, 1.0), (1 - s) * darc + s * Vec2(-2.0, 0.0)};
  };

  PlateWithHole out{Problem{MeshTopology::structured(ns, nt), {}, material, {}, {}, {}},
                    kirsch_solution(1.0, kHoleRadius, material)};
  Problem& p = out.problem;
  for (int e = 0; e < p.mesh.element_count(); ++e) {
    const auto [ix, iy] = p.mesh.cell(e);
    const double s0 = double(ix) / ns, s1 = double(ix + 1) / ns;
    const double t0 = double(iy) / nt, t1 = double(iy + 1) / nt;
    const bool upper = 2 * iy >= nt;
    auto radial = [&](double t) {
      return line_segment(sector(s0, t, upper).first, sector(s1, t, upper).first);
    };
    auto angular = [&](double s) {
      const double tm = 0.5 * (t0 + t1), th = 0.5 * (t1 - t0);
      return Curve{[=](double r) { return sector(s, tm + th * r, upper).first; },
                   [=](double r) -> Vec2 { return th * sector(s, tm + th * r, upper).second; }};
    };
    p.maps.push_back(std::make_shared<TransfiniteMap>(radial(t0), angular(s1), radial(t1), angular(s0)));
  }
  check_conformity(p.mesh, p.maps);

  const Kirsch kirsch = out.kirsch;
  p.boundary = BoundarySpec(p.mesh, p.maps, [kirsch](int, Side side, const Vec2&) {
    switch (side) {
      case Side::Left:  // hole
        return FaceCondition::loaded();
      case Side::Right:  // outer edges x1 = 1 and x2 = 1
        return FaceCondition::loaded([kirsch](const Vec2& x, const Vec2& n) -> Vec2 {
          const Vec4 s = kirsch.stress(x);
          return {s(0) * n(0) + s(1) * n(1), s(2) * n(0) + s(3) * n(1)};
        });
      default:
        // Symmetry edges x2 = 0 and x1 = 0 carry the exact displacement (normal
        // component zero). Prescribing the tangential traction there as well
        // would leave every boundary tangential traction fixed, and the
        // rotation block then has a null vector the loads are not orthogonal to.
        return FaceCondition::clamped([kirsch](const Vec2& x) { return kirsch.displacement(x); });
    }
  });
  return out;
}

// ---------------------------------------------------------------------------

namespace {

int lattice_count(double length, double h) {
  const double q = length / h;
  const long n = std::lround(q);
  if (n < 1 || std::abs(q - n) > 1e-9 * q) {
    throw std::invalid_argument("element size " + std::to_string(h) + " does not divide the length " +
                                std::to_string(length));
  }
  return static_cast<int>(n);
}

}  // namespace

MeshTopology l_shape_mesh(double element_size) {
  if (!(element_size > 0.0)) throw std::invalid_argument("element size must be positive");
  const int n = lattice_count(1.0, element_size);
  const int leg = lattice_count(0.1, element_size);
  std::vector<bool> active(static_cast<std::size_t>(n) * n);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) active[iy * n + ix] = ix < leg || iy < leg;
  return MeshTopology::masked(n, n, active);
}

Problem case_l_shape(double element_size, const Material& material) {
  Problem p{l_shape_mesh(element_size), {}, material, {}, {}, {}};
  const double h = element_size;
  for (int e = 0; e < p.mesh.element_count(); ++e) {
    const auto [ix, iy] = p.mesh.cell(e);
    const Vec2 lo(ix * h, iy * h);
    p.maps.push_back(std::make_shared<AffineMap>(lo, lo + Vec2(h, h)));
  }
  const int n = p.mesh.nx();
  p.boundary = BoundarySpec(p.mesh, p.maps, [n, &p](int e, Side side, const Vec2&) {
    const auto [ix, iy] = p.mesh.cell(e);
    if (side == Side::Top && iy == n - 1) return FaceCondition::clamped();
    if (side == Side::Right && ix == n - 1) {
      return FaceCondition::loaded([](const Vec2&, const Vec2&) { return Vec2(0.0, -1.0); });
    }
    return FaceCondition::loaded();
  });
  return p;
}

const std::vector<std::string>& case_ids() {
  static const std::vector<std::string> ids{"results1", "energy", "plate-hole", "lshape"};
  return ids;
}

}  // namespace eqsem
