#include "eqsem/postproc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eqsem {

FieldSampler::FieldSampler(const Problem& problem, const SaddleSystem& system, const SolveReport& report)
    : problem_(problem),
      system_(system),
      report_(report),
      basis_(system.layout.order()),
      gl_(compute_rule(RuleKind::Gauss, system.layout.order()).nodes) {
  divergence_ = system.incidence * report.traction + system.body_force;
}

FieldSample FieldSampler::at(int e, const Vec2& xi) const {
  const DofLayout& L = system_.layout;
  const int n = L.order();
  const MapPoint mp = problem_.maps[e]->eval(xi);
  FieldSample s;
  s.element = e;
  s.xi = xi;
  s.x = mp.x;
  s.J = mp.J;

  const auto& dofs = L.element_tractions(e);
  Vector t(dofs.size());
  for (std::size_t k = 0; k < dofs.size(); ++k) t[k] = report_.traction[dofs[k]];
  const Vec4 sigma_hat = basis_.stress_basis(xi) * t;
  s.sigma_h = piola_stress(mp.F, mp.J, sigma_hat);
  s.sigma = s.sigma_h;
  if (problem_.particular) s.sigma += problem_.particular(mp.x);

  const auto g1 = gl_.values(xi(0)), g2 = gl_.values(xi(1));
  const auto e1 = basis_.gll().edge_values(xi(0)), e2 = basis_.gll().edge_values(xi(1));
  s.u.setZero();
  s.residual.setZero();
  s.f_h.setZero();
  for (int m = 0; m < 2; ++m)
    for (int j = 1; j <= n; ++j)
      for (int i = 1; i <= n; ++i) {
        const int k = L.displacement(e, m, i, j);
        s.u(m) += report_.displacement[k] * g1[i - 1] * g2[j - 1];
        const double ee = e1[i - 1] * e2[j - 1];
        s.residual(m) += divergence_[k] * ee;
        s.f_h(m) += system_.body_force[k] * ee;
      }
  s.residual /= mp.J;
  s.f_h /= mp.J;

  const int nr = L.rotation_nodes_1d();
  std::vector<double> r1 = g1, r2 = g2;
  if (L.rotation_grid() == RotationGrid::GaussLobatto) {
    r1 = basis_.gll().lagrange().values(xi(0));
    r2 = basis_.gll().lagrange().values(xi(1));
  }
  s.omega = 0.0;
  for (int b = 0; b < nr; ++b)
    for (int a = 0; a < nr; ++a) s.omega += report_.rotation[L.rotation(e, a, b)] * r1[a] * r2[b];
  return s;
}

void FieldSampler::for_each(const std::vector<double>& pts, const std::function<void(const FieldSample&)>& fn) const {
  for (int e = 0; e < problem_.mesh.element_count(); ++e)
    for (double b : pts)
      for (double a : pts) fn(at(e, Vec2(a, b)));
}

std::vector<double> equispaced(int k) {
  if (k < 2) throw std::invalid_argument("sample grid needs at least two points per direction");
  std::vector<double> p(k);
  for (int i = 0; i < k; ++i) p[i] = -1.0 + 2.0 * i / (k - 1);
  return p;
}

std::vector<double> gll_points(int order) { return compute_rule(RuleKind::GaussLobatto, order).nodes; }

Vec2 equilibrium_residual_field(const FieldSampler& sampler, const std::vector<double>& pts) {
  Vec2 worst = Vec2::Zero();
  sampler.for_each(pts, [&](const FieldSample& s) { worst = worst.cwiseMax(s.residual.cwiseAbs()); });
  return worst;
}

double stress_asymmetry(const FieldSampler& sampler, const std::vector<double>& pts) {
  double worst = 0.0;
  sampler.for_each(pts, [&](const FieldSample& s) { worst = std::max(worst, std::abs(s.sigma_h(2) - s.sigma_h(1))); });
  return worst;
}

double complementary_energy(const Problem& problem, const DofLayout& layout, const Vector& traction,
                            int gauss_points, bool include_particular) {
  const ElementBasis basis(layout.order());
  const QuadratureRule rule =
      gauss_points > 0 ? compute_rule(RuleKind::Gauss, gauss_points) : basis.gll().rule();
  const Eigen::Matrix4d C = problem.material.compliance();
  const bool particular = include_particular && static_cast<bool>(problem.particular);
  double total = 0.0;
  Eigen::MatrixXd psi(4, basis.local_count());
  for (int e = 0; e < layout.element_count(); ++e) {
    const auto& dofs = layout.element_tractions(e);
    Vector t(dofs.size());
    for (std::size_t k = 0; k < dofs.size(); ++k) t[k] = traction[dofs[k]];
    const ElementMap& map = *problem.maps[e];
    for (int q = 0; q < rule.size(); ++q)
      for (int p = 0; p < rule.size(); ++p) {
        const Vec2 xi(rule.nodes[p], rule.nodes[q]);
        const MapPoint mp = map.eval(xi);
        basis.stress_basis(xi, psi);
        Vec4 s = piola_stress(mp.F, mp.J, psi * t);
        if (particular) s += problem.particular(mp.x);
        total += 0.5 * rule.weights[p] * rule.weights[q] * mp.J * s.dot(C * s);
      }
  }
  return total;
}

double reported_energy(const Problem& problem, const DofLayout& layout, const Vector& traction) {
  return complementary_energy(problem, layout, traction, std::max(20, 2 * layout.order() + 2), true);
}

ErrorReport error_norms(const FieldSampler& sampler, const ExactSolution& exact, const std::vector<double>& pts,
                        double h) {
  ErrorReport rep;
  rep.h = h;
  rep.order = sampler.layout().order();
  sampler.for_each(pts, [&](const FieldSample& s) {
    const Vec2 du = s.u - exact.displacement(s.x);
    const Vec4 ds = s.sigma - exact.stress(s.x);
    rep.linf[0] = std::max(rep.linf[0], std::abs(du(0)));
    rep.linf[1] = std::max(rep.linf[1], std::abs(du(1)));
    for (int k = 0; k < 4; ++k) rep.linf[2 + k] = std::max(rep.linf[2 + k], std::abs(ds(k)));
  });
  return rep;
}

RateFit convergence_rate(const std::vector<double>& h, const std::vector<double>& error, double floor) {
  if (h.size() != error.size()) throw std::invalid_argument("convergence_rate: h and error lengths differ");
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (!(error[k] >= floor) || !(h[k] > 0.0)) continue;
    lx.push_back(std::log(h[k]));
    ly.push_back(std::log(error[k]));
  }
  if (lx.size() < 2) throw std::invalid_argument("convergence_rate: fewer than two errors above the round-off floor");
  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sx += lx[k];
    sy += ly[k];
    sxx += lx[k] * lx[k];
    sxy += lx[k] * ly[k];
  }
  RateFit fit;
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.used = static_cast<int>(lx.size());
  fit.sufficient = fit.used >= 3;
  return fit;
}

}  // namespace eqsem
