#include "eqsem/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace eqsem {

namespace {

constexpr double kNewtonTol = 1e-15;
constexpr int kNewtonMaxIter = 100;

void check_unit_interval(double x) {
  if (!(x >= -1.0 - 1e-12 && x <= 1.0 + 1e-12)) {
    throw std::domain_error("basis evaluation point " + std::to_string(x) + " outside [-1, 1]");
  }
}

// Enforce exact antisymmetry of the node set, which Newton only gives to
// round-off.
void symmetrize(std::vector<double>& nodes, std::vector<double>& weights) {
  const std::size_t n = nodes.size();
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double x = 0.5 * (nodes[n - 1 - k] - nodes[k]);
    const double w = 0.5 * (weights[n - 1 - k] + weights[k]);
    nodes[k] = -x;
    nodes[n - 1 - k] = x;
    weights[k] = w;
    weights[n - 1 - k] = w;
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
}

QuadratureRule gauss_lobatto(int order) {
  const int n = order;
  QuadratureRule rule{RuleKind::GaussLobatto, order, std::vector<double>(n + 1), std::vector<double>(n + 1)};
  rule.nodes.front() = -1.0;
  rule.nodes.back() = 1.0;
  // Interior nodes are the roots of P_N'. Newton on q(x) = (1-x^2) P_N'(x),
  // using q'(x) = -N(N+1) P_N(x) from Legendre's equation.
  for (int k = 1; k < n; ++k) {
    double x = -std::cos(std::numbers::pi * k / n);
    for (int it = 0; it < kNewtonMaxIter; ++it) {
      const auto p = legendre(n, x);
      const double dx = (1.0 - x * x) * p.derivative / (n * (n + 1.0) * p.value);
      x += dx;
      if (std::abs(dx) <= kNewtonTol) break;
    }
    rule.nodes[k] = x;
  }
  for (int k = 0; k <= n; ++k) {
    const double p = legendre(n, rule.nodes[k]).value;
    rule.weights[k] = 2.0 / (n * (n + 1.0) * p * p);
  }
  symmetrize(rule.nodes, rule.weights);
  return rule;
}

QuadratureRule gauss(int order) {
  const int n = order;
  QuadratureRule rule{RuleKind::Gauss, order, std::vector<double>(n), std::vector<double>(n)};
  for (int k = 0; k < n; ++k) {
    double x = -std::cos(std::numbers::pi * (k + 0.75) / (n + 0.5));
    for (int it = 0; it < kNewtonMaxIter; ++it) {
      const auto p = legendre(n, x);
      const double dx = -p.value / p.derivative;
      x += dx;
      if (std::abs(dx) <= kNewtonTol) break;
    }
    const double dp = legendre(n, x).derivative;
    rule.nodes[k] = x;
    rule.weights[k] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  symmetrize(rule.nodes, rule.weights);
  return rule;
}

}  // namespace

LegendreValue legendre(int n, double x) {
  if (n == 0) return {1.0, 0.0};
  double p_prev = 1.0, p = x;
  double d_prev = 0.0, d = 1.0;
  for (int k = 1; k < n; ++k) {
    const double p_next = ((2.0 * k + 1.0) * x * p - k * p_prev) / (k + 1.0);
    const double d_next = d_prev + (2.0 * k + 1.0) * p;
    p_prev = p;
    p = p_next;
    d_prev = d;
    d = d_next;
  }
  return {p, d};
}

QuadratureRule compute_rule(RuleKind kind, int order) {
  if (order < 1 || order > kMaxRuleOrder) {
    throw std::domain_error("quadrature order must lie in [1, " + std::to_string(kMaxRuleOrder) +
                            "], got " + std::to_string(order));
  }
  return kind == RuleKind::GaussLobatto ? gauss_lobatto(order) : gauss(order);
}

QuadratureRule mapped_gauss(int points, double a, double b) {
  QuadratureRule rule = compute_rule(RuleKind::Gauss, points);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (int k = 0; k < rule.size(); ++k) {
    rule.nodes[k] = mid + half * rule.nodes[k];
    rule.weights[k] *= half;
  }
  return rule;
}

// ---------------------------------------------------------------------------

LagrangeBasis::LagrangeBasis(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  const int n = size();
  if (n < 1) throw std::invalid_argument("LagrangeBasis needs at least one node");
  bary_.assign(n, 1.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = nodes_[i] - nodes_[j];
      if (d == 0.0) throw std::invalid_argument("LagrangeBasis nodes must be distinct");
      bary_[i] /= d;
    }
  }
  diff_.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int k = 0; k < n; ++k) {
    double diag = 0.0;
    for (int i = 0; i < n; ++i) {
      if (i == k) continue;
      const double v = (bary_[i] / bary_[k]) / (nodes_[k] - nodes_[i]);
      diff_[k * n + i] = v;
      diag -= v;
    }
    diff_[k * n + k] = diag;
  }
  diff2_.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int l = 0; l < n; ++l) s += diff_[k * n + l] * diff_[l * n + i];
      diff2_[k * n + i] = s;
    }
}

void LagrangeBasis::values(double x, std::span<double> out) const {
  const int n = size();
  for (int k = 0; k < n; ++k) {
    if (x == nodes_[k]) {
      std::fill(out.begin(), out.begin() + n, 0.0);
      out[k] = 1.0;
      return;
    }
  }
  double denom = 0.0;
  for (int i = 0; i < n; ++i) {
    out[i] = bary_[i] / (x - nodes_[i]);
    denom += out[i];
  }
  for (int i = 0; i < n; ++i) out[i] /= denom;
}

void LagrangeBasis::derivatives(double x, std::span<double> out) const {
  const int n = size();
  std::vector<double> h(n);
  values(x, h);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += diff_[k * n + i] * h[k];
    out[i] = s;
  }
}

void LagrangeBasis::second_derivatives(double x, std::span<double> out) const {
  const int n = size();
  std::vector<double> h(n);
  values(x, h);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += diff2_[k * n + i] * h[k];
    out[i] = s;
  }
}

std::vector<double> LagrangeBasis::values(double x) const {
  std::vector<double> out(size());
  values(x, out);
  return out;
}

std::vector<double> LagrangeBasis::derivatives(double x) const {
  std::vector<double> out(size());
  derivatives(x, out);
  return out;
}

// ---------------------------------------------------------------------------

BasisSet::BasisSet(QuadratureRule rule) : rule_(std::move(rule)), lagrange_(rule_.nodes) {
  if (rule_.order > kMaxBasisOrder) {
    throw std::domain_error("basis order " + std::to_string(rule_.order) + " exceeds the supported maximum " +
                            std::to_string(kMaxBasisOrder));
  }
}

BasisSet::BasisSet(RuleKind kind, int order) : BasisSet(compute_rule(kind, order)) {}

BasisValue BasisSet::lagrange_eval(int i, double x) const {
  if (i < 0 || i >= node_count()) {
    throw std::out_of_range("Lagrange index " + std::to_string(i) + " outside [0, " +
                            std::to_string(node_count() - 1) + "]");
  }
  check_unit_interval(x);
  std::vector<double> h(node_count());
  std::vector<double> dh(node_count());
  lagrange_.values(x, h);
  lagrange_.derivatives(x, dh);
  return {h[i], dh[i]};
}

double BasisSet::edge_eval(int i, double x) const {
  if (i < 1 || i > edge_count()) {
    throw std::out_of_range("edge index " + std::to_string(i) + " outside [1, " + std::to_string(edge_count()) +
                            "]");
  }
  check_unit_interval(x);
  return edge_values(x)[i - 1];
}

void BasisSet::edge_values(double x, std::span<double> out) const {
  const int n = node_count();
  std::vector<double> dh(n);
  lagrange_.derivatives(x, dh);
  double acc = 0.0;
  for (int i = 1; i < n; ++i) {
    acc -= dh[i - 1];
    out[i - 1] = acc;
  }
}

std::vector<double> BasisSet::edge_values(double x) const {
  std::vector<double> out(edge_count());
  edge_values(x, out);
  return out;
}

std::vector<double> derivative_to_edge(std::span<const double> nodal) {
  if (nodal.size() < 2) {
    throw std::invalid_argument("derivative_to_edge needs at least two nodal coefficients");
  }
  std::vector<double> edge(nodal.size() - 1);
  for (std::size_t i = 1; i < nodal.size(); ++i) edge[i - 1] = nodal[i] - nodal[i - 1];
  return edge;
}

}  // namespace eqsem
