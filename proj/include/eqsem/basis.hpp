#pragma once

#include <span>
#include <vector>

namespace eqsem {

enum class RuleKind {
  GaussLobatto,  // primal grid, includes the endpoints
  Gauss          // dual grid, interior points only
};

/// Nodes and weights of a Gauss or Gauss-Lobatto-Legendre rule on [-1, 1].
///
/// A Gauss-Lobatto rule of order N has N+1 nodes, a Gauss rule of order N has
/// N nodes. Both integrate polynomials of degree 2N-1 exactly. Nodes are
/// stored in increasing order.
struct QuadratureRule {
  RuleKind kind;
  int order;
  std::vector<double> nodes;
  std::vector<double> weights;

  [[nodiscard]] int size() const { return static_cast<int>(nodes.size()); }
};

inline constexpr int kMaxRuleOrder = 64;
inline constexpr int kMaxBasisOrder = 20;

/// Throws std::domain_error for order < 1 or order > kMaxRuleOrder.
[[nodiscard]] QuadratureRule compute_rule(RuleKind kind, int order);

/// Gauss rule mapped onto [a, b].
[[nodiscard]] QuadratureRule mapped_gauss(int points, double a, double b);

/// Legendre polynomial P_n and its derivative at x (three-term recurrence).
struct LegendreValue {
  double value;
  double derivative;
};
[[nodiscard]] LegendreValue legendre(int n, double x);

/// Lagrange interpolation basis on an arbitrary set of distinct nodes.
///
/// Values use the barycentric formula; derivatives are obtained from the
/// nodal differentiation matrix, h_i'(x) = sum_k D_ki h_k(x), which is exact
/// because the derivative of a degree-N interpolant has degree N-1.
class LagrangeBasis {
 public:
  explicit LagrangeBasis(std::vector<double> nodes);

  [[nodiscard]] int size() const { return static_cast<int>(nodes_.size()); }
  [[nodiscard]] int degree() const { return size() - 1; }
  [[nodiscard]] const std::vector<double>& nodes() const { return nodes_; }

  /// All basis values at x; `out` must have size() entries.
  void values(double x, std::span<double> out) const;
  /// All first derivatives at x.
  void derivatives(double x, std::span<double> out) const;
  /// All second derivatives at x.
  void second_derivatives(double x, std::span<double> out) const;

  [[nodiscard]] std::vector<double> values(double x) const;
  [[nodiscard]] std::vector<double> derivatives(double x) const;

  /// D(k, i) = h_i'(x_k), row-major.
  [[nodiscard]] double diff(int k, int i) const { return diff_[k * size() + i]; }

 private:
  std::vector<double> nodes_;
  std::vector<double> bary_;
  std::vector<double> diff_;
  std::vector<double> diff2_;
};

struct BasisValue {
  double value;
  double derivative;
};

/// Lagrange polynomials h_i on a quadrature rule's nodes together with the
/// edge polynomials e_i = -sum_{k<i} h_k' (only meaningful on the GLL rule,
/// where the integral of e_i over [x_{k-1}, x_k] is the Kronecker delta).
class BasisSet {
 public:
  explicit BasisSet(QuadratureRule rule);
  BasisSet(RuleKind kind, int order);

  [[nodiscard]] const QuadratureRule& rule() const { return rule_; }
  [[nodiscard]] const LagrangeBasis& lagrange() const { return lagrange_; }
  [[nodiscard]] int node_count() const { return lagrange_.size(); }
  /// Number of edge polynomials (one per interval between nodes).
  [[nodiscard]] int edge_count() const { return node_count() - 1; }

  /// h_i(x) and h_i'(x). Index is zero-based over the rule's nodes.
  [[nodiscard]] BasisValue lagrange_eval(int i, double x) const;
  /// e_i(x) with the conventional one-based index i = 1..N.
  [[nodiscard]] double edge_eval(int i, double x) const;

  /// e_1..e_N at x, written to out[0..N-1].
  void edge_values(double x, std::span<double> out) const;
  [[nodiscard]] std::vector<double> edge_values(double x) const;

 private:
  QuadratureRule rule_;
  LagrangeBasis lagrange_;
};

/// Coefficients of d/dx of a nodal expansion in the edge basis: first
/// differences phi_i - phi_{i-1}, i = 1..N.
[[nodiscard]] std::vector<double> derivative_to_edge(std::span<const double> nodal);

}  // namespace eqsem
