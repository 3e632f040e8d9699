#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "eqsem/basis.hpp"

using namespace eqsem;

namespace {

// Independent oracle: P_n from the explicit coefficient sum, in long double.
long double binom(int n, int k) {
  long double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

long double legendre_sum(int n, long double x, int deriv) {
  long double s = 0;
  for (int k = 0; 2 * k <= n; ++k) {
    const int p = n - 2 * k;
    long double term = binom(n, k) * binom(2 * n - 2 * k, n) * ((k % 2) ? -1 : 1);
    if (deriv == 0) term *= std::pow(x, p);
    else if (p >= 1) term *= p * std::pow(x, p - 1);
    else term = 0;
    s += term;
  }
  return s / std::pow(2.0L, n);
}

// Piecewise-accurate integral of f over [a, b] with a fine Gauss rule.
template <class F>
double integrate(F f, double a, double b) {
  const QuadratureRule g = mapped_gauss(20, a, b);
  double s = 0;
  for (int q = 0; q < g.size(); ++q) s += g.weights[q] * f(g.nodes[q]);
  return s;
}

}  // namespace

TEST(Quadrature, LegendreMatchesExplicitSum) {
  for (int n = 0; n <= 12; ++n)
    for (double x : {-0.93, -0.4, 0.0, 0.27, 0.81}) {
      const auto v = legendre(n, x);
      EXPECT_NEAR(v.value, static_cast<double>(legendre_sum(n, x, 0)), 1e-13) << n;
      EXPECT_NEAR(v.derivative, static_cast<double>(legendre_sum(n, x, 1)), 1e-11) << n;
    }
}

TEST(Quadrature, NodesAreRootsOfOracle) {
  for (int n = 1; n <= 12; ++n) {
    const auto gl = compute_rule(RuleKind::Gauss, n);
    ASSERT_EQ(gl.size(), n);
    for (double x : gl.nodes) EXPECT_NEAR(static_cast<double>(legendre_sum(n, x, 0)), 0.0, 1e-13);
    const auto gll = compute_rule(RuleKind::GaussLobatto, n);
    ASSERT_EQ(gll.size(), n + 1);
    EXPECT_EQ(gll.nodes.front(), -1.0);
    EXPECT_EQ(gll.nodes.back(), 1.0);
    for (int k = 1; k < n; ++k) EXPECT_NEAR(static_cast<double>(legendre_sum(n, gll.nodes[k], 1)), 0.0, 1e-11);
  }
}

TEST(Quadrature, ExactForDegree2NMinus1) {
  for (int n = 1; n <= 12; ++n)
    for (RuleKind kind : {RuleKind::Gauss, RuleKind::GaussLobatto}) {
      const auto r = compute_rule(kind, n);
      for (int d = 0; d <= 2 * n - 1; ++d) {
        double s = 0;
        for (int q = 0; q < r.size(); ++q) s += r.weights[q] * std::pow(r.nodes[q], d);
        const double exact = (d % 2) ? 0.0 : 2.0 / (d + 1);
        EXPECT_NEAR(s, exact, 1e-13) << "n=" << n << " d=" << d;
      }
    }
}

TEST(Quadrature, RejectsBadOrder) {
  EXPECT_THROW((void)compute_rule(RuleKind::Gauss, 0), std::domain_error);
  EXPECT_THROW((void)compute_rule(RuleKind::GaussLobatto, kMaxRuleOrder + 1), std::domain_error);
}

// Kronecker property of the nodal basis.
TEST(BasisProperties, Kronecker) {
  for (int n = 1; n <= 12; ++n) {
    const BasisSet b(RuleKind::GaussLobatto, n);
    for (int k = 0; k <= n; ++k) {
      const auto v = b.lagrange().values(b.rule().nodes[k]);
      for (int i = 0; i <= n; ++i) EXPECT_NEAR(v[i], i == k ? 1.0 : 0.0, 1e-11);
    }
  }
}

// Integral of e_i over the k-th GLL interval is delta_ik.
TEST(BasisProperties, EdgeIntegralDuality) {
  for (int n = 1; n <= 12; ++n) {
    const BasisSet b(RuleKind::GaussLobatto, n);
    const auto& x = b.rule().nodes;
    for (int k = 1; k <= n; ++k)
      for (int i = 1; i <= n; ++i) {
        const double s = integrate([&](double t) { return b.edge_eval(i, t); }, x[k - 1], x[k]);
        EXPECT_NEAR(s, i == k ? 1.0 : 0.0, 1e-11) << "n=" << n;
      }
  }
}

// d/dx sum phi_i h_i = sum (phi_i - phi_{i-1}) e_i.
TEST(BasisProperties, DerivativeToEdgeIdentity) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int n = 1; n <= 12; ++n) {
    const BasisSet b(RuleKind::GaussLobatto, n);
    std::vector<double> phi(n + 1);
    for (auto& p : phi) p = u(rng);
    const auto ec = derivative_to_edge(phi);
    for (int s = 0; s < 10; ++s) {
      const double x = u(rng);
      const auto dh = b.lagrange().derivatives(x);
      const auto e = b.edge_values(x);
      double lhs = 0, rhs = 0;
      for (int i = 0; i <= n; ++i) lhs += phi[i] * dh[i];
      for (int i = 0; i < n; ++i) rhs += ec[i] * e[i];
      EXPECT_NEAR(lhs, rhs, 1e-11 * std::max(1.0, std::abs(lhs))) << "n=" << n;
    }
  }
}

TEST(BasisProperties, EdgeFunctionsIntegrateToCount) {
  // sum_i e_i is the derivative of the interpolant of phi_i = i, so its
  // integral over [-1, 1] is phi_N - phi_0 = N.
  for (int n = 1; n <= 8; ++n) {
    const BasisSet b(RuleKind::GaussLobatto, n);
    const double s = integrate(
        [&](double t) {
          double a = 0;
          for (double v : b.edge_values(t)) a += v;
          return a;
        },
        -1, 1);
    EXPECT_NEAR(s, n, 1e-11);
  }
}

TEST(Lagrange, DerivativesMatchFiniteDifferences) {
  const auto r = compute_rule(RuleKind::GaussLobatto, 7);
  const LagrangeBasis b(r.nodes);
  const double h = 1e-6;
  for (double x : {-0.7, -0.11, 0.33, 0.9}) {
    const auto d = b.derivatives(x);
    const auto vp = b.values(x + h), vm = b.values(x - h);
    std::vector<double> d2(b.size()), dp(b.size()), dm(b.size());
    b.second_derivatives(x, d2);
    b.derivatives(x + h, dp);
    b.derivatives(x - h, dm);
    for (int i = 0; i < b.size(); ++i) {
      EXPECT_NEAR(d[i], (vp[i] - vm[i]) / (2 * h), 1e-6);
      EXPECT_NEAR(d2[i], (dp[i] - dm[i]) / (2 * h), 1e-5);
    }
  }
}

TEST(Lagrange, PartitionOfUnity) {
  const LagrangeBasis b(compute_rule(RuleKind::Gauss, 9).nodes);
  for (double x : {-1.0, -0.3, 0.5, 1.0}) {
    double s = 0, ds = 0;
    for (double v : b.values(x)) s += v;
    for (double v : b.derivatives(x)) ds += v;
    EXPECT_NEAR(s, 1.0, 1e-13);
    EXPECT_NEAR(ds, 0.0, 1e-11);
  }
}

TEST(Basis, EdgeIndexChecked) {
  const BasisSet b(RuleKind::GaussLobatto, 3);
  EXPECT_THROW((void)b.edge_eval(0, 0.0), std::out_of_range);
  EXPECT_THROW((void)b.edge_eval(4, 0.0), std::out_of_range);
  EXPECT_THROW((void)b.edge_eval(1, 1.5), std::domain_error);
}
