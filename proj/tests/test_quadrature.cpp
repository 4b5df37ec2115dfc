#include <cmath>

#include "doctest.h"
#include "fsi/quadrature.hpp"

using namespace fsi;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// Exact integral of x^a y^b z^c over the reference tetrahedron.
double monomial_exact(int a, int b, int c) {
  return factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 3);
}

double monomial_rule(const TetRule& rule, int a, int b, int c) {
  double s = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto& l = rule.bary[q];
    s += rule.weight[q] * std::pow(l[1], a) * std::pow(l[2], b) * std::pow(l[3], c);
  }
  return s;
}

}  // namespace

TEST_CASE("gauss_legendre integrates polynomials up to degree 2n-1") {
  for (int n = 1; n <= 8; ++n) {
    const auto gl = gauss_legendre(n);
    REQUIRE(gl.size() == static_cast<std::size_t>(n));
    for (int p = 0; p <= 2 * n - 1; ++p) {
      double s = 0.0;
      for (auto [x, w] : gl) s += w * std::pow(x, p);
      const double exact = (p % 2 == 1) ? 0.0 : 2.0 / (p + 1);
      CHECK(s == doctest::Approx(exact).epsilon(1e-13));
    }
  }
}

TEST_CASE("degree-5 tetrahedral rules are exact on all monomials of degree <= 5") {
  for (const TetRule* rule : {&tet_rule_degree5(), &tet_rule_degree5_refined()}) {
    for (int a = 0; a <= 5; ++a)
      for (int b = 0; a + b <= 5; ++b)
        for (int c = 0; a + b + c <= 5; ++c)
          CHECK(std::abs(monomial_rule(*rule, a, b, c) - monomial_exact(a, b, c)) < 1e-15);
  }
}

TEST_CASE("tetrahedral rule barycentric coordinates are valid") {
  const auto& rule = tet_rule_degree5();
  CHECK(rule.size() == 14);
  for (const auto& l : rule.bary) {
    CHECK(l[0] + l[1] + l[2] + l[3] == doctest::Approx(1.0));
    for (double v : l) CHECK(v > 0.0);
  }
}
