#include "fsi/quadrature.hpp"

#include <cmath>

namespace fsi {

std::vector<std::pair<double, double>> gauss_legendre(int n) {
  std::vector<std::pair<double, double>> out(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    out[i] = {x, 2.0 / ((1.0 - x * x) * dp * dp)};
  }
  return out;
}

namespace {

TetRule make_degree5() {
  TetRule r;
  r.degree = 5;
  auto orbit4 = [&](double a, double w) {
    const double b = 1.0 - 3.0 * a;
    for (int k = 0; k < 4; ++k) {
      std::array<double, 4> l{a, a, a, a};
      l[k] = b;
      r.bary.push_back(l);
      r.weight.push_back(w);
    }
  };
  auto orbit6 = [&](double a, double w) {
    const double b = 0.5 - a;
    const int pairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    for (const auto& p : pairs) {
      std::array<double, 4> l{b, b, b, b};
      l[p[0]] = a;
      l[p[1]] = a;
      r.bary.push_back(l);
      r.weight.push_back(w);
    }
  };
  orbit4(0.0927352503108912264, 0.01224884051939365826);
  orbit4(0.3108859192633006097, 0.01878132095300264180);
  orbit6(0.0455037041256496494, 0.007091003462846911);
  return r;
}

TetRule make_refined(const TetRule& base) {
  // Children of the red refinement, as barycentric corner sets of the parent.
  using B = std::array<double, 4>;
  const B v[4] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
  auto mid = [&](int i, int j) {
    B m;
    for (int k = 0; k < 4; ++k) m[k] = 0.5 * (v[i][k] + v[j][k]);
    return m;
  };
  const B m01 = mid(0, 1), m02 = mid(0, 2), m03 = mid(0, 3), m12 = mid(1, 2), m13 = mid(1, 3),
          m23 = mid(2, 3);
  const std::array<std::array<B, 4>, 8> kids = {{{v[0], m01, m02, m03},
                                                 {m01, v[1], m12, m13},
                                                 {m02, m12, v[2], m23},
                                                 {m03, m13, m23, v[3]},
                                                 {m01, m02, m03, m13},
                                                 {m01, m02, m12, m13},
                                                 {m02, m03, m13, m23},
                                                 {m02, m12, m13, m23}}};
  TetRule r;
  r.degree = base.degree;
  for (const auto& kid : kids) {
    for (std::size_t q = 0; q < base.size(); ++q) {
      B l{0, 0, 0, 0};
      for (int c = 0; c < 4; ++c)
        for (int k = 0; k < 4; ++k) l[k] += base.bary[q][c] * kid[c][k];
      r.bary.push_back(l);
      r.weight.push_back(base.weight[q] / 8.0);
    }
  }
  return r;
}

}  // namespace

const TetRule& tet_rule_degree5() {
  static const TetRule rule = make_degree5();
  return rule;
}

const TetRule& tet_rule_degree5_refined() {
  static const TetRule rule = make_refined(tet_rule_degree5());
  return rule;
}

TetRule refine_rule(const TetRule& base, int levels) {
  require(levels >= 0 && levels <= 4, "refine_rule: levels must be in [0, 4]");
  TetRule r = base;
  for (int k = 0; k < levels; ++k) r = make_refined(r);
  return r;
}

}  // namespace fsi
