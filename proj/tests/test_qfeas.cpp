#include "qrm/qfeas.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <cmath>
#include <random>

using namespace qrm;

namespace {

template <int Dim>
Quadratic<double, Dim> random_quadratic(std::mt19937_64& rng, QuadForm form) {
  std::uniform_real_distribution<double> u(-2, 2);
  Quadratic<double, Dim> q;
  for (int i = 0; i < Dim; ++i) q.b[i] = u(rng);
  q.c = u(rng);
  switch (form) {
    case QuadForm::Linear: break;
    case QuadForm::Bilinear:
      for (int i = 0; i < Dim; ++i)
        for (int j = i + 1; j < Dim; ++j) q.A(i, j) = q.A(j, i) = u(rng);
      break;
    case QuadForm::DiagonalQuadratic:
      for (int i = 0; i < Dim; ++i) q.A(i, i) = u(rng);
      break;
    case QuadForm::SingleCross:
      q.A(0, 0) = u(rng);
      for (int i = 0; i < Dim; ++i)
        for (int j = i + 1; j < Dim; ++j) q.A(i, j) = q.A(j, i) = u(rng);
      break;
    case QuadForm::General:
      for (int i = 0; i < Dim; ++i)
        for (int j = i; j < Dim; ++j) q.A(i, j) = q.A(j, i) = u(rng);
      break;
  }
  return q;
}

template <int Dim>
Rect<double, Dim> random_rect(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-3, 3);
  Rect<double, Dim> r;
  for (int i = 0; i < Dim; ++i) {
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    if (b - a < 1e-3) b = a + 1e-3;
    r.lower[i] = a;
    r.upper[i] = b;
  }
  return r;
}

template <int Dim>
void check_bounds(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const QuadForm forms[] = {QuadForm::Linear, QuadForm::Bilinear, QuadForm::DiagonalQuadratic,
                            QuadForm::SingleCross, QuadForm::General};
  for (int trial = 0; trial < 400; ++trial) {
    const QuadForm f = forms[trial % 5];
    const QuadConstraint<double, Dim> con(random_quadratic<Dim>(rng, f));
    CHECK(con.form == f);
    const Rect<double, Dim> r = random_rect<Dim>(rng);
    const double lo = lower_bound(con, r);
    const double hi = upper_bound(con, r);
    const double mn = oracle::exact_box_minimum(con.expr, r);
    const double mx = -oracle::exact_box_minimum(Quadratic<double, Dim>(-con.expr), r);
    CHECK(lo <= mn + 1e-9);
    CHECK(hi >= mx - 1e-9);
    if (f != QuadForm::General) CHECK(std::abs(lo - mn) <= 1e-6 * std::max(1.0, std::abs(mn)));
  }
}

}  // namespace

TEST_CASE("classify by sparsity") {
  Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
  CHECK(classify<double, 3>(A) == QuadForm::Linear);
  A(0, 1) = A(1, 0) = 1;
  CHECK(classify<double, 3>(A) == QuadForm::Bilinear);
  A(2, 2) = 1;
  CHECK(classify<double, 3>(A) == QuadForm::SingleCross);
  A(1, 1) = 1;
  CHECK(classify<double, 3>(A) == QuadForm::General);
  A(0, 1) = A(1, 0) = 0;
  CHECK(classify<double, 3>(A) == QuadForm::DiagonalQuadratic);
}

TEST_CASE("affine products assemble quadratics") {
  using Af = Affine<double, 2>;
  const Af x = Af::variable(0), y = Af::variable(1);
  const Quadratic<double, 2> q = (x - Af::constant(1)) * (y + Af::constant(2));  // xy + 2x - y - 2
  const Eigen::Vector2d p(3, -1);
  CHECK(q(p) == doctest::Approx(3 * -1 + 2 * 3 - (-1) - 2));
}

TEST_CASE("bounds against the face-enumeration oracle") {
  check_bounds<2>(1);
  check_bounds<3>(2);
  check_bounds<4>(3);
}

TEST_CASE("simplex on a small LP") {
  // min -x - y  s.t. x + 2y <= 4, 3x + y <= 6
  Eigen::MatrixXd A(2, 2);
  A << 1, 2, 3, 1;
  Eigen::VectorXd b(2), c(2);
  b << 4, 6;
  c << -1, -1;
  const auto lp = simplex_minimize<double>(A, b, c);
  REQUIRE(lp.status == LpStatus::Optimal);
  CHECK(lp.value == doctest::Approx(-2.8));
  CHECK(lp.x[0] == doctest::Approx(1.6));
  CHECK(lp.x[1] == doctest::Approx(1.2));
}

TEST_CASE("solve feasible and infeasible systems") {
  using Af = Affine<double, 2>;
  const Af x = Af::variable(0), y = Af::variable(1);
  const auto disc = x * x + y * y - Quadratic<double, 2>(Af::constant(1));  // x^2 + y^2 - 1
  const auto box = Rect<double, 2>::cube(-10, 10);
  SolverConfig cfg;

  std::vector<QuadConstraint<double, 2>> sys{QuadConstraint<double, 2>(disc),
                                             QuadConstraint<double, 2>(Af::constant(0.5) - x)};
  auto res = solve(sys, box, cfg);
  REQUIRE(res.status == FeasibilityStatus::Feasible);
  REQUIRE(res.witness);
  for (const auto& c : sys) CHECK(c.satisfied(*res.witness));

  // touching closures: x^2 + y^2 < 1 and x > 1
  sys[1] = QuadConstraint<double, 2>(Af::constant(1.0) - x);
  res = solve(sys, box, cfg);
  CHECK(res.status == FeasibilityStatus::Infeasible);

  // separated: x^2 + y^2 < 1 and x > 1.1
  sys[1] = QuadConstraint<double, 2>(Af::constant(1.1) - x);
  res = solve(sys, box, cfg);
  CHECK(res.status == FeasibilityStatus::Infeasible);
  CHECK_FALSE(res.witness);
}

TEST_CASE("thin feasible region is found") {
  // 0 < x y - 1 < 1e-3 with x, y in [0, 10]
  using Af = Affine<double, 2>;
  const Af x = Af::variable(0), y = Af::variable(1);
  const Quadratic<double, 2> xy = x * y;
  std::vector<QuadConstraint<double, 2>> sys{QuadConstraint<double, 2>(1.0 - xy),
                                             QuadConstraint<double, 2>(xy - 1.001)};
  const auto res = solve(sys, Rect<double, 2>::cube(0, 10), SolverConfig{});
  REQUIRE(res.feasible());
  const double v = (*res.witness)[0] * (*res.witness)[1];
  CHECK(v > 1.0);
  CHECK(v < 1.001);
}

TEST_CASE("budget and argument errors") {
  using Af = Affine<double, 2>;
  const Af x = Af::variable(0), y = Af::variable(1);
  std::vector<QuadConstraint<double, 2>> sys{QuadConstraint<double, 2>(x * x + y * y - 1.0),
                                             QuadConstraint<double, 2>(Af::constant(1.0) - x)};
  SolverConfig cfg;
  cfg.maxRects = 5;
  CHECK(solve(sys, Rect<double, 2>::cube(-10, 10), cfg).status == FeasibilityStatus::BudgetExceeded);
  Rect<double, 2> bad = Rect<double, 2>::cube(0, 1);
  bad.upper[1] = 0;
  CHECK_THROWS_AS(solve(sys, bad, SolverConfig{}), std::invalid_argument);
  SolverConfig noVolume;
  noVolume.epsVolume = 0.0;
  CHECK_THROWS_AS(solve(sys, Rect<double, 2>::cube(-10, 10), noVolume), std::invalid_argument);
  SolverConfig noDepth;
  noDepth.maxDepth = 0;
  CHECK_THROWS_AS(solve(sys, Rect<double, 2>::cube(-10, 10), noDepth), std::invalid_argument);
}

TEST_CASE("solver is deterministic") {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 30; ++t) {
    std::vector<QuadConstraint<double, 3>> sys;
    for (int k = 0; k < 4; ++k) sys.emplace_back(random_quadratic<3>(rng, QuadForm::General));
    SolverConfig cfg;
    cfg.maxDepth = 18;
    const auto box = Rect<double, 3>::cube(-5, 5);
    const auto a = solve(sys, box, cfg);
    const auto b = solve(sys, box, cfg);
    CHECK(a.status == b.status);
    CHECK(a.rectanglesExplored == b.rectanglesExplored);
    if (a.witness) CHECK(*a.witness == *b.witness);
  }
}
