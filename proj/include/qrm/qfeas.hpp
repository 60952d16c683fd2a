// Branch-and-bound feasibility for systems of strict quadratic inequalities
//   q_j(x) = x^T A_j x + b_j^T x + c_j < 0,  j = 1..M,  lower <= x <= upper.
//
// Rectangles are popped from a depth-first stack. A rectangle is discarded as
// soon as one constraint has a non-negative lower bound on it; otherwise it is
// split in half along its longest edge until the depth cap is reached.
// Constraints whose upper bound is negative on a rectangle hold everywhere in
// it and are dropped for the whole subtree.
#pragma once

#include "qrm/quadratic.hpp"
#include "qrm/simplex.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace qrm {

struct SolverConfig {
  int maxDepth = 30;
  double epsVolume = 1e-12;
  std::uint64_t rngSeed = 1;
  std::uint64_t maxRects = 20'000'000;
};

enum class FeasibilityStatus { Feasible, Infeasible, BudgetExceeded };

template <typename Scalar, int Dim>
struct FeasibilityResult {
  FeasibilityStatus status = FeasibilityStatus::Infeasible;
  std::optional<VectorN<Scalar, Dim>> witness;
  std::uint64_t rectanglesExplored = 0;

  bool feasible() const { return status == FeasibilityStatus::Feasible; }
};

namespace detail {

// min of a*x^2 + b*x on [lo, hi]
template <typename Scalar>
Scalar min_univariate(Scalar a, Scalar b, Scalar lo, Scalar hi) {
  Scalar m = std::min(a * lo * lo + b * lo, a * hi * hi + b * hi);
  if (a > Scalar(0)) {
    const Scalar s = -b / (Scalar(2) * a);
    if (s > lo && s < hi) m = std::min(m, a * s * s + b * s);
  }
  return m;
}

template <typename Scalar, int Dim>
Scalar corner_minimum(const Quadratic<Scalar, Dim>& q, const Rect<Scalar, Dim>& r) {
  Scalar best = std::numeric_limits<Scalar>::infinity();
  VectorN<Scalar, Dim> x;
  for (unsigned mask = 0; mask < (1u << Dim); ++mask) {
    for (int i = 0; i < Dim; ++i) x[i] = (mask >> i) & 1u ? r.upper[i] : r.lower[i];
    best = std::min(best, q(x));
  }
  return best;
}

template <typename Scalar, int Dim>
Scalar separable_minimum(const Quadratic<Scalar, Dim>& q, const Rect<Scalar, Dim>& r) {
  Scalar sum = q.c;
  for (int i = 0; i < Dim; ++i) sum += min_univariate(q.A(i, i), q.b[i], r.lower[i], r.upper[i]);
  return sum;
}

// Exactly one nonzero diagonal entry: the expression is multilinear in the
// other variables, so their extreme values are attained at corners; the
// remaining variable is minimised in closed form for each corner.
template <typename Scalar, int Dim>
Scalar single_cross_minimum(const Quadratic<Scalar, Dim>& q, const Rect<Scalar, Dim>& r) {
  int k = 0;
  while (k < Dim && q.A(k, k) == Scalar(0)) ++k;
  Scalar best = std::numeric_limits<Scalar>::infinity();
  VectorN<Scalar, Dim> x;
  for (unsigned mask = 0; mask < (1u << (Dim - 1)); ++mask) {
    int bit = 0;
    for (int i = 0; i < Dim; ++i) {
      if (i == k) { x[i] = Scalar(0); continue; }
      x[i] = (mask >> bit++) & 1u ? r.upper[i] : r.lower[i];
    }
    const Scalar rest = q(x);  // value with x_k = 0
    Scalar lin = q.b[k];
    for (int j = 0; j < Dim; ++j)
      if (j != k) lin += Scalar(2) * q.A(k, j) * x[j];
    best = std::min(best, rest + min_univariate(q.A(k, k), lin, r.lower[k], r.upper[k]));
  }
  return best;
}

// Interval upper bound, valid for any form.
template <typename Scalar, int Dim>
Scalar interval_maximum(const Quadratic<Scalar, Dim>& q, const Rect<Scalar, Dim>& r) {
  Scalar sum = q.c;
  for (int i = 0; i < Dim; ++i) {
    const Scalar lo = r.lower[i], hi = r.upper[i];
    sum += std::max(q.b[i] * lo, q.b[i] * hi);
    const Scalar sq_hi = std::max(lo * lo, hi * hi);
    const Scalar sq_lo = (lo < Scalar(0) && hi > Scalar(0)) ? Scalar(0) : std::min(lo * lo, hi * hi);
    sum += std::max(q.A(i, i) * sq_lo, q.A(i, i) * sq_hi);
    for (int j = i + 1; j < Dim; ++j) {
      const Scalar a = Scalar(2) * q.A(i, j);
      if (a == Scalar(0)) continue;
      const Scalar p[4] = {lo * r.lower[j], lo * r.upper[j], hi * r.lower[j], hi * r.upper[j]};
      Scalar m = -std::numeric_limits<Scalar>::infinity();
      for (Scalar v : p) m = std::max(m, a * v);
      sum += m;
    }
  }
  return sum;
}

}  // namespace detail

/// Lower bound of a general quadratic on r from the reformulation-linearization
/// relaxation: shift to z = x - lower, take pairwise products of the bound
/// factors (d - z) >= 0 and z >= 0, replace z_k z_l by w_kl and solve the LP.
/// Variables are scaled by the box widths so the constraint polytope is the
/// same for every rectangle.
template <typename Scalar, int Dim>
Scalar rlt_lower_bound(const Quadratic<Scalar, Dim>& q, const Rect<Scalar, Dim>& r) {
  using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const VectorN<Scalar, Dim> d = r.widths();
  const VectorN<Scalar, Dim> lin = Scalar(2) * q.A * r.lower + q.b;
  const Scalar offset = q(r.lower);

  struct Pair { int k, l; Scalar coef; };
  Pair pairs[Dim * (Dim + 1) / 2];
  int npairs = 0;
  for (int k = 0; k < Dim; ++k)
    for (int l = k; l < Dim; ++l) {
      const Scalar a = (k == l ? q.A(k, k) : Scalar(2) * q.A(k, l)) * d[k] * d[l];
      if (a != Scalar(0)) pairs[npairs++] = {k, l, a};
    }

  const int nvar = Dim + npairs;
  int nrow = Dim;
  for (int p = 0; p < npairs; ++p) nrow += pairs[p].k == pairs[p].l ? 2 : 3;

  MatrixX A = MatrixX::Zero(nrow, nvar);
  VectorX b = VectorX::Zero(nrow);
  VectorX c = VectorX::Zero(nvar);
  int row = 0;
  for (int k = 0; k < Dim; ++k) {
    A(row, k) = 1;
    b[row++] = 1;
    c[k] = lin[k] * d[k];
  }
  Scalar scale = std::abs(offset);
  for (int k = 0; k < Dim; ++k) scale += std::abs(c[k]);
  for (int p = 0; p < npairs; ++p) {
    const int s = Dim + p;
    const auto [k, l, a] = pairs[p];
    c[s] = a;
    scale += std::abs(a);
    if (k == l) {
      // (1 - t)^2 >= 0  and  t (1 - t) >= 0
      A(row, k) = 2; A(row, s) = -1; b[row++] = 1;
      A(row, s) = 1; A(row, k) = -1; b[row++] = 0;
    } else {
      // (1 - t_k)(1 - t_l) >= 0,  (1 - t_k) t_l >= 0,  t_k (1 - t_l) >= 0
      A(row, k) = 1; A(row, l) = 1; A(row, s) = -1; b[row++] = 1;
      A(row, s) = 1; A(row, l) = -1; b[row++] = 0;
      A(row, s) = 1; A(row, k) = -1; b[row++] = 0;
    }
  }
  const LpResult<Scalar> lp = simplex_minimize<Scalar>(A, b, c);
  if (lp.status != LpStatus::Optimal) return -std::numeric_limits<Scalar>::infinity();
  // Absorb LP round-off so the bound never overshoots the true minimum.
  return lp.value + offset - Scalar(1e-9) * std::max(Scalar(1), scale);
}

/// Value <= min of the constraint expression over r. Exact for the first four
/// forms; RLT relaxation for general quadratics.
template <typename Scalar, int Dim>
Scalar lower_bound(const QuadConstraint<Scalar, Dim>& con, const Rect<Scalar, Dim>& r) {
  const auto& q = con.expr;
  switch (con.form) {
    case QuadForm::Linear: {
      Scalar sum = q.c;
      for (int i = 0; i < Dim; ++i) sum += std::min(q.b[i] * r.lower[i], q.b[i] * r.upper[i]);
      return sum;
    }
    case QuadForm::Bilinear: return detail::corner_minimum(q, r);
    case QuadForm::DiagonalQuadratic: return detail::separable_minimum(q, r);
    case QuadForm::SingleCross: return detail::single_cross_minimum(q, r);
    case QuadForm::General: return rlt_lower_bound(q, r);
  }
  return -std::numeric_limits<Scalar>::infinity();
}

/// Value >= max of the constraint expression over r.
template <typename Scalar, int Dim>
Scalar upper_bound(const QuadConstraint<Scalar, Dim>& con, const Rect<Scalar, Dim>& r) {
  if (con.form == QuadForm::General) return detail::interval_maximum(con.expr, r);
  QuadConstraint<Scalar, Dim> neg;
  neg.expr = -con.expr;
  neg.form = con.form;
  return -lower_bound(neg, r);
}

template <typename Scalar, int Dim>
FeasibilityResult<Scalar, Dim> solve(std::span<const QuadConstraint<Scalar, Dim>> constraints,
                                     const Rect<Scalar, Dim>& box, const SolverConfig& cfg) {
  using Vector = VectorN<Scalar, Dim>;
  if (constraints.size() > 64) throw std::invalid_argument("solve: at most 64 constraints supported");
  if (!box.valid()) throw std::invalid_argument("solve: box must satisfy lower < upper");
  if (cfg.maxDepth < 1 || !(cfg.epsVolume > 0))
    throw std::invalid_argument("solve: need maxDepth >= 1 and epsVolume > 0");

  FeasibilityResult<Scalar, Dim> result;
  const std::uint64_t all = constraints.size() == 64 ? ~std::uint64_t(0)
                                                     : ((std::uint64_t(1) << constraints.size()) - 1);
  auto satisfies_all = [&](const Vector& x) {
    for (const auto& c : constraints)
      if (!(c(x) < Scalar(0))) return false;
    return true;
  };

  struct Node { Rect<Scalar, Dim> rect; std::uint64_t active; };
  std::vector<Node> stack;
  stack.reserve(static_cast<size_t>(4 * cfg.maxDepth + 8));
  stack.push_back({box, all});

  std::mt19937_64 rng(cfg.rngSeed);
  std::uniform_real_distribution<Scalar> unit(Scalar(0), Scalar(1));

  while (!stack.empty()) {
    Node node = std::move(stack.back());
    stack.pop_back();
    if (++result.rectanglesExplored > cfg.maxRects) {
      result.status = FeasibilityStatus::BudgetExceeded;
      return result;
    }
    const Rect<Scalar, Dim>& r = node.rect;
    if (r.volume() < cfg.epsVolume) continue;

    // Candidate points: the centre and one random point of the rectangle.
    Vector candidates[2];
    candidates[0] = r.center();
    for (int i = 0; i < Dim; ++i) candidates[1][i] = r.lower[i] + unit(rng) * (r.upper[i] - r.lower[i]);
    for (const Vector& x : candidates) {
      bool ok = true;
      for (size_t j = 0; j < constraints.size() && ok; ++j)
        if ((node.active >> j) & 1u) ok = constraints[j](x) < Scalar(0);
      if (ok && satisfies_all(x)) {
        result.status = FeasibilityStatus::Feasible;
        result.witness = x;
        return result;
      }
    }

    bool pruned = false;
    for (size_t j = 0; j < constraints.size(); ++j) {
      if (!((node.active >> j) & 1u)) continue;
      if (lower_bound(constraints[j], r) >= Scalar(0)) { pruned = true; break; }
      if (upper_bound(constraints[j], r) < Scalar(0)) node.active &= ~(std::uint64_t(1) << j);
    }
    if (pruned) continue;
    if (node.active == 0 && satisfies_all(candidates[0])) {
      result.status = FeasibilityStatus::Feasible;
      result.witness = candidates[0];
      return result;
    }
    if (r.depth >= cfg.maxDepth) continue;

    int axis = 0;
    r.widths().maxCoeff(&axis);
    const Scalar mid = Scalar(0.5) * (r.lower[axis] + r.upper[axis]);
    Node hi{r, node.active};
    Node lo{r, node.active};
    lo.rect.upper[axis] = mid;
    hi.rect.lower[axis] = mid;
    lo.rect.depth = hi.rect.depth = r.depth + 1;
    stack.push_back(std::move(hi));
    stack.push_back(std::move(lo));
  }
  result.status = FeasibilityStatus::Infeasible;
  return result;
}

template <typename Scalar, int Dim>
FeasibilityResult<Scalar, Dim> solve(const std::vector<QuadConstraint<Scalar, Dim>>& constraints,
                                     const Rect<Scalar, Dim>& box, const SolverConfig& cfg) {
  return solve<Scalar, Dim>(std::span<const QuadConstraint<Scalar, Dim>>(constraints), box, cfg);
}

}  // namespace qrm
