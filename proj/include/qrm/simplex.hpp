// Dense tableau simplex for small linear programs of the form
//   min c^T x  s.t.  A x <= b,  x >= 0,  with b >= 0,
// so the slack basis is always a feasible starting point.
#pragma once

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <vector>

namespace qrm {

enum class LpStatus { Optimal, Unbounded, IterationLimit };

template <typename Scalar>
struct LpResult {
  LpStatus status = LpStatus::Optimal;
  Scalar value = Scalar(0);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x;
};

template <typename Scalar>
LpResult<Scalar> simplex_minimize(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& A,
                                  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b,
                                  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& c,
                                  int max_iterations = 10000) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  const Eigen::Index rhs = n + m;
  const Scalar tol = Scalar(1e-11);

  Matrix T = Matrix::Zero(m + 1, n + m + 1);
  T.topLeftCorner(m, n) = A;
  T.block(0, n, m, m).setIdentity();
  T.col(rhs).head(m) = b;
  T.row(m).head(n) = c.transpose();

  std::vector<Eigen::Index> basis(static_cast<size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<size_t>(i)] = n + i;

  LpResult<Scalar> result;
  int degenerate_streak = 0;
  for (int iter = 0;; ++iter) {
    if (iter >= max_iterations) {
      result.status = LpStatus::IterationLimit;
      return result;
    }
    // Dantzig pricing, falling back to Bland's rule while stalling.
    const bool bland = degenerate_streak > 8;
    Eigen::Index enter = -1;
    Scalar best = -tol;
    for (Eigen::Index j = 0; j < rhs; ++j) {
      if (T(m, j) < best) {
        enter = j;
        if (bland) break;
        best = T(m, j);
      }
    }
    if (enter < 0) break;

    Eigen::Index leave = -1;
    Scalar ratio = std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      const Scalar a = T(i, enter);
      if (a > tol) {
        const Scalar r = T(i, rhs) / a;
        if (r < ratio - tol ||
            (r <= ratio + tol && leave >= 0 && basis[static_cast<size_t>(i)] < basis[static_cast<size_t>(leave)])) {
          ratio = r;
          leave = i;
        }
      }
    }
    if (leave < 0) {
      result.status = LpStatus::Unbounded;
      result.value = -std::numeric_limits<Scalar>::infinity();
      return result;
    }
    degenerate_streak = ratio <= tol ? degenerate_streak + 1 : 0;

    T.row(leave) /= T(leave, enter);
    for (Eigen::Index i = 0; i <= m; ++i) {
      if (i != leave) {
        const Scalar f = T(i, enter);
        if (f != Scalar(0)) T.row(i) -= f * T.row(leave);
      }
    }
    basis[static_cast<size_t>(leave)] = enter;
  }

  result.status = LpStatus::Optimal;
  result.value = -T(m, rhs);
  result.x = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index v = basis[static_cast<size_t>(i)];
    if (v < n) result.x[v] = T(i, rhs);
  }
  return result;
}

}  // namespace qrm
