// Quadratic expressions x^T A x + b^T x + c over a fixed number of variables,
// plus the affine algebra used to assemble them from geometric formulas.
#pragma once

#include <Eigen/Core>

#include <cassert>
#include <string_view>

namespace qrm {

template <typename Scalar, int Dim>
using VectorN = Eigen::Matrix<Scalar, Dim, 1>;

template <typename Scalar, int Dim>
using MatrixN = Eigen::Matrix<Scalar, Dim, Dim>;

template <typename Scalar, int Dim>
struct Quadratic;

/// Affine function g^T x + offset.
template <typename Scalar, int Dim>
struct Affine {
  VectorN<Scalar, Dim> grad = VectorN<Scalar, Dim>::Zero();
  Scalar offset = Scalar(0);

  static Affine constant(Scalar value) {
    Affine a;
    a.offset = value;
    return a;
  }

  static Affine variable(int index, Scalar scale = Scalar(1)) {
    assert(index >= 0 && index < Dim);
    Affine a;
    a.grad[index] = scale;
    return a;
  }

  Scalar operator()(const VectorN<Scalar, Dim>& x) const { return grad.dot(x) + offset; }

  Affine operator-() const { return {-grad, -offset}; }
  Affine& operator+=(const Affine& o) { grad += o.grad; offset += o.offset; return *this; }
  Affine& operator-=(const Affine& o) { grad -= o.grad; offset -= o.offset; return *this; }
  friend Affine operator+(Affine a, const Affine& b) { return a += b; }
  friend Affine operator-(Affine a, const Affine& b) { return a -= b; }
  friend Affine operator*(Scalar s, const Affine& a) { return {s * a.grad, s * a.offset}; }
  friend Affine operator*(const Affine& a, Scalar s) { return s * a; }

  friend Quadratic<Scalar, Dim> operator*(const Affine& a, const Affine& b) {
    Quadratic<Scalar, Dim> q;
    const MatrixN<Scalar, Dim> outer = a.grad * b.grad.transpose();
    q.A = Scalar(0.5) * (outer + outer.transpose());
    q.b = b.offset * a.grad + a.offset * b.grad;
    q.c = a.offset * b.offset;
    return q;
  }
};

/// x^T A x + b^T x + c with A symmetric.
template <typename Scalar, int Dim>
struct Quadratic {
  MatrixN<Scalar, Dim> A = MatrixN<Scalar, Dim>::Zero();
  VectorN<Scalar, Dim> b = VectorN<Scalar, Dim>::Zero();
  Scalar c = Scalar(0);

  Quadratic() = default;
  Quadratic(const MatrixN<Scalar, Dim>& A_, const VectorN<Scalar, Dim>& b_, Scalar c_) : A(A_), b(b_), c(c_) {}
  Quadratic(const Affine<Scalar, Dim>& a) : b(a.grad), c(a.offset) {}  // NOLINT: implicit promotion

  Scalar operator()(const VectorN<Scalar, Dim>& x) const { return x.dot(A * x) + b.dot(x) + c; }

  Quadratic operator-() const { return {-A, -b, -c}; }
  Quadratic& operator+=(const Quadratic& o) { A += o.A; b += o.b; c += o.c; return *this; }
  Quadratic& operator-=(const Quadratic& o) { A -= o.A; b -= o.b; c -= o.c; return *this; }
  friend Quadratic operator+(Quadratic a, const Quadratic& o) { return a += o; }
  friend Quadratic operator-(Quadratic a, const Quadratic& o) { return a -= o; }
  friend Quadratic operator*(Scalar s, const Quadratic& q) { return {s * q.A, s * q.b, s * q.c}; }
};

template <typename Scalar, int Dim>
Quadratic<Scalar, Dim> operator+(const Quadratic<Scalar, Dim>& q, const Affine<Scalar, Dim>& a) {
  return q + Quadratic<Scalar, Dim>(a);
}
template <typename Scalar, int Dim>
Quadratic<Scalar, Dim> operator-(const Quadratic<Scalar, Dim>& q, const Affine<Scalar, Dim>& a) {
  return q - Quadratic<Scalar, Dim>(a);
}
template <typename Scalar, int Dim>
Quadratic<Scalar, Dim> operator-(Scalar s, const Quadratic<Scalar, Dim>& q) {
  Quadratic<Scalar, Dim> r = -q;
  r.c += s;
  return r;
}
template <typename Scalar, int Dim>
Quadratic<Scalar, Dim> operator-(const Quadratic<Scalar, Dim>& q, Scalar s) {
  Quadratic<Scalar, Dim> r = q;
  r.c -= s;
  return r;
}

/// Structural classes, from cheapest to bound to most general.
enum class QuadForm { Linear, Bilinear, DiagonalQuadratic, SingleCross, General };

constexpr std::string_view to_string(QuadForm f) {
  switch (f) {
    case QuadForm::Linear: return "linear";
    case QuadForm::Bilinear: return "bilinear";
    case QuadForm::DiagonalQuadratic: return "diagonal-quadratic";
    case QuadForm::SingleCross: return "single-cross";
    case QuadForm::General: return "general";
  }
  return "?";
}

/// Most specific form that matches the sparsity of A. Zero tests are exact so
/// that every bound method stays valid for the matrix actually stored.
template <typename Scalar, int Dim>
QuadForm classify(const MatrixN<Scalar, Dim>& A) {
  int diag = 0;
  int off = 0;
  for (int i = 0; i < Dim; ++i) {
    if (A(i, i) != Scalar(0)) ++diag;
    for (int j = i + 1; j < Dim; ++j)
      if (A(i, j) != Scalar(0) || A(j, i) != Scalar(0)) ++off;
  }
  if (diag == 0 && off == 0) return QuadForm::Linear;
  if (diag == 0) return QuadForm::Bilinear;
  if (off == 0) return QuadForm::DiagonalQuadratic;
  if (diag == 1) return QuadForm::SingleCross;
  return QuadForm::General;
}

/// One strict inequality expr(x) < 0.
template <typename Scalar, int Dim>
struct QuadConstraint {
  Quadratic<Scalar, Dim> expr;
  QuadForm form = QuadForm::Linear;

  QuadConstraint() = default;
  explicit QuadConstraint(Quadratic<Scalar, Dim> e) : expr(std::move(e)), form(classify<Scalar, Dim>(expr.A)) {}

  Scalar operator()(const VectorN<Scalar, Dim>& x) const { return expr(x); }
  bool satisfied(const VectorN<Scalar, Dim>& x) const { return expr(x) < Scalar(0); }
};

/// Axis-aligned search rectangle with its subdivision depth.
template <typename Scalar, int Dim>
struct Rect {
  VectorN<Scalar, Dim> lower;
  VectorN<Scalar, Dim> upper;
  int depth = 0;

  static Rect cube(Scalar lo, Scalar hi) {
    return {VectorN<Scalar, Dim>::Constant(lo), VectorN<Scalar, Dim>::Constant(hi), 0};
  }

  VectorN<Scalar, Dim> center() const { return Scalar(0.5) * (lower + upper); }
  VectorN<Scalar, Dim> widths() const { return upper - lower; }
  Scalar volume() const { return widths().prod(); }
  bool valid() const { return (lower.array() < upper.array()).all(); }
  bool contains(const VectorN<Scalar, Dim>& x) const {
    return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
  }
};

}  // namespace qrm
