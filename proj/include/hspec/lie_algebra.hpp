#pragma once

#include <string>
#include <vector>

#include "hspec/errors.hpp"
#include "hspec/linalg.hpp"

namespace hspec {

// A compact Lie algebra given by a g0-orthonormal basis and a faithful
// matrix realization. Structure constants are derived from the matrices.
struct LieAlgebraData {
  int dim_g = 0;
  std::vector<std::string> basis_labels;
  std::vector<double> structure_constants;  // c[(i*m + j)*m + k]
  std::vector<CMatrix> matrix_realization;

  double c(int i, int j, int k) const { return structure_constants[(size_t(i) * dim_g + j) * dim_g + k]; }

  // Matrix of ad(x) acting on coordinate vectors.
  RMatrix ad(const RVector& x) const {
    RMatrix a = RMatrix::Zero(dim_g, dim_g);
    for (int i = 0; i < dim_g; ++i) {
      if (x(i) == 0.0) continue;
      for (int j = 0; j < dim_g; ++j)
        for (int k = 0; k < dim_g; ++k) a(k, j) += x(i) * c(i, j, k);
    }
    return a;
  }

  RVector bracket(const RVector& x, const RVector& y) const { return ad(x) * y; }

  CMatrix to_matrix(const RVector& x) const {
    CMatrix out = CMatrix::Zero(matrix_realization[0].rows(), matrix_realization[0].cols());
    for (int i = 0; i < dim_g; ++i)
      if (x(i) != 0.0) out += x(i) * matrix_realization[size_t(i)];
    return out;
  }

  // Coordinates of a matrix in the span of the realization (least squares
  // against the Frobenius Gram matrix).
  RVector coords(const CMatrix& m) const {
    RVector r(dim_g);
    for (int a = 0; a < dim_g; ++a)
      r(a) = (matrix_realization[size_t(a)].adjoint() * m).trace().real();
    return gram_inverse_ * r;
  }

  void finalize() {
    dim_g = int(matrix_realization.size());
    RMatrix gram(dim_g, dim_g);
    for (int a = 0; a < dim_g; ++a)
      for (int b = 0; b < dim_g; ++b)
        gram(a, b) = (matrix_realization[size_t(a)].adjoint() * matrix_realization[size_t(b)]).trace().real();
    gram_inverse_ = gram.inverse();
    structure_constants.assign(size_t(dim_g) * dim_g * dim_g, 0.0);
    for (int i = 0; i < dim_g; ++i)
      for (int j = 0; j < dim_g; ++j) {
        const CMatrix& a = matrix_realization[size_t(i)];
        const CMatrix& b = matrix_realization[size_t(j)];
        RVector cc = coords(a * b - b * a);
        for (int k = 0; k < dim_g; ++k) {
          double v = cc(k);
          if (std::abs(v) < 1e-14) v = 0.0;
          structure_constants[(size_t(i) * dim_g + j) * dim_g + k] = v;
        }
      }
  }

 private:
  RMatrix gram_inverse_;
};

struct AlgebraResiduals {
  double antisymmetry = 0.0;
  double jacobi = 0.0;
  double total_antisymmetry = 0.0;
  double realization = 0.0;
};

inline AlgebraResiduals algebra_residuals(const LieAlgebraData& g) {
  AlgebraResiduals r;
  const int m = g.dim_g;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        r.antisymmetry = std::max(r.antisymmetry, std::abs(g.c(i, j, k) + g.c(j, i, k)));
        r.total_antisymmetry = std::max(r.total_antisymmetry, std::abs(g.c(i, j, k) + g.c(i, k, j)));
        // [[Ei,Ej],Ek] + cyclic, coefficient on El
        for (int l = 0; l < m; ++l) {
          double s = 0.0;
          for (int p = 0; p < m; ++p)
            s += g.c(i, j, p) * g.c(p, k, l) + g.c(j, k, p) * g.c(p, i, l) + g.c(k, i, p) * g.c(p, j, l);
          r.jacobi = std::max(r.jacobi, std::abs(s));
        }
      }
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const CMatrix& a = g.matrix_realization[size_t(i)];
      const CMatrix& b = g.matrix_realization[size_t(j)];
      CMatrix diff = a * b - b * a;
      for (int k = 0; k < m; ++k) diff -= g.c(i, j, k) * g.matrix_realization[size_t(k)];
      r.realization = std::max(r.realization, diff.cwiseAbs().maxCoeff());
    }
  return r;
}

}  // namespace hspec
