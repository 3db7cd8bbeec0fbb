#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

namespace hspec {

using cplx = std::complex<double>;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using CSparse = Eigen::SparseMatrix<cplx>;

namespace linalg {

// Orthonormal columns spanning ker(a). Singular values at or below
// rel_tol * max(1, s_max) are treated as zero.
template <class Mat>
Mat null_space(const Mat& a, double rel_tol = 1e-10) {
  const Eigen::Index cols = a.cols();
  if (cols == 0) return Mat(0, 0);
  if (a.rows() == 0) return Mat::Identity(cols, cols);
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  const double tol = rel_tol * std::max(1.0, smax);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol) ++rank;
  return svd.matrixV().rightCols(cols - rank);
}

// Same, with the threshold relative to the largest singular value only.
template <class Mat>
Mat null_space_relative(const Mat& a, double rel_tol) {
  const Eigen::Index cols = a.cols();
  if (cols == 0) return Mat(0, 0);
  if (a.rows() == 0) return Mat::Identity(cols, cols);
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * smax && s(i) > 0.0) ++rank;
  return svd.matrixV().rightCols(cols - rank);
}

// Orthonormal basis of the column space of a.
inline RMatrix column_space(const RMatrix& a, double rel_tol = 1e-10) {
  if (a.cols() == 0) return RMatrix(a.rows(), 0);
  Eigen::JacobiSVD<RMatrix> svd(a, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  const double tol = rel_tol * std::max(1.0, s.size() ? s(0) : 0.0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol) ++rank;
  return svd.matrixU().leftCols(rank);
}

inline Eigen::Index rank(const RMatrix& a, double rel_tol = 1e-10) {
  return column_space(a, rel_tol).cols();
}

inline RMatrix hcat(const RMatrix& a, const RMatrix& b) {
  if (a.cols() == 0) return b;
  if (b.cols() == 0) return a;
  RMatrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

inline double min_eigenvalue(const RMatrix& sym) {
  Eigen::SelfAdjointEigenSolver<RMatrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

inline RMatrix symmetrize(const RMatrix& a) { return 0.5 * (a + a.transpose()); }

// Matrix function of a symmetric matrix via its eigendecomposition.
template <class F>
RMatrix sym_function(const RMatrix& sym, F f) {
  Eigen::SelfAdjointEigenSolver<RMatrix> es(symmetrize(sym));
  RVector d = es.eigenvalues();
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = f(d(i));
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

inline CMatrix to_dense(const CSparse& s) { return CMatrix(s); }

inline CSparse to_sparse(const CMatrix& m, double drop = 0.0) {
  std::vector<Eigen::Triplet<cplx>> t;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (std::abs(m(i, j)) > drop) t.emplace_back(int(i), int(j), m(i, j));
  CSparse s(m.rows(), m.cols());
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

inline CSparse sparse_identity(Eigen::Index n) {
  CSparse s(n, n);
  s.setIdentity();
  return s;
}

inline CSparse kron(const CSparse& a, const CSparse& b) {
  std::vector<Eigen::Triplet<cplx>> t;
  t.reserve(size_t(a.nonZeros()) * size_t(b.nonZeros()));
  for (int ka = 0; ka < a.outerSize(); ++ka)
    for (CSparse::InnerIterator ia(a, ka); ia; ++ia)
      for (int kb = 0; kb < b.outerSize(); ++kb)
        for (CSparse::InnerIterator ib(b, kb); ib; ++ib)
          t.emplace_back(int(ia.row() * b.rows() + ib.row()), int(ia.col() * b.cols() + ib.col()),
                         ia.value() * ib.value());
  CSparse s(a.rows() * b.rows(), a.cols() * b.cols());
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

inline bool is_diagonal(const CSparse& s) {
  for (int k = 0; k < s.outerSize(); ++k)
    for (CSparse::InnerIterator it(s, k); it; ++it)
      if (it.row() != it.col() && it.value() != cplx(0.0)) return false;
  return true;
}

inline double max_abs(const CSparse& s) {
  double m = 0.0;
  for (int k = 0; k < s.outerSize(); ++k)
    for (CSparse::InnerIterator it(s, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

}  // namespace linalg
}  // namespace hspec
