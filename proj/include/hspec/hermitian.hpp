#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "hspec/linalg.hpp"

namespace hspec::hermitian {

// Hermitian operator stored either densely (small invariant spaces) or
// sparsely (large ones, e.g. SU(2) with trivial K).
struct Operator {
  bool dense = true;
  CMatrix d;
  CSparse s;
  Eigen::Index size() const { return dense ? d.rows() : s.rows(); }
};

namespace detail {

struct Component {
  std::vector<int> idx;  // sorted global indices
  int bandwidth = 0;     // in local order
};

inline std::vector<Component> components(const CSparse& m) {
  const int n = int(m.rows());
  std::vector<int> parent(static_cast<size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[size_t(i)] != i) i = parent[size_t(i)] = parent[size_t(parent[size_t(i)])];
    return i;
  };
  for (int k = 0; k < m.outerSize(); ++k)
    for (CSparse::InnerIterator it(m, k); it; ++it)
      if (it.value() != cplx(0.0)) {
        const int a = find(int(it.row())), b = find(int(it.col()));
        if (a != b) parent[size_t(a)] = b;
      }
  std::vector<int> comp_id(static_cast<size_t>(n), -1);
  std::vector<Component> out;
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    if (comp_id[size_t(r)] < 0) {
      comp_id[size_t(r)] = int(out.size());
      out.emplace_back();
    }
    out[size_t(comp_id[size_t(r)])].idx.push_back(i);
  }
  std::vector<int> local(static_cast<size_t>(n));
  for (const auto& c : out)
    for (size_t p = 0; p < c.idx.size(); ++p) local[size_t(c.idx[p])] = int(p);
  for (int k = 0; k < m.outerSize(); ++k)
    for (CSparse::InnerIterator it(m, k); it; ++it) {
      if (it.value() == cplx(0.0)) continue;
      auto& c = out[size_t(comp_id[size_t(find(int(it.row())))])];
      c.bandwidth = std::max(c.bandwidth, std::abs(local[size_t(it.row())] - local[size_t(it.col())]));
    }
  return out;
}

inline CMatrix extract(const CSparse& m, const std::vector<int>& idx) {
  const int k = int(idx.size());
  CMatrix out = CMatrix::Zero(k, k);
  if (k == int(m.rows())) return CMatrix(m);
  std::vector<int> local(static_cast<size_t>(m.rows()), -1);
  for (int p = 0; p < k; ++p) local[size_t(idx[size_t(p)])] = p;
  for (int p = 0; p < k; ++p)
    for (CSparse::InnerIterator it(m, idx[size_t(p)]); it; ++it) {
      const int r = local[size_t(it.row())];
      if (r >= 0) out(r, p) = it.value();
    }
  return out;
}

// Real symmetric tridiagonal with the same spectrum as a Hermitian
// tridiagonal (off-diagonal phases removed by a diagonal unitary).
inline void tridiagonal(const CSparse& m, const std::vector<int>& idx, RVector& diag, RVector& sub) {
  const int k = int(idx.size());
  diag.resize(k);
  sub.resize(std::max(0, k - 1));
  for (int p = 0; p < k; ++p) {
    diag(p) = m.coeff(idx[size_t(p)], idx[size_t(p)]).real();
    if (p + 1 < k) sub(p) = std::abs(m.coeff(idx[size_t(p + 1)], idx[size_t(p)]));
  }
}

inline bool tridiagonal_pd(const RVector& diag, const RVector& sub, double mu) {
  double d = diag(0) - mu;
  if (!(d > 0.0)) return false;
  for (Eigen::Index i = 1; i < diag.size(); ++i) {
    d = diag(i) - mu - sub(i - 1) * sub(i - 1) / d;
    if (!(d > 0.0)) return false;
  }
  return true;
}

// Cholesky restricted to the band; succeeds iff the matrix is numerically
// positive definite.
inline bool banded_pd(const CMatrix& a, int b, double mu) {
  const int n = int(a.rows());
  CMatrix l = CMatrix::Zero(n, b + 1);  // l(i, k) = L(i, i - k)
  for (int j = 0; j < n; ++j) {
    double diag = a(j, j).real() - mu;
    for (int k = 1; k <= b && j - k >= 0; ++k) diag -= std::norm(l(j, k));
    if (!(diag > 0.0)) return false;
    const double ljj = std::sqrt(diag);
    l(j, 0) = ljj;
    for (int i = j + 1; i <= std::min(n - 1, j + b); ++i) {
      cplx v = a(i, j);
      // sum over columns c < j within both bands: L(i,c) conj(L(j,c))
      for (int c = std::max(0, i - b); c < j; ++c) v -= l(i, i - c) * std::conj(l(j, j - c));
      l(i, i - j) = v / ljj;
    }
  }
  return true;
}

inline bool dense_pd(const CMatrix& a, double mu) {
  CMatrix s = a - mu * CMatrix::Identity(a.rows(), a.cols());
  Eigen::LLT<CMatrix> llt(s);
  return llt.info() == Eigen::Success;
}

}  // namespace detail

inline RVector dense_eigenvalues(const CMatrix& a) {
  if (a.rows() == 1) return RVector::Constant(1, a(0, 0).real());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

// All eigenvalues, ascending.
inline std::vector<double> eigenvalues(const Operator& op) {
  std::vector<double> out;
  if (op.dense) {
    RVector ev = dense_eigenvalues(op.d);
    out.assign(ev.data(), ev.data() + ev.size());
    return out;
  }
  for (const auto& c : detail::components(op.s)) {
    if (c.bandwidth <= 1 && c.idx.size() > 1) {
      RVector dg, sb;
      detail::tridiagonal(op.s, c.idx, dg, sb);
      Eigen::SelfAdjointEigenSolver<RMatrix> es;
      es.computeFromTridiagonal(dg, sb, Eigen::EigenvaluesOnly);
      for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.push_back(es.eigenvalues()(i));
    } else {
      RVector ev = dense_eigenvalues(detail::extract(op.s, c.idx));
      for (Eigen::Index i = 0; i < ev.size(); ++i) out.push_back(ev(i));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline double min_eigenvalue(const Operator& op) {
  if (op.dense) return dense_eigenvalues(op.d)(0);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : detail::components(op.s)) {
    if (c.bandwidth <= 1 && c.idx.size() > 1) {
      RVector dg, sb;
      detail::tridiagonal(op.s, c.idx, dg, sb);
      Eigen::SelfAdjointEigenSolver<RMatrix> es;
      es.computeFromTridiagonal(dg, sb, Eigen::EigenvaluesOnly);
      best = std::min(best, es.eigenvalues()(0));
    } else {
      best = std::min(best, dense_eigenvalues(detail::extract(op.s, c.idx))(0));
    }
  }
  return best;
}

// True when op - mu*I is positive definite (a factorization succeeded),
// i.e. every eigenvalue exceeds mu.
inline bool exceeds(const Operator& op, double mu) {
  if (op.dense) return detail::dense_pd(op.d, mu);
  for (const auto& c : detail::components(op.s)) {
    if (c.bandwidth <= 1 && c.idx.size() > 1) {
      RVector dg, sb;
      detail::tridiagonal(op.s, c.idx, dg, sb);
      if (!detail::tridiagonal_pd(dg, sb, mu)) return false;
    } else {
      CMatrix a = detail::extract(op.s, c.idx);
      const bool ok = (c.bandwidth * 8 < int(c.idx.size())) ? detail::banded_pd(a, c.bandwidth, mu) : detail::dense_pd(a, mu);
      if (!ok) return false;
    }
  }
  return true;
}

}  // namespace hspec::hermitian
