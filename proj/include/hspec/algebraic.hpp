#pragma once

#include <numeric>
#include <random>
#include <vector>

#include "hspec/errors.hpp"
#include "hspec/linalg.hpp"
#include "hspec/space_model.hpp"

namespace hspec {

// Smallest subalgebra containing the columns of `generators` (g-coordinates)
// together with k. Returns an orthonormal basis.
inline RMatrix generated_subalgebra(const HomogeneousSpaceModel& s, const RMatrix& generators) {
  RMatrix span = linalg::column_space(linalg::hcat(s.k_basis, generators));
  for (int iter = 0; iter <= s.m(); ++iter) {
    RMatrix grown = span;
    for (Eigen::Index a = 0; a < span.cols(); ++a)
      for (Eigen::Index b = a + 1; b < span.cols(); ++b) {
        RVector br = s.algebra.bracket(span.col(a), span.col(b));
        grown.conservativeResize(Eigen::NoChange, grown.cols() + 1);
        grown.col(grown.cols() - 1) = br;
      }
    RMatrix next = linalg::column_space(grown);
    if (next.cols() == span.cols()) return next;
    span = next;
  }
  return span;
}

// subspace is given in p-coordinates (n x d).
inline bool is_bracket_generating(const HomogeneousSpaceModel& s, const RMatrix& subspace) {
  RMatrix gens = s.p_basis * subspace;
  return generated_subalgebra(s, gens).cols() == s.m();
}

struct CommutantInfo {
  std::vector<RMatrix> full;       // basis of End_K(p)
  std::vector<RMatrix> symmetric;  // basis of its symmetric part
  int full_dimension() const { return int(full.size()); }
  int symmetric_dimension() const { return int(symmetric.size()); }
};

inline CommutantInfo commutant(const HomogeneousSpaceModel& s) {
  const int n = s.n();
  const RMatrix id = RMatrix::Identity(n, n);
  std::vector<RMatrix> rows;
  auto add = [&](const RMatrix& a) {
    // vec(A X - X A) = (I (x) A - A^T (x) I) vec(X), column-major vec.
    RMatrix sys = RMatrix::Zero(n * n, n * n);
    for (int c = 0; c < n; ++c)
      for (int r = 0; r < n; ++r) {
        const int row = c * n + r;  // entry (r, c) of AX - XA
        for (int k = 0; k < n; ++k) {
          sys(row, c * n + k) += a(r, k);   // (A X)(r,c) = sum_k A(r,k) X(k,c)
          sys(row, k * n + r) -= a(k, c);   // (X A)(r,c) = sum_k X(r,k) A(k,c)
        }
      }
    rows.push_back(sys);
  };
  for (const auto& a : s.isotropy_infinitesimal) add(a);
  for (const auto& a : s.isotropy_group) add(a - id);
  RMatrix stacked(0, n * n);
  for (const auto& r : rows) {
    RMatrix t(stacked.rows() + r.rows(), n * n);
    t << stacked, r;
    stacked = t;
  }
  CommutantInfo info;
  RMatrix ns = linalg::null_space(stacked, 1e-10);
  for (Eigen::Index c = 0; c < ns.cols(); ++c) info.full.push_back(Eigen::Map<const RMatrix>(ns.col(c).data(), n, n));
  // Symmetric part: add X - X^T = 0.
  RMatrix sym = RMatrix::Zero(n * n, n * n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) {
      sym(c * n + r, c * n + r) += 1.0;
      sym(c * n + r, r * n + c) -= 1.0;
    }
  RMatrix t(stacked.rows() + sym.rows(), n * n);
  t << stacked, sym;
  RMatrix nss = linalg::null_space(t, 1e-10);
  for (Eigen::Index c = 0; c < nss.cols(); ++c)
    info.symmetric.push_back(Eigen::Map<const RMatrix>(nss.col(c).data(), n, n));
  return info;
}

inline int commutant_dimension(const HomogeneousSpaceModel& s) { return commutant(s).full_dimension(); }
inline int symmetric_commutant_dimension(const HomogeneousSpaceModel& s) { return commutant(s).symmetric_dimension(); }

struct IsotypicComponent {
  RMatrix subspace;  // n x dim, p-coordinates, orthonormal
  int multiplicity = 1;
  int type_dim = 1;
  int division_dim = 1;  // 1, 2 or 4: real, complex or quaternionic type
  std::vector<RMatrix> summands;  // irreducible pieces found in this component
};

namespace detail {
inline int find_root(std::vector<int>& p, int i) {
  while (p[size_t(i)] != i) i = p[size_t(i)] = p[size_t(p[size_t(i)])];
  return i;
}
}  // namespace detail

inline std::vector<IsotypicComponent> isotypic_decomposition(const HomogeneousSpaceModel& s, unsigned seed = 12345) {
  const int n = s.n();
  if (n == 0) return {};
  CommutantInfo info = commutant(s);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int attempt = 0; attempt < 5; ++attempt) {
    RMatrix S = RMatrix::Zero(n, n);
    for (const auto& b : info.symmetric) S += nd(rng) * b;
    S = linalg::symmetrize(S);
    Eigen::SelfAdjointEigenSolver<RMatrix> es(S);
    const RVector& ev = es.eigenvalues();
    const double scale = std::max(1e-300, ev.cwiseAbs().maxCoeff());
    std::vector<RMatrix> spaces;
    for (int i = 0; i < n;) {
      int j = i + 1;
      while (j < n && ev(j) - ev(j - 1) <= 1e-8 * scale) ++j;
      spaces.push_back(es.eigenvectors().middleCols(i, j - i));
      i = j;
    }
    // Each eigenspace must be irreducible: symmetric commutant elements act
    // on it as scalars.
    bool clean = true;
    for (const auto& e : spaces) {
      for (const auto& b : info.symmetric) {
        RMatrix r = e.transpose() * b * e;
        const double sc = r.trace() / double(r.rows());
        RMatrix dev = r - sc * RMatrix::Identity(r.rows(), r.cols());
        if (dev.cwiseAbs().maxCoeff() > 1e-8) clean = false;
      }
    }
    if (!clean) continue;
    const int ns = int(spaces.size());
    std::vector<int> parent(static_cast<size_t>(ns));
    std::iota(parent.begin(), parent.end(), 0);
    for (int a = 0; a < ns; ++a)
      for (int b = a + 1; b < ns; ++b) {
        double cross = 0.0;
        for (const auto& f : info.full) cross = std::max(cross, (spaces[size_t(b)].transpose() * f * spaces[size_t(a)]).cwiseAbs().maxCoeff());
        if (cross > 1e-8) parent[size_t(detail::find_root(parent, a))] = detail::find_root(parent, b);
      }
    std::vector<IsotypicComponent> out;
    std::vector<int> comp_of(static_cast<size_t>(ns), -1);
    for (int a = 0; a < ns; ++a) {
      const int r = detail::find_root(parent, a);
      if (comp_of[size_t(r)] < 0) {
        comp_of[size_t(r)] = int(out.size());
        out.emplace_back();
        out.back().subspace = RMatrix(n, 0);
        out.back().multiplicity = 0;
      }
      auto& c = out[size_t(comp_of[size_t(r)])];
      c.subspace = linalg::hcat(c.subspace, spaces[size_t(a)]);
      c.summands.push_back(spaces[size_t(a)]);
      c.multiplicity += 1;
      c.type_dim = int(spaces[size_t(a)].cols());
    }
    for (auto& c : out) {
      // dim End_K(W) = (dim End_K(c)) / multiplicity^2
      const RMatrix& e = c.subspace;
      int cnt = 0;
      RMatrix stacked(e.cols() * e.cols(), 0);
      for (const auto& f : info.full) {
        RMatrix r = e.transpose() * f * e;
        stacked.conservativeResize(Eigen::NoChange, stacked.cols() + 1);
        stacked.col(stacked.cols() - 1) = Eigen::Map<const RVector>(r.data(), r.size());
      }
      cnt = int(linalg::rank(stacked, 1e-8));
      c.division_dim = cnt / (c.multiplicity * c.multiplicity);
    }
    return out;
  }
  throw error(errc::degenerate_commutant, "random commutant element had coincident eigenvalues after 5 retries");
}

}  // namespace hspec
