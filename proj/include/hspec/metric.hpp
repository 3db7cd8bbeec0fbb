#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "hspec/algebraic.hpp"
#include "hspec/errors.hpp"
#include "hspec/linalg.hpp"
#include "hspec/space_model.hpp"

namespace hspec {

struct MetricBlock {
  double sigma = 1.0;
  RMatrix basis;          // n x d, p-coordinates
  int declared_index = -1;  // position in the declared decomposition, if any
};

// Phi in Sym_K^+(p), stored in p-coordinates, with blocks sorted so that
// sigma_1 >= ... >= sigma_q (Phi = sigma^-2 on each block).
struct InvariantMetric {
  RMatrix phi;
  std::vector<MetricBlock> diag;
  std::optional<RVector> family_coords;

  int n() const { return int(phi.rows()); }
  int q() const { return int(diag.size()); }
  double sigma_first() const { return diag.front().sigma; }
  double sigma_last() const { return diag.back().sigma; }
  RMatrix inverse() const { return phi.inverse(); }
};

inline double invariance_residual(const HomogeneousSpaceModel& s, const RMatrix& phi) {
  double r = 0.0;
  for (const auto& a : s.isotropy_infinitesimal) r = std::max(r, (a * phi - phi * a).cwiseAbs().maxCoeff());
  for (const auto& a : s.isotropy_group) r = std::max(r, (a * phi - phi * a).cwiseAbs().maxCoeff());
  return r;
}

inline void check_metric_matrix(const HomogeneousSpaceModel& s, const RMatrix& phi) {
  if (phi.rows() != s.n() || phi.cols() != s.n())
    throw error(errc::dimension_mismatch, "metric matrix must be " + std::to_string(s.n()) + "x" + std::to_string(s.n()));
  const double scale = std::max(1.0, phi.cwiseAbs().maxCoeff());
  if ((phi - phi.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw error(errc::not_positive_definite, "metric matrix is not symmetric");
  if (linalg::min_eigenvalue(phi) <= 0.0) throw error(errc::not_positive_definite, "metric matrix is not positive definite");
  if (invariance_residual(s, phi) > 1e-10 * scale) throw error(errc::not_invariant, "metric matrix is not Ad(K)-invariant");
}

inline InvariantMetric diagonal_decomposition(const HomogeneousSpaceModel& s, const RMatrix& phi_in) {
  RMatrix phi = linalg::symmetrize(phi_in);
  check_metric_matrix(s, phi_in);
  Eigen::SelfAdjointEigenSolver<RMatrix> es(phi);
  const RVector& ev = es.eigenvalues();
  InvariantMetric m;
  m.phi = phi;
  // Ascending eigenvalues = descending sigma.
  const int n = int(ev.size());
  for (int i = 0; i < n;) {
    int j = i + 1;
    while (j < n && ev(j) - ev(j - 1) <= 1e-9 * ev(j)) ++j;
    MetricBlock b;
    b.basis = es.eigenvectors().middleCols(i, j - i);
    b.sigma = 1.0 / std::sqrt(ev.segment(i, j - i).mean());
    m.diag.push_back(b);
    i = j;
  }
  const double scale = std::max(1.0, phi.cwiseAbs().maxCoeff());
  for (const auto& b : m.diag) {
    RMatrix out = RMatrix::Identity(n, n) - b.basis * b.basis.transpose();
    for (const auto& a : s.isotropy_infinitesimal)
      if ((out * a * b.basis).cwiseAbs().maxCoeff() > 1e-8 * scale) throw error(errc::not_invariant, "eigenspace not Ad(K)-invariant");
    for (const auto& a : s.isotropy_group)
      if ((out * a * b.basis).cwiseAbs().maxCoeff() > 1e-8 * scale) throw error(errc::not_invariant, "eigenspace not Ad(K)-invariant");
  }
  return m;
}

// Phi = sum x_i Id on the declared blocks; blocks keep their declared order
// among equal sigmas.
inline InvariantMetric family_metric(const HomogeneousSpaceModel& s, const RVector& x) {
  if (x.size() != s.q())
    throw error(errc::dimension_mismatch, "expected " + std::to_string(s.q()) + " family coordinates, got " + std::to_string(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (!(x(i) > 0.0) || !std::isfinite(x(i))) throw error(errc::invalid_params, "family coordinates must be positive and finite");
  InvariantMetric m;
  m.phi = RMatrix::Zero(s.n(), s.n());
  for (int i = 0; i < s.q(); ++i) {
    const RMatrix& b = s.declared_decomposition[size_t(i)];
    m.phi += x(i) * b * b.transpose();
    MetricBlock blk;
    blk.sigma = 1.0 / std::sqrt(x(i));
    blk.basis = b;
    blk.declared_index = i;
    m.diag.push_back(blk);
  }
  std::stable_sort(m.diag.begin(), m.diag.end(), [](const MetricBlock& a, const MetricBlock& b) { return a.sigma > b.sigma; });
  m.family_coords = x;
  return m;
}

inline InvariantMetric identity_metric(const HomogeneousSpaceModel& s) {
  return family_metric(s, RVector::Ones(s.q()));
}

inline InvariantMetric scaled_metric(const HomogeneousSpaceModel& s, const InvariantMetric& g, double c) {
  if (g.family_coords) return family_metric(s, c * (*g.family_coords));
  return diagonal_decomposition(s, c * g.phi);
}

inline bool is_identity_metric(const InvariantMetric& g) {
  return (g.phi - RMatrix::Identity(g.n(), g.n())).cwiseAbs().maxCoeff() == 0.0;
}

inline bool loewner_ge(const InvariantMetric& phi, const InvariantMetric& psi) {
  if (phi.n() != psi.n()) throw error(errc::dimension_mismatch, "metrics live on different spaces");
  return linalg::min_eigenvalue(linalg::symmetrize(phi.phi - psi.phi)) >= -1e-12;
}

// Random Ad(K)-invariant metric: eigenvectors of a random symmetric
// commutant element (a random mixing inside isotypic blocks) combined with
// log-uniform eigenvalues in [4^-range, 4^range].
template <class Rng>
RMatrix random_invariant_matrix(const HomogeneousSpaceModel& s, const CommutantInfo& info, Rng& rng, double range) {
  const int n = s.n();
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> ud(-range, range);
  RMatrix S = RMatrix::Zero(n, n);
  for (const auto& b : info.symmetric) S += nd(rng) * b;
  Eigen::SelfAdjointEigenSolver<RMatrix> es(linalg::symmetrize(S));
  const RVector& ev = es.eigenvalues();
  const double scale = std::max(1e-300, ev.cwiseAbs().maxCoeff());
  RMatrix phi = RMatrix::Zero(n, n);
  for (int i = 0; i < n;) {
    int j = i + 1;
    while (j < n && ev(j) - ev(j - 1) <= 1e-8 * scale) ++j;
    RMatrix v = es.eigenvectors().middleCols(i, j - i);
    phi += std::pow(4.0, ud(rng)) * v * v.transpose();
    i = j;
  }
  return linalg::symmetrize(phi);
}

// Random family coordinates, log-uniform in [4^-range, 4^range].
template <class Rng>
RVector random_family_coords(const HomogeneousSpaceModel& s, Rng& rng, double range) {
  std::uniform_real_distribution<double> ud(-range, range);
  RVector x(s.q());
  for (int i = 0; i < s.q(); ++i) x(i) = std::pow(4.0, ud(rng));
  return x;
}

}  // namespace hspec
