#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "hspec/algebraic.hpp"
#include "hspec/errors.hpp"
#include "hspec/hermitian.hpp"
#include "hspec/irrep_stream.hpp"
#include "hspec/metric.hpp"

namespace hspec {

struct Certificate {
  double cutoff = 0.0;  // Casimir of the first representation not examined
  double bound = 0.0;   // sigma_q^2 * cutoff
  bool sound = false;
};

struct SpectrumEntry {
  double value = 0.0;
  long long multiplicity = 0;
};

struct SpectrumResult {
  std::vector<SpectrumEntry> entries;
  double lambda1 = 0.0;
  Certificate certificate;
  Label contributing_rep;
};

struct Lambda1Stats {
  long reps_examined = 0;
  long spherical = 0;
  long eigensolves = 0;
  long skipped = 0;
};

struct Lambda1Result {
  double value = std::numeric_limits<double>::infinity();
  Certificate certificate;
  Label contributing_rep;
  Lambda1Stats stats;
};

struct Lambda1Options {
  // Keep enumerating at least up to this Casimir value (used to re-run with
  // a doubled cutoff).
  double min_cutoff = 0.0;
  // Iteration cap as a multiple of sigma_q^-2.
  double cap_factor = 1e4;
  // Hard limit on representation dimension (memory guard).
  long max_dim = 400'000;
};

struct SubLaplacianResult {
  double value = std::numeric_limits<double>::infinity();
  Label attained_at;
  int attained_index = -1;  // position among the nontrivial spherical reps examined
  int reps_examined = 0;
  int rep_budget = 0;
  bool bracket_generating = false;
  bool high_confidence = false;
};

// T = S^-1 with S_ij = <Y_i, Y_j>_Phi for a basis Y of p (columns, p-coordinates).
inline RMatrix assemble_coefficients(const InvariantMetric& g, const RMatrix& basis) {
  if (basis.rows() != g.n() || basis.cols() != g.n()) throw error(errc::dimension_mismatch, "basis must be n x n");
  RMatrix S = basis.transpose() * g.phi * basis;
  Eigen::LDLT<RMatrix> ldlt(S);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 0.0)
    throw error(errc::singular_gram, "Gram matrix of the basis is not positive definite");
  return ldlt.solve(RMatrix::Identity(g.n(), g.n()));
}

// M = sum_ij T_ij W_i^* W_j with T given in p-coordinates.
inline hermitian::Operator assemble_operator(const ReducedIrrep& red, const RMatrix& T) {
  const int n = int(T.rows());
  hermitian::Operator op;
  if (red.dk == 0) throw error(errc::empty_invariant_space, "representation has no K-invariant vectors");
  if (red.has_gram()) {
    op.dense = true;
    op.d = CMatrix::Zero(red.dk, red.dk);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const double t = T(i, j);
        if (t == 0.0) continue;
        const CMatrix& g = red.gram_block(i, j, n);
        if (i == j)
          op.d += t * g;
        else
          op.d += t * (g + g.adjoint());
      }
    op.d = 0.5 * (op.d + op.d.adjoint()).eval();
    return op;
  }
  op.dense = false;
  op.s = CSparse(red.dk, red.dk);
  for (int i = 0; i < n; ++i) {
    CSparse a(red.w[size_t(i)].rows(), red.dk);
    for (int j = 0; j < n; ++j)
      if (T(i, j) != 0.0) a += T(i, j) * red.w[size_t(j)];
    if (a.nonZeros() == 0) continue;
    op.s += CSparse(red.w[size_t(i)].adjoint()) * a;
  }
  op.s = 0.5 * (op.s + CSparse(op.s.adjoint()));
  op.s.prune(cplx(0.0), 1e-300);
  op.s.makeCompressed();
  return op;
}

class SpectralEngine {
 public:
  explicit SpectralEngine(const HomogeneousSpaceModel& s, std::shared_ptr<IrrepCache> cache = nullptr)
      : model_(s), cache_(cache ? cache : std::make_shared<IrrepCache>(s)) {}
  // The engine keeps a reference to the model, so temporaries are rejected.
  explicit SpectralEngine(HomogeneousSpaceModel&&, std::shared_ptr<IrrepCache> = nullptr) = delete;

  const HomogeneousSpaceModel& model() const { return model_; }
  std::shared_ptr<IrrepCache> cache() const { return cache_; }

  // Dense B^* pi(-C_Phi) B for a single representation.
  CMatrix operator_on_invariants(const Label& label, const InvariantMetric& g) const {
    auto red = cache_->get(label);
    if (red->dk == 0) throw error(errc::empty_invariant_space, "no K-invariant vectors in " + label_string(label));
    auto op = assemble_operator(*red, g.inverse());
    return op.dense ? op.d : CMatrix(op.s);
  }

  SpectrumResult full_spectrum(const InvariantMetric& g, double cutoff) const {
    if (!(cutoff > 0.0)) throw error(errc::invalid_params, "casimir cutoff must be positive");
    const RMatrix T = g.inverse();
    const double sq2 = g.sigma_last() * g.sigma_last();
    IrrepStream st(model_, cache_);
    std::vector<std::pair<double, long long>> raw;
    SpectrumResult res;
    res.lambda1 = std::numeric_limits<double>::infinity();
    while (st.peek_casimir() <= cutoff * (1.0 + 1e-12)) {
      auto red = st.next();
      if (red->dk == 0) continue;
      const long long d = red->irrep->dim;
      if (red->irrep->trivial()) {
        raw.emplace_back(0.0, 1);
        continue;
      }
      auto ev = hermitian::eigenvalues(assemble_operator(*red, T));
      for (double v : ev) {
        raw.emplace_back(v, d);
        if (v < res.lambda1) {
          res.lambda1 = v;
          res.contributing_rep = red->irrep->label;
        }
      }
    }
    std::sort(raw.begin(), raw.end());
    for (const auto& [v, m] : raw) {
      if (!res.entries.empty()) {
        auto& last = res.entries.back();
        const double gap = std::abs(v - last.value);
        if (gap <= 1e-9 * std::max(std::abs(v), std::abs(last.value)) || gap <= 1e-12) {
          last.multiplicity += m;
          continue;
        }
      }
      res.entries.push_back({v, m});
    }
    res.certificate.cutoff = st.peek_casimir();
    res.certificate.bound = sq2 * res.certificate.cutoff;
    res.certificate.sound = res.certificate.bound >= res.lambda1;
    return res;
  }

  Lambda1Result lambda1(const InvariantMetric& g, const Lambda1Options& opt = {}) const {
    const RMatrix T = g.inverse();
    const double sq2 = g.sigma_last() * g.sigma_last();
    const bool identity = is_identity_metric(g);
    const double cap = opt.cap_factor / sq2;
    IrrepStream st(model_, cache_);
    Lambda1Result res;
    double best = std::numeric_limits<double>::infinity();
    for (;;) {
      const double next = st.peek_casimir();
      // The relative margin keeps representations whose bound ties with best
      // up to rounding inside the enumeration, so a tie is never decided by
      // which of two equal Casimir values happened to round upward.
      if (std::isfinite(best) && sq2 * next > best * (1.0 + 1e-12) && next > opt.min_cutoff) {
        res.certificate.cutoff = next;
        res.certificate.bound = sq2 * next;
        res.certificate.sound = res.certificate.bound >= best;
        break;
      }
      if (next > cap) {
        res.value = best;
        res.certificate.cutoff = next;
        res.certificate.bound = sq2 * next;
        res.certificate.sound = false;
        throw error(errc::cutoff_exhausted, "Casimir cap reached before the truncation bound certified lambda1");
      }
      auto red = st.next();
      ++res.stats.reps_examined;
      if (red->irrep->dim > opt.max_dim)
        throw error(errc::cutoff_exhausted, "representation dimension limit reached at " + label_string(red->irrep->label));
      if (red->dk == 0 || red->irrep->trivial()) continue;
      ++res.stats.spherical;
      double lam;
      if (identity) {
        lam = red->irrep->casimir;
      } else {
        auto op = assemble_operator(*red, T);
        if (std::isfinite(best) && hermitian::exceeds(op, best * (1.0 + 1e-10))) {
          ++res.stats.skipped;
          continue;
        }
        ++res.stats.eigensolves;
        lam = hermitian::min_eigenvalue(op);
      }
      if (lam < best) {
        best = lam;
        res.contributing_rep = red->irrep->label;
      }
    }
    res.value = best;
    return res;
  }

  // First eigenvalue of the sub-Laplacian of (H, h), H given in p-coordinates
  // (n x d) and h an SPD d x d matrix in that basis. No truncation bound is
  // available, so the value is a minimum over the first rep_budget nontrivial
  // spherical representations.
  SubLaplacianResult sub_laplacian_lambda1(const RMatrix& H, const RMatrix& h, int rep_budget = 200) const {
    const int n = model_.n();
    if (H.rows() != n || h.rows() != H.cols() || h.cols() != H.cols())
      throw error(errc::dimension_mismatch, "subspace and inner product sizes disagree");
    RMatrix U = linalg::column_space(H);
    if (U.cols() != H.cols()) throw error(errc::invalid_params, "subspace basis is rank deficient");
    RMatrix out = RMatrix::Identity(n, n) - U * U.transpose();
    for (const auto& a : model_.isotropy_infinitesimal)
      if ((out * a * U).cwiseAbs().maxCoeff() > 1e-10) throw error(errc::not_invariant_subspace, "H is not Ad(K)-invariant");
    for (const auto& a : model_.isotropy_group)
      if ((out * a * U).cwiseAbs().maxCoeff() > 1e-10) throw error(errc::not_invariant_subspace, "H is not Ad(K)-invariant");
    // Sum of Y Y over an h-orthonormal basis of H equals H h^-1 H^T in p-coordinates.
    const RMatrix T = linalg::symmetrize(H * h.inverse() * H.transpose());
    SubLaplacianResult res;
    res.rep_budget = rep_budget;
    res.bracket_generating = is_bracket_generating(model_, H);
    IrrepStream st(model_, cache_);
    while (res.reps_examined < rep_budget) {
      auto red = st.next();
      if (red->dk == 0 || red->irrep->trivial()) continue;
      const double lam = hermitian::min_eigenvalue(assemble_operator(*red, T));
      if (lam < res.value - 1e-12 * std::max(1.0, std::abs(lam))) {
        res.value = lam;
        res.attained_at = red->irrep->label;
        res.attained_index = res.reps_examined;
      }
      ++res.reps_examined;
    }
    if (std::abs(res.value) < 1e-12) res.value = 0.0;
    res.high_confidence = res.bracket_generating && res.attained_index >= 0 && res.attained_index < rep_budget / 2;
    return res;
  }

  // lambda1 of the identity metric: the smallest nontrivial spherical Casimir.
  double lambda1_identity() const { return lambda1(identity_metric(model_)).value; }

 private:
  const HomogeneousSpaceModel& model_;
  std::shared_ptr<IrrepCache> cache_;
};

}  // namespace hspec
