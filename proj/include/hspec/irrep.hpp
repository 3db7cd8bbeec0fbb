#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hspec/errors.hpp"
#include "hspec/linalg.hpp"
#include "hspec/space_model.hpp"

namespace hspec {

using Label = std::vector<int>;

inline std::string label_string(const Label& l) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < l.size(); ++i) os << (i ? "," : "") << l[i];
  os << ")";
  return os.str();
}

struct UnitaryIrrep {
  Label label;
  int dim = 0;
  std::vector<CSparse> generators;  // pi(E_a) for every g-basis vector
  double casimir = 0.0;
  // Orthonormal basis of V^K. When `invariant_coords` is non-empty the basis
  // consists of those coordinate vectors and `invariant_basis` is left empty.
  CMatrix invariant_basis;
  std::vector<int> invariant_coords;
  bool coordinate_invariants = false;

  int invariant_dim() const {
    return coordinate_invariants ? int(invariant_coords.size()) : int(invariant_basis.cols());
  }
  CMatrix invariant_matrix() const {
    if (!coordinate_invariants) return invariant_basis;
    CMatrix b = CMatrix::Zero(dim, Eigen::Index(invariant_coords.size()));
    for (size_t j = 0; j < invariant_coords.size(); ++j) b(invariant_coords[j], Eigen::Index(j)) = 1.0;
    return b;
  }
  bool trivial() const { return std::all_of(label.begin(), label.end(), [](int v) { return v == 0; }); }
};

// Number of label entries contributed by a factor.
inline int label_width(const GroupFactor& f) {
  switch (f.kind) {
    case factor_kind::torus: return f.rank;
    case factor_kind::su2: return 1;
    case factor_kind::su3: return 2;
  }
  return 0;
}

inline int label_width(const HomogeneousSpaceModel& s) {
  int w = 0;
  for (const auto& f : s.group.factors()) w += label_width(f);
  return w;
}

namespace detail {

using Trip = Eigen::Triplet<cplx>;

inline CSparse from_triplets(int d, const std::vector<Trip>& t) {
  CSparse s(d, d);
  s.setFromTriplets(t.begin(), t.end());
  s.makeCompressed();
  return s;
}

// Spin ladder in the basis m = j, j-1, ..., -j (index a = j - m), with
// pi(E_a) = -2i J_a.
inline std::vector<CSparse> su2_generators(int two_j) {
  const int d = two_j + 1;
  const cplx I(0.0, 1.0);
  std::vector<Trip> e1, e2, e3;
  for (int a = 0; a < d; ++a) {
    e3.emplace_back(a, a, -I * double(two_j - 2 * a));
    if (a >= 1) {
      const double c = std::sqrt(double(a) * double(two_j + 1 - a));  // <a-1|J+|a>
      // J+ at (a-1, a), J- at (a, a-1)
      e1.emplace_back(a - 1, a, -I * c);
      e1.emplace_back(a, a - 1, -I * c);
      e2.emplace_back(a - 1, a, -c);
      e2.emplace_back(a, a - 1, c);
    }
  }
  return {from_triplets(d, e1), from_triplets(d, e2), from_triplets(d, e3)};
}

struct GTPattern {
  int m12, m22, m11;
};

// Gelfand-Tsetlin basis for the gl(3) module with highest weight
// (a+b, b, 0); returns the gl(3) unit actions E_ij as sparse matrices.
inline std::array<std::array<CSparse, 3>, 3> su3_units(int a, int b) {
  const int m13 = a + b, m23 = b, m33 = 0;
  std::vector<GTPattern> pats;
  std::map<std::array<int, 3>, int> index;
  for (int m12 = m23; m12 <= m13; ++m12)
    for (int m22 = m33; m22 <= m23; ++m22)
      for (int m11 = m22; m11 <= m12; ++m11) {
        index[{m12, m22, m11}] = int(pats.size());
        pats.push_back({m12, m22, m11});
      }
  const int d = int(pats.size());
  std::vector<Trip> diag[3], up12, up23;
  auto find = [&](int m12, int m22, int m11) -> int {
    auto it = index.find({m12, m22, m11});
    return it == index.end() ? -1 : it->second;
  };
  for (int s = 0; s < d; ++s) {
    const auto& p = pats[size_t(s)];
    diag[0].emplace_back(s, s, double(p.m11));
    diag[1].emplace_back(s, s, double(p.m12 + p.m22 - p.m11));
    diag[2].emplace_back(s, s, double(m13 + m23 + m33 - p.m12 - p.m22));
    // E12 raises m11.
    {
      const double l11 = p.m11, l21 = p.m12, l22 = p.m22 - 1;
      const double v = -(l11 - l21) * (l11 - l22);
      const int t = find(p.m12, p.m22, p.m11 + 1);
      if (t >= 0 && v > 0) up12.emplace_back(t, s, std::sqrt(v));
    }
    // E23 raises m12 or m22.
    {
      const double l[2] = {double(p.m12), double(p.m22 - 1)};
      const double top[3] = {double(m13), double(m23 - 1), double(m33 - 2)};
      const double l11 = p.m11;
      for (int i = 0; i < 2; ++i) {
        double num = 1.0;
        for (double tj : top) num *= (l[i] - tj);
        num *= (l[i] - l11 + 1.0);
        const int j = 1 - i;
        const double den = (l[i] - l[j] + 1.0) * (l[i] - l[j]);
        const double v = -num / den;
        const int t = i == 0 ? find(p.m12 + 1, p.m22, p.m11) : find(p.m12, p.m22 + 1, p.m11);
        if (t >= 0 && v > 0) up23.emplace_back(t, s, std::sqrt(v));
      }
    }
  }
  std::array<std::array<CSparse, 3>, 3> e;
  for (int k = 0; k < 3; ++k) e[size_t(k)][size_t(k)] = from_triplets(d, diag[k]);
  e[0][1] = from_triplets(d, up12);
  e[1][2] = from_triplets(d, up23);
  e[1][0] = CSparse(e[0][1].adjoint());
  e[2][1] = CSparse(e[1][2].adjoint());
  e[0][2] = CSparse(e[0][1] * e[1][2] - e[1][2] * e[0][1]);
  e[2][0] = CSparse(e[0][2].adjoint());
  for (auto& row : e)
    for (auto& m : row) {
      m.prune(cplx(0.0), 1e-14);
      m.makeCompressed();
    }
  return e;
}

inline std::vector<CSparse> su3_generators(int a, int b) {
  auto units = su3_units(a, b);
  auto basis = factor_basis(make_factor(factor_kind::su3));
  std::vector<CSparse> out;
  for (const auto& x : basis) {
    CSparse acc(units[0][0].rows(), units[0][0].cols());
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (x(i, j) != cplx(0.0)) acc += x(i, j) * units[size_t(i)][size_t(j)];
    acc.prune(cplx(0.0), 1e-14);
    acc.makeCompressed();
    out.push_back(acc);
  }
  return out;
}

inline std::vector<CSparse> factor_generators(const GroupFactor& f, const int* lab) {
  switch (f.kind) {
    case factor_kind::torus: {
      std::vector<CSparse> out;
      for (int k = 0; k < f.rank; ++k) out.push_back(from_triplets(1, {Trip(0, 0, cplx(0.0, double(lab[k])))}));
      return out;
    }
    case factor_kind::su2:
      if (lab[0] < 0) throw error(errc::invalid_label, "spin index 2j must be nonnegative");
      return su2_generators(lab[0]);
    case factor_kind::su3:
      if (lab[0] < 0 || lab[1] < 0) throw error(errc::invalid_label, "SU(3) highest weight must be nonnegative");
      return su3_generators(lab[0], lab[1]);
  }
  return {};
}

inline uint64_t label_hash(const Label& l) {
  uint64_t h = 1469598103934665603ull;
  for (int v : l) {
    h ^= uint64_t(uint32_t(v)) + 0x9e3779b97f4a7c15ull;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace detail

inline CSparse rep_of(const UnitaryIrrep& r, const RVector& x) {
  CSparse acc(r.dim, r.dim);
  for (Eigen::Index a = 0; a < x.size(); ++a)
    if (x(a) != 0.0) acc += x(a) * r.generators[size_t(a)];
  return acc;
}

// -sum pi(E_a)^2 applied to v.
inline CVector casimir_apply(const UnitaryIrrep& r, const CVector& v) {
  CVector w = CVector::Zero(v.size());
  for (const auto& g : r.generators) w -= g * (g * v);
  return w;
}

inline double casimir_scalar(const UnitaryIrrep& r) {
  std::mt19937_64 rng(detail::label_hash(r.label));
  std::normal_distribution<double> nd(0.0, 1.0);
  double first = 0.0;
  for (int t = 0; t < 3; ++t) {
    CVector v(r.dim);
    for (int i = 0; i < r.dim; ++i) v(i) = cplx(nd(rng), nd(rng));
    v.normalize();
    CVector w = casimir_apply(r, v);
    const double lam = v.dot(w).real();
    const double tol = 1e-10 * std::max(1.0, std::abs(lam));
    if ((w - lam * v).norm() > tol) throw error(errc::not_scalar, "Casimir does not act as a scalar on " + label_string(r.label));
    if (t == 0)
      first = lam;
    else if (std::abs(lam - first) > tol)
      throw error(errc::not_scalar, "Casimir value differs between test vectors on " + label_string(r.label));
  }
  return std::abs(first) < 1e-11 ? 0.0 : first;
}

inline void compute_invariant_subspace(UnitaryIrrep& r, const HomogeneousSpaceModel& s) {
  std::vector<CSparse> ops;
  std::vector<CSparse> group_ops;
  for (Eigen::Index a = 0; a < s.k_basis.cols(); ++a) ops.push_back(rep_of(r, s.k_basis.col(a)));
  for (const auto& x : s.k_group_generators) group_ops.push_back(rep_of(r, x));
  bool diagonal = true;
  for (const auto& o : ops) diagonal = diagonal && linalg::is_diagonal(o);
  for (const auto& o : group_ops) diagonal = diagonal && linalg::is_diagonal(o);
  r.invariant_coords.clear();
  r.invariant_basis = CMatrix();
  if (diagonal) {
    double scale = 1.0;
    for (const auto& o : ops) scale = std::max(scale, linalg::max_abs(o));
    std::vector<bool> keep(size_t(r.dim), true);
    for (const auto& o : ops)
      for (int i = 0; i < r.dim; ++i)
        if (std::abs(o.coeff(i, i)) > 1e-8 * scale) keep[size_t(i)] = false;
    for (const auto& o : group_ops)
      for (int i = 0; i < r.dim; ++i)
        if (std::abs(std::exp(o.coeff(i, i)) - 1.0) > 1e-8) keep[size_t(i)] = false;
    for (int i = 0; i < r.dim; ++i)
      if (keep[size_t(i)]) r.invariant_coords.push_back(i);
    r.coordinate_invariants = true;
    return;
  }
  std::vector<CMatrix> blocks;
  for (const auto& o : ops) blocks.push_back(CMatrix(o));
  for (const auto& o : group_ops) blocks.push_back(exp_skew(CMatrix(o)) - CMatrix::Identity(r.dim, r.dim));
  CMatrix stacked(0, r.dim);
  for (const auto& b : blocks) {
    CMatrix t(stacked.rows() + b.rows(), r.dim);
    t << stacked, b;
    stacked = t;
  }
  r.coordinate_invariants = false;
  r.invariant_basis = linalg::null_space_relative(stacked, 1e-8);
}

// Irreducible unitary representation of the group G of the model with the
// given label (factor labels concatenated in factor order).
inline UnitaryIrrep irrep_matrices(const HomogeneousSpaceModel& s, const Label& label) {
  if (int(label.size()) != label_width(s))
    throw error(errc::invalid_label, "label " + label_string(label) + " has wrong length for " + s.name);
  UnitaryIrrep r;
  r.label = label;
  std::vector<std::vector<CSparse>> per;
  std::vector<int> dims;
  size_t pos = 0;
  for (const auto& f : s.group.factors()) {
    per.push_back(detail::factor_generators(f, label.data() + pos));
    dims.push_back(int(per.back()[0].rows()));
    pos += size_t(label_width(f));
  }
  r.dim = 1;
  for (int d : dims) r.dim *= d;
  for (size_t fi = 0; fi < per.size(); ++fi) {
    int before = 1, after = 1;
    for (size_t k = 0; k < fi; ++k) before *= dims[k];
    for (size_t k = fi + 1; k < per.size(); ++k) after *= dims[k];
    for (const auto& g : per[fi]) {
      if (per.size() == 1) {
        r.generators.push_back(g);
      } else {
        CSparse t = linalg::kron(linalg::kron(linalg::sparse_identity(before), g), linalg::sparse_identity(after));
        t.makeCompressed();
        r.generators.push_back(t);
      }
    }
  }
  r.casimir = casimir_scalar(r);
  compute_invariant_subspace(r, s);
  return r;
}

// Whether pi factors through G/(central part of K): every central K-generator
// must act trivially.
inline bool descends_to_quotient(const UnitaryIrrep& r, const HomogeneousSpaceModel& s) {
  for (size_t i = 0; i < s.k_group_generators.size(); ++i) {
    if (!s.generator_is_central[i]) continue;
    CSparse o = rep_of(r, s.k_group_generators[i]);
    // Central elements act by a scalar; test on the first basis vector.
    const cplx v = linalg::is_diagonal(o) ? std::exp(o.coeff(0, 0)) : exp_skew(CMatrix(o))(0, 0);
    if (std::abs(v - 1.0) > 1e-8) return false;
  }
  return true;
}

}  // namespace hspec
