#pragma once

#include <algorithm>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "hspec/errors.hpp"
#include "hspec/group.hpp"
#include "hspec/lie_algebra.hpp"
#include "hspec/linalg.hpp"

namespace hspec {

// exp of a skew-Hermitian matrix through the Hermitian eigensolver.
inline CMatrix exp_skew(const CMatrix& x) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(cplx(0.0, 1.0) * x);
  CVector ph(es.eigenvalues().size());
  for (Eigen::Index k = 0; k < ph.size(); ++k) ph(k) = std::polar(1.0, -es.eigenvalues()(k));
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

// Pair (G, K) with the reductive split g = k + p. Subspaces of p (declared
// blocks, metric matrices, horizontal spaces) are stored in p-coordinates,
// i.e. with respect to the orthonormal columns of p_basis.
struct HomogeneousSpaceModel {
  std::string name;
  std::vector<int> params;
  LieAlgebraData algebra;
  GroupOps group;
  RMatrix k_basis;  // m x (m - n), orthonormal columns in g-coordinates
  RMatrix p_basis;  // m x n
  // K-generators as algebra elements X with generator exp(X).
  std::vector<RVector> k_group_generators;
  std::vector<RMatrix> declared_decomposition;  // n x d_i each, in p-coordinates

  // Derived data, filled by finalize().
  std::vector<RMatrix> isotropy_infinitesimal;  // ad(X)|_p for X in k_basis
  std::vector<RMatrix> isotropy_group;          // Ad(a)|_p for K-generators
  std::vector<bool> generator_is_central;

  int m() const { return algebra.dim_g; }
  int n() const { return int(p_basis.cols()); }
  int q() const { return int(declared_decomposition.size()); }
  bool k_trivial() const { return k_basis.cols() == 0 && k_group_generators.empty(); }

  // Ad(exp X) on g-coordinates.
  RMatrix adjoint_of_exp(const RVector& x) const {
    CMatrix g = exp_skew(algebra.to_matrix(x));
    CMatrix gi = g.adjoint();
    RMatrix out(m(), m());
    for (int j = 0; j < m(); ++j) out.col(j) = algebra.coords(g * algebra.matrix_realization[size_t(j)] * gi);
    return out;
  }

  void finalize() {
    isotropy_infinitesimal.clear();
    isotropy_group.clear();
    generator_is_central.clear();
    for (Eigen::Index a = 0; a < k_basis.cols(); ++a)
      isotropy_infinitesimal.push_back(p_basis.transpose() * algebra.ad(k_basis.col(a)) * p_basis);
    for (const auto& x : k_group_generators) {
      RMatrix ad = adjoint_of_exp(x);
      isotropy_group.push_back(p_basis.transpose() * ad * p_basis);
      generator_is_central.push_back((ad - RMatrix::Identity(m(), m())).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
};

struct ModelResiduals {
  double k_subalgebra = 0.0;
  double p_orthogonal_k = 0.0;
  double p_orthonormal = 0.0;
  double blocks_invariant = 0.0;
  double blocks_orthogonal = 0.0;
  int blocks_total_dim = 0;
};

inline ModelResiduals model_residuals(const HomogeneousSpaceModel& s) {
  ModelResiduals r;
  const RMatrix& K = s.k_basis;
  for (Eigen::Index a = 0; a < K.cols(); ++a)
    for (Eigen::Index b = 0; b < K.cols(); ++b) {
      RVector br = s.algebra.bracket(K.col(a), K.col(b));
      RVector out = br - K * (K.transpose() * br);
      r.k_subalgebra = std::max(r.k_subalgebra, out.cwiseAbs().maxCoeff());
    }
  if (K.cols() > 0) r.p_orthogonal_k = (K.transpose() * s.p_basis).cwiseAbs().maxCoeff();
  r.p_orthonormal = (s.p_basis.transpose() * s.p_basis - RMatrix::Identity(s.n(), s.n())).cwiseAbs().maxCoeff();
  RMatrix all(s.n(), 0);
  for (const auto& blk : s.declared_decomposition) {
    RMatrix proj_out = RMatrix::Identity(s.n(), s.n()) - blk * blk.transpose();
    for (const auto& a : s.isotropy_infinitesimal)
      r.blocks_invariant = std::max(r.blocks_invariant, (proj_out * a * blk).cwiseAbs().maxCoeff());
    for (const auto& a : s.isotropy_group)
      r.blocks_invariant = std::max(r.blocks_invariant, (proj_out * a * blk).cwiseAbs().maxCoeff());
    r.blocks_total_dim += int(blk.cols());
    all = linalg::hcat(all, blk);
  }
  if (all.cols() > 0)
    r.blocks_orthogonal = (all.transpose() * all - RMatrix::Identity(all.cols(), all.cols())).cwiseAbs().maxCoeff();
  return r;
}

namespace detail {

// One catalog component: a single group factor with its own k/p data
// expressed in local algebra coordinates.
struct Component {
  GroupFactor factor;
  std::vector<RVector> k_vectors;
  std::vector<RVector> p_vectors;
  std::vector<std::vector<int>> blocks;  // indices into p_vectors
  std::vector<RVector> k_generators;
};

inline RVector unit(int dim, int i) {
  RVector v = RVector::Zero(dim);
  v(i) = 1.0;
  return v;
}

inline Component component(const std::string& name, int param, bool has_param) {
  Component c;
  if (name == "torus") {
    if (!has_param || param < 1) throw error(errc::invalid_params, "torus requires a rank n >= 1");
    c.factor = make_factor(factor_kind::torus, param);
    for (int i = 0; i < param; ++i) {
      c.p_vectors.push_back(unit(param, i));
      c.blocks.push_back({i});
    }
  } else if (name == "su2" || name == "so3") {
    c.factor = make_factor(factor_kind::su2);
    for (int i = 0; i < 3; ++i) {
      c.p_vectors.push_back(unit(3, i));
      c.blocks.push_back({i});
    }
    // SO(3) = SU(2)/{+-I}; -I = exp(pi E3).
    if (name == "so3") c.k_generators.push_back(std::numbers::pi * unit(3, 2));
  } else if (name == "su2_mod_u1") {
    c.factor = make_factor(factor_kind::su2);
    c.k_vectors.push_back(unit(3, 2));
    c.p_vectors = {unit(3, 0), unit(3, 1)};
    c.blocks.push_back({0, 1});
  } else if (name == "su3") {
    c.factor = make_factor(factor_kind::su3);
    // Root-space blocks plus the Cartan block.
    for (int i : {0, 1, 3, 4, 5, 6, 2, 7}) c.p_vectors.push_back(unit(8, i));
    c.blocks = {{0, 1}, {2, 3}, {4, 5}, {6, 7}};
  } else if (name == "su3_mod_t2") {
    c.factor = make_factor(factor_kind::su3);
    c.k_vectors = {unit(8, 2), unit(8, 7)};
    for (int i : {0, 1, 3, 4, 5, 6}) c.p_vectors.push_back(unit(8, i));
    c.blocks = {{0, 1}, {2, 3}, {4, 5}};
  } else {
    throw error(errc::unknown_space, "no catalog entry named '" + name + "'");
  }
  return c;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

}  // namespace detail

inline std::vector<std::string> catalog_names() {
  return {"torus", "su2", "so3", "su2_mod_u1", "su3", "su3_mod_t2"};
}

// Catalog: torus (params [n]), su2, so3, su2_mod_u1, su3, su3_mod_t2 and
// products written "a*b" (torus factors consume one parameter each, in order).
inline HomogeneousSpaceModel build_space_model(const std::string& catalog_name, const std::vector<int>& params = {}) {
  auto names = detail::split(catalog_name, '*');
  if (names.empty()) throw error(errc::unknown_space, "empty space name");
  size_t next_param = 0;
  std::vector<detail::Component> comps;
  for (const auto& nm : names) {
    const bool needs = nm == "torus";
    int p = 0;
    bool has = false;
    if (needs) {
      if (next_param >= params.size()) throw error(errc::invalid_params, "missing torus rank parameter");
      p = params[next_param++];
      has = true;
    }
    comps.push_back(detail::component(nm, p, has));
  }
  if (next_param != params.size()) throw error(errc::invalid_params, "unexpected extra parameters for '" + catalog_name + "'");

  HomogeneousSpaceModel s;
  s.name = catalog_name;
  s.params = params;
  int alg = 0, elem = 0, mat = 0;
  std::vector<GroupFactor> factors;
  for (auto& c : comps) {
    c.factor.alg_offset = alg;
    c.factor.elem_offset = elem;
    c.factor.mat_offset = mat;
    alg += c.factor.alg_dim;
    elem += c.factor.elem_size;
    mat += c.factor.mat_dim;
    factors.push_back(c.factor);
  }
  s.group = GroupOps(factors);

  // Block-diagonal realization.
  for (const auto& c : comps) {
    std::vector<std::string> labels;
    auto basis = factor_basis(c.factor, &labels);
    for (size_t a = 0; a < basis.size(); ++a) {
      CMatrix big = CMatrix::Zero(mat, mat);
      big.block(c.factor.mat_offset, c.factor.mat_offset, c.factor.mat_dim, c.factor.mat_dim) = basis[a];
      s.algebra.matrix_realization.push_back(big);
      s.algebra.basis_labels.push_back(comps.size() > 1 ? labels[a] + "_" + std::to_string(&c - comps.data() + 1)
                                                        : labels[a]);
    }
  }
  s.algebra.finalize();

  auto lift = [&](const detail::Component& c, const RVector& local) {
    RVector v = RVector::Zero(alg);
    v.segment(c.factor.alg_offset, c.factor.alg_dim) = local;
    return v;
  };
  std::vector<RVector> kv, pv;
  std::vector<std::vector<int>> blocks;
  for (const auto& c : comps) {
    for (const auto& v : c.k_vectors) kv.push_back(lift(c, v));
    const int base = int(pv.size());
    for (const auto& v : c.p_vectors) pv.push_back(lift(c, v));
    for (auto b : c.blocks) {
      for (auto& i : b) i += base;
      blocks.push_back(b);
    }
    for (const auto& g : c.k_generators) s.k_group_generators.push_back(lift(c, g));
  }
  s.k_basis = RMatrix(alg, Eigen::Index(kv.size()));
  for (size_t i = 0; i < kv.size(); ++i) s.k_basis.col(Eigen::Index(i)) = kv[i];
  s.p_basis = RMatrix(alg, Eigen::Index(pv.size()));
  for (size_t i = 0; i < pv.size(); ++i) s.p_basis.col(Eigen::Index(i)) = pv[i];
  const int n = int(pv.size());
  for (const auto& b : blocks) {
    RMatrix blk = RMatrix::Zero(n, Eigen::Index(b.size()));
    for (size_t j = 0; j < b.size(); ++j) blk(b[j], Eigen::Index(j)) = 1.0;
    s.declared_decomposition.push_back(blk);
  }
  s.finalize();
  return s;
}

// The pair (G, H) for a subalgebra h containing k, with q = h-perp and a
// single declared block. Closedness of H is the caller's responsibility.
inline HomogeneousSpaceModel make_quotient_model(const HomogeneousSpaceModel& base, const RMatrix& h_basis_g,
                                                 const std::string& label) {
  HomogeneousSpaceModel s;
  s.name = base.name + "/" + label;
  s.params = base.params;
  s.algebra = base.algebra;
  s.group = base.group;
  s.k_basis = linalg::column_space(h_basis_g);
  s.p_basis = linalg::null_space(RMatrix(s.k_basis.transpose()));
  if (s.k_basis.cols() == 0) s.p_basis = RMatrix::Identity(base.m(), base.m());
  s.k_group_generators = base.k_group_generators;
  if (s.p_basis.cols() > 0) s.declared_decomposition.push_back(RMatrix::Identity(s.p_basis.cols(), s.p_basis.cols()));
  s.finalize();
  return s;
}

}  // namespace hspec
