#pragma once

#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "hspec/errors.hpp"
#include "hspec/linalg.hpp"

namespace hspec {

enum class factor_kind { torus, su2, su3 };

// One simple or abelian factor of a product group. Offsets locate the factor
// inside the algebra coordinates, the flat element storage and the
// block-diagonal matrix realization.
struct GroupFactor {
  factor_kind kind = factor_kind::su2;
  int rank = 1;
  int alg_offset = 0, alg_dim = 0;
  int elem_offset = 0, elem_size = 0;
  int mat_offset = 0, mat_dim = 0;
};

inline const char* factor_name(factor_kind k) {
  switch (k) {
    case factor_kind::torus: return "torus";
    case factor_kind::su2: return "su2";
    case factor_kind::su3: return "su3";
  }
  return "?";
}

namespace detail {

inline std::vector<CMatrix> pauli_basis() {
  const cplx i(0.0, 1.0);
  CMatrix s1(2, 2), s2(2, 2), s3(2, 2);
  s1 << 0, 1, 1, 0;
  s2 << 0, -i, i, 0;
  s3 << 1, 0, 0, -1;
  return {-i * s1, -i * s2, -i * s3};
}

inline std::vector<CMatrix> gell_mann_basis() {
  const cplx i(0.0, 1.0);
  std::vector<CMatrix> l(8, CMatrix::Zero(3, 3));
  l[0](0, 1) = l[0](1, 0) = 1.0;
  l[1](0, 1) = -i;
  l[1](1, 0) = i;
  l[2](0, 0) = 1.0;
  l[2](1, 1) = -1.0;
  l[3](0, 2) = l[3](2, 0) = 1.0;
  l[4](0, 2) = -i;
  l[4](2, 0) = i;
  l[5](1, 2) = l[5](2, 1) = 1.0;
  l[6](1, 2) = -i;
  l[6](2, 1) = i;
  l[7](0, 0) = l[7](1, 1) = 1.0 / std::sqrt(3.0);
  l[7](2, 2) = -2.0 / std::sqrt(3.0);
  for (auto& m : l) m = (-i * m).eval();
  return l;
}

}  // namespace detail

inline std::vector<CMatrix> factor_basis(const GroupFactor& f, std::vector<std::string>* labels = nullptr) {
  std::vector<CMatrix> b;
  switch (f.kind) {
    case factor_kind::torus:
      for (int k = 0; k < f.rank; ++k) {
        CMatrix e = CMatrix::Zero(f.rank, f.rank);
        e(k, k) = cplx(0.0, 1.0);
        b.push_back(e);
        if (labels) labels->push_back("e" + std::to_string(k + 1));
      }
      break;
    case factor_kind::su2:
      b = detail::pauli_basis();
      if (labels)
        for (int k = 1; k <= 3; ++k) labels->push_back("E" + std::to_string(k));
      break;
    case factor_kind::su3:
      b = detail::gell_mann_basis();
      if (labels)
        for (int k = 1; k <= 8; ++k) labels->push_back("X" + std::to_string(k));
      break;
  }
  return b;
}

inline GroupFactor make_factor(factor_kind kind, int rank = 1) {
  GroupFactor f;
  f.kind = kind;
  switch (kind) {
    case factor_kind::torus:
      f.rank = rank;
      f.alg_dim = rank;
      f.elem_size = rank;
      f.mat_dim = rank;
      break;
    case factor_kind::su2:
      f.rank = 1;
      f.alg_dim = 3;
      f.elem_size = 4;
      f.mat_dim = 2;
      break;
    case factor_kind::su3:
      f.rank = 2;
      f.alg_dim = 8;
      f.elem_size = 18;
      f.mat_dim = 3;
      break;
  }
  return f;
}

// Group elements are flat double arrays: torus angles, unit quaternions
// (q0 + q1 E1 + q2 E2 + q3 E3) for SU(2), row-major re/im pairs for SU(3).
class GroupOps {
 public:
  GroupOps() = default;
  explicit GroupOps(std::vector<GroupFactor> factors) : factors_(std::move(factors)) {
    for (const auto& f : factors_) {
      elem_size_ += f.elem_size;
      alg_dim_ += f.alg_dim;
      basis_.push_back(factor_basis(f));
      std::vector<Eigen::Matrix3cd> b3;
      if (f.kind == factor_kind::su3)
        for (const auto& m : basis_.back()) b3.push_back(m);
      basis3_.push_back(b3);
    }
  }

  const std::vector<GroupFactor>& factors() const { return factors_; }
  int element_size() const { return elem_size_; }
  int algebra_dim() const { return alg_dim_; }

  void identity(double* out) const {
    for (const auto& f : factors_) {
      double* o = out + f.elem_offset;
      switch (f.kind) {
        case factor_kind::torus:
          for (int k = 0; k < f.rank; ++k) o[k] = 0.0;
          break;
        case factor_kind::su2:
          o[0] = 1.0;
          o[1] = o[2] = o[3] = 0.0;
          break;
        case factor_kind::su3:
          store3(Eigen::Matrix3cd::Identity(), o);
          break;
      }
    }
  }

  void multiply(const double* a, const double* b, double* out) const {
    for (const auto& f : factors_) {
      const double* x = a + f.elem_offset;
      const double* y = b + f.elem_offset;
      double* o = out + f.elem_offset;
      switch (f.kind) {
        case factor_kind::torus:
          for (int k = 0; k < f.rank; ++k) o[k] = wrap_positive(x[k] + y[k]);
          break;
        case factor_kind::su2: {
          double r0 = x[0] * y[0] - x[1] * y[1] - x[2] * y[2] - x[3] * y[3];
          double r1 = x[0] * y[1] + x[1] * y[0] + x[2] * y[3] - x[3] * y[2];
          double r2 = x[0] * y[2] - x[1] * y[3] + x[2] * y[0] + x[3] * y[1];
          double r3 = x[0] * y[3] + x[1] * y[2] - x[2] * y[1] + x[3] * y[0];
          o[0] = r0;
          o[1] = r1;
          o[2] = r2;
          o[3] = r3;
          break;
        }
        case factor_kind::su3:
          store3(load3(x) * load3(y), o);
          break;
      }
    }
  }

  void inverse(const double* a, double* out) const {
    for (const auto& f : factors_) {
      const double* x = a + f.elem_offset;
      double* o = out + f.elem_offset;
      switch (f.kind) {
        case factor_kind::torus:
          for (int k = 0; k < f.rank; ++k) o[k] = wrap_positive(-x[k]);
          break;
        case factor_kind::su2:
          o[0] = x[0];
          o[1] = -x[1];
          o[2] = -x[2];
          o[3] = -x[3];
          break;
        case factor_kind::su3:
          store3(load3(x).adjoint(), o);
          break;
      }
    }
  }

  // a^{-1} b
  void relative(const double* a, const double* b, double* out) const {
    thread_local std::vector<double> inv;
    inv.resize(static_cast<size_t>(elem_size_));
    inverse(a, inv.data());
    multiply(inv.data(), b, out);
  }

  void exp(const RVector& x, double* out) const {
    for (size_t fi = 0; fi < factors_.size(); ++fi) {
      const auto& f = factors_[fi];
      double* o = out + f.elem_offset;
      switch (f.kind) {
        case factor_kind::torus:
          for (int k = 0; k < f.rank; ++k) o[k] = wrap_positive(x(f.alg_offset + k));
          break;
        case factor_kind::su2: {
          const double v1 = x(f.alg_offset), v2 = x(f.alg_offset + 1), v3 = x(f.alg_offset + 2);
          const double th = std::sqrt(v1 * v1 + v2 * v2 + v3 * v3);
          const double s = th > 1e-300 ? std::sin(th) / th : 1.0;
          o[0] = std::cos(th);
          o[1] = s * v1;
          o[2] = s * v2;
          o[3] = s * v3;
          break;
        }
        case factor_kind::su3: {
          Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
          for (int a = 0; a < 8; ++a) m += x(f.alg_offset + a) * basis_[fi][size_t(a)];
          // m is skew-Hermitian: exp(m) = V exp(-i D) V^* with i*m = V D V^*.
          Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(cplx(0.0, 1.0) * m);
          Eigen::Vector3cd ph;
          for (int k = 0; k < 3; ++k) ph(k) = std::polar(1.0, -es.eigenvalues()(k));
          store3(es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint(), o);
          break;
        }
      }
    }
  }

  // Principal logarithm in algebra coordinates. Sets *branch_ok to false
  // when a rotation angle sits within tol of the branch cut at pi.
  RVector log(const double* a, bool* branch_ok = nullptr, double tol = 1e-9) const {
    RVector out(alg_dim_);
    const bool ok = log_raw(a, out.data(), tol);
    if (branch_ok) *branch_ok = ok;
    return out;
  }

  // Allocation-free variant writing algebra_dim() values; returns branch_ok.
  bool log_raw(const double* a, double* out, double tol = 1e-9) const {
    bool ok = true;
    for (size_t fi = 0; fi < factors_.size(); ++fi) {
      const auto& f = factors_[fi];
      const double* x = a + f.elem_offset;
      double* o = out + f.alg_offset;
      switch (f.kind) {
        case factor_kind::torus:
          for (int k = 0; k < f.rank; ++k) {
            double t = wrap_symmetric(x[k]);
            if (std::numbers::pi - std::abs(t) < tol) ok = false;
            o[k] = t;
          }
          break;
        case factor_kind::su2: {
          const double vn = std::sqrt(x[1] * x[1] + x[2] * x[2] + x[3] * x[3]);
          const double th = std::atan2(vn, x[0]);
          if (std::numbers::pi - th < tol) ok = false;
          const double s = vn > 1e-300 ? th / vn : 1.0 / std::max(x[0], 1e-300);
          o[0] = s * x[1];
          o[1] = s * x[2];
          o[2] = s * x[3];
          break;
        }
        case factor_kind::su3: {
          Eigen::ComplexSchur<Eigen::Matrix3cd> schur(load3(x));
          Eigen::Vector3cd lg;
          for (int k = 0; k < 3; ++k) {
            const double ang = std::arg(schur.matrixT()(k, k));
            if (std::numbers::pi - std::abs(ang) < tol) ok = false;
            lg(k) = cplx(0.0, ang);
          }
          // Project the traceless part (branch choice may break tracelessness).
          const cplx tr = lg.sum() / 3.0;
          if (std::abs(tr) > 1e-8) ok = false;
          lg.array() -= tr;
          Eigen::Matrix3cd l = schur.matrixU() * lg.asDiagonal() * schur.matrixU().adjoint();
          for (int b = 0; b < 8; ++b) o[b] = 0.5 * (basis3_[fi][size_t(b)].adjoint() * l).trace().real();
          break;
        }
      }
    }
    return ok;
  }

  template <class Rng>
  void haar(Rng& rng, double* out) const {
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> ud(0.0, 2.0 * std::numbers::pi);
    for (const auto& f : factors_) {
      double* o = out + f.elem_offset;
      switch (f.kind) {
        case factor_kind::torus:
          for (int k = 0; k < f.rank; ++k) o[k] = ud(rng);
          break;
        case factor_kind::su2: {
          double n2 = 0.0;
          for (int k = 0; k < 4; ++k) {
            o[k] = nd(rng);
            n2 += o[k] * o[k];
          }
          const double inv = 1.0 / std::sqrt(n2);
          for (int k = 0; k < 4; ++k) o[k] *= inv;
          break;
        }
        case factor_kind::su3: {
          Eigen::Matrix3cd z;
          for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
              const double re = nd(rng), im = nd(rng);
              z(r, c) = cplx(re, im) / std::sqrt(2.0);
            }
          Eigen::HouseholderQR<Eigen::Matrix3cd> qr(z);
          Eigen::Matrix3cd q = qr.householderQ();
          Eigen::Matrix3cd rm = qr.matrixQR().triangularView<Eigen::Upper>();
          for (int k = 0; k < 3; ++k) {
            const cplx d = rm(k, k);
            q.col(k) *= d / std::abs(d);
          }
          const cplx det = q.determinant();
          q *= std::polar(1.0, -std::arg(det) / 3.0);
          store3(q, o);
          break;
        }
      }
    }
  }

  // Block-diagonal matrix of an element in the defining realization.
  CMatrix to_matrix(const double* a) const {
    int n = 0;
    for (const auto& f : factors_) n += f.mat_dim;
    CMatrix m = CMatrix::Zero(n, n);
    for (const auto& f : factors_) {
      const double* x = a + f.elem_offset;
      switch (f.kind) {
        case factor_kind::torus:
          for (int k = 0; k < f.rank; ++k) m(f.mat_offset + k, f.mat_offset + k) = std::polar(1.0, x[k]);
          break;
        case factor_kind::su2:
          m(f.mat_offset, f.mat_offset) = cplx(x[0], -x[3]);
          m(f.mat_offset, f.mat_offset + 1) = cplx(-x[2], -x[1]);
          m(f.mat_offset + 1, f.mat_offset) = cplx(x[2], -x[1]);
          m(f.mat_offset + 1, f.mat_offset + 1) = cplx(x[0], x[3]);
          break;
        case factor_kind::su3:
          m.block(f.mat_offset, f.mat_offset, 3, 3) = load3(x);
          break;
      }
    }
    return m;
  }

  static Eigen::Matrix3cd load3(const double* x) {
    Eigen::Matrix3cd m;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m(r, c) = cplx(x[2 * (3 * r + c)], x[2 * (3 * r + c) + 1]);
    return m;
  }
  static void store3(const Eigen::Matrix3cd& m, double* o) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        o[2 * (3 * r + c)] = m(r, c).real();
        o[2 * (3 * r + c) + 1] = m(r, c).imag();
      }
  }
  static double wrap_positive(double t) {
    const double tp = 2.0 * std::numbers::pi;
    t = std::fmod(t, tp);
    return t < 0 ? t + tp : t;
  }
  static double wrap_symmetric(double t) {
    t = wrap_positive(t);
    return t > std::numbers::pi ? t - 2.0 * std::numbers::pi : t;
  }

 private:
  std::vector<GroupFactor> factors_;
  std::vector<std::vector<CMatrix>> basis_;
  std::vector<std::vector<Eigen::Matrix3cd>> basis3_;
  int elem_size_ = 0;
  int alg_dim_ = 0;
};

}  // namespace hspec
