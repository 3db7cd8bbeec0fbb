#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "hspec/algebraic.hpp"
#include "hspec/kdtree.hpp"
#include "hspec/metric.hpp"
#include "hspec/parallel.hpp"
#include "hspec/space_model.hpp"

namespace hspec {

enum class diameter_method { closed_form, graph, penalty_limit };

inline const char* method_name(diameter_method m) {
  switch (m) {
    case diameter_method::closed_form: return "closed_form";
    case diameter_method::graph: return "graph";
    case diameter_method::penalty_limit: return "penalty_limit";
  }
  return "?";
}

struct DiameterEstimate {
  double value = 0.0;  // +inf marks a divergent penalty sequence
  diameter_method method = diameter_method::graph;
  long samples = 0;
  int neighbor_count = 0;
  double convergence_ratio = 0.0;
  std::optional<double> penalty_epsilon;
  std::uint64_t seed = 0;
  bool coarse = false;     // dim > 3: excluded from tight tolerances
  bool converged = true;   // convergence_ratio below the requested tolerance
  // Penalty runs only.
  std::string direction;   // "from_below" (sub-Riemannian) or "from_above" (singular)
  std::vector<double> epsilons, sequence;
  double limit = 0.0;      // extrapolated penalty limit
  bool monotone = true;
};

struct DiameterOptions {
  long n_start = 25000;
  long n_max = 400000;
  int k_neighbors = 12;
  double tolerance = 0.02;
  std::uint64_t seed = 1;
  int threads = 1;
  int pool_factor = 0;  // kNN candidate pool = k * pool_factor; 0 picks from the metric anisotropy
};

namespace detail {

// Smallest t > 0 with exp(t X) = 1 for X in the matrix realization, or 0.
inline double period_of(const HomogeneousSpaceModel& s, const RVector& x) {
  const CMatrix m = s.algebra.to_matrix(x);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(cplx(0.0, 1.0) * m);
  const RVector& w = es.eigenvalues();
  double w0 = 0.0;
  for (Eigen::Index j = 0; j < w.size(); ++j) w0 = std::max(w0, std::abs(w(j)));
  if (w0 < 1e-12) return 0.0;
  for (int mult = 1; mult <= 24; ++mult) {
    const double t = 2.0 * std::numbers::pi * mult / w0;
    bool ok = true;
    for (Eigen::Index j = 0; j < w.size() && ok; ++j) {
      const double r = t * w(j) / (2.0 * std::numbers::pi);
      ok = std::abs(r - std::round(r)) < 1e-8;
    }
    if (ok) return t;
  }
  return 0.0;
}

inline int factor_of_vector(const HomogeneousSpaceModel& s, const RVector& v) {
  int found = -1;
  const auto& fs = s.group.factors();
  for (size_t fi = 0; fi < fs.size(); ++fi)
    if (v.segment(fs[fi].alg_offset, fs[fi].alg_dim).norm() > 1e-12) {
      if (found >= 0) return -2;
      found = int(fi);
    }
  return found;
}

}  // namespace detail

// Local geometry of G/K needed by the graph method: an embedding of cosets
// for neighbour search, and the length of short edges between cosets.
class CosetGeometry {
 public:
  CosetGeometry(const HomogeneousSpaceModel& s, const RMatrix& phi) : s_(s) {
    const int m = s.m();
    metric_g_ = s.p_basis * phi * s.p_basis.transpose();
    kb_ = s.k_basis;
    const auto& fs = s.group.factors();
    modes_.resize(fs.size());
    for (Eigen::Index a = 0; a < kb_.cols(); ++a) {
      const int fi = detail::factor_of_vector(s, kb_.col(a));
      if (fi < 0) throw error(errc::unsupported_group, "isotropy algebra mixes group factors");
      modes_[size_t(fi)].k_dirs.push_back(int(a));
    }
    for (const auto& x : s.k_group_generators) {
      const int fi = detail::factor_of_vector(s, x);
      if (fi >= 0) modes_[size_t(fi)].has_finite = true;
    }
    for (size_t fi = 0; fi < fs.size(); ++fi) {
      auto& md = modes_[fi];
      const auto& f = fs[fi];
      md.offset = embed_dim_;
      if (f.kind == factor_kind::torus) {
        std::vector<bool> quotient(size_t(f.rank), false);
        for (int a : md.k_dirs) {
          int hits = 0;
          for (int c = 0; c < f.rank; ++c)
            if (std::abs(kb_(f.alg_offset + c, a)) > 1e-12) {
              ++hits;
              quotient[size_t(c)] = true;
            }
          if (hits != 1) throw error(errc::unsupported_group, "torus isotropy must be coordinate aligned");
        }
        if (md.has_finite) throw error(errc::unsupported_group, "finite isotropy in a torus factor");
        for (int c = 0; c < f.rank; ++c)
          if (!quotient[size_t(c)]) md.torus_coords.push_back(c);
        md.kind = embed_kind::torus;
        embed_dim_ += 2 * int(md.torus_coords.size());
      } else if (int(md.k_dirs.size()) == f.alg_dim) {
        md.kind = embed_kind::none;
      } else if (!md.k_dirs.empty()) {
        // Ad(g) Z for a generic Z in the (abelian) isotropy algebra: its
        // stabiliser is the maximal-torus centraliser, i.e. K itself.
        RVector z = RVector::Zero(m);
        double w = 1.0;
        for (int a : md.k_dirs) {
          z += w * kb_.col(a);
          w *= std::numbers::sqrt2 + 0.137;
        }
        md.z = s.algebra.to_matrix(z).block(f.mat_offset, f.mat_offset, f.mat_dim, f.mat_dim);
        md.kind = embed_kind::adjoint_orbit;
        embed_dim_ += 2 * f.mat_dim * f.mat_dim;
      } else if (md.has_finite) {
        md.kind = embed_kind::adjoint_matrix;
        embed_dim_ += 2 * f.mat_dim * f.mat_dim * f.mat_dim * f.mat_dim;
      } else {
        md.kind = embed_kind::element;
        embed_dim_ += f.elem_size;
      }
    }
    build_k_samples();
  }

  int embed_dim() const { return embed_dim_; }
  const HomogeneousSpaceModel& model() const { return s_; }

  void embed(const double* g, double* out) const {
    const auto& fs = s_.group.factors();
    CMatrix full;
    bool have_full = false;
    for (size_t fi = 0; fi < fs.size(); ++fi) {
      const auto& md = modes_[fi];
      const auto& f = fs[fi];
      double* o = out + md.offset;
      const double* x = g + f.elem_offset;
      switch (md.kind) {
        case embed_kind::none: break;
        case embed_kind::torus:
          for (size_t c = 0; c < md.torus_coords.size(); ++c) {
            o[2 * c] = std::cos(x[md.torus_coords[c]]);
            o[2 * c + 1] = std::sin(x[md.torus_coords[c]]);
          }
          break;
        case embed_kind::element:
          for (int c = 0; c < f.elem_size; ++c) o[c] = x[c];
          break;
        case embed_kind::adjoint_orbit:
        case embed_kind::adjoint_matrix: {
          if (!have_full) {
            full = s_.group.to_matrix(g);
            have_full = true;
          }
          const CMatrix b = full.block(f.mat_offset, f.mat_offset, f.mat_dim, f.mat_dim);
          CMatrix e;
          if (md.kind == embed_kind::adjoint_orbit) {
            e = b * md.z * b.adjoint();
          } else {
            // g (x) conj(g) determines Ad(g) and is blind to central elements.
            e = CMatrix(f.mat_dim * f.mat_dim, f.mat_dim * f.mat_dim);
            for (int i = 0; i < f.mat_dim; ++i)
              for (int j = 0; j < f.mat_dim; ++j) e.block(i * f.mat_dim, j * f.mat_dim, f.mat_dim, f.mat_dim) = b(i, j) * b.conjugate();
          }
          int c = 0;
          for (Eigen::Index r = 0; r < e.rows(); ++r)
            for (Eigen::Index cc = 0; cc < e.cols(); ++cc) {
              o[c++] = e(r, cc).real();
              o[c++] = e(r, cc).imag();
            }
          break;
        }
      }
    }
  }

  // Length of the short edge aK -> bK: min over k in K of the Phi-norm of
  // the p-part of log(a^-1 b k), after cancelling the k-part. Returns +inf
  // when every candidate hits the logarithm branch cut.
  double local_distance(const double* a, const double* b) const {
    const size_t es = size_t(s_.group.element_size());
    const size_t m = size_t(s_.m());
    thread_local std::vector<double> buf;
    buf.resize(5 * es + 2 * m);
    double* rel = buf.data();
    double* tmp = rel + es;
    double* kap = tmp + es;
    double* step = kap + es;
    double* next = step + es;
    double* v = next + es;
    double* w = v + m;
    s_.group.relative(a, b, rel);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& f : finite_) {
      s_.group.multiply(rel, f.data(), tmp);
      if (grid_.empty()) {
        if (s_.group.log_raw(tmp, v)) best = std::min(best, norm(v));
        continue;
      }
      double best_grid = std::numeric_limits<double>::infinity();
      const std::vector<double>* arg = nullptr;
      for (const auto& kg : grid_) {
        s_.group.multiply(tmp, kg.data(), kap);
        if (!s_.group.log_raw(kap, v)) continue;
        const double d = norm(v) + 1e-3 * k_norm(v, w);
        if (d < best_grid) {
          best_grid = d;
          arg = &kg;
        }
      }
      if (!arg) continue;
      // Newton-like cancellation of the k-part: right-multiply by exp(-v_k).
      s_.group.multiply(tmp, arg->data(), kap);
      for (int it = 0; it < 6; ++it) {
        if (!s_.group.log_raw(kap, v)) break;
        const double vk = k_norm(v, w);
        double vn = 0.0;
        for (size_t c = 0; c < m; ++c) vn += v[c] * v[c];
        if (vk < 1e-12 * std::max(1.0, std::sqrt(vn)) || it == 5) {
          best = std::min(best, norm(v));
          break;
        }
        RVector corr = RVector::Zero(Eigen::Index(m));
        for (Eigen::Index a2 = 0; a2 < kb_.cols(); ++a2) corr -= w[a2] * kb_.col(a2);
        s_.group.exp(corr, step);
        s_.group.multiply(kap, step, next);
        std::copy(next, next + es, kap);
      }
    }
    return best;
  }

  // Metric anisotropy used to size the neighbour candidate pool.
  double anisotropy() const {
    Eigen::SelfAdjointEigenSolver<RMatrix> es(s_.p_basis.transpose() * metric_g_ * s_.p_basis);
    const RVector& ev = es.eigenvalues();
    double a = 1.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) a *= std::sqrt(ev(i) / ev(0));
    return a;
  }

 private:
  enum class embed_kind { none, torus, element, adjoint_orbit, adjoint_matrix };
  struct FactorMode {
    embed_kind kind = embed_kind::element;
    int offset = 0;
    std::vector<int> k_dirs;
    bool has_finite = false;
    std::vector<int> torus_coords;
    CMatrix z;
  };

  double norm(const double* v) const {
    const Eigen::Index m = metric_g_.rows();
    double acc = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (v[j] == 0.0) continue;
      double row = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) row += metric_g_(i, j) * v[i];
      acc += row * v[j];
    }
    return std::sqrt(std::max(0.0, acc));
  }
  // Coordinates of the k-part written to w; returns its norm.
  double k_norm(const double* v, double* w) const {
    double acc = 0.0;
    for (Eigen::Index a = 0; a < kb_.cols(); ++a) {
      double c = 0.0;
      for (Eigen::Index i = 0; i < kb_.rows(); ++i) c += kb_(i, a) * v[i];
      w[a] = c;
      acc += c * c;
    }
    return std::sqrt(acc);
  }

  void build_k_samples() {
    const int es = s_.group.element_size();
    std::vector<double> id(static_cast<size_t>(es));
    s_.group.identity(id.data());
    finite_.push_back(id);
    // Close the finite generators under multiplication.
    std::vector<std::vector<double>> gens;
    for (const auto& x : s_.k_group_generators) {
      std::vector<double> g(static_cast<size_t>(es));
      s_.group.exp(x, g.data());
      gens.push_back(g);
    }
    for (size_t i = 0; i < finite_.size() && finite_.size() < 64; ++i)
      for (const auto& g : gens) {
        std::vector<double> p(static_cast<size_t>(es));
        s_.group.multiply(finite_[i].data(), g.data(), p.data());
        bool seen = false;
        for (const auto& f : finite_) {
          double d = 0.0;
          for (int c = 0; c < es; ++c) d = std::max(d, std::abs(f[size_t(c)] - p[size_t(c)]));
          if (d < 1e-9) seen = true;
        }
        if (!seen) finite_.push_back(p);
      }
    const int r = int(kb_.cols());
    if (r > 0) {
      std::vector<double> periods;
      for (int a = 0; a < r; ++a) {
        const double t = detail::period_of(s_, kb_.col(a));
        if (t <= 0.0) throw error(errc::not_a_subgroup, "isotropy direction does not close up");
        periods.push_back(t);
      }
      const int per_dim = r == 1 ? 32 : (r == 2 ? 6 : 3);
      std::vector<int> idx(static_cast<size_t>(r), 0);
      for (;;) {
        RVector x = RVector::Zero(s_.m());
        for (int a = 0; a < r; ++a) x += periods[size_t(a)] * idx[size_t(a)] / per_dim * kb_.col(a);
        std::vector<double> g(static_cast<size_t>(es));
        s_.group.exp(x, g.data());
        grid_.push_back(g);
        int a = 0;
        while (a < r && ++idx[size_t(a)] == per_dim) idx[size_t(a++)] = 0;
        if (a == r) break;
      }
    }
  }

  const HomogeneousSpaceModel& s_;
  RMatrix metric_g_;
  RMatrix kb_;
  std::vector<FactorMode> modes_;
  int embed_dim_ = 0;
  std::vector<std::vector<double>> finite_, grid_;
};

namespace detail {

struct GraphRun {
  double value = 0.0;
  long edges = 0;
};

inline GraphRun graph_max_distance(const CosetGeometry& geo, const std::vector<double>& elems, long n, int k, int pool,
                                   int threads) {
  const auto& s = geo.model();
  const int es = s.group.element_size();
  const int ed = geo.embed_dim();
  std::vector<double> emb(size_t(n) * size_t(ed));
  parallel_for(n, threads, [&](long i) { geo.embed(&elems[size_t(i) * size_t(es)], &emb[size_t(i) * size_t(ed)]); });
  KdTree tree(emb.data(), int(n), ed);
  const int kk = std::min<long>(k, n - 1);
  const int pp = int(std::min<long>(std::max(pool, kk), n - 1));
  std::vector<int> nbr(size_t(n) * size_t(kk));
  std::vector<double> wt(size_t(n) * size_t(kk));
  parallel_for(
      n, threads,
      [&](long i) {
        const CosetGeometry& g = geo;
        const auto cand = tree.knn(&emb[size_t(i) * size_t(ed)], pp + 1);
        std::vector<std::pair<double, int>> d;
        d.reserve(cand.size());
        for (int j : cand) {
          if (j == i) continue;
          const double len = g.local_distance(&elems[size_t(i) * size_t(es)], &elems[size_t(j) * size_t(es)]);
          if (std::isfinite(len)) d.emplace_back(len, j);
        }
        const size_t keep = std::min(d.size(), size_t(kk));
        std::partial_sort(d.begin(), d.begin() + long(keep), d.end());
        for (size_t c = 0; c < size_t(kk); ++c) {
          nbr[size_t(i) * size_t(kk) + c] = c < keep ? d[c].second : -1;
          wt[size_t(i) * size_t(kk) + c] = c < keep ? d[c].first : 0.0;
        }
      },
      64);

  // Symmetrised adjacency in CSR form.
  std::vector<long> deg(size_t(n) + 1, 0);
  for (long i = 0; i < n; ++i)
    for (int c = 0; c < kk; ++c) {
      const int j = nbr[size_t(i) * size_t(kk) + size_t(c)];
      if (j < 0) continue;
      ++deg[size_t(i) + 1];
      ++deg[size_t(j) + 1];
    }
  for (long i = 0; i < n; ++i) deg[size_t(i) + 1] += deg[size_t(i)];
  std::vector<int> adj(size_t(deg[size_t(n)]));
  std::vector<double> aw(adj.size());
  std::vector<long> fill(deg.begin(), deg.end() - 1);
  for (long i = 0; i < n; ++i)
    for (int c = 0; c < kk; ++c) {
      const int j = nbr[size_t(i) * size_t(kk) + size_t(c)];
      if (j < 0) continue;
      const double w = wt[size_t(i) * size_t(kk) + size_t(c)];
      adj[size_t(fill[size_t(i)])] = j;
      aw[size_t(fill[size_t(i)]++)] = w;
      adj[size_t(fill[size_t(j)])] = int(i);
      aw[size_t(fill[size_t(j)]++)] = w;
    }

  // Dijkstra with any-angle relaxation: besides u -> v, try the direct
  // one-parameter-subgroup curve from u's parent to v. Every log-chart
  // length is the length of an actual curve, so this only removes zig-zag
  // and never undercuts the true distance.
  std::vector<double> dist(size_t(n), std::numeric_limits<double>::infinity());
  std::vector<int> parent(size_t(n), -1);
  using QE = std::pair<double, int>;
  std::priority_queue<QE, std::vector<QE>, std::greater<QE>> pq;
  dist[0] = 0.0;
  pq.emplace(0.0, 0);
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[size_t(u)]) continue;
    const int pu = parent[size_t(u)];
    for (long e = deg[size_t(u)]; e < deg[size_t(u) + 1]; ++e) {
      const int v = adj[size_t(e)];
      double nd = d + aw[size_t(e)];
      if (nd >= dist[size_t(v)] && pu < 0) continue;
      int par = u;
      if (pu >= 0) {
        const double alt =
            dist[size_t(pu)] + geo.local_distance(&elems[size_t(pu) * size_t(es)], &elems[size_t(v) * size_t(es)]);
        if (alt < nd) {
          nd = alt;
          par = pu;
        }
      }
      if (nd < dist[size_t(v)]) {
        dist[size_t(v)] = nd;
        parent[size_t(v)] = par;
        pq.emplace(nd, v);
      }
    }
  }
  GraphRun run;
  run.edges = long(adj.size()) / 2;
  for (double d : dist) {
    if (!std::isfinite(d))
      throw error(errc::disconnected_graph, "kNN graph is disconnected; increase the neighbour count");
    run.value = std::max(run.value, d);
  }
  return run;
}

}  // namespace detail

// Haar-distributed group elements, flattened; deterministic per seed.
inline std::vector<double> haar_sample(const HomogeneousSpaceModel& s, long n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int es = s.group.element_size();
  std::vector<double> out(size_t(n) * size_t(es));
  for (long i = 0; i < n; ++i) s.group.haar(rng, &out[size_t(i) * size_t(es)]);
  return out;
}

// Graph estimate at a single sample size.
inline DiameterEstimate graph_diameter_fixed(const HomogeneousSpaceModel& s, const RMatrix& phi, long n, int k,
                                             std::uint64_t seed, int threads = 1, int pool_factor = 0) {
  CosetGeometry geo(s, phi);
  auto elems = haar_sample(s, n, seed);
  s.group.identity(elems.data());
  const int pf = pool_factor > 0 ? pool_factor : int(std::clamp(std::ceil(geo.anisotropy()), 3.0, 16.0));
  DiameterEstimate est;
  est.value = detail::graph_max_distance(geo, elems, n, k, k * pf, threads).value;
  est.method = diameter_method::graph;
  est.samples = n;
  est.neighbor_count = k;
  est.seed = seed;
  est.coarse = s.n() > 3;
  return est;
}

// Graph estimate refined by doubling N until successive values agree to the
// requested tolerance. Samples are nested: the first N of 2N are reused.
inline DiameterEstimate graph_diameter(const HomogeneousSpaceModel& s, const RMatrix& phi,
                                       const DiameterOptions& opt = {}) {
  if (s.n() == 0) {
    DiameterEstimate e;
    e.method = diameter_method::closed_form;
    return e;
  }
  CosetGeometry geo(s, phi);
  const int pf = opt.pool_factor > 0 ? opt.pool_factor : int(std::clamp(std::ceil(geo.anisotropy()), 3.0, 16.0));
  auto elems = haar_sample(s, opt.n_max, opt.seed);
  s.group.identity(elems.data());
  DiameterEstimate est;
  est.method = diameter_method::graph;
  est.neighbor_count = opt.k_neighbors;
  est.seed = opt.seed;
  est.coarse = s.n() > 3;
  long n = std::min(opt.n_start, opt.n_max);
  double prev = detail::graph_max_distance(geo, elems, std::max(2L, n / 2), opt.k_neighbors, opt.k_neighbors * pf,
                                           opt.threads)
                    .value;
  for (;;) {
    const double v = detail::graph_max_distance(geo, elems, n, opt.k_neighbors, opt.k_neighbors * pf, opt.threads).value;
    est.value = v;
    est.samples = n;
    est.convergence_ratio = std::abs(v - prev) / v;
    prev = v;
    if (est.convergence_ratio < opt.tolerance || n >= opt.n_max) break;
    n = std::min(opt.n_max, 2 * n);
  }
  est.converged = est.convergence_ratio < opt.tolerance;
  return est;
}

// ---------------------------------------------------------------------------
// Closed forms

namespace detail {

// LLL reduction of the lattice with Gram matrix g (columns of the returned
// integer matrix are the reduced basis in original coordinates).
inline Eigen::MatrixXd lll_reduce(const RMatrix& g) {
  const int n = int(g.rows());
  Eigen::MatrixXd b = Eigen::MatrixXd::Identity(n, n);
  auto ip = [&](int i, int j) { return double(b.col(i).transpose() * g * b.col(j)); };
  int k = 1;
  int guard = 0;
  while (k < n && ++guard < 10000) {
    // Gram-Schmidt coefficients.
    std::vector<RVector> bs(static_cast<size_t>(n));
    RMatrix mu = RMatrix::Zero(n, n);
    std::vector<double> nrm(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      double sub = 0.0;
      for (int j = 0; j < i; ++j) {
        double num = ip(i, j);
        for (int l = 0; l < j; ++l) num -= mu(j, l) * mu(i, l) * nrm[size_t(l)];
        mu(i, j) = num / nrm[size_t(j)];
        sub += mu(i, j) * mu(i, j) * nrm[size_t(j)];
      }
      nrm[size_t(i)] = ip(i, i) - sub;
    }
    for (int j = k - 1; j >= 0; --j) {
      const double r = std::round(mu(k, j));
      if (r != 0.0) {
        b.col(k) -= r * b.col(j);
        for (int l = 0; l <= j; ++l) mu(k, l) -= r * (l == j ? 1.0 : mu(j, l));
      }
    }
    double nk = ip(k, k);
    for (int l = 0; l < k; ++l) nk -= mu(k, l) * mu(k, l) * nrm[size_t(l)];
    if (nk >= (0.99 - mu(k, k - 1) * mu(k, k - 1)) * nrm[size_t(k - 1)]) {
      ++k;
    } else {
      b.col(k).swap(b.col(k - 1));
      k = std::max(1, k - 1);
    }
  }
  return b;
}

}  // namespace detail

// Circumradius of the Voronoi cell of the lattice with Gram matrix g, n <= 3.
inline double voronoi_circumradius(const RMatrix& g) {
  const int n = int(g.rows());
  if (n == 1) return 0.5 * std::sqrt(g(0, 0));
  const Eigen::MatrixXd b = detail::lll_reduce(g);
  const RMatrix gr = b.transpose() * g * b;
  const int r = 3;
  std::vector<RVector> all;
  std::vector<int> c(static_cast<size_t>(n), -r);
  for (;;) {
    RVector v(n);
    bool zero = true;
    for (int i = 0; i < n; ++i) {
      v(i) = c[size_t(i)];
      zero = zero && c[size_t(i)] == 0;
    }
    if (!zero) all.push_back(v);
    int i = 0;
    while (i < n && ++c[size_t(i)] > r) c[size_t(i++)] = -r;
    if (i == n) break;
  }
  auto len2 = [&](const RVector& v) { return double(v.transpose() * gr * v); };
  // v is Voronoi-relevant iff +-v are the only shortest vectors of v + 2L.
  std::vector<RVector> rel;
  for (const auto& v : all) {
    if (v.cwiseAbs().maxCoeff() > 2) continue;
    const double lv = len2(v);
    bool relevant = true;
    for (const auto& u : all) {
      if ((u - v).cwiseAbs().maxCoeff() == 0 || (u + v).cwiseAbs().maxCoeff() == 0) continue;
      bool same_coset = true;
      for (int i = 0; i < n; ++i) same_coset = same_coset && (int(std::llround(u(i) - v(i))) % 2 == 0);
      if (same_coset && len2(u) <= lv * (1.0 + 1e-12)) {
        relevant = false;
        break;
      }
    }
    if (relevant) rel.push_back(v);
  }
  double best = 0.0;
  std::vector<int> pick(static_cast<size_t>(n));
  std::function<void(int, int)> choose = [&](int depth, int start) {
    if (depth == n) {
      RMatrix a(n, n);
      RVector rhs(n);
      for (int i = 0; i < n; ++i) {
        const RVector& v = rel[size_t(pick[size_t(i)])];
        a.row(i) = (gr * v).transpose();
        rhs(i) = 0.5 * len2(v);
      }
      Eigen::FullPivLU<RMatrix> lu(a);
      if (lu.rank() < n) return;
      const RVector x = lu.solve(rhs);
      for (const auto& v : rel)
        if (double(x.transpose() * gr * v) > 0.5 * len2(v) * (1.0 + 1e-9) + 1e-12) return;
      best = std::max(best, len2(x));
      return;
    }
    for (int i = start; i < int(rel.size()); ++i) {
      pick[size_t(depth)] = i;
      choose(depth + 1, i + 1);
    }
  };
  choose(0, 0);
  return std::sqrt(best);
}

namespace detail {

inline bool coordinate_aligned(const RMatrix& basis) {
  for (Eigen::Index c = 0; c < basis.cols(); ++c) {
    int hits = 0;
    for (Eigen::Index r = 0; r < basis.rows(); ++r)
      if (std::abs(basis(r, c)) > 1e-12) {
        if (std::abs(std::abs(basis(r, c)) - 1.0) > 1e-12) return false;
        ++hits;
      }
    if (hits != 1) return false;
  }
  return true;
}

inline std::optional<double> scalar_of(const RMatrix& phi) {
  const double c = phi(0, 0);
  if ((phi - c * RMatrix::Identity(phi.rows(), phi.cols())).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, c))
    return std::nullopt;
  return c;
}

}  // namespace detail

// Diameters known in closed form: flat tori (any invariant metric, n <= 3)
// and round metrics on SU(2), SO(3) and the 2-sphere SU(2)/U(1).
inline std::optional<double> closed_form_diameter(const HomogeneousSpaceModel& s, const RMatrix& phi) {
  if (s.n() == 0) return 0.0;
  const auto& fs = s.group.factors();
  bool all_torus = true;
  for (const auto& f : fs) all_torus = all_torus && f.kind == factor_kind::torus;
  if (all_torus) {
    if (!s.k_group_generators.empty() || s.n() > 3) return std::nullopt;
    if (!detail::coordinate_aligned(s.p_basis) || !detail::coordinate_aligned(s.k_basis)) return std::nullopt;
    // Each p-coordinate is an angle of period 2 pi.
    return voronoi_circumradius(4.0 * std::numbers::pi * std::numbers::pi * phi);
  }
  if (fs.size() == 1 && fs[0].kind == factor_kind::su2) {
    const auto c = detail::scalar_of(phi);
    if (!c) return std::nullopt;
    const double root = std::sqrt(*c);
    if (s.n() == 3 && s.k_group_generators.empty()) return std::numbers::pi * root;
    if (s.n() == 3) {
      // Finite central isotropy {+-1}: SO(3).
      bool central_pm = true;
      for (const auto& x : s.k_group_generators) {
        std::vector<double> e(4);
        s.group.exp(x, e.data());
        central_pm = central_pm && std::abs(std::abs(e[0]) - 1.0) < 1e-12;
      }
      if (central_pm) return 0.5 * std::numbers::pi * root;
      return std::nullopt;
    }
    if (s.n() == 2) return 0.5 * std::numbers::pi * root;  // Hopf base: sphere of radius 1/2
  }
  return std::nullopt;
}

// Closed form when available, graph estimate otherwise.
inline DiameterEstimate estimate_diameter(const HomogeneousSpaceModel& s, const RMatrix& phi,
                                          const DiameterOptions& opt = {}) {
  if (auto v = closed_form_diameter(s, phi)) {
    DiameterEstimate e;
    e.value = *v;
    e.method = diameter_method::closed_form;
    e.seed = opt.seed;
    return e;
  }
  return graph_diameter(s, phi, opt);
}

// ---------------------------------------------------------------------------
// Subgroups and quotients

// A subalgebra h (g-coordinates) generates a closed subgroup iff its centre
// does: the semisimple part always integrates to a closed subgroup. The
// centre closes up iff the eigenvalue functionals of its elements span a
// rational lattice of full rank.
inline bool generates_closed_subgroup(const HomogeneousSpaceModel& s, const RMatrix& h) {
  const RMatrix basis = linalg::column_space(h);
  const Eigen::Index r = basis.cols();
  if (r == 0) return true;
  // Centre: X in h with [X, h_j] = 0 for all j.
  RMatrix sys(s.m() * r, r);
  for (Eigen::Index j = 0; j < r; ++j) {
    RMatrix adj = -s.algebra.ad(basis.col(j));  // X -> [X, h_j]
    sys.block(s.m() * j, 0, s.m(), r) = adj * basis;
  }
  const RMatrix zc = linalg::null_space(sys, 1e-9);
  if (zc.cols() == 0) return true;
  const RMatrix z = basis * zc;
  // Simultaneously diagonalise the commuting centre via a generic combination.
  RVector generic = RVector::Zero(s.m());
  double w = 1.0;
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    generic += w * z.col(j);
    w *= 1.6180339887;
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(cplx(0.0, 1.0) * s.algebra.to_matrix(generic));
  const CMatrix& u = es.eigenvectors();
  const Eigen::Index nm = u.rows();
  RMatrix fun(nm, z.cols());  // eigenvalue functionals (rows) on the centre
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const CMatrix d = u.adjoint() * (cplx(0.0, 1.0) * s.algebra.to_matrix(z.col(j))) * u;
    for (Eigen::Index i = 0; i < nm; ++i) fun(i, j) = d(i, i).real();
  }
  // Pick a maximal independent set of rows and express the rest in it.
  std::vector<Eigen::Index> pivots;
  RMatrix sel(0, z.cols());
  for (Eigen::Index i = 0; i < nm && Eigen::Index(pivots.size()) < z.cols(); ++i) {
    RMatrix trial(sel.rows() + 1, z.cols());
    trial << sel, fun.row(i);
    if (linalg::rank(RMatrix(trial.transpose()), 1e-9) > sel.rows()) {
      sel = trial;
      pivots.push_back(i);
    }
  }
  if (sel.rows() < z.cols()) return false;
  const RMatrix coeff = sel.transpose().fullPivLu().solve(fun.transpose()).transpose();
  for (Eigen::Index i = 0; i < coeff.rows(); ++i)
    for (Eigen::Index j = 0; j < coeff.cols(); ++j) {
      bool rational = false;
      for (int den = 1; den <= 60 && !rational; ++den)
        rational = std::abs(coeff(i, j) * den - std::round(coeff(i, j) * den)) < 1e-8 * den;
      if (!rational) return false;
    }
  return true;
}

inline bool is_subalgebra(const HomogeneousSpaceModel& s, const RMatrix& h) {
  const RMatrix basis = linalg::column_space(h);
  const RMatrix proj = basis * basis.transpose();
  for (Eigen::Index a = 0; a < basis.cols(); ++a)
    for (Eigen::Index b = a + 1; b < basis.cols(); ++b) {
      const RVector br = s.algebra.bracket(basis.col(a), basis.col(b));
      if ((br - proj * br).norm() > 1e-10 * std::max(1.0, br.norm())) return false;
    }
  return true;
}

// Quotient model G/H for a closed connected H containing K (the finite
// isotropy generators are carried over).
inline HomogeneousSpaceModel quotient_model(const HomogeneousSpaceModel& s, const RMatrix& h_basis_g,
                                            const std::string& label = "H") {
  if (h_basis_g.rows() != s.m()) throw error(errc::dimension_mismatch, "subalgebra basis has the wrong row count");
  const RMatrix h = linalg::column_space(h_basis_g);
  if (s.k_basis.cols() > 0 && (s.k_basis - h * (h.transpose() * s.k_basis)).cwiseAbs().maxCoeff() > 1e-10)
    throw error(errc::not_a_subgroup, "subalgebra does not contain the isotropy algebra");
  if (!is_subalgebra(s, h)) throw error(errc::not_a_subgroup, "span is not closed under the bracket");
  if (!generates_closed_subgroup(s, h)) throw error(errc::not_a_subgroup, "connected subgroup is not closed");
  return make_quotient_model(s, h, label);
}

// Diameter of (G/H, metric on q = h-perp); metric defaults to g0 on q and is
// given in the quotient model's p-coordinates.
inline DiameterEstimate quotient_diameter(const HomogeneousSpaceModel& s, const RMatrix& h_basis_g,
                                          std::optional<RMatrix> q_metric = std::nullopt,
                                          const DiameterOptions& opt = {}) {
  const auto qm = quotient_model(s, h_basis_g);
  if (qm.n() == 0) {
    DiameterEstimate e;
    e.method = diameter_method::closed_form;
    return e;
  }
  const RMatrix phi = q_metric ? *q_metric : RMatrix::Identity(qm.n(), qm.n());
  check_metric_matrix(qm, phi);
  return estimate_diameter(qm, phi, opt);
}

// ---------------------------------------------------------------------------
// Penalty limits

namespace detail {

// Extrapolation from the last two terms assuming an error ~ eps^order.
inline double richardson(const std::vector<double>& eps, const std::vector<double>& val, int order) {
  const size_t n = val.size();
  if (n < 2 || !std::isfinite(val[n - 1])) return val.back();
  const double e1 = std::pow(eps[n - 2], order), e2 = std::pow(eps[n - 1], order);
  return val[n - 1] + (val[n - 1] - val[n - 2]) * e2 / (e1 - e2);
}

inline void check_epsilons(const std::vector<double>& eps) {
  if (eps.size() < 2) throw error(errc::invalid_config, "penalty sequence needs at least two epsilons");
  for (size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0)) throw error(errc::invalid_config, "penalty epsilons must be positive");
    if (i > 0 && !(eps[i] < eps[i - 1])) throw error(errc::invalid_config, "penalty epsilons must decrease");
  }
}

}  // namespace detail

// Sub-Riemannian limit: metrics h on H plus eps^-2 g0 on the rest of p. The
// diameters increase toward diam(G/K, H, h). Divergence (+inf) is declared
// when the values grow more than tenfold; for non-generating H the sequence
// is extended by halving until that happens or max_extra terms are added.
inline DiameterEstimate penalty_sub_diameter(const HomogeneousSpaceModel& s, const RMatrix& H, const RMatrix& h,
                                             std::vector<double> eps, const DiameterOptions& opt = {},
                                             int max_extra = 6) {
  detail::check_epsilons(eps);
  const RMatrix hb = linalg::column_space(H);
  if (hb.rows() != s.n() || h.rows() != hb.cols() || h.cols() != hb.cols())
    throw error(errc::dimension_mismatch, "distribution and its metric do not match");
  // Express h in the orthonormalised basis.
  const RMatrix t = hb.transpose() * H;  // H = hb * t
  const RMatrix tinv = t.inverse();
  const RMatrix h_on = tinv.transpose() * h * tinv;
  const RMatrix proj = hb * hb.transpose();
  const RMatrix perp = RMatrix::Identity(s.n(), s.n()) - proj;
  const bool generating = is_bracket_generating(s, hb);

  DiameterEstimate out;
  out.method = diameter_method::penalty_limit;
  out.direction = "from_below";
  out.seed = opt.seed;
  out.coarse = s.n() > 3;
  auto run = [&](double e) {
    const RMatrix phi = linalg::symmetrize(hb * h_on * hb.transpose() + perp / (e * e));
    check_metric_matrix(s, phi);
    const auto est = estimate_diameter(s, phi, opt);
    out.samples = std::max(out.samples, est.samples);
    out.neighbor_count = est.neighbor_count;
    out.convergence_ratio = std::max(out.convergence_ratio, est.convergence_ratio);
    out.converged = out.converged && est.converged;
    out.epsilons.push_back(e);
    out.sequence.push_back(est.value);
  };
  for (double e : eps) run(e);
  auto grown = [&] { return out.sequence.back() > 10.0 * out.sequence.front(); };
  if (!generating)
    for (int i = 0; i < max_extra && !grown(); ++i) run(out.epsilons.back() / 2.0);
  for (size_t i = 1; i < out.sequence.size(); ++i)
    if (out.sequence[i] < out.sequence[i - 1] * (1.0 - opt.tolerance)) out.monotone = false;
  out.penalty_epsilon = out.epsilons.back();
  if (grown()) {
    out.value = std::numeric_limits<double>::infinity();
    out.limit = out.value;
  } else {
    out.value = out.sequence.back();
    out.limit = std::max(out.value, detail::richardson(out.epsilons, out.sequence, 1));
    if (!generating) out.converged = false;
  }
  return out;
}

// Singular limit: g0 on C plus eps^2 g0 on the rest of p. Diameters decrease
// toward the singular diameter. When the degenerate directions together with
// k generate a proper closed subalgebra, the quotient diameter is a lower
// bound and is reported alongside.
struct SingularDiameterResult {
  DiameterEstimate estimate;
  std::optional<double> quotient_bound;
};

inline SingularDiameterResult penalty_singular_diameter(const HomogeneousSpaceModel& s, const RMatrix& C,
                                                        std::vector<double> eps, const DiameterOptions& opt = {}) {
  detail::check_epsilons(eps);
  const RMatrix cb = linalg::column_space(C);
  if (cb.rows() != s.n()) throw error(errc::dimension_mismatch, "subspace must be given in p-coordinates");
  const RMatrix proj = cb * cb.transpose();
  const RMatrix perp = RMatrix::Identity(s.n(), s.n()) - proj;
  SingularDiameterResult res;
  auto& out = res.estimate;
  out.method = diameter_method::penalty_limit;
  out.direction = "from_above";
  out.seed = opt.seed;
  out.coarse = s.n() > 3;
  for (double e : eps) {
    const RMatrix phi = linalg::symmetrize(proj + e * e * perp);
    check_metric_matrix(s, phi);
    const auto est = estimate_diameter(s, phi, opt);
    out.samples = std::max(out.samples, est.samples);
    out.neighbor_count = est.neighbor_count;
    out.convergence_ratio = std::max(out.convergence_ratio, est.convergence_ratio);
    out.converged = out.converged && est.converged;
    out.epsilons.push_back(e);
    out.sequence.push_back(est.value);
  }
  for (size_t i = 1; i < out.sequence.size(); ++i)
    if (out.sequence[i] > out.sequence[i - 1] * (1.0 + opt.tolerance)) out.monotone = false;
  out.penalty_epsilon = eps.back();
  out.value = out.sequence.back();
  // Pythagorean shrinking of the degenerate directions makes the error
  // quadratic in eps for the flat and round cases.
  out.limit = std::max(0.0, std::min(out.value, detail::richardson(out.epsilons, out.sequence, 2)));

  const RMatrix rad = s.p_basis * perp;
  const RMatrix hsub = generated_subalgebra(s, linalg::column_space(rad));
  if (hsub.cols() < s.m() && perp.norm() > 0.0) {
    try {
      auto qm = quotient_model(s, hsub, "rad");
      // g0 restricted to C descends to q = h-perp.
      res.quotient_bound = estimate_diameter(qm, RMatrix::Identity(qm.n(), qm.n()), opt).value;
    } catch (const error& e) {
      if (e.code() != errc::not_a_subgroup) throw;
    }
  }
  return res;
}

}  // namespace hspec
