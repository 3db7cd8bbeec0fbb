#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hspec/irrep.hpp"

namespace hspec {

// Representation data shared across metrics: the irrep, and the maps
// W_i = pi(P_i) B from V^K into V for every p-basis vector P_i. For small
// invariant spaces the Gram blocks W_i^* W_j are precomputed as well.
struct ReducedIrrep {
  std::shared_ptr<const UnitaryIrrep> irrep;
  std::vector<CSparse> w;
  std::vector<CMatrix> gram;  // packed upper triangle (i <= j), empty if not precomputed
  int dk = 0;
  bool has_gram() const { return !gram.empty(); }
  const CMatrix& gram_block(int i, int j, int n) const {
    // index of (i, j), i <= j, in row-major upper-triangle packing
    return gram[size_t(i * n - i * (i - 1) / 2 + (j - i))];
  }
};

inline ReducedIrrep reduce_irrep(const HomogeneousSpaceModel& s, std::shared_ptr<const UnitaryIrrep> r,
                                 int gram_limit = 64) {
  ReducedIrrep red;
  red.irrep = r;
  red.dk = r->invariant_dim();
  if (red.dk == 0) return red;
  const int n = s.n();
  CSparse bsel;
  if (r->coordinate_invariants) {
    std::vector<Eigen::Triplet<cplx>> t;
    for (size_t j = 0; j < r->invariant_coords.size(); ++j) t.emplace_back(r->invariant_coords[j], int(j), 1.0);
    bsel = CSparse(r->dim, red.dk);
    bsel.setFromTriplets(t.begin(), t.end());
  } else {
    bsel = linalg::to_sparse(r->invariant_basis, 0.0);
  }
  const bool identity_b = r->coordinate_invariants && red.dk == r->dim;
  for (int i = 0; i < n; ++i) {
    CSparse pi = rep_of(*r, s.p_basis.col(i));
    CSparse w = identity_b ? pi : CSparse(pi * bsel);
    w.prune(cplx(0.0), 1e-15);
    w.makeCompressed();
    red.w.push_back(w);
  }
  if (red.dk <= gram_limit) {
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) red.gram.push_back(CMatrix(CSparse(red.w[size_t(i)].adjoint()) * red.w[size_t(j)]));
  }
  return red;
}

// In-memory cache of irreps and reduced data for one model, optionally
// backed by JSON files in the directory named by HSPEC_CACHE_DIR.
class IrrepCache {
 public:
  explicit IrrepCache(HomogeneousSpaceModel&&, size_t = 0) = delete;
  explicit IrrepCache(const HomogeneousSpaceModel& s, size_t max_nonzeros = 8'000'000) : model_(s), cap_(max_nonzeros) {
    if (const char* dir = std::getenv("HSPEC_CACHE_DIR")) disk_dir_ = dir;
  }

  std::shared_ptr<const ReducedIrrep> get(const Label& label) {
    {
      std::lock_guard<std::mutex> lk(mu_);
      auto it = reduced_.find(label);
      if (it != reduced_.end()) return it->second;
    }
    auto r = std::make_shared<UnitaryIrrep>(load_or_build(label));
    auto red = std::make_shared<ReducedIrrep>(reduce_irrep(model_, r));
    size_t nnz = 0;
    for (const auto& g : r->generators) nnz += size_t(g.nonZeros());
    for (const auto& w : red->w) nnz += size_t(w.nonZeros());
    std::lock_guard<std::mutex> lk(mu_);
    if (used_ + nnz <= cap_) {
      used_ += nnz;
      reduced_[label] = red;
    }
    return red;
  }

  const HomogeneousSpaceModel& model() const { return model_; }

  static std::string group_signature(const HomogeneousSpaceModel& s) {
    std::string sig;
    for (const auto& f : s.group.factors()) {
      if (!sig.empty()) sig += "x";
      sig += factor_name(f.kind);
      if (f.kind == factor_kind::torus) sig += std::to_string(f.rank);
    }
    return sig;
  }
  static constexpr const char* normalization_tag = "g0-half-trace";

 private:
  UnitaryIrrep load_or_build(const Label& label) {
    if (disk_dir_.empty()) return irrep_matrices(model_, label);
    namespace fs = std::filesystem;
    std::string key = group_signature(model_) + "_";
    for (size_t i = 0; i < label.size(); ++i) key += (i ? "." : "") + std::to_string(label[i]);
    key += std::string("_") + normalization_tag + ".json";
    fs::path p = fs::path(disk_dir_) / key;
    std::error_code ec;
    if (fs::exists(p, ec)) {
      try {
        std::ifstream in(p);
        nlohmann::json j = nlohmann::json::parse(in);
        UnitaryIrrep r;
        r.label = j.at("label").get<Label>();
        r.dim = j.at("dim").get<int>();
        for (const auto& m : j.at("matrices")) {
          std::vector<Eigen::Triplet<cplx>> t;
          for (const auto& e : m) t.emplace_back(e[0].get<int>(), e[1].get<int>(), cplx(e[2].get<double>(), e[3].get<double>()));
          CSparse sm(r.dim, r.dim);
          sm.setFromTriplets(t.begin(), t.end());
          sm.makeCompressed();
          r.generators.push_back(sm);
        }
        if (r.label == label && int(r.generators.size()) == model_.m()) {
          r.casimir = casimir_scalar(r);
          compute_invariant_subspace(r, model_);
          return r;
        }
      } catch (const std::exception&) {
        // fall through to a fresh build; a corrupt cache file is overwritten
      }
    }
    UnitaryIrrep r = irrep_matrices(model_, label);
    nlohmann::json j;
    j["group"] = group_signature(model_);
    j["normalization"] = normalization_tag;
    j["label"] = r.label;
    j["dim"] = r.dim;
    nlohmann::json mats = nlohmann::json::array();
    for (const auto& g : r.generators) {
      nlohmann::json m = nlohmann::json::array();
      for (int k = 0; k < g.outerSize(); ++k)
        for (CSparse::InnerIterator it(g, k); it; ++it)
          m.push_back({it.row(), it.col(), it.value().real(), it.value().imag()});
      mats.push_back(m);
    }
    j["matrices"] = mats;
    fs::create_directories(disk_dir_, ec);
    std::ofstream out(p);
    if (out) out << j.dump();
    return r;
  }

  const HomogeneousSpaceModel& model_;
  size_t cap_;
  size_t used_ = 0;
  std::string disk_dir_;
  std::map<Label, std::shared_ptr<const ReducedIrrep>> reduced_;
  std::mutex mu_;
};

// Ordered stream of irrep classes of G (central K-generators filtered) in
// nondecreasing Casimir order, ties broken by lexicographic label.
class IrrepStream {
 public:
  IrrepStream(const HomogeneousSpaceModel& s, std::shared_ptr<IrrepCache> cache) : model_(s), cache_(std::move(cache)) {
    push(Label(size_t(label_width(s)), 0));
  }

  double peek_casimir() {
    settle();
    return heap_.top().casimir;
  }

  std::shared_ptr<const ReducedIrrep> next() {
    settle();
    Entry e = heap_.top();
    heap_.pop();
    for (const auto& succ : successors(e.label)) push(succ);
    return e.data;
  }

 private:
  struct Entry {
    double casimir;
    Label label;
    std::shared_ptr<const ReducedIrrep> data;
    bool descends;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      const double tol = 1e-9 * std::max(1.0, std::max(a.casimir, b.casimir));
      if (std::abs(a.casimir - b.casimir) > tol) return a.casimir > b.casimir;
      return a.label > b.label;
    }
  };

  void push(const Label& l) {
    if (!seen_.insert(l).second) return;
    auto data = cache_->get(l);
    heap_.push({data->irrep->casimir, l, data, descends_to_quotient(*data->irrep, model_)});
  }

  // Drop representations that do not factor through the quotient group,
  // after expanding their successors so the lattice walk stays connected.
  void settle() {
    while (!heap_.top().descends) {
      Entry e = heap_.top();
      heap_.pop();
      for (const auto& succ : successors(e.label)) push(succ);
    }
  }

  std::vector<Label> successors(const Label& l) const {
    std::vector<Label> out;
    size_t pos = 0;
    for (const auto& f : model_.group.factors()) {
      switch (f.kind) {
        case factor_kind::torus:
          for (int k = 0; k < f.rank; ++k) {
            const int v = l[pos + size_t(k)];
            for (int step : {+1, -1}) {
              if (v != 0 && (v > 0) != (step > 0)) continue;
              Label s = l;
              s[pos + size_t(k)] += step;
              out.push_back(s);
            }
          }
          break;
        case factor_kind::su2: {
          Label s = l;
          s[pos] += 1;
          out.push_back(s);
          break;
        }
        case factor_kind::su3:
          for (int k = 0; k < 2; ++k) {
            Label s = l;
            s[pos + size_t(k)] += 1;
            out.push_back(s);
          }
          break;
      }
      pos += size_t(label_width(f));
    }
    return out;
  }

  const HomogeneousSpaceModel& model_;
  std::shared_ptr<IrrepCache> cache_;
  std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
  std::set<Label> seen_;
};

// All irreps with Casimir <= cutoff, in stream order.
inline std::vector<std::shared_ptr<const ReducedIrrep>> enumerate_irreps(const HomogeneousSpaceModel& s, double cutoff,
                                                                         std::shared_ptr<IrrepCache> cache = nullptr) {
  if (!(cutoff > 0.0)) throw error(errc::invalid_params, "casimir cutoff must be positive");
  if (!cache) cache = std::make_shared<IrrepCache>(s);
  IrrepStream st(s, cache);
  std::vector<std::shared_ptr<const ReducedIrrep>> out;
  while (st.peek_casimir() <= cutoff * (1.0 + 1e-12)) out.push_back(st.next());
  return out;
}

}  // namespace hspec
