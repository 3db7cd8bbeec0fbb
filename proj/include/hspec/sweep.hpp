#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hspec/algebraic.hpp"
#include "hspec/diameter.hpp"
#include "hspec/metric.hpp"
#include "hspec/parallel.hpp"
#include "hspec/spectrum.hpp"

namespace hspec {

inline constexpr double li_constant = std::numbers::pi * std::numbers::pi / 4.0;

struct SweepOptions {
  bool with_diameter = true;
  DiameterOptions diam;
  Lambda1Options spectral;
  // Re-run lambda1 with twice the certified cutoff and record whether the
  // value is unchanged.
  bool verify_cutoff = false;
  // Graph diameters are unreliable when the largest family coordinate
  // dwarfs the second largest; above this ratio the largest coordinate is
  // lowered (Loewner-smaller metric, so the diameter becomes a lower bound).
  double clamp_ratio = 64.0;
  double tolerance = 0.03;  // geometric checks (Li bound, diameter sandwich)
  int threads = 1;
};

struct SweepRecord {
  long index = 0;
  std::vector<int> pattern;
  RVector x;
  double lambda1 = 0.0;
  bool certificate_sound = false;
  double certificate_cutoff = 0.0;
  std::optional<bool> cutoff_stable;
  std::optional<DiameterEstimate> diam;
  bool diam_clamped = false;
  double F = std::numeric_limits<double>::quiet_NaN();
  std::map<std::string, bool> checks;

  bool all_checks_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& kv) { return kv.second; });
  }
};

struct SweepSummary {
  std::string space;
  long records = 0;
  double empirical_sup = std::numeric_limits<double>::quiet_NaN();
  long sup_index = -1;
  RVector sup_x;
  double empirical_inf = std::numeric_limits<double>::quiet_NaN();
  std::map<std::string, long> violations;
  long clamped = 0;
  long coarse = 0;
  long unsound = 0;
  long cutoff_changed = 0;
  long distinct_diameters = 0;
};

struct SweepResult {
  std::vector<SweepRecord> records;
  SweepSummary summary;
};

// Log-uniform grid base^t for `points` values of t evenly spaced in
// [-exponent, exponent].
inline std::vector<double> log_grid(int points, double exponent, double base = 4.0) {
  if (points < 1) throw error(errc::invalid_config, "grid needs at least one point");
  std::vector<double> out;
  for (int i = 0; i < points; ++i) {
    const double t = points == 1 ? 0.0 : -exponent + 2.0 * exponent * i / (points - 1);
    out.push_back(std::pow(base, t));
  }
  return out;
}

inline std::vector<std::vector<int>> all_patterns(int q) {
  std::vector<int> p(static_cast<size_t>(q));
  for (int i = 0; i < q; ++i) p[size_t(i)] = i;
  std::vector<std::vector<int>> out;
  do out.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  return out;
}

namespace detail {

// Spaces whose declared blocks are permuted by isometries (Weyl group or
// coordinate swaps), so a diameter depends only on the sorted coordinates.
inline bool blocks_permutable(const HomogeneousSpaceModel& s) {
  return s.name == "su2" || s.name == "so3" || s.name == "su3_mod_t2" || s.name == "torus";
}

inline bool record_equal_blocks(const HomogeneousSpaceModel& s) {
  for (const auto& b : s.declared_decomposition)
    if (b.cols() != s.declared_decomposition.front().cols()) return false;
  return true;
}

}  // namespace detail

// Evaluates F = lambda1 * diam^2 on family metrics of one model. Reference
// values for the identity metric are computed once; diameters are memoised
// by normalised shape using diam(c x) = sqrt(c) diam(x).
class FunctionalEvaluator {
 public:
  FunctionalEvaluator(HomogeneousSpaceModel&&, SweepOptions = {}) = delete;
  FunctionalEvaluator(const HomogeneousSpaceModel& s, SweepOptions opt = {})
      : model_(s), opt_(std::move(opt)), engine_(s), permutable_(detail::blocks_permutable(s) &&
                                                                  detail::record_equal_blocks(s)) {
    const auto id = identity_metric(model_);
    lambda1_id_ = engine_.lambda1(id, opt_.spectral).value;
    if (opt_.with_diameter) diam_id_ = estimate_diameter(model_, id.phi, opt_.diam).value;
  }

  const HomogeneousSpaceModel& model() const { return model_; }
  const SweepOptions& options() const { return opt_; }
  const SpectralEngine& engine() const { return engine_; }
  double lambda1_identity() const { return lambda1_id_; }
  std::optional<double> diameter_identity() const { return diam_id_; }
  long distinct_diameters() const {
    std::lock_guard<std::mutex> lk(mu_);
    return long(memo_.size());
  }

  SweepRecord evaluate(const RVector& x, std::vector<int> pattern = {}) const {
    if (x.size() != model_.q()) throw error(errc::dimension_mismatch, "family coordinates must have length q");
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (!(x(i) > 0.0) || !std::isfinite(x(i))) throw error(errc::invalid_params, "family coordinates must be positive");
    SweepRecord r;
    r.x = x;
    r.pattern = std::move(pattern);
    const auto g = family_metric(model_, x);
    const auto l1 = engine_.lambda1(g, opt_.spectral);
    r.lambda1 = l1.value;
    r.certificate_sound = l1.certificate.sound;
    r.certificate_cutoff = l1.certificate.cutoff;
    if (opt_.verify_cutoff) {
      Lambda1Options twice = opt_.spectral;
      twice.min_cutoff = 2.0 * l1.certificate.cutoff;
      const auto l2 = engine_.lambda1(g, twice);
      r.cutoff_stable = l2.value == l1.value && l2.certificate.sound;
    }
    const double s1 = g.sigma_first(), sq = g.sigma_last();
    const double tight = 1e-9;
    r.checks["sandwich_lambda"] = lambda1_id_ * sq * sq * (1.0 - tight) <= r.lambda1 &&
                                  r.lambda1 <= lambda1_id_ * s1 * s1 * (1.0 + tight);
    if (opt_.with_diameter) {
      auto [est, clamped] = diameter(x);
      r.diam = est;
      r.diam_clamped = clamped;
      r.F = r.lambda1 * est.value * est.value;
      r.checks["li_bound"] = r.F >= li_constant * (1.0 - opt_.tolerance);
      r.checks["sandwich_diam"] = *diam_id_ / s1 * (1.0 - opt_.tolerance) <= est.value &&
                                  est.value <= *diam_id_ / sq * (1.0 + opt_.tolerance);
    }
    return r;
  }

  // Diameter of the family metric x, plus whether the thin-disc clamp fired.
  std::pair<DiameterEstimate, bool> diameter(const RVector& x) const {
    const auto g = family_metric(model_, x);
    if (closed_form_diameter(model_, g.phi)) return {estimate_diameter(model_, g.phi, opt_.diam), false};
    const double c = x.maxCoeff();
    RVector y = x / c;
    bool clamped = false;
    if (y.size() >= 2) {
      std::vector<Eigen::Index> order(size_t(y.size()));
      for (Eigen::Index i = 0; i < y.size(); ++i) order[size_t(i)] = i;
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return y(a) < y(b); });
      const auto top = order.back(), second = order[order.size() - 2];
      if (y(top) > opt_.clamp_ratio * y(second)) {
        y(top) = opt_.clamp_ratio * y(second);
        clamped = true;
      }
    }
    if (permutable_) std::sort(y.data(), y.data() + y.size());
    std::vector<long long> key;
    for (Eigen::Index i = 0; i < y.size(); ++i) key.push_back(std::llround(std::log(y(i)) * 1e9));
    DiameterEstimate base;
    bool hit = false;
    {
      std::lock_guard<std::mutex> lk(mu_);
      auto it = memo_.find(key);
      if (it != memo_.end()) {
        base = it->second;
        hit = true;
      }
    }
    if (!hit) {
      base = estimate_diameter(model_, family_metric(model_, y).phi, opt_.diam);
      std::lock_guard<std::mutex> lk(mu_);
      memo_.emplace(key, base);
    }
    base.value *= std::sqrt(c);
    return {base, clamped};
  }

 private:
  const HomogeneousSpaceModel& model_;
  SweepOptions opt_;
  SpectralEngine engine_;
  bool permutable_;
  double lambda1_id_ = 0.0;
  std::optional<double> diam_id_;
  mutable std::mutex mu_;
  mutable std::map<std::vector<long long>, DiameterEstimate> memo_;
};

namespace detail {

inline void summarize(const FunctionalEvaluator& ev, SweepResult& res) {
  auto& s = res.summary;
  s.space = ev.model().name;
  s.records = long(res.records.size());
  s.distinct_diameters = ev.distinct_diameters();
  for (const auto& r : res.records) {
    for (const auto& [name, ok] : r.checks) {
      s.violations.try_emplace(name, 0);
      if (!ok) ++s.violations[name];
    }
    if (r.diam_clamped) ++s.clamped;
    if (r.diam && r.diam->coarse) ++s.coarse;
    if (!r.certificate_sound) ++s.unsound;
    if (r.cutoff_stable && !*r.cutoff_stable) ++s.cutoff_changed;
    if (std::isfinite(r.F)) {
      if (!(r.F <= s.empirical_sup)) {
        s.empirical_sup = r.F;
        s.sup_index = r.index;
        s.sup_x = r.x;
      }
      if (!(r.F >= s.empirical_inf)) s.empirical_inf = r.F;
    }
  }
}

}  // namespace detail

// Ordered-ray sweep for one pattern xi: each grid tuple is sorted ascending
// and assigned so that x_{xi(1)} <= ... <= x_{xi(q)}, i.e. sigma_{xi(1)} >=
// ... >= sigma_{xi(q)}. Records are in grid order (last block fastest).
inline std::vector<SweepRecord> ray_sweep_pattern(const FunctionalEvaluator& ev, const std::vector<int>& pattern,
                                                  const std::vector<double>& grid, long index_offset = 0) {
  const int q = ev.model().q();
  if (int(pattern.size()) != q) throw error(errc::dimension_mismatch, "pattern length must equal q");
  const long G = long(grid.size());
  long total = 1;
  for (int i = 0; i < q; ++i) total *= G;
  std::vector<SweepRecord> out(static_cast<size_t>(total));
  auto tuple = [&](long idx) {
    std::vector<long> t(static_cast<size_t>(q));
    for (int i = q - 1; i >= 0; --i) {
      t[size_t(i)] = idx % G;
      idx /= G;
    }
    return t;
  };
  auto mapped = [&](const std::vector<long>& t) {
    std::vector<double> v;
    for (long i : t) v.push_back(grid[size_t(i)]);
    std::sort(v.begin(), v.end());
    RVector x(q);
    for (int i = 0; i < q; ++i) x(pattern[size_t(i)]) = v[size_t(i)];
    return x;
  };
  parallel_for(
      total, ev.options().threads,
      [&](long idx) {
        out[size_t(idx)] = ev.evaluate(mapped(tuple(idx)), pattern);
        out[size_t(idx)].index = index_offset + idx;
      },
      1);
  // Stepping the last block down gives a Loewner-smaller metric (sorting is
  // monotone), so lambda1 may only grow and the diameter only shrink.
  const double tol = ev.options().tolerance;
  for (long idx = 0; idx < total; ++idx) {
    if (idx % G == 0) continue;
    auto& cur = out[size_t(idx)];
    const auto& prev = out[size_t(idx - 1)];
    bool ok = cur.lambda1 <= prev.lambda1 * (1.0 + 1e-9);
    if (cur.diam && prev.diam) ok = ok && cur.diam->value >= prev.diam->value * (1.0 - tol);
    cur.checks["monotone_vs_previous"] = ok;
  }
  return out;
}

inline SweepResult ray_sweep(const FunctionalEvaluator& ev, const std::vector<std::vector<int>>& patterns,
                             const std::vector<double>& grid) {
  SweepResult res;
  long offset = 0;
  for (const auto& p : patterns) {
    auto part = ray_sweep_pattern(ev, p, grid, offset);
    offset += long(part.size());
    for (auto& r : part) res.records.push_back(std::move(r));
  }
  detail::summarize(ev, res);
  return res;
}

inline SweepResult ray_sweep(const FunctionalEvaluator& ev, const std::vector<double>& grid) {
  return ray_sweep(ev, all_patterns(ev.model().q()), grid);
}

// ---------------------------------------------------------------------------
// Collapse toward a quotient

struct CollapseReport {
  std::string quotient;
  std::vector<double> t;
  std::vector<double> lambda1_full;
  std::vector<double> gap;
  double lambda1_quotient = 0.0;
  bool gap_nonincreasing = true;
  bool certificates_sound = true;
  std::vector<std::optional<bool>> cutoff_stable;
  // Diameter side: diam(G/K', h) <= diam(G, g_t) (+ tolerance).
  std::optional<double> diam_quotient;
  std::vector<double> diam_full;
  std::vector<bool> diam_ok;
};

// g_t = h on p' plus t^2 g0 on k' for the full group G (K trivial in the
// model), compared with (G/K', h). h is given in the quotient's p-coordinates
// and defaults to g0.
inline CollapseReport collapse_limit_check(const HomogeneousSpaceModel& g, const RMatrix& kprime_g,
                                           const std::vector<double>& ts, std::optional<RMatrix> h = std::nullopt,
                                           bool with_diameter = false, const DiameterOptions& dopt = {},
                                           double diam_tolerance = 0.02, bool verify_cutoff = true) {
  if (!g.k_trivial()) throw error(errc::invalid_params, "collapse check needs the full group as base model");
  for (size_t i = 0; i < ts.size(); ++i) {
    if (!(ts[i] > 0.0)) throw error(errc::invalid_config, "collapse parameters must be positive");
    if (i > 0 && !(ts[i] < ts[i - 1])) throw error(errc::invalid_config, "collapse parameters must decrease");
  }
  const auto qm = quotient_model(g, kprime_g, "K'");
  const RMatrix hq = h ? *h : RMatrix::Identity(qm.n(), qm.n());
  check_metric_matrix(qm, hq);
  CollapseReport rep;
  rep.quotient = qm.name;
  rep.t = ts;
  rep.lambda1_quotient = SpectralEngine(qm).lambda1(diagonal_decomposition(qm, hq)).value;
  SpectralEngine eng(g);
  // g's p-basis is all of g; map both pieces into it.
  const RMatrix P = g.p_basis.transpose() * qm.p_basis;
  const RMatrix Kp = g.p_basis.transpose() * qm.k_basis;
  for (double t : ts) {
    const RMatrix phi = linalg::symmetrize(P * hq * P.transpose() + t * t * Kp * Kp.transpose());
    const auto metric = diagonal_decomposition(g, phi);
    const auto l1 = eng.lambda1(metric);
    rep.certificates_sound = rep.certificates_sound && l1.certificate.sound;
    if (verify_cutoff) {
      Lambda1Options twice;
      twice.min_cutoff = 2.0 * l1.certificate.cutoff;
      const auto l2 = eng.lambda1(metric, twice);
      rep.cutoff_stable.push_back(l2.value == l1.value && l2.certificate.sound);
    } else {
      rep.cutoff_stable.push_back(std::nullopt);
    }
    rep.lambda1_full.push_back(l1.value);
    rep.gap.push_back(std::abs(l1.value - rep.lambda1_quotient));
    if (with_diameter) rep.diam_full.push_back(estimate_diameter(g, phi, dopt).value);
  }
  for (size_t i = 1; i < rep.gap.size(); ++i)
    if (rep.gap[i] > rep.gap[i - 1] + 1e-9 * std::max(1.0, rep.lambda1_quotient)) rep.gap_nonincreasing = false;
  if (with_diameter) {
    rep.diam_quotient = estimate_diameter(qm, hq, dopt).value;
    for (double d : rep.diam_full) rep.diam_ok.push_back(*rep.diam_quotient <= d * (1.0 + diam_tolerance));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Inequality audit

struct AuditEntry {
  std::string check;
  int index = 0;
  bool passed = false;
  double lower = -std::numeric_limits<double>::infinity();
  double value = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  double margin = 0.0;  // smallest relative slack; negative on failure
  std::string note;
};

struct AuditReport {
  std::string space;
  int n_random = 0;
  std::uint64_t seed = 0;
  std::vector<AuditEntry> entries;
  std::map<std::string, std::pair<long, long>> tally;  // check -> (passed, total)

  bool all_passed() const {
    return std::all_of(entries.begin(), entries.end(), [](const AuditEntry& e) { return e.passed; });
  }
  long passed(const std::string& check) const {
    auto it = tally.find(check);
    return it == tally.end() ? 0 : it->second.first;
  }
  long total(const std::string& check) const {
    auto it = tally.find(check);
    return it == tally.end() ? 0 : it->second.second;
  }
};

struct AuditOptions {
  int n_random = 50;
  std::uint64_t seed = 1;
  // Log4 half-range for random eigenvalues of Loewner pairs and of random
  // family coordinates.
  double pair_range = 1.0;
  double family_range = 2.0;
  bool loewner = true;
  bool sandwiches = true;
  bool k_sandwiches = true;
  bool with_diameter = true;
  // Penalty-limit diameters for the k-sandwich (skipped for coarse spaces).
  bool k_diameter = false;
  std::vector<double> penalty_epsilons{1.0, 0.5, 0.25, 0.125};
  int sub_laplacian_budget = 60;
  double tolerance = 0.03;
  DiameterOptions diam;
  // Re-run every lambda1 with twice the certified cutoff and record the
  // comparison as a "cutoff_doubled" entry.
  bool verify_cutoff = false;
};

namespace detail {

inline double sandwich_margin(double lo, double v, double hi) {
  const double scale = std::max(std::abs(v), 1e-300);
  double m = std::numeric_limits<double>::infinity();
  if (std::isfinite(lo)) m = std::min(m, (v - lo) / scale);
  if (std::isfinite(hi)) m = std::min(m, (hi - v) / scale);
  return m;
}

inline RMatrix leading_blocks(const InvariantMetric& g, int count) {
  RMatrix out(g.n(), 0);
  for (int i = 0; i < count; ++i) out = linalg::hcat(out, g.diag[size_t(i)].basis);
  return out;
}

inline RMatrix trailing_blocks(const InvariantMetric& g, int from) {
  RMatrix out(g.n(), 0);
  for (int i = from; i < g.q(); ++i) out = linalg::hcat(out, g.diag[size_t(i)].basis);
  return out;
}

// Stable key for a set of declared blocks (by their projector).
inline std::vector<long long> subspace_key(const RMatrix& basis) {
  const RMatrix u = linalg::column_space(basis);
  const RMatrix p = u * u.transpose();
  std::vector<long long> key;
  for (Eigen::Index i = 0; i < p.size(); ++i) key.push_back(std::llround(p.data()[i] * 1e8));
  return key;
}

}  // namespace detail

inline AuditReport inequality_audit(const HomogeneousSpaceModel& s, const AuditOptions& opt) {
  if (opt.n_random < 1) throw error(errc::invalid_config, "n_random must be at least 1");
  AuditReport rep;
  rep.space = s.name;
  rep.n_random = opt.n_random;
  rep.seed = opt.seed;
  std::mt19937_64 rng(opt.seed);
  SpectralEngine eng(s);
  const auto id = identity_metric(s);
  const double lam_id = eng.lambda1(id).value;
  const bool geometric = opt.with_diameter;
  std::optional<double> diam_id;
  if (geometric) diam_id = estimate_diameter(s, id.phi, opt.diam).value;
  const double tight = 1e-9;

  auto add = [&](AuditEntry e) {
    auto& t = rep.tally[e.check];
    t.second += 1;
    if (e.passed) t.first += 1;
    rep.entries.push_back(std::move(e));
  };
  auto lambda1 = [&](const InvariantMetric& g, int index) {
    auto r = eng.lambda1(g);
    if (opt.verify_cutoff) {
      Lambda1Options twice;
      twice.min_cutoff = 2.0 * r.certificate.cutoff;
      const auto r2 = eng.lambda1(g, twice);
      AuditEntry e;
      e.check = "cutoff_doubled";
      e.index = index;
      e.value = r2.value;
      e.lower = e.upper = r.value;
      e.passed = r2.value == r.value && r.certificate.sound && r2.certificate.sound;
      e.margin = e.passed ? 0.0 : -std::abs(r2.value - r.value) / std::max(r.value, 1e-300);
      add(e);
    }
    return r;
  };

  if (opt.loewner) {
    const auto info = commutant(s);
    for (int i = 0; i < opt.n_random; ++i) {
      const RMatrix psi_m = random_invariant_matrix(s, info, rng, opt.pair_range);
      std::uniform_real_distribution<double> ud(0.0, 1.0);
      const double w = ud(rng);
      const RMatrix delta = w * random_invariant_matrix(s, info, rng, opt.pair_range);
      const auto psi = diagonal_decomposition(s, psi_m);
      const auto phi = diagonal_decomposition(s, linalg::symmetrize(psi_m + delta));
      const auto lphi = lambda1(phi, i), lpsi = lambda1(psi, i);
      AuditEntry e;
      e.check = "loewner_lambda1";
      e.index = i;
      e.value = lphi.value;
      e.upper = lpsi.value;
      e.passed = loewner_ge(phi, psi) && lphi.value <= lpsi.value * (1.0 + tight) && lphi.certificate.sound &&
                 lpsi.certificate.sound;
      e.margin = (lpsi.value - lphi.value) / std::max(lpsi.value, 1e-300);
      add(e);
      if (geometric) {
        const auto dphi = estimate_diameter(s, phi.phi, opt.diam).value;
        const auto dpsi = estimate_diameter(s, psi.phi, opt.diam).value;
        AuditEntry d;
        d.check = "loewner_diam";
        d.index = i;
        d.value = dphi;
        d.lower = dpsi;
        d.passed = dphi >= dpsi * (1.0 - opt.tolerance);
        d.margin = (dphi - dpsi) / std::max(dphi, 1e-300);
        add(d);
      }
    }
  }

  // Penalty-limit diameters depend only on the subspace, so they are shared
  // across random metrics.
  std::map<std::vector<long long>, double> sub_cache, sing_cache;
  auto sub_diam = [&](const RMatrix& H) {
    auto key = detail::subspace_key(H);
    if (auto it = sub_cache.find(key); it != sub_cache.end()) return it->second;
    const RMatrix hb = linalg::column_space(H);
    const auto est = penalty_sub_diameter(s, hb, RMatrix::Identity(hb.cols(), hb.cols()), opt.penalty_epsilons, opt.diam);
    return sub_cache[key] = est.limit;
  };
  auto sing_diam = [&](const RMatrix& C) {
    auto key = detail::subspace_key(C);
    if (auto it = sing_cache.find(key); it != sing_cache.end()) return it->second;
    const auto res = penalty_singular_diameter(s, C, opt.penalty_epsilons, opt.diam);
    return sing_cache[key] = res.estimate.limit;
  };
  std::map<std::vector<long long>, double> surrogate_cache;
  auto surrogate = [&](const RMatrix& F) {
    // lambda1 of (G/H, g0) for the subgroup generated by k and F; +inf when
    // that is all of G (only constants are annihilated by F then).
    auto key = detail::subspace_key(F.cols() ? F : RMatrix::Zero(s.n(), 1));
    if (auto it = surrogate_cache.find(key); it != surrogate_cache.end()) return it->second;
    double v = std::numeric_limits<double>::infinity();
    const RMatrix h = generated_subalgebra(s, s.p_basis * F);
    if (h.cols() < s.m()) {
      try {
        const auto qm = quotient_model(s, h, "H");
        v = SpectralEngine(qm).lambda1(identity_metric(qm)).value;
      } catch (const error& e) {
        if (e.code() != errc::not_a_subgroup) throw;
        v = std::numeric_limits<double>::quiet_NaN();
      }
    }
    return surrogate_cache[key] = v;
  };
  std::map<std::vector<long long>, double> sub_lap_cache;
  auto sub_lambda = [&](const RMatrix& H) {
    auto key = detail::subspace_key(H);
    if (auto it = sub_lap_cache.find(key); it != sub_lap_cache.end()) return it->second;
    const RMatrix hb = linalg::column_space(H);
    const double v =
        eng.sub_laplacian_lambda1(hb, RMatrix::Identity(hb.cols(), hb.cols()), opt.sub_laplacian_budget).value;
    return sub_lap_cache[key] = v;
  };

  if (opt.sandwiches || opt.k_sandwiches) {
    for (int i = 0; i < opt.n_random; ++i) {
      const RVector x = random_family_coords(s, rng, opt.family_range);
      const auto g = family_metric(s, x);
      const auto l1 = lambda1(g, i);
      const double s1 = g.sigma_first(), sq = g.sigma_last();
      std::optional<double> d;
      if (geometric) d = estimate_diameter(s, g.phi, opt.diam).value;
      if (opt.sandwiches) {
        AuditEntry e;
        e.check = "sandwich_lambda";
        e.index = i;
        e.lower = lam_id * sq * sq;
        e.value = l1.value;
        e.upper = lam_id * s1 * s1;
        e.passed = e.lower * (1.0 - tight) <= e.value && e.value <= e.upper * (1.0 + tight) && l1.certificate.sound;
        e.margin = detail::sandwich_margin(e.lower, e.value, e.upper);
        add(e);
        if (d) {
          AuditEntry f;
          f.check = "sandwich_diam";
          f.index = i;
          f.lower = *diam_id / s1;
          f.value = *d;
          f.upper = *diam_id / sq;
          f.passed = f.lower * (1.0 - opt.tolerance) <= f.value && f.value <= f.upper * (1.0 + opt.tolerance);
          f.margin = detail::sandwich_margin(f.lower, f.value, f.upper);
          add(f);
        }
      }
      if (!opt.k_sandwiches) continue;
      for (int k = 1; k <= g.q(); ++k) {
        const double sk = g.diag[size_t(k - 1)].sigma;
        AuditEntry e;
        e.check = "k_sandwich_lambda";
        e.index = i;
        e.note = "k=" + std::to_string(k);
        e.value = l1.value;
        e.lower = sub_lambda(detail::leading_blocks(g, k)) * sk * sk;
        const double up = surrogate(detail::leading_blocks(g, k - 1));
        if (std::isnan(up)) e.note += " (no closed subgroup for the upper bound)";
        e.upper = std::isnan(up) ? std::numeric_limits<double>::infinity() : up * sk * sk;
        e.passed = e.lower <= e.value * (1.0 + tight) && e.value <= e.upper * (1.0 + tight);
        e.margin = detail::sandwich_margin(e.lower, e.value, e.upper);
        add(e);
        if (d && opt.k_diameter && s.n() <= 3) {
          AuditEntry f;
          f.check = "k_sandwich_diam";
          f.index = i;
          f.note = e.note;
          f.value = *d;
          f.lower = sing_diam(detail::trailing_blocks(g, k - 1)) / sk;
          f.upper = sub_diam(detail::leading_blocks(g, k)) / sk;
          f.passed = f.lower * (1.0 - opt.tolerance) <= f.value && f.value <= f.upper * (1.0 + opt.tolerance);
          f.margin = detail::sandwich_margin(f.lower, f.value, f.upper);
          add(f);
        }
      }
    }
  }
  return rep;
}

}  // namespace hspec
