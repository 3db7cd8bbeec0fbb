// Acceptance runner: one line per criterion, "criterion N: PASS|FAIL ...".
//
//   acceptance                 run all ten
//   acceptance --criterion 4   run one (exit status 0 iff it passes)
//
// Criterion 8 replays the spectral part of criteria 1-7 (same metrics, same
// seeds, diameters skipped) and re-solves each lambda1 with twice the
// certified cutoff.
#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include "hspec/sweep.hpp"

using namespace hspec;

namespace {

constexpr double pi = std::numbers::pi;

struct CutoffTally {
  long calls = 0, changed = 0, unsound = 0;
  void add(bool stable, bool sound) {
    ++calls;
    changed += !stable;
    unsound += !sound;
  }
};

struct Context {
  bool spectral_only = false;
  CutoffTally tally;
  int threads = default_threads();
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Lambda1Result certified(const SpectralEngine& e, const InvariantMetric& g, Context& ctx) {
  const auto r = e.lambda1(g);
  Lambda1Options twice;
  twice.min_cutoff = 2.0 * r.certificate.cutoff;
  const auto r2 = e.lambda1(g, twice);
  ctx.tally.add(r2.value == r.value, r.certificate.sound && r2.certificate.sound);
  return r;
}

void absorb(const AuditReport& rep, Context& ctx) {
  // A stable entry fails only through an unsound certificate.
  for (const auto& e : rep.entries)
    if (e.check == "cutoff_doubled") {
      const bool stable = e.value == e.lower;
      ctx.tally.add(stable, !stable || e.passed);
    }
}

void absorb(const SweepResult& res, Context& ctx) {
  for (const auto& r : res.records) ctx.tally.add(r.cutoff_stable.value_or(false), r.certificate_sound);
}

long violations(const SweepSummary& s, const std::string& check) {
  auto it = s.violations.find(check);
  return it == s.violations.end() ? 0 : it->second;
}

DiameterOptions diam_options(std::uint64_t seed, const Context& ctx) {
  DiameterOptions d;
  d.seed = seed;
  d.threads = ctx.threads;
  return d;
}

// ------------------------------------------------------------------ 1

Outcome criterion1(Context& ctx) {
  Stopwatch sw;
  const auto s = build_space_model("su2");
  SpectralEngine e(s);
  const auto id = identity_metric(s);
  const auto l = certified(e, id, ctx);
  const bool spectral = std::abs(l.value - 3.0) <= 1e-10 && l.certificate.sound;
  if (ctx.spectral_only) return {spectral, fmt("lambda1=%.17g", l.value)};
  // Force the sampled estimate; the closed form would make this trivial.
  const auto d = graph_diameter(s, id.phi, diam_options(1, ctx));
  const double F = l.value * d.value * d.value;
  const double rel_d = std::abs(d.value - pi) / pi, rel_F = std::abs(F - 3 * pi * pi) / (3 * pi * pi);
  const double t = sw.seconds();
  const bool pass = spectral && rel_d < 0.02 && rel_F < 0.04 && d.samples <= 400000 && t < 120.0;
  return {pass, fmt("lambda1=%.17g sound=%d diam=%.6f (N=%ld, rel %.4f) F=%.5f (3pi^2=%.5f, rel %.4f) time=%.1fs",
                    l.value, int(l.certificate.sound), d.value, d.samples, rel_d, F, 3 * pi * pi, rel_F, t)};
}

// ------------------------------------------------------------------ 2

Outcome criterion2(Context& ctx) {
  const auto s = build_space_model("su2");
  SpectralEngine e(s);
  const auto id = identity_metric(s);
  const auto sp = e.full_spectrum(id, 20.0);
  certified(e, id, ctx);
  bool pass = sp.entries.size() >= 4 && sp.certificate.sound;
  std::ostringstream os;
  for (int k = 0; k < 4 && k < int(sp.entries.size()); ++k) {
    const auto& en = sp.entries[size_t(k)];
    pass = pass && std::abs(en.value - k * (k + 2.0)) <= 1e-10 && en.multiplicity == (k + 1LL) * (k + 1LL);
    os << (k ? " " : "") << "(" << en.value << "," << en.multiplicity << ")";
  }
  return {pass, "entries " + os.str()};
}

// ------------------------------------------------------------------ 3

double lattice_minimum(const RMatrix& phi) {
  const RMatrix inv = phi.inverse();
  const double guess = std::min(inv(0, 0), inv(1, 1));
  const double floor = Eigen::SelfAdjointEigenSolver<RMatrix>(inv).eigenvalues().minCoeff();
  const int box = int(std::ceil(std::sqrt(guess / floor))) + 1;
  double best = std::numeric_limits<double>::infinity();
  for (int a = -box; a <= box; ++a)
    for (int b = -box; b <= box; ++b) {
      if (a == 0 && b == 0) continue;
      RVector m(2);
      m << a, b;
      best = std::min(best, m.dot(inv * m));
    }
  return best;
}

Outcome criterion3(Context& ctx) {
  const auto s = build_space_model("torus", {2});
  SpectralEngine e(s);
  const auto info = commutant(s);
  std::mt19937_64 rng(303);
  int exact = 0, close = 0;
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const RMatrix phi = random_invariant_matrix(s, info, rng, 1.0);
    const auto g = diagonal_decomposition(s, phi);
    const double l = certified(e, g, ctx).value;
    const double brute = lattice_minimum(phi);
    exact += std::abs(l - brute) <= 1e-12 * brute;
    if (ctx.spectral_only) continue;
    const double vor = *closed_form_diameter(s, phi);
    auto opt = diam_options(3000 + std::uint64_t(i), ctx);
    opt.n_start = 20000;
    const double d = graph_diameter(s, phi, opt).value;
    const double rel = std::abs(d - vor) / vor;
    worst = std::max(worst, rel);
    close += rel < 0.01;
  }
  const bool pass = exact == 50 && (ctx.spectral_only || close == 50);
  return {pass, fmt("lambda1 exact %d/50, graph within 1%% of Voronoi %d/50 (worst rel %.4f)", exact,
                    ctx.spectral_only ? 50 : close, worst)};
}

// ------------------------------------------------------------------ 4

Outcome criterion4(Context& ctx) {
  Stopwatch sw;
  SweepOptions o;
  o.with_diameter = !ctx.spectral_only;
  o.verify_cutoff = true;
  o.diam = diam_options(42, ctx);
  o.diam.threads = 1;
  o.threads = ctx.threads;
  const auto su2 = build_space_model("su2");
  FunctionalEvaluator ev(su2, o);
  const auto res = ray_sweep(ev, log_grid(9, 4.0));
  absorb(res, ctx);
  long records = res.summary.records, li = violations(res.summary, "li_bound");
  std::string tori;
  for (int n : {2, 3}) {
    const auto t = build_space_model("torus", {n});
    FunctionalEvaluator et(t, o);
    const auto r = ray_sweep(et, log_grid(9, 4.0));
    absorb(r, ctx);
    li += violations(r.summary, "li_bound");
    tori += fmt(" torus%d: %ld records, inf F=%.4f;", n, r.summary.records, r.summary.empirical_inf);
  }
  const double t = sw.seconds();
  if (ctx.spectral_only) return {true, fmt("%ld su2 records (spectral replay)", records)};
  const bool pass = li == 0 && records >= 4000 && t < 7200.0;
  return {pass, fmt("su2: %ld records, li_bound violations (all sweeps) %ld, inf F=%.4f (pi^2/4=%.4f), clamped %ld, "
                    "other violations: sandwich_diam %ld monotone %ld;%s time=%.0fs",
                    records, li, res.summary.empirical_inf, li_constant, res.summary.clamped,
                    violations(res.summary, "sandwich_diam"), violations(res.summary, "monotone_vs_previous"),
                    tori.c_str(), t)};
}

// ------------------------------------------------------------------ 5

Outcome criterion5(Context& ctx) {
  AuditOptions base;
  base.n_random = 100;
  base.sandwiches = base.k_sandwiches = false;
  base.verify_cutoff = true;
  base.tolerance = 0.03;
  std::string detail;
  bool pass = true;
  for (const char* name : {"su2", "su3_mod_t2", "torus"}) {
    const auto s = name == std::string("torus") ? build_space_model("torus", {2}) : build_space_model(name);
    auto opt = base;
    opt.seed = 500;
    opt.diam = diam_options(55, ctx);
    opt.with_diameter = !ctx.spectral_only && s.name != "su3_mod_t2";
    const auto rep = inequality_audit(s, opt);
    absorb(rep, ctx);
    const long lp = rep.passed("loewner_lambda1"), lt = rep.total("loewner_lambda1");
    const long dp = rep.passed("loewner_diam"), dt = rep.total("loewner_diam");
    // lambda1 is required on su2 and the flag manifold; diameters on su2 and the torus.
    if (s.name != "torus") pass = pass && lt == 100 && lp == 100;
    if (s.name != "su3_mod_t2" && !ctx.spectral_only) pass = pass && dt == 100 && dp == 100;
    detail += fmt("%s lambda1 %ld/%ld diam %ld/%ld; ", s.name.c_str(), lp, lt, dp, dt);
  }
  return {pass, detail};
}

// ------------------------------------------------------------------ 6

Outcome criterion6(Context& ctx) {
  bool pass = true;
  std::string detail;
  const std::vector<std::pair<std::string, std::vector<int>>> spaces{
      {"su2", {}}, {"so3", {}}, {"su2_mod_u1", {}}, {"su3_mod_t2", {}}, {"torus", {2}}, {"torus", {3}}};
  for (const auto& [name, params] : spaces) {
    const auto s = build_space_model(name, params);
    AuditOptions opt;
    opt.n_random = 50;
    opt.seed = 600;
    opt.loewner = opt.k_sandwiches = false;
    opt.verify_cutoff = true;
    opt.diam = diam_options(66, ctx);
    // The six-dimensional flag manifold only has coarse graph estimates,
    // which are excluded from the 3% tolerance.
    opt.with_diameter = !ctx.spectral_only && s.n() <= 3;
    const auto rep = inequality_audit(s, opt);
    absorb(rep, ctx);
    const long lp = rep.passed("sandwich_lambda"), lt = rep.total("sandwich_lambda");
    const long dp = rep.passed("sandwich_diam"), dt = rep.total("sandwich_diam");
    pass = pass && lt == 50 && lp == 50 && dp == dt && (dt == 50 || !opt.with_diameter);
    std::string label = name;
    if (!params.empty()) label += std::to_string(params[0]);
    detail += fmt("%s lambda %ld/%ld diam %ld/%ld%s; ", label.c_str(), lp, lt, dp, dt,
                  opt.with_diameter || ctx.spectral_only ? "" : " (coarse, excluded)");
  }
  return {pass, detail};
}

// ------------------------------------------------------------------ 7

Outcome criterion7(Context& ctx) {
  const auto s = build_space_model("su2");
  RMatrix e3 = RMatrix::Zero(3, 1);
  e3(2, 0) = 1.0;
  const std::vector<double> ts{1.0, 0.5, 0.25, 0.125, 1.0 / 32};
  const auto rep = collapse_limit_check(s, e3, ts);
  for (const auto& c : rep.cutoff_stable) ctx.tally.add(c.value_or(false), rep.certificates_sound);
  std::string gaps;
  for (double g : rep.gap) gaps += fmt("%s%.3g", gaps.empty() ? "" : ",", g);
  const bool pass = rep.gap_nonincreasing && rep.gap.back() < 1e-6 && rep.certificates_sound;
  return {pass, fmt("lambda1(S^2)=%.17g gaps [%s] non-increasing=%d last<1e-6=%d", rep.lambda1_quotient,
                    gaps.c_str(), int(rep.gap_nonincreasing), int(rep.gap.back() < 1e-6))};
}

// ------------------------------------------------------------------ 9

Outcome criterion9(Context& ctx) {
  const auto s = build_space_model("su3_mod_t2");
  const int dim = symmetric_commutant_dimension(s);
  SweepOptions o;
  o.with_diameter = false;
  o.verify_cutoff = true;
  o.threads = ctx.threads;
  FunctionalEvaluator ev(s, o);
  Stopwatch sw;
  const auto res = ray_sweep(ev, {{0, 1, 2}}, log_grid(9, 1.5));
  absorb(res, ctx);
  const long bad = violations(res.summary, "sandwich_lambda");
  const bool pass = dim == 3 && s.q() == 3 && bad == 0 && res.summary.unsound == 0 && res.summary.records == 729;
  return {pass, fmt("symmetric commutant dim %d (q=%d); lambda1 sweep %ld records, grid 4^[-1.5,1.5], "
                    "sandwich violations %ld, cutoff changes %ld, time=%.0fs (diameters coarse, excluded)",
                    dim, s.q(), res.summary.records, bad, res.summary.cutoff_changed, sw.seconds())};
}

// ------------------------------------------------------------------ 10

Outcome criterion10(Context& ctx) {
  SweepOptions o;
  o.diam = diam_options(42, ctx);
  o.diam.threads = 1;
  o.threads = ctx.threads;
  const auto su2 = build_space_model("su2");
  FunctionalEvaluator ev(su2, o);  // shared so diameters are memoised across both ranges
  const auto r4 = ray_sweep(ev, log_grid(9, 4.0));
  const auto r5 = ray_sweep(ev, log_grid(11, 5.0));
  const double a = r4.summary.empirical_sup, b = r5.summary.empirical_sup;
  const double rel = std::abs(b - a) / a;
  const bool pass = std::isfinite(a) && std::isfinite(b) && rel < 0.05;
  return {pass, fmt("sup F: range 4 %.5f at x=(%.4g,%.4g,%.4g), range 5 %.5f, change %.4f; clamped %ld/%ld "
                    "(desk-scale witness, not a bound)",
                    a, r4.summary.sup_x(0), r4.summary.sup_x(1), r4.summary.sup_x(2), b, rel, r5.summary.clamped,
                    r5.summary.records)};
}

// ------------------------------------------------------------------ 8

Outcome criterion8(Context&) {
  Context replay;
  replay.spectral_only = true;
  for (auto* f : {criterion1, criterion2, criterion3, criterion4, criterion5, criterion6, criterion7}) f(replay);
  const auto& t = replay.tally;
  return {t.calls > 0 && t.changed == 0 && t.unsound == 0,
          fmt("%ld lambda1 calls re-solved at doubled cutoff: %ld changed, %ld unsound", t.calls, t.changed,
              t.unsound)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int which = 0;
  int threads = default_threads();
  app.add_option("--criterion", which, "1-10 (default: all)")->check(CLI::Range(0, 10));
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<Outcome(Context&)>> all{criterion1, criterion2, criterion3, criterion4,
                                                          criterion5, criterion6, criterion7, criterion8,
                                                          criterion9, criterion10};
  bool ok = true;
  for (int i = 1; i <= 10; ++i) {
    if (which != 0 && which != i) continue;
    Context ctx;
    ctx.threads = threads;
    Outcome o;
    try {
      o = all[size_t(i - 1)](ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    ok = ok && o.pass;
    std::cout << "criterion " << i << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
  }
  return ok ? 0 : 1;
}
