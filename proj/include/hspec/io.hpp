#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hspec/diameter.hpp"
#include "hspec/space_model.hpp"
#include "hspec/spectrum.hpp"
#include "hspec/sweep.hpp"

namespace hspec::io {

using json = nlohmann::ordered_json;

// 17 significant digits: enough to round-trip any double.
inline std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// JSON has no inf/nan; those become strings so nothing is silently lost.
inline json num(double v) {
  if (std::isfinite(v)) return v;
  return fmt17(v);
}

inline json vec(const RVector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

inline json vec(const std::vector<double>& v) {
  json a = json::array();
  for (double d : v) a.push_back(num(d));
  return a;
}

inline json mat(const RMatrix& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec(RVector(m.row(i).transpose())));
  return a;
}

inline json cmat(const CMatrix& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
    a.push_back(row);
  }
  return a;
}

inline json to_json(const HomogeneousSpaceModel& s) {
  json j;
  j["name"] = s.name;
  j["params"] = s.params;
  j["m"] = s.m();
  j["n"] = s.n();
  j["q"] = s.q();
  j["basis_labels"] = s.algebra.basis_labels;
  json real = json::array();
  for (const auto& x : s.algebra.matrix_realization) real.push_back(cmat(x));
  j["matrix_realization"] = real;
  j["k_basis"] = mat(s.k_basis);
  j["p_basis"] = mat(s.p_basis);
  json gens = json::array();
  for (const auto& x : s.k_group_generators) gens.push_back(vec(x));
  j["k_group_generators"] = gens;
  json dec = json::array();
  for (const auto& b : s.declared_decomposition) dec.push_back(mat(b));
  j["declared_decomposition"] = dec;
  return j;
}

inline json to_json(const Certificate& c) {
  return json{{"cutoff", num(c.cutoff)}, {"bound", num(c.bound)}, {"sound", c.sound}};
}

inline json to_json(const SpectrumResult& r) {
  json j;
  json e = json::array();
  for (const auto& x : r.entries) e.push_back(json::array({num(x.value), x.multiplicity}));
  j["entries"] = e;
  j["lambda1"] = num(r.lambda1);
  j["certificate"] = to_json(r.certificate);
  j["contributing_rep"] = r.contributing_rep;
  return j;
}

inline json to_json(const Lambda1Result& r) {
  return json{{"lambda1", num(r.value)},
              {"sound", r.certificate.sound},
              {"certificate", to_json(r.certificate)},
              {"contributing_rep", r.contributing_rep},
              {"reps_examined", r.stats.reps_examined},
              {"eigensolves", r.stats.eigensolves}};
}

inline json to_json(const DiameterEstimate& d) {
  json j;
  j["value"] = num(d.value);
  j["method"] = method_name(d.method);
  j["samples"] = d.samples;
  j["neighbor_count"] = d.neighbor_count;
  j["convergence_ratio"] = num(d.convergence_ratio);
  j["seed"] = d.seed;
  j["coarse"] = d.coarse;
  j["converged"] = d.converged;
  if (d.method == diameter_method::penalty_limit) {
    j["penalty_epsilon"] = d.penalty_epsilon ? num(*d.penalty_epsilon) : json(nullptr);
    j["direction"] = d.direction;
    j["epsilons"] = vec(d.epsilons);
    j["sequence"] = vec(d.sequence);
    j["limit"] = num(d.limit);
    j["monotone"] = d.monotone;
  }
  return j;
}

inline json to_json(const SweepSummary& s) {
  json j;
  j["space"] = s.space;
  j["records"] = s.records;
  j["empirical_sup"] = num(s.empirical_sup);
  j["empirical_sup_note"] = "largest F over the sampled grid; a numerical witness, not a verified bound";
  j["sup_index"] = s.sup_index;
  j["sup_x"] = vec(s.sup_x);
  j["empirical_inf"] = num(s.empirical_inf);
  json v = json::object();
  for (const auto& [k, c] : s.violations) v[k] = c;
  j["violations"] = v;
  j["diam_clamped"] = s.clamped;
  j["diam_coarse"] = s.coarse;
  j["unsound_certificates"] = s.unsound;
  j["cutoff_changed"] = s.cutoff_changed;
  j["distinct_diameters"] = s.distinct_diameters;
  return j;
}

inline json to_json(const SweepRecord& r) {
  json j;
  j["index"] = r.index;
  j["pattern"] = r.pattern;
  j["x"] = vec(r.x);
  j["lambda1"] = num(r.lambda1);
  j["certificate_sound"] = r.certificate_sound;
  if (r.cutoff_stable) j["cutoff_stable"] = *r.cutoff_stable;
  if (r.diam) j["diam"] = to_json(*r.diam);
  j["diam_clamped"] = r.diam_clamped;
  j["F"] = num(r.F);
  json c = json::object();
  for (const auto& [k, ok] : r.checks) c[k] = ok;
  j["checks"] = c;
  return j;
}

inline json to_json(const CollapseReport& r) {
  json j;
  j["quotient"] = r.quotient;
  j["t"] = vec(r.t);
  j["lambda1_full"] = vec(r.lambda1_full);
  j["lambda1_quotient"] = num(r.lambda1_quotient);
  j["gap"] = vec(r.gap);
  j["gap_nonincreasing"] = r.gap_nonincreasing;
  j["certificates_sound"] = r.certificates_sound;
  json cs = json::array();
  for (const auto& c : r.cutoff_stable) cs.push_back(c ? json(*c) : json(nullptr));
  j["cutoff_stable"] = cs;
  if (r.diam_quotient) {
    j["diam_quotient"] = num(*r.diam_quotient);
    j["diam_full"] = vec(r.diam_full);
    j["diam_ok"] = r.diam_ok;
  }
  return j;
}

inline json to_json(const AuditReport& r) {
  json j;
  j["space"] = r.space;
  j["n_random"] = r.n_random;
  j["seed"] = r.seed;
  json t = json::object();
  for (const auto& [k, v] : r.tally) t[k] = json{{"passed", v.first}, {"total", v.second}};
  j["tally"] = t;
  json e = json::array();
  for (const auto& x : r.entries)
    e.push_back(json{{"check", x.check},
                     {"index", x.index},
                     {"passed", x.passed},
                     {"lower", num(x.lower)},
                     {"value", num(x.value)},
                     {"upper", num(x.upper)},
                     {"margin", num(x.margin)},
                     {"note", x.note}});
  j["entries"] = e;
  return j;
}

// Doubles inside JSON documents are re-emitted with 17 significant digits
// (nlohmann would otherwise print the shortest round-trip form).
inline void dump17(std::ostream& os, const json& j, int indent = 2, int depth = 0) {
  const std::string pad(size_t(indent * (depth + 1)), ' '), close(size_t(indent * depth), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad << json(it.key()).dump() << ": ";
        dump17(os, it.value(), indent, depth + 1);
      }
      os << "\n" << close << "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
      os << (flat ? "[" : "[\n");
      bool first = true;
      for (const auto& e : j) {
        if (!first) os << (flat ? ", " : ",\n");
        first = false;
        if (!flat) os << pad;
        dump17(os, e, indent, depth + 1);
      }
      if (flat)
        os << "]";
      else
        os << "\n" << close << "]";
      return;
    }
    case json::value_t::number_float:
      os << fmt17(j.get<double>());
      return;
    default:
      os << j.dump();
  }
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void write_csv_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << csv_field(fields[i]);
  }
  os << "\r\n";
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& res, int q) {
  std::vector<std::string> check_names;
  for (const auto& r : res.records)
    for (const auto& [k, v] : r.checks)
      if (std::find(check_names.begin(), check_names.end(), k) == check_names.end()) check_names.push_back(k);
  std::sort(check_names.begin(), check_names.end());
  std::vector<std::string> head{"index", "pattern"};
  for (int i = 1; i <= q; ++i) head.push_back("x" + std::to_string(i));
  for (const char* h : {"lambda1", "cert", "diam", "method", "samples", "clamped", "F"}) head.push_back(h);
  for (const auto& c : check_names) head.push_back(c);
  write_csv_row(os, head);
  for (const auto& r : res.records) {
    std::string pat;
    for (size_t i = 0; i < r.pattern.size(); ++i) pat += (i ? " " : "") + std::to_string(r.pattern[i] + 1);
    std::vector<std::string> row{std::to_string(r.index), pat};
    for (int i = 0; i < q; ++i) row.push_back(fmt17(r.x(i)));
    row.push_back(fmt17(r.lambda1));
    row.push_back(r.certificate_sound ? "sound" : "unsound");
    row.push_back(r.diam ? fmt17(r.diam->value) : "");
    row.push_back(r.diam ? method_name(r.diam->method) : "");
    row.push_back(r.diam ? std::to_string(r.diam->samples) : "");
    row.push_back(r.diam_clamped ? "1" : "0");
    row.push_back(std::isnan(r.F) ? "" : fmt17(r.F));
    for (const auto& c : check_names) {
      auto it = r.checks.find(c);
      row.push_back(it == r.checks.end() ? "" : (it->second ? "1" : "0"));
    }
    write_csv_row(os, row);
  }
}

}  // namespace hspec::io
