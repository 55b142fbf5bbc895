#pragma once

// Config-driven experiments: per-degree extension gaps, doubling-sequence
// studies, and perturbation neutrality runs, with CSV / JSON reports.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "xtend/ambient_metric.hpp"
#include "xtend/restriction.hpp"
#include "xtend/sampling.hpp"
#include "xtend/section_algebra.hpp"
#include "xtend/valued_arith.hpp"

namespace xtend {

using nlohmann::json;

class ConfigError : public Error {
 public:
  using Error::Error;
};

inline Subvariety subvariety_from_json(const json& j, std::size_t nvars) {
  if (!j.is_object()) throw ConfigError("subvariety must be an object");
  if (!j.contains("kind")) throw ConfigError("subvariety.kind is required");
  const SubvarietyKind kind = parse_kind(j.at("kind").get<std::string>());

  std::vector<GradedSection> gens;
  if (j.contains("generators")) {
    for (const auto& g : j.at("generators")) gens.push_back(parse_section(g.get<std::string>(), nvars));
  }
  std::optional<Matrix> param;
  if (j.contains("parametrization")) param = matrix_from_json(j.at("parametrization"));
  if (j.contains("point")) {
    if (param) throw ConfigError("give either subvariety.point or subvariety.parametrization");
    param = Matrix{vector_from_json(j.at("point"))};
  }

  if (kind == SubvarietyKind::general) {
    if (param) throw ConfigError("general subvarieties take generators only");
    if (gens.empty()) throw ConfigError("general subvariety without generators");
    return Subvariety::general(std::move(gens));
  }

  std::optional<Subvariety> y;
  if (param) {
    y = Subvariety::linear(*param, nvars);
    for (const auto& g : gens) {
      if (g.degree() != 1) throw ConfigError("linear subvariety generators must have degree 1");
      for (const auto& row : *param) {
        if (evaluate(g, row) != 0) throw ConfigError("generator " + g.to_string() + " does not vanish on the parametrization");
      }
    }
    if (!gens.empty()) {
      Matrix g;
      for (const auto& s : gens) g.push_back(s.coordinates(Subvariety::degree_one(nvars)));
      if (rank(g, nvars) + param->size() != nvars) throw ConfigError("generators do not cut out the parametrized subspace");
      y = Subvariety::from_linear_forms(gens, nvars);
    }
  } else {
    if (gens.empty()) throw ConfigError("linear subvariety needs generators or a parametrization");
    y = Subvariety::from_linear_forms(gens, nvars);
  }
  if (kind == SubvarietyKind::rational_point && y->kind() != SubvarietyKind::rational_point) {
    throw ConfigError("subvariety declared as a rational point has positive dimension");
  }
  return *y;
}

struct ExperimentConfig {
  Prime p{2};
  int d = 1;
  std::vector<GammaValue> radii;
  std::optional<int> veronese_degree;
  std::map<Exponent, GammaValue> veronese_weights;  // overrides of <J, radii>
  std::optional<Subvariety> subvariety;
  int n_min = 1;
  int n_max = 1;
  Rational epsilon{1, 4};
  unsigned spectral_depth = 6;
  std::uint64_t seed = 0;
  unsigned random_classes = 0;
  std::optional<int> degree_cap;
  std::optional<std::vector<Rational>> hilbert_polynomial;
  std::optional<std::string> section;
  unsigned threads = 1;

  std::size_t nvars() const { return static_cast<std::size_t>(d) + 1; }
  const Subvariety& y() const {
    if (!subvariety) throw ConfigError("config has no subvariety");
    return *subvariety;
  }

  AmbientMetric metric() const {
    DiagonalMetric phi(p, radii);
    if (!veronese_degree) return phi;
    return VeroneseMetric::from_radii(phi, *veronese_degree, veronese_weights);
  }

  static ExperimentConfig from_json(const json& j) {
    try {
      ExperimentConfig c;
      c.p = Prime(j.at("p").get<long>());
      c.d = j.at("d").get<int>();
      if (c.d < 1) throw ConfigError("d must be >= 1");
      for (const auto& r : j.at("radii")) c.radii.push_back(gamma_from_json(r));
      if (c.radii.size() != c.nvars()) {
        throw ConfigError("radii has " + std::to_string(c.radii.size()) + " entries, expected d+1 = " +
                          std::to_string(c.nvars()));
      }
      if (j.contains("veronese") && !j.at("veronese").is_null()) {
        const json& v = j.at("veronese");
        c.veronese_degree = v.at("degree").get<int>();
        if (v.contains("weights")) {
          for (const auto& w : v.at("weights")) {
            Exponent e = w.at("monomial").get<Exponent>();
            if (e.size() != c.nvars()) throw ConfigError("veronese monomial of the wrong arity");
            c.veronese_weights[e] = gamma_from_json(w.at("weight"));
          }
        }
      }
      c.subvariety = subvariety_from_json(j.at("subvariety"), c.nvars());
      const json& deg = j.at("degrees");
      if (!deg.is_array() || deg.size() != 2) throw ConfigError("degrees must be [n_min, n_max]");
      c.n_min = deg[0].get<int>();
      c.n_max = deg[1].get<int>();
      if (c.n_min < 1 || c.n_max < c.n_min) throw ConfigError("degrees must satisfy 1 <= n_min <= n_max");
      if (c.n_min < c.subvariety->max_generator_degree()) {
        throw ConfigError("n_min is below the largest generator degree " +
                          std::to_string(c.subvariety->max_generator_degree()));
      }
      if (j.contains("epsilon")) c.epsilon = parse_rational(j.at("epsilon").get<std::string>());
      if (c.epsilon < 0) throw ConfigError("epsilon must be nonnegative");
      if (j.contains("spectral_depth")) c.spectral_depth = j.at("spectral_depth").get<unsigned>();
      if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
      if (j.contains("random_classes")) c.random_classes = j.at("random_classes").get<unsigned>();
      if (j.contains("degree_cap")) c.degree_cap = j.at("degree_cap").get<int>();
      if (j.contains("hilbert_polynomial")) c.hilbert_polynomial = vector_from_json(j.at("hilbert_polynomial"));
      if (j.contains("section")) c.section = j.at("section").get<std::string>();
      if (j.contains("threads")) c.threads = std::max(1u, j.at("threads").get<unsigned>());
      return c;
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(std::string("invalid config: ") + e.what());
    }
  }

  static ExperimentConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    json j;
    try {
      in >> j;
    } catch (const std::exception& e) {
      throw ConfigError("config " + path + " is not valid JSON: " + e.what());
    }
    return from_json(j);
  }
};

/// Restricted sup norm, exact where available and otherwise the last
/// doubling-sequence estimate (an upper bound on the norm, so gaps computed
/// from it are lower bounds).
struct SupValue {
  GammaValue value;
  bool exact = true;
};

inline bool has_exact_sup(const AmbientMetric& metric, const Subvariety& y) {
  return y.kind() == SubvarietyKind::rational_point || (y.kind() == SubvarietyKind::linear && metric.is_diagonal());
}

inline SupValue restricted_sup(const ExperimentConfig& c, const AmbientMetric& metric, const GradedSection& t,
                               RestrictionCache* cache = nullptr) {
  if (has_exact_sup(metric, c.y())) return {sup_norm_exact(metric, c.y(), t), true};
  auto seq = sup_norm_spectral(metric, c.y(), t, c.spectral_depth, c.degree_cap.value_or(64 * t.degree()), cache);
  return {seq.back(), false};
}

struct ExtensionRow {
  int n = 0;
  std::size_t dim_quotient = 0;
  Rational gap;
  Rational gap_over_n;
  std::string witness;
  long millis = 0;
  bool exact = true;      // sup norms computed exactly
  bool certified = true;  // generated ideal known to be saturated in degree n
  std::size_t denominator_bits = 0;
};

struct ExtensionReport {
  std::vector<ExtensionRow> rows;
  std::optional<int> n_y;
  Rational running_max;
  std::optional<int> stabilized_at;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
  std::size_t max_denominator_bits() const {
    std::size_t bits = 0;
    for (const auto& row : rows) bits = std::max(bits, row.denominator_bits);
    return bits;
  }
};

namespace detail {

inline ExtensionRow extension_row(const ExperimentConfig& c, const AmbientMetric& metric, int n,
                                  RestrictionCache* cache) {
  const auto start = std::chrono::steady_clock::now();
  RestrictedDegree rd(metric, c.y(), n);
  ExtensionRow row;
  row.n = n;
  row.dim_quotient = rd.dim_quotient();
  row.certified = hilbert_stabilized(c.y(), n, c.hilbert_polynomial);
  row.denominator_bits = rd.max_denominator_bits();

  std::vector<GradedSection> classes;
  for (std::size_t l = 0; l < rd.dim_quotient(); ++l) classes.push_back(rd.representative(rd.basis_class(l)));
  if (c.random_classes > 0 && rd.dim_quotient() > 0) {
    // Seed per degree so rows do not depend on scheduling.
    Rng rng(c.seed * 1000003u + static_cast<std::uint64_t>(n));
    std::vector<GradedSection> transversal;
    for (const auto& m : rd.transversal()) transversal.push_back(GradedSection::monomial(m));
    for (unsigned i = 0; i < c.random_classes; ++i) classes.push_back(random_combination(rng, c.p, transversal));
  }

  bool first = true;
  for (const auto& t : classes) {
    GammaValue q = rd.quotient_norm(t);
    SupValue s = restricted_sup(c, metric, t, cache);
    row.exact = row.exact && s.exact;
    if (q.is_infinite() || s.value.is_infinite()) continue;
    Rational gap = s.value.primary() - q.primary();
    if (first || gap > row.gap) {
      row.gap = gap;
      row.witness = t.to_string();
      first = false;
    }
  }
  row.gap_over_n = row.gap / n;
  row.millis = static_cast<long>(
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count());
  return row;
}

}  // namespace detail

/// Running-max analysis and n_Y for finished rows.
inline void analyze_extension(ExtensionReport& r, const Rational& epsilon) {
  r.violations.clear();
  r.n_y.reset();
  r.stabilized_at.reset();
  for (const auto& row : r.rows) {
    if (row.gap < 0) {
      r.violations.push_back("negative gap " + rational_short(row.gap) + " at n=" + std::to_string(row.n));
    }
  }
  std::vector<Rational> running;
  for (const auto& row : r.rows) running.push_back(running.empty() ? row.gap : std::max(running.back(), row.gap));
  if (!running.empty()) r.running_max = running.back();
  for (std::size_t i = 0; i + 2 < running.size(); ++i) {
    if (running[i] == running[i + 1] && running[i] == running[i + 2]) {
      r.stabilized_at = r.rows[i].n;
      for (std::size_t k = i + 3; k < running.size(); ++k) {
        if (running[k] > running[i]) {
          r.violations.push_back("running max of the gap increased from " + rational_short(running[i]) + " to " +
                                 rational_short(running[k]) + " at n=" + std::to_string(r.rows[k].n) +
                                 " after stabilizing at n=" + std::to_string(r.rows[i].n));
          break;
        }
      }
      break;
    }
  }
  for (std::size_t i = r.rows.size(); i-- > 0;) {
    if (r.rows[i].gap_over_n > epsilon) break;
    r.n_y = r.rows[i].n;
  }
}

inline ExtensionReport run_extension(const ExperimentConfig& c) {
  const AmbientMetric metric = c.metric();
  RestrictionCache cache(metric, c.y());
  ExtensionReport report;
  std::vector<int> degrees;
  for (int n = c.n_min; n <= c.n_max; ++n) degrees.push_back(n);
  for (std::size_t i = 0; i < degrees.size(); i += c.threads) {
    std::vector<std::future<ExtensionRow>> batch;
    for (std::size_t k = i; k < std::min(degrees.size(), i + c.threads); ++k) {
      batch.push_back(std::async(c.threads > 1 ? std::launch::async : std::launch::deferred,
                                 [&, n = degrees[k]] { return detail::extension_row(c, metric, n, &cache); }));
    }
    for (auto& f : batch) report.rows.push_back(f.get());
  }
  analyze_extension(report, c.epsilon);
  return report;
}

struct SpectralRow {
  unsigned k = 0;
  int degree = 0;
  GammaValue estimate;
  std::optional<GammaValue> exact;
};

struct SpectralReport {
  std::string section;
  std::vector<SpectralRow> rows;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

inline SpectralReport run_spectral_study(const ExperimentConfig& c, const GradedSection& t) {
  const AmbientMetric metric = c.metric();
  RestrictionCache cache(metric, c.y());
  SpectralReport r;
  r.section = t.to_string();
  auto seq = sup_norm_spectral(metric, c.y(), t, c.spectral_depth, c.degree_cap.value_or(64 * t.degree()), &cache);
  std::optional<GammaValue> exact;
  if (has_exact_sup(metric, c.y())) exact = sup_norm_exact(metric, c.y(), t);
  for (unsigned k = 0; k < seq.size(); ++k) {
    r.rows.push_back({k, t.degree() << k, seq[k], exact});
    if (k > 0 && !seq[k].is_infinite() && (seq[k - 1].is_infinite() || seq[k].primary() < seq[k - 1].primary())) {
      r.violations.push_back("estimate increased at k=" + std::to_string(k));
    }
    if (exact && !exact->is_infinite() && (seq[k].is_infinite() || seq[k].primary() > exact->primary())) {
      r.violations.push_back("estimate below the restricted sup norm at k=" + std::to_string(k));
    }
  }
  return r;
}

struct PerturbationRow {
  std::string suite;
  std::string item;
  GammaValue base;
  GammaValue perturbed;
  bool unchanged() const {
    if (base.is_infinite() || perturbed.is_infinite()) return base.is_infinite() == perturbed.is_infinite();
    return base.primary() == perturbed.primary();
  }
};

struct PerturbationReport {
  std::vector<PerturbationRow> rows;
  bool ok() const {
    for (const auto& r : rows) {
      if (!r.unchanged()) return false;
    }
    return true;
  }
};

inline PerturbationReport run_perturbation_study(const ExperimentConfig& c) {
  for (const auto& r : c.radii) {
    for (const auto& q : r.perturbation()) {
      if (q != 0) throw ConfigError("perturbation study needs radii without perturbation coordinates");
    }
  }
  const AmbientMetric base = c.metric();
  const AmbientMetric pert = base.perturbed();
  PerturbationReport out;
  Rng rng(c.seed);
  for (int n = c.n_min; n <= c.n_max; ++n) {
    const std::string deg = "n=" + std::to_string(n);
    for (const auto& j : monomials_of_degree(c.nvars(), n)) {
      auto m = GradedSection::monomial(j);
      out.rows.push_back({"monomial", m.to_string(), base.sup_norm(m), pert.sup_norm(m)});
    }
    for (unsigned i = 0; i < std::max(1u, c.random_classes); ++i) {
      auto s = random_section(rng, c.p, c.nvars(), n);
      out.rows.push_back({"section", s.to_string(), base.sup_norm(s), pert.sup_norm(s)});
    }
    RestrictedDegree rb(base, c.y(), n);
    RestrictedDegree rp(pert, c.y(), n);
    for (std::size_t l = 0; l < rb.dim_quotient(); ++l) {
      auto t = rb.representative(rb.basis_class(l));
      out.rows.push_back({"quotient", deg + " " + t.to_string(), rb.quotient_norm(t), rp.quotient_norm(t)});
      if (has_exact_sup(base, c.y())) {
        out.rows.push_back({"restricted_sup", deg + " " + t.to_string(), sup_norm_exact(base, c.y(), t),
                            sup_norm_exact(pert, c.y(), t)});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------- output

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

inline std::string gamma_log_p(const GammaValue& g) {
  // log_p of the norm: the negated primary coordinate.
  return g.is_infinite() ? "-inf" : rational_string(-g.primary());
}

inline constexpr int kSchemaVersion = 1;

inline std::string extension_csv(const ExtensionReport& r, bool omit_timing = false) {
  std::ostringstream os;
  os << "n,dim_quotient,gap_log_p,gap_over_n,witness,millis\n";
  for (const auto& row : r.rows) {
    os << row.n << ',' << row.dim_quotient << ',' << rational_string(row.gap) << ','
       << rational_string(row.gap_over_n) << ',' << csv_field(row.witness) << ',' << (omit_timing ? 0 : row.millis)
       << '\n';
  }
  return os.str();
}

inline json extension_json(const ExtensionReport& r, bool omit_timing = false) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"n", row.n},
                    {"dim_quotient", row.dim_quotient},
                    {"gap_log_p", rational_string(row.gap)},
                    {"gap_over_n", rational_string(row.gap_over_n)},
                    {"witness", row.witness},
                    {"millis", omit_timing ? 0 : row.millis},
                    {"sup_exact", row.exact},
                    {"saturation_certified", row.certified},
                    {"max_denominator_bits", row.denominator_bits}});
  }
  return {{"schema_version", kSchemaVersion},
          {"kind", "extension"},
          {"rows", rows},
          {"n_Y", r.n_y ? json(*r.n_y) : json(nullptr)},
          {"running_max_gap", rational_string(r.running_max)},
          {"stabilized_at", r.stabilized_at ? json(*r.stabilized_at) : json(nullptr)},
          {"max_denominator_bits", r.max_denominator_bits()},
          {"violations", r.violations}};
}

inline std::string spectral_csv(const SpectralReport& r) {
  std::ostringstream os;
  os << "k,degree,estimate_log_p,exact_log_p,excess_log_p\n";
  for (const auto& row : r.rows) {
    os << row.k << ',' << row.degree << ',' << gamma_log_p(row.estimate) << ',';
    if (row.exact) {
      os << gamma_log_p(*row.exact) << ',';
      if (row.exact->is_infinite() || row.estimate.is_infinite()) {
        os << (row.exact->is_infinite() && row.estimate.is_infinite() ? "0/1" : "inf");
      } else {
        os << rational_string(row.exact->primary() - row.estimate.primary());
      }
    } else {
      os << ',';
    }
    os << '\n';
  }
  return os.str();
}

inline json spectral_json(const SpectralReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"k", row.k},
                    {"degree", row.degree},
                    {"estimate", gamma_to_json(row.estimate)},
                    {"exact", row.exact ? gamma_to_json(*row.exact) : json(nullptr)}});
  }
  return {{"schema_version", kSchemaVersion},
          {"kind", "spectral"},
          {"section", r.section},
          {"rows", rows},
          {"violations", r.violations}};
}

inline std::string perturbation_csv(const PerturbationReport& r) {
  std::ostringstream os;
  os << "suite,item,base,perturbed,unchanged\n";
  for (const auto& row : r.rows) {
    os << row.suite << ',' << csv_field(row.item) << ',' << csv_field(row.base.to_string()) << ','
       << csv_field(row.perturbed.to_string()) << ',' << (row.unchanged() ? "true" : "false") << '\n';
  }
  return os.str();
}

inline json perturbation_json(const PerturbationReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"suite", row.suite},
                    {"item", row.item},
                    {"base", gamma_to_json(row.base)},
                    {"perturbed", gamma_to_json(row.perturbed)},
                    {"unchanged", row.unchanged()}});
  }
  return {{"schema_version", kSchemaVersion}, {"kind", "perturbation"}, {"rows", rows}, {"ok", r.ok()}};
}

// ---------------------------------------------------------------- checks

struct CheckResult {
  std::string name;
  bool passed = true;
  std::string detail;
};

/// The invariant suites for one config: extension gaps, doubling sequences,
/// perturbation neutrality, pivot invariance, lift round trips and
/// sub-multiplicativity of quotient norms.
inline std::vector<CheckResult> run_checks(const ExperimentConfig& c, std::optional<GradedSection> section = {}) {
  std::vector<CheckResult> out;
  auto record = [&](std::string name, std::vector<std::string> problems) {
    CheckResult r{std::move(name), problems.empty(), ""};
    for (std::size_t i = 0; i < problems.size(); ++i) r.detail += (i ? "; " : "") + problems[i];
    out.push_back(std::move(r));
  };

  ExtensionReport ext = run_extension(c);
  record("extension_gaps", ext.violations);

  const AmbientMetric metric = c.metric();
  Rng rng(c.seed);
  if (!section) section = random_section(rng, c.p, c.nvars(), c.n_min);
  try {
    record("spectral_sequence", run_spectral_study(c, *section).violations);
  } catch (const Error& e) {
    record("spectral_sequence", {e.what()});
  }
  {
    std::vector<std::string> bad;
    for (const auto& row : run_perturbation_study(c).rows) {
      if (!row.unchanged()) bad.push_back(row.suite + " " + row.item);
    }
    record("perturbation_neutrality", bad);
  }

  std::vector<std::string> pivots, lifts, dominance, submult;
  std::vector<std::pair<GradedSection, GammaValue>> samples;
  for (int n = c.n_min; n <= c.n_max; ++n) {
    RestrictedDegree lo(metric, c.y(), n, PivotOrder::lowest_index_first);
    RestrictedDegree hi(metric, c.y(), n, PivotOrder::highest_index_first);
    const std::string at = " at n=" + std::to_string(n);
    if (!(lo.quotient().weights().size() == hi.quotient().weights().size())) pivots.push_back("dimension" + at);
    for (unsigned i = 0; i < std::max(2u, c.random_classes); ++i) {
      auto t = random_section(rng, c.p, c.nvars(), n);
      auto cls = lo.class_of(t);
      GammaValue q = lo.quotient_norm(cls);
      if (!(q == hi.quotient_norm(t))) pivots.push_back(t.to_string() + at);
      GradedSection lift = lo.minimal_lift(cls);
      if (lo.class_of(lift) != cls || !(metric.sup_norm(lift) == q)) lifts.push_back(t.to_string() + at);
      if (has_exact_sup(metric, c.y())) {
        GammaValue s = sup_norm_exact(metric, c.y(), t);
        if (!q.is_infinite() && (s.is_infinite() ? false : s < q)) dominance.push_back(t.to_string() + at);
        if (q.is_infinite() && !s.is_infinite()) dominance.push_back(t.to_string() + at);
      }
      if (samples.size() < 6) samples.emplace_back(t, q);
    }
  }
  for (std::size_t a = 0; a < samples.size(); ++a) {
    for (std::size_t b = a; b < samples.size(); ++b) {
      const auto& [ta, qa] = samples[a];
      const auto& [tb, qb] = samples[b];
      if (qa.is_infinite() || qb.is_infinite()) continue;
      GradedSection prod = multiply(ta, tb);
      if (prod.degree() < c.y().max_generator_degree()) continue;
      GammaValue qp = RestrictedDegree(metric, c.y(), prod.degree()).quotient_norm(prod);
      if (qp < qa + qb) submult.push_back(ta.to_string() + " * " + tb.to_string());
    }
  }
  record("pivot_invariance", pivots);
  record("extension_lift", lifts);
  record("quotient_dominates_sup", dominance);
  record("submultiplicativity", submult);
  return out;
}

inline std::string checks_csv(const std::vector<CheckResult>& checks) {
  std::ostringstream os;
  os << "check,passed,detail\n";
  for (const auto& c : checks) os << c.name << ',' << (c.passed ? "true" : "false") << ',' << csv_field(c.detail) << '\n';
  return os.str();
}

inline json checks_json(const std::vector<CheckResult>& checks) {
  json rows = json::array();
  for (const auto& c : checks) rows.push_back({{"check", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return {{"schema_version", kSchemaVersion}, {"kind", "check"}, {"rows", rows}};
}

}  // namespace xtend
