// xtend: run extension / spectral / perturbation experiments from a JSON config.
// Exit codes: 0 all invariants hold, 2 an invariant failed, 1 usage or config error.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "xtend/experiment.hpp"

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string format = "csv";
  std::optional<unsigned> depth;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> section;
  bool omit_timing = false;
};

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw xtend::ConfigError("cannot write " + o.out);
  f << text;
}

std::string dump(const xtend::json& j) { return j.dump(2) + "\n"; }

xtend::ExperimentConfig load(const Options& o) {
  auto c = xtend::ExperimentConfig::load(o.config);
  if (o.depth) c.spectral_depth = *o.depth;
  if (o.seed) c.seed = *o.seed;
  if (o.section) c.section = *o.section;
  return c;
}

int report_violations(const std::vector<std::string>& v) {
  for (const auto& s : v) std::cerr << "invariant failed: " << s << "\n";
  return v.empty() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantitative extension experiments over p-adic fields"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output file (default: stdout)");
    sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--depth", o.depth, "doubling depth K for spectral estimates");
    sub->add_option("--seed", o.seed, "seed for random classes and sections");
    sub->add_option("--section", o.section, "section literal, e.g. \"T0^2 - 3*T1 T2\"");
  };

  auto* extend = app.add_subcommand("extend", "per-degree gap between quotient and restricted sup norms");
  add_common(extend);
  extend->add_flag("--omit-timing", o.omit_timing, "write 0 in the millis column");
  auto* spectral = app.add_subcommand("spectral", "doubling sequence for one section");
  add_common(spectral);
  auto* perturb = app.add_subcommand("perturb", "norms with and without infinitesimal perturbations");
  add_common(perturb);
  auto* check = app.add_subcommand("check", "run all invariant suites");
  add_common(check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  const bool json_out = o.format == "json";
  try {
    const xtend::ExperimentConfig c = load(o);
    if (extend->parsed()) {
      auto r = xtend::run_extension(c);
      emit(o, json_out ? dump(xtend::extension_json(r, o.omit_timing)) : xtend::extension_csv(r, o.omit_timing));
      for (const auto& row : r.rows) {
        if (!row.certified) std::cerr << "warning: n=" << row.n << " below the certified saturation degree\n";
        if (!row.exact) std::cerr << "warning: n=" << row.n << " uses spectral sup estimates (gap is a lower bound)\n";
      }
      std::cerr << "n_Y = " << (r.n_y ? std::to_string(*r.n_y) : std::string("none in range"))
                << ", running max gap = " << xtend::rational_short(r.running_max)
                << ", largest denominator " << r.max_denominator_bits() << " bits\n";
      return report_violations(r.violations);
    }
    if (spectral->parsed()) {
      if (!c.section) throw xtend::ConfigError("spectral needs a section (config \"section\" or --section)");
      auto t = xtend::parse_section(*c.section, c.nvars());
      auto r = xtend::run_spectral_study(c, t);
      emit(o, json_out ? dump(xtend::spectral_json(r)) : xtend::spectral_csv(r));
      return report_violations(r.violations);
    }
    if (perturb->parsed()) {
      auto r = xtend::run_perturbation_study(c);
      emit(o, json_out ? dump(xtend::perturbation_json(r)) : xtend::perturbation_csv(r));
      std::vector<std::string> bad;
      for (const auto& row : r.rows) {
        if (!row.unchanged()) bad.push_back("primary value changed: " + row.suite + " " + row.item);
      }
      return report_violations(bad);
    }
    std::optional<xtend::GradedSection> t;
    if (c.section) t = xtend::parse_section(*c.section, c.nvars());
    auto checks = xtend::run_checks(c, t);
    emit(o, json_out ? dump(xtend::checks_json(checks)) : xtend::checks_csv(checks));
    std::vector<std::string> bad;
    for (const auto& ch : checks) {
      std::cerr << (ch.passed ? "PASS " : "FAIL ") << ch.name << (ch.detail.empty() ? "" : ": " + ch.detail) << "\n";
      if (!ch.passed) bad.push_back(ch.name);
    }
    return bad.empty() ? 0 : 2;
  } catch (const xtend::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
