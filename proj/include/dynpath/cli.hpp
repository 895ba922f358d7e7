#pragma once

// Command-line front end: simulate -> fit -> effects -> bootstrap, plus the
// closed-form / Monte-Carlo oracle. All randomized subcommands take --seed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dynpath/dynpath.hpp"

namespace dynpath {

struct RunConfig {
  std::string input;
  std::string output;
  std::string contrast = "1,0";
  std::optional<double> kappa;
  std::size_t replicates = 200;
  std::uint64_t seed = 0;
  double level = 0.95;
  std::string grid;
  bool carry_forward = false;
  std::size_t n = 0;
  std::string regime = "observational";
  double a_direct = 1.0;
  double a_mediator = 1.0;
  unsigned threads = default_threads();
};

namespace cli_detail {

inline std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  if (text.empty()) return out;
  for (const auto& field : detail::split(text, ',')) {
    auto v = parse_number(field);
    if (!v) throw Error(std::string(what) + ": malformed number '" + field + "'");
    out.push_back(*v);
  }
  return out;
}

inline Contrast parse_contrast(const std::string& text) {
  const auto v = parse_list(text, "--contrast");
  if (v.size() != 2) throw Error("--contrast expects two values a,a_star");
  return Contrast(v[0], v[1]);
}

inline void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

inline void check_distinct(const RunConfig& c) {
  if (!c.output.empty() && std::filesystem::path(c.input).lexically_normal() ==
                               std::filesystem::path(c.output).lexically_normal())
    throw Error("input and output paths must differ");
}

inline SimulationParams read_params(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("'" + path + "': " + e.what());
  }
  return params_from_json(j);
}

inline void run_simulate(const RunConfig& c, std::ostream& out) {
  check_distinct(c);
  const auto params = read_params(c.input);
  Regime regime = Regime::observational();
  if (c.regime == "intervened") {
    regime = Regime::intervened(c.a_direct, c.a_mediator);
  } else if (c.regime != "observational") {
    throw Error("--regime must be observational or intervened");
  }
  const auto sim = simulate(params, c.n, c.seed, regime, c.threads);
  write_cohort_dir(sim.data, c.output);
  out << "simulated " << sim.data.size() << " subjects, "
      << std::count_if(sim.data.subjects().begin(), sim.data.subjects().end(), [](const auto& s) { return s.event; })
      << " events, clamped intervals " << sim.stats.clamped_intervals << "\n";
}

inline Dataset read_cohort(const RunConfig& c) {
  return load_cohort_dir(c.input, c.carry_forward ? std::optional(GapMode::CarryForward) : std::nullopt);
}

inline void run_fit(const RunConfig& c, std::ostream& out, std::ostream& err) {
  check_distinct(c);
  const auto data = read_cohort(c);
  if (data.carried_forward() > 0)
    err << "warning: " << data.carried_forward() << " mediator values carried forward\n";
  FitDocument doc{data.schedule(), fit_additive(data), fit_marginal(data), fit_sequential(data)};
  if (doc.additive.skipped_events > 0)
    err << "warning: " << doc.additive.skipped_events << " event times skipped (rank-deficient design)\n";
  emit(c.output, fit_document_to_json(doc).dump(2) + "\n", out);
}

inline void run_effects(const RunConfig& c, std::ostream& out) {
  check_distinct(c);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(c.input));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("'" + c.input + "': " + e.what());
  }
  const auto doc = fit_document_from_json(j);
  const auto raw = cumulative_effects(doc.additive, doc.marginal, doc.schedule, parse_contrast(c.contrast));
  if (c.kappa) {
    const auto corrected = correct_measurement_error(raw, *c.kappa);
    emit(c.output, effects_table(raw, &corrected), out);
  } else {
    emit(c.output, effects_table(raw), out);
  }
}

inline void run_bootstrap(const RunConfig& c, std::ostream& out, std::ostream& err) {
  check_distinct(c);
  const auto data = read_cohort(c);
  BootstrapOptions opt;
  opt.replicates = c.replicates;
  opt.seed = c.seed;
  opt.grid = parse_list(c.grid, "--grid");
  opt.level = c.level;
  opt.threads = c.threads;
  const auto bands = bootstrap_bands(data, parse_contrast(c.contrast), opt);
  if (bands.failed_replicates > 0) err << "warning: " << bands.failed_replicates << " replicates failed\n";
  emit(c.output, bands_table(bands), out);
}

inline void run_oracle(const RunConfig& c, std::ostream& out) {
  check_distinct(c);
  const auto params = read_params(c.input);
  const auto grid = parse_list(c.grid, "--grid");
  if (grid.empty()) throw Error("--grid is required");
  const double a = params.contrast.a;
  const double a_star = params.contrast.a_star;
  const auto exact = closed_form_effects(params, grid);
  const auto q_aa = mc_survival(params, Regime::intervened(a, a), c.n, derive_seed(c.seed, 0), grid, c.threads);
  const auto q_as = mc_survival(params, Regime::intervened(a, a_star), c.n, derive_seed(c.seed, 1), grid, c.threads);
  const auto q_ss = mc_survival(params, Regime::intervened(a_star, a_star), c.n, derive_seed(c.seed, 2), grid, c.threads);

  auto ratio = [](const SurvivalCurve& num, const SurvivalCurve& den, std::size_t g) {
    const double r = num.survival[g] / den.survival[g];
    const double rel = std::hypot(num.std_error[g] / num.survival[g], den.std_error[g] / den.survival[g]);
    return std::pair{r, r * rel};
  };
  std::string table = "time,chde,chie,chte,sde,sie,ste,mc_sde,mc_sde_se,mc_sie,mc_sie_se,mc_ste,mc_ste_se\n";
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto [sde, sde_se] = ratio(q_as, q_ss, g);
    const auto [sie, sie_se] = ratio(q_aa, q_as, g);
    const auto [ste, ste_se] = ratio(q_aa, q_ss, g);
    detail::append_row(table, {grid[g], exact.chde[g], exact.chie[g], exact.chte[g], exact.sde[g], exact.sie[g],
                               exact.ste[g], sde, sde_se, sie, sie_se, ste, ste_se});
  }
  emit(c.output, table, out);
}

}  // namespace cli_detail

// Runs the command line `args` (program name excluded). Returns the exit status.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dynamic-path mediation analysis for survival data under the additive hazards model"};
  app.name("dynpath");
  app.require_subcommand(1, 1);
  RunConfig c;

  auto* sim = app.add_subcommand("simulate", "Simulate a cohort from a parameter file");
  sim->add_option("--params", c.input, "Simulation parameter file (JSON)")->required();
  sim->add_option("--n", c.n, "Number of subjects")->required();
  sim->add_option("--seed", c.seed, "Random seed")->required();
  sim->add_option("--out", c.output, "Output cohort directory (subjects.csv, mediators.csv, config.json)")->required();
  sim->add_option("--regime", c.regime, "observational | intervened");
  sim->add_option("--a-direct", c.a_direct, "Treatment on the direct path (intervened regime)");
  sim->add_option("--a-mediator", c.a_mediator, "Treatment on the mediator path (intervened regime)");
  sim->add_option("--threads", c.threads, "Worker threads; output does not depend on it");

  auto* fit = app.add_subcommand("fit", "Fit the additive hazards and mediator models to a cohort");
  fit->add_option("--data", c.input, "Cohort directory")->required();
  fit->add_option("--out", c.output, "Output fit document (JSON); stdout if omitted");
  fit->add_flag("--carry-forward", c.carry_forward, "Fill mediator gaps by last observation carried forward");

  auto* eff = app.add_subcommand(
      "effects",
      "Effect curves from a fit document. Columns: time,chde,chie,chte,sde,sie,ste; with --kappa also "
      "chde_corrected,chie_corrected,chte_corrected,sde_corrected,sie_corrected,ste_corrected");
  eff->add_option("--fit", c.input, "Fit document produced by `fit`")->required();
  eff->add_option("--contrast", c.contrast, "a,a_star (default 1,0)");
  eff->add_option("--kappa", c.kappa, "Mediator reliability in (0,1] for measurement-error correction");
  eff->add_option("--out", c.output, "Output table; stdout if omitted");

  auto* boot = app.add_subcommand(
      "bootstrap",
      "Percentile bootstrap bands. Columns: time, then for each of chde,chie,chte,sde,sie,ste the "
      "estimate, <name>_lower and <name>_upper");
  boot->add_option("--data", c.input, "Cohort directory")->required();
  boot->add_option("--contrast", c.contrast, "a,a_star (default 1,0)");
  boot->add_option("--replicates,-B", c.replicates, "Bootstrap replicates (default 200)");
  boot->add_option("--seed", c.seed, "Random seed")->required();
  boot->add_option("--level", c.level, "Nominal coverage (default 0.95)");
  boot->add_option("--grid", c.grid, "Comma-separated evaluation times (default: event times)");
  boot->add_option("--threads", c.threads, "Worker threads; output does not depend on it");
  boot->add_option("--out", c.output, "Output table; stdout if omitted");
  boot->add_flag("--carry-forward", c.carry_forward, "Fill mediator gaps by last observation carried forward");

  auto* orc = app.add_subcommand(
      "oracle",
      "Closed-form effects next to Monte-Carlo g-formula ratios. Columns: "
      "time,chde,chie,chte,sde,sie,ste,mc_sde,mc_sde_se,mc_sie,mc_sie_se,mc_ste,mc_ste_se");
  orc->add_option("--params", c.input, "Simulation parameter file (JSON)")->required();
  orc->add_option("--grid", c.grid, "Comma-separated evaluation times")->required();
  orc->add_option("--n-mc", c.n, "Monte-Carlo subjects per regime (default 100000)");
  orc->add_option("--seed", c.seed, "Random seed")->required();
  orc->add_option("--threads", c.threads, "Worker threads; output does not depend on it");
  orc->add_option("--out", c.output, "Output table; stdout if omitted");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (sim->parsed()) {
      cli_detail::run_simulate(c, out);
    } else if (fit->parsed()) {
      cli_detail::run_fit(c, out, err);
    } else if (eff->parsed()) {
      cli_detail::run_effects(c, out);
    } else if (boot->parsed()) {
      cli_detail::run_bootstrap(c, out, err);
    } else if (orc->parsed()) {
      if (c.n == 0) c.n = 100000;
      cli_detail::run_oracle(c, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace dynpath
