#pragma once

// Structured-text documents (JSON) for parameters and fitted coefficients,
// and plot-ready delimited tables for effect curves.

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "dynpath/aalen.hpp"
#include "dynpath/bootstrap.hpp"
#include "dynpath/core.hpp"
#include "dynpath/effects.hpp"
#include "dynpath/io.hpp"
#include "dynpath/mediator.hpp"
#include "dynpath/simulate.hpp"

namespace dynpath {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Simulation parameters

namespace detail {

// A scalar broadcasts to every interval; an array must list one value each.
inline std::vector<double> per_interval(const json& j, std::size_t n, const char* name) {
  if (j.is_number()) return std::vector<double>(n, j.get<double>());
  auto v = j.get<std::vector<double>>();
  if (v.size() != n)
    throw Error(std::string("simulation params: '") + name + "' needs " + std::to_string(n) + " values");
  return v;
}

// Rows per interval; a single flat array is shared by every interval.
inline std::vector<std::vector<double>> per_interval_rows(const json& j, std::size_t n, std::size_t p,
                                                          const char* name) {
  if (j.is_null()) return std::vector<std::vector<double>>(n, std::vector<double>(p, 0.0));
  if (j.is_array() && (j.empty() || j.front().is_number())) {
    auto row = j.get<std::vector<double>>();
    return std::vector<std::vector<double>>(n, row);
  }
  auto rows = j.get<std::vector<std::vector<double>>>();
  if (rows.size() != n)
    throw Error(std::string("simulation params: '") + name + "' needs " + std::to_string(n) + " rows");
  return rows;
}

inline const char* law_name(CovariateLaw::Kind k) {
  switch (k) {
    case CovariateLaw::Kind::Normal:
      return "normal";
    case CovariateLaw::Kind::Uniform:
      return "uniform";
    case CovariateLaw::Kind::Bernoulli:
      return "bernoulli";
  }
  return "normal";
}

}  // namespace detail

inline SimulationParams params_from_json(const json& j) {
  SimulationParams p;
  try {
    p.schedule = Schedule(j.at("schedule").get<std::vector<double>>());
    const std::size_t n = p.schedule.size();

    for (const auto& c : j.value("covariates", json::array())) {
      const auto name = c.at("name").get<std::string>();
      const auto dist = c.value("dist", std::string("normal"));
      if (dist == "normal") {
        p.covariates.push_back(CovariateLaw::normal(name, c.value("mean", 0.0), c.value("sd", 1.0)));
      } else if (dist == "uniform") {
        p.covariates.push_back(CovariateLaw::uniform(name, c.at("low").get<double>(), c.at("high").get<double>()));
      } else if (dist == "bernoulli") {
        p.covariates.push_back(CovariateLaw::bernoulli(name, c.at("p").get<double>()));
      } else {
        throw Error("simulation params: unknown covariate distribution '" + dist + "'");
      }
    }
    const std::size_t cov = p.covariates.size();

    const auto& hz = j.at("hazard");
    p.hazard.mu = detail::per_interval(hz.at("mu"), n, "mu");
    p.hazard.alpha = detail::per_interval(hz.value("alpha", json(0.0)), n, "alpha");
    p.hazard.beta = detail::per_interval(hz.value("beta", json(0.0)), n, "beta");
    p.hazard.rho = detail::per_interval_rows(hz.value("rho", json()), n, cov, "rho");

    const auto& md = j.at("mediator");
    p.mediator.lambda = detail::per_interval(md.at("lambda"), n, "lambda");
    p.mediator.sigma = detail::per_interval(md.value("sigma", json(1.0)), n, "sigma");
    p.mediator.delta = detail::per_interval_rows(md.value("delta", json()), n, cov, "delta");
    p.mediator.b = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    if (md.contains("b")) {
      // Row i lists b_i0, ..., b_i(i-1).
      const auto rows = md.at("b").get<std::vector<std::vector<double>>>();
      if (rows.size() != n) throw Error("simulation params: 'b' needs one row per schedule index");
      for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != i)
          throw Error("simulation params: row " + std::to_string(i) + " of 'b' needs " + std::to_string(i) + " values");
        for (std::size_t k = 0; k < i; ++k)
          p.mediator.b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
      }
    }

    p.treatment_prob = j.value("treatment_prob", 0.5);
    if (j.contains("censoring")) {
      const auto& c = j.at("censoring");
      if (c.contains("t_max") && !c.at("t_max").is_null()) p.censoring.t_max = c.at("t_max").get<double>();
      p.censoring.rate = c.value("rate", 0.0);
    }
    if (j.contains("contrast")) {
      const auto& c = j.at("contrast");
      p.contrast = Contrast(c.at("a").get<double>(), c.at("a_star").get<double>());
    }
  } catch (const json::exception& e) {
    throw Error(std::string("simulation params: ") + e.what());
  }
  p.validate();
  return p;
}

inline json params_to_json(const SimulationParams& p) {
  json covs = json::array();
  for (const auto& c : p.covariates) {
    json e{{"name", c.name}, {"dist", detail::law_name(c.kind)}};
    switch (c.kind) {
      case CovariateLaw::Kind::Normal:
        e["mean"] = c.first;
        e["sd"] = c.second;
        break;
      case CovariateLaw::Kind::Uniform:
        e["low"] = c.first;
        e["high"] = c.second;
        break;
      case CovariateLaw::Kind::Bernoulli:
        e["p"] = c.first;
        break;
    }
    covs.push_back(std::move(e));
  }
  json b = json::array();
  for (Eigen::Index i = 0; i < p.mediator.b.rows(); ++i) {
    std::vector<double> row;
    for (Eigen::Index k = 0; k < i; ++k) row.push_back(p.mediator.b(i, k));
    b.push_back(row);
  }
  json cens{{"rate", p.censoring.rate}};
  cens["t_max"] = std::isfinite(p.censoring.t_max) ? json(p.censoring.t_max) : json();
  return {{"schedule", p.schedule.times()},
          {"covariates", covs},
          {"hazard", {{"mu", p.hazard.mu}, {"alpha", p.hazard.alpha}, {"beta", p.hazard.beta}, {"rho", p.hazard.rho}}},
          {"mediator", {{"lambda", p.mediator.lambda}, {"delta", p.mediator.delta}, {"b", b}, {"sigma", p.mediator.sigma}}},
          {"treatment_prob", p.treatment_prob},
          {"censoring", cens},
          {"contrast", {{"a", p.contrast.a}, {"a_star", p.contrast.a_star}}}};
}

// ---------------------------------------------------------------------------
// Fitted coefficients

inline json cumulative_to_json(const CumulativeCoefficients& c) {
  json covs = json::object();
  for (std::size_t j = 0; j < c.covariates.size(); ++j) covs[c.covariate_names[j]] = c.covariates[j].increments();
  return {{"times", c.times()},
          {"terms", {{"treatment", c.terms.treatment}, {"mediator", c.terms.mediator}, {"covariates", c.terms.covariates}}},
          {"increments",
           {{"baseline", c.baseline.increments()},
            {"treatment", c.treatment.increments()},
            {"mediator", c.mediator.increments()},
            {"covariates", covs}}},
          {"covariate_names", c.covariate_names},
          {"skipped_events", c.skipped_events}};
}

inline CumulativeCoefficients cumulative_from_json(const json& j) {
  CumulativeCoefficients c;
  try {
    const auto times = j.at("times").get<std::vector<double>>();
    const auto& inc = j.at("increments");
    const auto& terms = j.at("terms");
    c.terms = {terms.at("treatment").get<bool>(), terms.at("mediator").get<bool>(),
               terms.at("covariates").get<bool>()};
    c.baseline = StepFunction(times, inc.at("baseline").get<std::vector<double>>());
    c.treatment = StepFunction(times, inc.at("treatment").get<std::vector<double>>());
    c.mediator = StepFunction(times, inc.at("mediator").get<std::vector<double>>());
    c.covariate_names = j.at("covariate_names").get<std::vector<std::string>>();
    for (const auto& name : c.covariate_names)
      c.covariates.emplace_back(times, inc.at("covariates").at(name).get<std::vector<double>>());
    c.skipped_events = j.at("skipped_events").get<std::size_t>();
  } catch (const json::exception& e) {
    throw Error(std::string("fit document: ") + e.what());
  }
  return c;
}

inline json mediator_to_json(const MediatorCoefficients& m) {
  json out = json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto& slot = m.indices[i];
    json e{{"index", i}, {"time", slot.time}, {"survivors", slot.survivors}, {"available", slot.fit.has_value()}};
    if (slot.fit) {
      e["intercept"] = slot.fit->intercept;
      e["treatment"] = slot.fit->treatment;
      e["covariates"] = slot.fit->covariates;
      e["std_errors"] = slot.fit->std_errors;
      e["residual_variance"] = slot.fit->residual_variance;
    } else {
      e["reason"] = slot.reason;
    }
    out.push_back(std::move(e));
  }
  return out;
}

inline MediatorCoefficients mediator_from_json(const json& j) {
  MediatorCoefficients m;
  try {
    for (const auto& e : j) {
      IndexFit<MarginalFit> slot;
      slot.time = e.at("time").get<double>();
      slot.survivors = e.at("survivors").get<std::size_t>();
      if (e.at("available").get<bool>()) {
        MarginalFit f;
        f.intercept = e.at("intercept").get<double>();
        f.treatment = e.at("treatment").get<double>();
        f.covariates = e.at("covariates").get<std::vector<double>>();
        f.std_errors = e.at("std_errors").get<std::vector<double>>();
        f.residual_variance = e.at("residual_variance").get<double>();
        slot.fit = std::move(f);
      } else {
        slot.reason = e.value("reason", std::string("unavailable"));
      }
      m.indices.push_back(std::move(slot));
    }
  } catch (const json::exception& e) {
    throw Error(std::string("fit document: ") + e.what());
  }
  return m;
}

inline json structural_to_json(const StructuralCoefficients& s) {
  json out = json::array();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& slot = s.indices[i];
    json e{{"index", i}, {"time", slot.time}, {"survivors", slot.survivors}, {"available", slot.fit.has_value()}};
    if (slot.fit) {
      e["intercept"] = slot.fit->intercept;
      e["treatment"] = slot.fit->treatment;
      e["covariates"] = slot.fit->covariates;
      e["past"] = slot.fit->past;
      e["std_errors"] = slot.fit->std_errors;
      e["residual_variance"] = slot.fit->residual_variance;
    } else {
      e["reason"] = slot.reason;
    }
    out.push_back(std::move(e));
  }
  return out;
}

// Everything the effects step needs: schedule, additive fit, mediator fits.
struct FitDocument {
  Schedule schedule;
  CumulativeCoefficients additive;
  MediatorCoefficients marginal;
  StructuralCoefficients sequential;
};

inline json fit_document_to_json(const FitDocument& f) {
  return {{"schedule", f.schedule.times()},
          {"additive", cumulative_to_json(f.additive)},
          {"mediator", {{"marginal", mediator_to_json(f.marginal)}, {"sequential", structural_to_json(f.sequential)}}}};
}

// The sequential block is informational and not read back.
inline FitDocument fit_document_from_json(const json& j) {
  FitDocument f;
  try {
    f.schedule = Schedule(j.at("schedule").get<std::vector<double>>());
    f.additive = cumulative_from_json(j.at("additive"));
    f.marginal = mediator_from_json(j.at("mediator").at("marginal"));
  } catch (const json::exception& e) {
    throw Error(std::string("fit document: ") + e.what());
  }
  if (f.marginal.size() != f.schedule.size())
    throw Error("fit document: mediator coefficients do not match the schedule");
  return f;
}

// ---------------------------------------------------------------------------
// Plot-ready tables

namespace detail {

inline void append_row(std::string& out, const std::vector<double>& values) {
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) out += ',';
    out += format_number(values[k]);
  }
  out += '\n';
}

}  // namespace detail

inline constexpr const char* kEffectColumns = "time,chde,chie,chte,sde,sie,ste";

// One row per jump time. With `corrected`, the measurement-error corrected
// curves follow as *_corrected columns.
inline std::string effects_table(const EffectCurves& raw, const EffectCurves* corrected = nullptr) {
  std::string out = kEffectColumns;
  if (corrected) out += ",chde_corrected,chie_corrected,chte_corrected,sde_corrected,sie_corrected,ste_corrected";
  out += '\n';
  const auto s = survival_effects(raw);
  const auto sc = corrected ? survival_effects(*corrected) : SurvivalEffects{};
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    std::vector<double> row{s.times[k], raw.chde.values()[k], raw.chie.values()[k], raw.chte.values()[k],
                            s.sde[k], s.sie[k], s.ste[k]};
    if (corrected) {
      row.insert(row.end(), {corrected->chde.values()[k], corrected->chie.values()[k],
                             corrected->chte.values()[k], sc.sde[k], sc.sie[k], sc.ste[k]});
    }
    detail::append_row(out, row);
  }
  return out;
}

inline std::string bands_table(const BootstrapBands& b) {
  std::string out = "time";
  const std::pair<const char*, const Band*> cols[] = {{"chde", &b.chde}, {"chie", &b.chie}, {"chte", &b.chte},
                                                      {"sde", &b.sde},   {"sie", &b.sie},   {"ste", &b.ste}};
  for (const auto& [name, band] : cols) {
    out += ',';
    out += name;
    out += ',';
    out += name;
    out += "_lower,";
    out += name;
    out += "_upper";
  }
  out += '\n';
  for (std::size_t g = 0; g < b.grid.size(); ++g) {
    std::vector<double> row{b.grid[g]};
    for (const auto& [name, band] : cols) row.insert(row.end(), {band->estimate[g], band->lower[g], band->upper[g]});
    detail::append_row(out, row);
  }
  return out;
}

}  // namespace dynpath
