#pragma once

// Least-squares fitting of the additive hazards model
//   lambda(t) = mu_t + alpha_t a + beta_t M_{r(t)} + rho_t' c
// in cumulative form. At each distinct event time the increment of the
// cumulative coefficients is the OLS solution of dN(t) on the risk-set design.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dynpath/core.hpp"
#include "dynpath/linalg.hpp"

namespace dynpath {

// Which regressors enter the design besides the intercept.
struct Terms {
  bool treatment = true;
  bool mediator = true;
  bool covariates = true;

  static constexpr Terms intercept_only() { return {false, false, false}; }
  static constexpr Terms treatment_only() { return {true, false, false}; }
  bool operator==(const Terms&) const = default;
};

struct CumulativeCoefficients {
  StepFunction baseline;
  StepFunction treatment;
  StepFunction mediator;
  std::vector<StepFunction> covariates;
  std::vector<std::string> covariate_names;
  // Terms left out of the fit carry zero increments on the shared jump set.
  Terms terms;
  std::size_t skipped_events = 0;

  const std::vector<Time>& times() const noexcept { return baseline.jumps(); }
  bool operator==(const CumulativeCoefficients&) const = default;
};

inline Eigen::Index design_columns(const Dataset& data, Terms terms) {
  return 1 + (terms.treatment ? 1 : 0) + (terms.mediator ? 1 : 0) +
         (terms.covariates ? static_cast<Eigen::Index>(data.covariate_count()) : 0);
}

namespace detail {

template <class Row>
void fill_design_row(Row&& row, const SubjectRecord& s, std::size_t mediator_k, Terms terms) {
  Eigen::Index j = 0;
  row(j++) = 1.0;
  if (terms.treatment) row(j++) = s.treatment;
  if (terms.mediator) row(j++) = s.mediators[mediator_k];
  if (terms.covariates)
    for (double c : s.baseline) row(j++) = c;
}

}  // namespace detail

struct RiskSetDesign {
  std::vector<std::size_t> subjects;
  Eigen::MatrixXd design;
  // dN(t): 1 for subjects with an observed event at t.
  Eigen::VectorXd events;
};

inline RiskSetDesign design_at(const Dataset& data, Time t, Terms terms = {}) {
  RiskSetDesign out;
  out.subjects = risk_set(data, t);
  const std::size_t k = mediator_index(data.schedule(), t);
  const auto m = static_cast<Eigen::Index>(out.subjects.size());
  out.design.resize(m, design_columns(data, terms));
  out.events.setZero(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto& s = data[out.subjects[static_cast<std::size_t>(r)]];
    detail::fill_design_row(out.design.row(r), s, k, terms);
    out.events(r) = (s.event && s.followup == t) ? 1.0 : 0.0;
  }
  return out;
}

inline CumulativeCoefficients fit_additive(const Dataset& data, Terms terms = {}) {
  const std::vector<Time> times = event_times(data);
  if (times.empty()) throw Error("fit_additive: no observed events");

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return data[i].followup < data[j].followup; });

  const Eigen::Index q = design_columns(data, terms);
  const std::size_t p = data.covariate_count();
  CumulativeCoefficients out;
  out.terms = terms;
  out.covariate_names = data.covariate_names();
  out.covariates.resize(p);

  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::size_t start = 0;
  bool any_feasible = false;
  for (Time t : times) {
    while (start < order.size() && data[order[start]].followup < t) ++start;
    const auto m = static_cast<Eigen::Index>(order.size() - start);
    if (m < q) {
      ++out.skipped_events;
      continue;
    }
    any_feasible = true;
    const std::size_t k = mediator_index(data.schedule(), t);
    x.resize(m, q);
    y.setZero(m);
    for (Eigen::Index r = 0; r < m; ++r) {
      const auto& s = data[order[start + static_cast<std::size_t>(r)]];
      detail::fill_design_row(x.row(r), s, k, terms);
      if (s.event && s.followup == t) y(r) = 1.0;
    }
    LeastSquares ls(x);
    if (!ls.full_rank()) {
      ++out.skipped_events;
      continue;
    }
    const Eigen::VectorXd inc = ls.solve(y);
    Eigen::Index j = 0;
    out.baseline.push_back(t, inc(j++));
    out.treatment.push_back(t, terms.treatment ? inc(j++) : 0.0);
    out.mediator.push_back(t, terms.mediator ? inc(j++) : 0.0);
    for (std::size_t c = 0; c < p; ++c) out.covariates[c].push_back(t, terms.covariates ? inc(j++) : 0.0);
  }
  if (!any_feasible)
    throw Error("fit_additive: design has more columns than at-risk subjects at every event time");
  return out;
}

// Nelson-Aalen estimate over the subjects selected by `in_subset`.
template <class Predicate>
StepFunction nelson_aalen(const Dataset& data, Predicate&& in_subset) {
  std::vector<const SubjectRecord*> members;
  for (const auto& s : data.subjects())
    if (in_subset(s)) members.push_back(&s);
  if (members.empty()) throw Error("nelson_aalen: empty subset");

  std::vector<Time> times;
  for (const auto* s : members)
    if (s->event) times.push_back(s->followup);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  StepFunction out;
  for (Time t : times) {
    std::size_t at_risk = 0;
    std::size_t events = 0;
    for (const auto* s : members) {
      if (s->followup >= t) ++at_risk;
      if (s->event && s->followup == t) ++events;
    }
    out.push_back(t, static_cast<double>(events) / static_cast<double>(at_risk));
  }
  return out;
}

inline StepFunction nelson_aalen(const Dataset& data) {
  return nelson_aalen(data, [](const SubjectRecord&) { return true; });
}

}  // namespace dynpath
