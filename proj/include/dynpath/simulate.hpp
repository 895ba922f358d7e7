#pragma once

// Generative model and Monte-Carlo oracle.
//
// Each subject draws baseline covariates C and treatment A. At every visit t_i
// reached alive the mediator is drawn from the structural model
//   M_i = lambda_i a_M + delta_i' C + sum_{k<i} b_ik M_k + sigma_i Z_i
// and on [t_i, t_{i+1}) the hazard is constant,
//   h_i = mu_i + alpha_i a_D + beta_i M_i + rho_i' C,
// so the event time follows by inverting the piecewise-linear cumulative
// hazard against a unit exponential. Observationally a_M = a_D = A.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dynpath/core.hpp"
#include "dynpath/effects.hpp"
#include "dynpath/mediator.hpp"
#include "dynpath/parallel.hpp"
#include "dynpath/rng.hpp"

namespace dynpath {

// Fraction of visited intervals whose hazard may be clamped at zero before a
// parameter set is rejected.
inline constexpr double kMaxClampRate = 1e-3;

struct CovariateLaw {
  enum class Kind { Normal, Uniform, Bernoulli };

  std::string name;
  Kind kind = Kind::Normal;
  // normal: mean, sd; uniform: low, high; bernoulli: p, unused
  double first = 0.0;
  double second = 1.0;

  static CovariateLaw normal(std::string name, double mean, double sd) {
    return {std::move(name), Kind::Normal, mean, sd};
  }
  static CovariateLaw uniform(std::string name, double low, double high) {
    return {std::move(name), Kind::Uniform, low, high};
  }
  static CovariateLaw bernoulli(std::string name, double p) {
    return {std::move(name), Kind::Bernoulli, p, 0.0};
  }

  void validate() const {
    auto bad = [&](const char* what) { throw Error("covariate '" + name + "': " + what); };
    if (!std::isfinite(first) || !std::isfinite(second)) bad("parameters must be finite");
    switch (kind) {
      case Kind::Normal:
        if (second < 0.0) bad("sd must be >= 0");
        break;
      case Kind::Uniform:
        if (!(second > first)) bad("uniform requires low < high");
        break;
      case Kind::Bernoulli:
        if (first < 0.0 || first > 1.0) bad("p must lie in [0, 1]");
        break;
    }
  }

  template <class Rng>
  double draw(Rng& rng, std::normal_distribution<double>& z,
              std::uniform_real_distribution<double>& u) const {
    switch (kind) {
      case Kind::Normal:
        return first + second * z(rng);
      case Kind::Uniform:
        return first + (second - first) * u(rng);
      case Kind::Bernoulli:
        return u(rng) < first ? 1.0 : 0.0;
    }
    return 0.0;
  }

  bool operator==(const CovariateLaw&) const = default;
};

// Hazard coefficients, one value per schedule interval [t_k, t_{k+1}).
struct HazardPaths {
  std::vector<double> mu;
  std::vector<double> alpha;
  std::vector<double> beta;
  // rho[k][j]: coefficient of covariate j on interval k
  std::vector<std::vector<double>> rho;

  static HazardPaths constant(std::size_t intervals, double mu, double alpha, double beta,
                              std::vector<double> rho = {}) {
    return {std::vector<double>(intervals, mu), std::vector<double>(intervals, alpha),
            std::vector<double>(intervals, beta), std::vector<std::vector<double>>(intervals, rho)};
  }
  bool operator==(const HazardPaths&) const = default;
};

struct StructuralModel {
  std::vector<double> lambda;
  // delta[i][j]: coefficient of covariate j at visit i
  std::vector<std::vector<double>> delta;
  // b(i, k), strictly lower triangular
  Eigen::MatrixXd b;
  std::vector<double> sigma;

  bool operator==(const StructuralModel& o) const {
    return lambda == o.lambda && delta == o.delta && sigma == o.sigma && b.rows() == o.b.rows() &&
           b.cols() == o.b.cols() && b == o.b;
  }
};

struct Censoring {
  double t_max = std::numeric_limits<double>::infinity();
  // Rate of an independent exponential censoring time; 0 disables it.
  double rate = 0.0;
  bool operator==(const Censoring&) const = default;
};

struct SimulationParams {
  Schedule schedule;
  HazardPaths hazard;
  StructuralModel mediator;
  std::vector<CovariateLaw> covariates;
  double treatment_prob = 0.5;
  Censoring censoring;
  Contrast contrast;

  bool operator==(const SimulationParams&) const = default;

  std::size_t covariate_count() const noexcept { return covariates.size(); }
  std::vector<std::string> covariate_names() const {
    std::vector<std::string> out;
    for (const auto& c : covariates) out.push_back(c.name);
    return out;
  }

  void validate() const {
    const std::size_t n = schedule.size();
    const std::size_t p = covariates.size();
    auto bad = [](const std::string& what) { throw Error("simulation params: " + what); };
    auto check_len = [&](const std::vector<double>& v, const char* name) {
      if (v.size() != n) bad(std::string(name) + " needs one value per schedule interval");
      for (double x : v)
        if (!std::isfinite(x)) bad(std::string(name) + " must be finite");
    };
    auto check_rows = [&](const std::vector<std::vector<double>>& m, const char* name) {
      if (m.size() != n) bad(std::string(name) + " needs one row per schedule index");
      for (const auto& row : m) {
        if (row.size() != p) bad(std::string(name) + " rows need one value per covariate");
        for (double x : row)
          if (!std::isfinite(x)) bad(std::string(name) + " must be finite");
      }
    };
    check_len(hazard.mu, "mu");
    check_len(hazard.alpha, "alpha");
    check_len(hazard.beta, "beta");
    check_rows(hazard.rho, "rho");
    check_len(mediator.lambda, "lambda");
    check_rows(mediator.delta, "delta");
    check_len(mediator.sigma, "sigma");
    for (double s : mediator.sigma)
      if (s < 0.0) bad("sigma must be >= 0");
    if (mediator.b.rows() != static_cast<Eigen::Index>(n) || mediator.b.cols() != static_cast<Eigen::Index>(n))
      bad("b must be square with one row per schedule index");
    for (Eigen::Index i = 0; i < mediator.b.rows(); ++i)
      for (Eigen::Index k = 0; k < mediator.b.cols(); ++k) {
        if (!std::isfinite(mediator.b(i, k))) bad("b must be finite");
        if (k >= i && mediator.b(i, k) != 0.0) bad("b must be strictly lower triangular");
      }
    for (const auto& c : covariates) c.validate();
    if (!(treatment_prob >= 0.0 && treatment_prob <= 1.0)) bad("treatment_prob must lie in [0, 1]");
    if (!(censoring.t_max > 0.0)) bad("t_max must be > 0");
    if (!(censoring.rate >= 0.0) || !std::isfinite(censoring.rate)) bad("censoring rate must be >= 0");
  }
};

// Constant-in-time parameters with no covariates and B = 0; a convenient
// starting point that callers then adjust.
inline SimulationParams constant_params(Schedule schedule, double mu, double alpha, double beta,
                                        double lambda, double sigma) {
  const std::size_t n = schedule.size();
  SimulationParams p;
  p.schedule = std::move(schedule);
  p.hazard = HazardPaths::constant(n, mu, alpha, beta);
  p.mediator.lambda.assign(n, lambda);
  p.mediator.delta.assign(n, {});
  p.mediator.b = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  p.mediator.sigma.assign(n, sigma);
  return p;
}

struct Regime {
  enum class Kind { Observational, Intervened };
  Kind kind = Kind::Observational;
  double a_direct = 0.0;
  double a_mediator = 0.0;

  static Regime observational() { return {}; }
  static Regime intervened(double a_direct, double a_mediator) {
    return {Kind::Intervened, a_direct, a_mediator};
  }
};

struct SimulationStats {
  std::size_t clamped_intervals = 0;
  std::size_t visited_intervals = 0;

  double clamp_rate() const {
    return visited_intervals == 0 ? 0.0
                                  : static_cast<double>(clamped_intervals) / static_cast<double>(visited_intervals);
  }
  SimulationStats& operator+=(const SimulationStats& o) {
    clamped_intervals += o.clamped_intervals;
    visited_intervals += o.visited_intervals;
    return *this;
  }
};

namespace detail {

struct SubjectDraw {
  SubjectRecord record;
  // Latent event time; +inf if the hazard vanishes or the walk stopped at censoring.
  Time event_time = std::numeric_limits<Time>::infinity();
  SimulationStats stats;
};

inline SubjectDraw draw_subject(const SimulationParams& params, std::uint64_t seed, std::size_t index,
                                Regime regime, bool censored) {
  StreamRng rng(seed, index, rng_domain::kSimulation);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::exponential_distribution<double> unit_exp(1.0);

  SubjectDraw out;
  auto& rec = out.record;
  rec.id = "s" + std::to_string(index + 1);
  for (const auto& law : params.covariates) rec.baseline.push_back(law.draw(rng, z, u));
  const double drawn = u(rng) < params.treatment_prob ? params.contrast.a : params.contrast.a_star;
  // Both exponentials are always consumed so streams stay aligned across regimes.
  double budget = unit_exp(rng);
  const double cens_draw = unit_exp(rng);

  const bool observational = regime.kind == Regime::Kind::Observational;
  const double a_direct = observational ? drawn : regime.a_direct;
  const double a_mediator = observational ? drawn : regime.a_mediator;
  rec.treatment = a_direct;

  Time censor_time = std::numeric_limits<Time>::infinity();
  if (censored) {
    censor_time = params.censoring.t_max;
    if (params.censoring.rate > 0.0) censor_time = std::min(censor_time, cens_draw / params.censoring.rate);
  }

  const auto& sched = params.schedule;
  const auto& hz = params.hazard;
  const auto& sm = params.mediator;
  const std::size_t p = params.covariates.size();
  std::vector<double> m;
  for (std::size_t k = 0; k < sched.size() && sched[k] <= censor_time; ++k) {
    double mk = sm.lambda[k] * a_mediator + sm.sigma[k] * z(rng);
    for (std::size_t j = 0; j < p; ++j) mk += sm.delta[k][j] * rec.baseline[j];
    for (std::size_t j = 0; j < k; ++j) mk += sm.b(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) * m[j];
    m.push_back(mk);

    double h = hz.mu[k] + hz.alpha[k] * a_direct + hz.beta[k] * mk;
    for (std::size_t j = 0; j < p; ++j) h += hz.rho[k][j] * rec.baseline[j];
    ++out.stats.visited_intervals;
    if (h < 0.0) {
      ++out.stats.clamped_intervals;
      h = 0.0;
    }
    const Time start = sched[k];
    const Time end = sched.interval_end(k);
    if (h > 0.0 && (std::isinf(end) || h * (end - start) >= budget)) {
      out.event_time = start + budget / h;
      break;
    }
    if (!std::isinf(end)) budget -= h * (end - start);
  }

  rec.followup = std::min(out.event_time, censor_time);
  rec.event = out.event_time <= censor_time;
  if (std::isfinite(rec.followup)) {
    m.resize(std::min(m.size(), mediator_index(sched, rec.followup) + 1));
    rec.mediators = std::move(m);
  }
  return out;
}

inline void check_clamp_rate(const SimulationStats& stats, const char* who) {
  if (stats.clamp_rate() > kMaxClampRate)
    throw Error(std::string(who) + ": negative hazard clamped in " +
                std::to_string(100.0 * stats.clamp_rate()) +
                "% of intervals, above the 0.1% limit for this parameter set");
}

}  // namespace detail

struct SimulatedCohort {
  Dataset data;
  SimulationStats stats;
};

inline SimulatedCohort simulate(const SimulationParams& params, std::size_t n, std::uint64_t seed,
                                Regime regime = Regime::observational(), unsigned threads = 1) {
  params.validate();
  if (n < 1) throw Error("simulate_cohort: n must be >= 1");
  std::vector<detail::SubjectDraw> draws(n);
  parallel_for(n, threads, [&](std::size_t i) { draws[i] = detail::draw_subject(params, seed, i, regime, true); });

  SimulationStats stats;
  std::vector<SubjectRecord> subjects;
  subjects.reserve(n);
  for (auto& d : draws) {
    stats += d.stats;
    if (!std::isfinite(d.record.followup))
      throw Error("simulate_cohort: subject " + d.record.id +
                  " is never at risk of an event nor censored; set censoring.t_max");
    subjects.push_back(std::move(d.record));
  }
  detail::check_clamp_rate(stats, "simulate_cohort");
  return {Dataset(params.schedule, params.covariate_names(), std::move(subjects)), stats};
}

inline Dataset simulate_cohort(const SimulationParams& params, std::size_t n, std::uint64_t seed,
                               Regime regime = Regime::observational(), unsigned threads = 1) {
  return simulate(params, n, seed, regime, threads).data;
}

struct SurvivalCurve {
  std::vector<Time> grid;
  std::vector<double> survival;
  std::vector<double> std_error;
  SimulationStats stats;
};

// Empirical survival of uncensored simulated subjects; evaluates the
// (mediational) g-formula by forward simulation.
inline SurvivalCurve mc_survival(const SimulationParams& params, Regime regime, std::size_t n_mc,
                                 std::uint64_t seed, const std::vector<Time>& grid, unsigned threads = 1) {
  params.validate();
  if (n_mc < 100) throw Error("mc_survival: n_mc must be >= 100");
  for (Time t : grid)
    if (!(t >= 0.0)) throw Error("mc_survival: grid times must be >= 0");
  std::vector<Time> times(n_mc);
  std::vector<SimulationStats> stats(n_mc);
  parallel_for(n_mc, threads, [&](std::size_t i) {
    auto d = detail::draw_subject(params, seed, i, regime, false);
    times[i] = d.event_time;
    stats[i] = d.stats;
  });
  SurvivalCurve out;
  for (const auto& s : stats) out.stats += s;
  detail::check_clamp_rate(out.stats, "mc_survival");
  std::sort(times.begin(), times.end());
  out.grid = grid;
  const auto n = static_cast<double>(n_mc);
  for (Time t : grid) {
    const auto dead = static_cast<double>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
    const double s = (n - dead) / n;
    out.survival.push_back(s);
    out.std_error.push_back(std::sqrt(s * (1.0 - s) / n));
  }
  return out;
}

struct ClosedFormEffects {
  std::vector<Time> grid;
  std::vector<double> chde, chie, chte, sde, sie, ste;
};

// Exact effects implied by known parameters: integrals of piecewise-constant
// alpha and beta * gamma_{r(s)} over the schedule intervals.
inline ClosedFormEffects closed_form_effects(const SimulationParams& params, const std::vector<Time>& grid) {
  params.validate();
  const auto gamma = gamma_from_structural(params.mediator.lambda, params.mediator.b);
  const auto& sched = params.schedule;
  const double d = params.contrast.difference();
  ClosedFormEffects out;
  out.grid = grid;
  for (Time t : grid) {
    if (!(t >= 0.0)) throw Error("closed_form_effects: grid times must be >= 0");
    double direct = 0.0;
    double indirect = 0.0;
    for (std::size_t k = 0; k < sched.size() && sched[k] < t; ++k) {
      const double len = std::min(t, sched.interval_end(k)) - sched[k];
      direct += params.hazard.alpha[k] * len;
      indirect += params.hazard.beta[k] * gamma[k] * len;
    }
    out.chde.push_back(d * direct);
    out.chie.push_back(d * indirect);
    out.chte.push_back(d * direct + d * indirect);
    out.sde.push_back(std::exp(-out.chde.back()));
    out.sie.push_back(std::exp(-out.chie.back()));
    out.ste.push_back(std::exp(-out.chte.back()));
  }
  return out;
}

// Adds N(0, Var(M_i)(1 - kappa)/kappa) noise per schedule index, using the
// empirical variance of the observed values at that index.
inline Dataset add_noise(const Dataset& data, double kappa, std::uint64_t seed) {
  if (!(kappa > 0.0 && kappa < 1.0)) throw Error("add_noise: kappa must lie in (0, 1)");
  const std::size_t visits = data.schedule().size();
  std::vector<double> noise_sd(visits, 0.0);
  for (std::size_t i = 0; i < visits; ++i) {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;
    for (const auto& s : data.subjects()) {
      if (s.mediators.size() <= i) continue;
      ++n;
      const double delta = s.mediators[i] - mean;
      mean += delta / static_cast<double>(n);
      m2 += delta * (s.mediators[i] - mean);
    }
    if (n == 0) continue;
    const double var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
    if (!(var > 0.0))
      throw Error("add_noise: zero mediator variance at schedule index " + std::to_string(i));
    noise_sd[i] = std::sqrt(var * (1.0 - kappa) / kappa);
  }
  std::vector<SubjectRecord> subjects = data.subjects();
  for (std::size_t j = 0; j < subjects.size(); ++j) {
    StreamRng rng(seed, j, rng_domain::kNoise);
    std::normal_distribution<double> z(0.0, 1.0);
    for (std::size_t i = 0; i < subjects[j].mediators.size(); ++i) subjects[j].mediators[i] += noise_sd[i] * z(rng);
  }
  return Dataset(data.schedule(), data.covariate_names(), std::move(subjects));
}

}  // namespace dynpath
