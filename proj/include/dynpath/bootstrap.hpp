#pragma once

// Nonparametric bootstrap over subjects with pointwise percentile bands.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dynpath/aalen.hpp"
#include "dynpath/core.hpp"
#include "dynpath/effects.hpp"
#include "dynpath/mediator.hpp"
#include "dynpath/parallel.hpp"
#include "dynpath/rng.hpp"

namespace dynpath {

struct BootstrapOptions {
  std::size_t replicates = 200;
  std::uint64_t seed = 0;
  // Empty: all distinct event times of the original data.
  std::vector<Time> grid;
  double level = 0.95;
  unsigned threads = 1;
};

struct Band {
  std::vector<double> estimate;
  std::vector<double> lower;
  std::vector<double> upper;
  bool operator==(const Band&) const = default;
};

struct BootstrapBands {
  std::vector<Time> grid;
  Band chde, chie, chte, sde, sie, ste;
  std::size_t replicates = 0;
  double level = 0.95;
  std::size_t failed_replicates = 0;
  bool operator==(const BootstrapBands&) const = default;
};

// Empirical quantile with linear interpolation between order statistics
// (Hyndman-Fan type 7). `sorted` must be ascending and non-empty.
inline double quantile_sorted(const std::vector<double>& sorted, double prob) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

namespace detail {

// chde, chie, chte, sde, sie, ste evaluated on the grid.
using CurveSet = std::array<std::vector<double>, 6>;

inline CurveSet effect_curves_on_grid(const Dataset& data, Contrast contrast,
                                      const std::vector<Time>& grid) {
  const auto cum = fit_additive(data);
  const auto med = fit_marginal(data);
  const auto eff = cumulative_effects(cum, med, data.schedule(), contrast);
  const auto surv = survival_effects(eff, grid);
  return {eff.chde.evaluate(grid), eff.chie.evaluate(grid), eff.chte.evaluate(grid),
          surv.sde, surv.sie, surv.ste};
}

inline Dataset resample(const Dataset& data, std::uint64_t seed, std::uint64_t replicate) {
  StreamRng rng(seed, replicate, rng_domain::kBootstrap);
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  std::vector<SubjectRecord> subjects;
  subjects.reserve(data.size());
  for (std::size_t j = 0; j < data.size(); ++j) {
    SubjectRecord s = data[pick(rng)];
    s.id += "#" + std::to_string(j);
    subjects.push_back(std::move(s));
  }
  return Dataset(data.schedule(), data.covariate_names(), std::move(subjects));
}

}  // namespace detail

inline BootstrapBands bootstrap_bands(const Dataset& data, Contrast contrast,
                                      const BootstrapOptions& options) {
  if (options.replicates < 1) throw Error("bootstrap: at least one replicate required");
  if (!(options.level > 0.0 && options.level < 1.0)) throw Error("bootstrap: level must lie in (0, 1)");
  if (data.empty()) throw Error("bootstrap: empty dataset");

  BootstrapBands out;
  out.grid = options.grid.empty() ? event_times(data) : options.grid;
  if (out.grid.empty()) throw Error("bootstrap: empty evaluation grid");
  Time max_followup = 0.0;
  for (const auto& s : data.subjects()) max_followup = std::max(max_followup, s.followup);
  for (Time t : out.grid)
    if (!(t >= 0.0 && t <= max_followup))
      throw Error("bootstrap: grid time " + std::to_string(t) + " outside observed follow-up");
  out.replicates = options.replicates;
  out.level = options.level;

  const detail::CurveSet point = detail::effect_curves_on_grid(data, contrast, out.grid);

  std::vector<std::optional<detail::CurveSet>> reps(options.replicates);
  parallel_for(options.replicates, options.threads, [&](std::size_t b) {
    try {
      reps[b] = detail::effect_curves_on_grid(detail::resample(data, options.seed, b), contrast, out.grid);
    } catch (const Error&) {
      reps[b].reset();
    }
  });

  std::vector<const detail::CurveSet*> ok;
  for (const auto& r : reps)
    if (r) ok.push_back(&*r);
  out.failed_replicates = options.replicates - ok.size();
  if (ok.empty()) throw Error("bootstrap: all replicates failed");

  const double lo_p = (1.0 - options.level) / 2.0;
  const double hi_p = (1.0 + options.level) / 2.0;
  std::array<Band*, 6> bands{&out.chde, &out.chie, &out.chte, &out.sde, &out.sie, &out.ste};
  std::vector<double> column(ok.size());
  for (std::size_t c = 0; c < bands.size(); ++c) {
    bands[c]->estimate = point[c];
    for (std::size_t g = 0; g < out.grid.size(); ++g) {
      for (std::size_t b = 0; b < ok.size(); ++b) column[b] = (*ok[b])[c][g];
      std::sort(column.begin(), column.end());
      bands[c]->lower.push_back(quantile_sorted(column, lo_p));
      bands[c]->upper.push_back(quantile_sorted(column, hi_p));
    }
  }
  return out;
}

}  // namespace dynpath
