#pragma once

// Direct, indirect and total effects built from the fitted coefficients.
//
//   CHDE(t) = (a - a*) A(t)
//   CHIE(t) = (a - a*) sum_{s <= t} gamma_{r(s)} dB(s)
//   CHTE(t) = CHDE(t) + CHIE(t)
//
// The relative-survival versions are exp(-CH..E(t)).

#include <cmath>
#include <cstddef>
#include <vector>

#include "dynpath/aalen.hpp"
#include "dynpath/core.hpp"
#include "dynpath/mediator.hpp"

namespace dynpath {

struct Contrast {
  double a = 1.0;
  double a_star = 0.0;

  Contrast() = default;
  Contrast(double active, double reference) : a(active), a_star(reference) {
    if (!(a != a_star)) throw Error("contrast: a and a* must differ");
    if (!std::isfinite(a) || !std::isfinite(a_star)) throw Error("contrast: values must be finite");
  }

  double difference() const noexcept { return a - a_star; }
  Contrast swapped() const { return {a_star, a}; }
  bool operator==(const Contrast&) const = default;
};

enum class EffectScale { CumulativeHazard };

struct EffectCurves {
  StepFunction chde;
  StepFunction chie;
  StepFunction chte;
  Contrast contrast;
  EffectScale scale = EffectScale::CumulativeHazard;

  const std::vector<Time>& times() const noexcept { return chte.jumps(); }
  bool operator==(const EffectCurves&) const = default;
};

struct SurvivalEffects {
  std::vector<Time> times;
  std::vector<double> sde;
  std::vector<double> sie;
  std::vector<double> ste;
};

inline EffectCurves cumulative_effects(const CumulativeCoefficients& cumcoef,
                                       const MediatorCoefficients& medcoef,
                                       const Schedule& schedule, Contrast contrast) {
  if (!cumcoef.terms.treatment || !cumcoef.terms.mediator)
    throw Error("cumulative_effects: the additive fit must include treatment and mediator terms");
  const double d = contrast.difference();
  EffectCurves out;
  out.contrast = contrast;
  const auto& times = cumcoef.times();
  for (std::size_t k = 0; k < times.size(); ++k) {
    const Time s = times[k];
    const std::size_t r = mediator_index(schedule, s);
    if (!medcoef.available(r))
      throw Error("cumulative_effects: mediator coefficients unavailable at index " +
                  std::to_string(r) + " required by event time " + std::to_string(s) +
                  (r < medcoef.size() ? " (" + medcoef.indices[r].reason + ")" : ""));
    const double direct = d * cumcoef.treatment.increments()[k];
    const double indirect = d * (medcoef.at(r).treatment * cumcoef.mediator.increments()[k]);
    out.chde.push_back(s, direct);
    out.chie.push_back(s, indirect);
    out.chte.push_back(s, direct + indirect);
  }
  return out;
}

inline SurvivalEffects survival_effects(const EffectCurves& effects) {
  SurvivalEffects out;
  out.times = effects.times();
  for (std::size_t k = 0; k < out.times.size(); ++k) {
    out.sde.push_back(std::exp(-effects.chde.values()[k]));
    out.sie.push_back(std::exp(-effects.chie.values()[k]));
    out.ste.push_back(std::exp(-effects.chte.values()[k]));
  }
  return out;
}

// Survival-scale effects evaluated on an arbitrary grid.
inline SurvivalEffects survival_effects(const EffectCurves& effects, const std::vector<Time>& grid) {
  SurvivalEffects out;
  out.times = grid;
  for (Time t : grid) {
    out.sde.push_back(std::exp(-effects.chde(t)));
    out.sie.push_back(std::exp(-effects.chie(t)));
    out.ste.push_back(std::exp(-effects.chte(t)));
  }
  return out;
}

// Mediator measured with reliability kappa: the indirect effect is divided by
// kappa and the direct effect absorbs the difference; the total is unchanged.
// This correction is tentative; it rests on a classical linear
// measurement-error argument with normal errors.
inline EffectCurves correct_measurement_error(const EffectCurves& effects, double kappa) {
  if (!(kappa > 0.0 && kappa <= 1.0)) throw Error("correct_measurement_error: kappa must lie in (0, 1]");
  if (kappa == 1.0) return effects;
  EffectCurves out;
  out.contrast = effects.contrast;
  out.scale = effects.scale;
  out.chte = effects.chte;
  const auto& times = effects.times();
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double indirect = effects.chie.increments()[k] / kappa;
    out.chie.push_back(times[k], indirect);
    out.chde.push_back(times[k], effects.chte.increments()[k] - indirect);
  }
  return out;
}

}  // namespace dynpath
