#pragma once

// Data model shared by every estimator: measurement schedule, subject
// records, immutable cohorts, risk sets and right-continuous step functions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace dynpath {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Time = double;

// Common measurement times t_0 = 0 < t_1 < ... < t_K.
class Schedule {
 public:
  Schedule() : times_{0.0} {}

  explicit Schedule(std::vector<Time> times) : times_(std::move(times)) {
    if (times_.empty()) throw Error("schedule: at least one time required");
    if (times_.front() != 0.0) throw Error("schedule: first time must be 0");
    for (std::size_t k = 1; k < times_.size(); ++k) {
      if (!std::isfinite(times_[k]) || !(times_[k] > times_[k - 1]))
        throw Error("schedule: times must be finite and strictly increasing");
    }
  }

  const std::vector<Time>& times() const noexcept { return times_; }
  std::size_t size() const noexcept { return times_.size(); }
  std::size_t last_index() const noexcept { return times_.size() - 1; }
  Time operator[](std::size_t k) const { return times_.at(k); }

  // End of interval k, +inf for the last one.
  Time interval_end(std::size_t k) const {
    return k + 1 < times_.size() ? times_[k + 1] : std::numeric_limits<Time>::infinity();
  }

  bool operator==(const Schedule&) const = default;

 private:
  std::vector<Time> times_;
};

// r(t): the k with t_k <= t < t_{k+1}; the last index once t >= t_K.
inline std::size_t mediator_index(const Schedule& schedule, Time t) {
  if (!(t >= 0.0)) throw Error("mediator_index: time must be non-negative");
  const auto& ts = schedule.times();
  auto it = std::upper_bound(ts.begin(), ts.end(), t);
  return static_cast<std::size_t>(it - ts.begin()) - 1;
}

struct SubjectRecord {
  std::string id;
  double treatment = 0.0;
  std::vector<double> baseline;
  // M_0, ..., M_{r(followup)}
  std::vector<double> mediators;
  Time followup = 0.0;
  bool event = false;

  // Mediator value in force at time t (t must not exceed followup).
  double mediator_at(const Schedule& schedule, Time t) const {
    return mediators.at(mediator_index(schedule, t));
  }

  bool operator==(const SubjectRecord&) const = default;
};

class Dataset {
 public:
  Dataset(Schedule schedule, std::vector<std::string> covariate_names,
          std::vector<SubjectRecord> subjects, std::size_t carried_forward = 0)
      : schedule_(std::move(schedule)),
        covariate_names_(std::move(covariate_names)),
        subjects_(std::move(subjects)),
        carried_forward_(carried_forward) {
    std::unordered_set<std::string> ids;
    ids.reserve(subjects_.size());
    for (const auto& s : subjects_) validate(s, ids);
  }

  const Schedule& schedule() const noexcept { return schedule_; }
  const std::vector<std::string>& covariate_names() const noexcept { return covariate_names_; }
  const std::vector<SubjectRecord>& subjects() const noexcept { return subjects_; }
  const SubjectRecord& operator[](std::size_t i) const { return subjects_[i]; }
  std::size_t size() const noexcept { return subjects_.size(); }
  bool empty() const noexcept { return subjects_.empty(); }
  std::size_t covariate_count() const noexcept { return covariate_names_.size(); }
  // Number of mediator values filled by last observation carried forward.
  std::size_t carried_forward() const noexcept { return carried_forward_; }

  bool operator==(const Dataset&) const = default;

 private:
  void validate(const SubjectRecord& s, std::unordered_set<std::string>& ids) const {
    auto fail = [&](const std::string& what) { throw Error("subject '" + s.id + "': " + what); };
    if (!ids.insert(s.id).second) fail("duplicate id");
    if (!std::isfinite(s.followup) || !(s.followup > 0.0)) fail("followup must be finite and > 0");
    if (!std::isfinite(s.treatment)) fail("treatment must be finite");
    if (s.baseline.size() != covariate_names_.size()) fail("baseline dimension mismatch");
    for (double c : s.baseline)
      if (!std::isfinite(c)) fail("baseline values must be finite");
    if (s.mediators.size() != mediator_index(schedule_, s.followup) + 1)
      fail("mediator values must cover exactly the schedule times up to followup");
    for (double m : s.mediators)
      if (!std::isfinite(m)) fail("mediator values must be finite");
  }

  Schedule schedule_;
  std::vector<std::string> covariate_names_;
  std::vector<SubjectRecord> subjects_;
  std::size_t carried_forward_ = 0;
};

// Subjects still under observation at t (followup >= t).
inline std::vector<std::size_t> risk_set(const Dataset& data, Time t) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data[i].followup >= t) out.push_back(i);
  return out;
}

// Distinct observed event times, ascending.
inline std::vector<Time> event_times(const Dataset& data) {
  std::vector<Time> ts;
  for (const auto& s : data.subjects())
    if (s.event) ts.push_back(s.followup);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

// Right-continuous piecewise-constant function, zero before the first jump.
class StepFunction {
 public:
  StepFunction() = default;

  StepFunction(std::vector<Time> jumps, std::vector<double> increments) {
    if (jumps.size() != increments.size())
      throw Error("step function: jumps and increments differ in length");
    jumps_.reserve(jumps.size());
    increments_.reserve(jumps.size());
    values_.reserve(jumps.size());
    for (std::size_t k = 0; k < jumps.size(); ++k) push_back(jumps[k], increments[k]);
  }

  void push_back(Time t, double increment) {
    if (!jumps_.empty() && !(t > jumps_.back()))
      throw Error("step function: jump times must be strictly increasing");
    jumps_.push_back(t);
    increments_.push_back(increment);
    values_.push_back((values_.empty() ? 0.0 : values_.back()) + increment);
  }

  double operator()(Time t) const {
    auto it = std::upper_bound(jumps_.begin(), jumps_.end(), t);
    if (it == jumps_.begin()) return 0.0;
    return values_[static_cast<std::size_t>(it - jumps_.begin()) - 1];
  }

  std::vector<double> evaluate(const std::vector<Time>& grid) const {
    std::vector<double> out;
    out.reserve(grid.size());
    for (Time t : grid) out.push_back((*this)(t));
    return out;
  }

  const std::vector<Time>& jumps() const noexcept { return jumps_; }
  const std::vector<double>& increments() const noexcept { return increments_; }
  // Cumulative value at each jump time.
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return jumps_.size(); }
  bool empty() const noexcept { return jumps_.empty(); }

  StepFunction scaled(double k) const {
    StepFunction out;
    for (std::size_t i = 0; i < jumps_.size(); ++i) out.push_back(jumps_[i], k * increments_[i]);
    return out;
  }

  bool operator==(const StepFunction&) const = default;

 private:
  std::vector<Time> jumps_;
  std::vector<double> increments_;
  std::vector<double> values_;
};

inline double eval_step(const StepFunction& f, Time t) { return f(t); }

// Average slope of a cumulative curve over [from, to]; the local effect over a window.
inline double slope(const StepFunction& f, Time from, Time to) {
  if (!(to > from)) throw Error("slope: window must have positive length");
  return (f(to) - f(from)) / (to - from);
}

}  // namespace dynpath
