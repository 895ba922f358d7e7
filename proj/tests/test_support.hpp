#pragma once

#include <string>
#include <vector>

#include "dynpath/core.hpp"

namespace dynpath::testing {

// One subject on a single-visit schedule; the mediator value is irrelevant
// unless the test fits a mediator term.
inline SubjectRecord subject(std::string id, double a, Time followup, bool event, double m0 = 0.0,
                             std::vector<double> baseline = {}) {
  SubjectRecord s;
  s.id = std::move(id);
  s.treatment = a;
  s.followup = followup;
  s.event = event;
  s.mediators = {m0};
  s.baseline = std::move(baseline);
  return s;
}

// Four subjects, binary treatment: (1,1,E) (1,2,C) (0,1.5,E) (0,3,E).
inline Dataset four_subject_example() {
  return Dataset(Schedule{}, {},
                 {subject("a", 1, 1.0, true), subject("b", 1, 2.0, false), subject("c", 0, 1.5, true),
                  subject("d", 0, 3.0, true)});
}

}  // namespace dynpath::testing
