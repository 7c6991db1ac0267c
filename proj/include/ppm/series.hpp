#pragma once

#include <string>
#include <vector>

namespace ppm {

// Per-case stream of outcome estimates: probs[k-1] is the estimated
// likelihood of an undesired outcome after the first k events. Carries the
// ground truth needed for offline cost evaluation.
struct ProbabilitySeries {
  std::string case_id;
  std::vector<double> probs;
  bool outcome = false;  // true = undesired
  int trace_len = 0;

  int n_prefixes() const { return static_cast<int>(probs.size()); }

  bool operator==(const ProbabilitySeries&) const = default;
};

}  // namespace ppm
