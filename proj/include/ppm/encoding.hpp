#pragma once

#include <map>
#include <string>
#include <vector>

#include "ppm/event_log.hpp"

namespace ppm {

using FeatureVector = std::vector<double>;

// Frozen aggregation-encoding layout. Categorical attributes ("activity",
// "resource" when present, plus string-valued event attributes) each get one
// occurrence-count column per vocabulary value and one catch-all "other"
// column; numeric attributes get min/max/mean/sum columns; six temporal
// features close the vector. Column order is fixed at fit time.
class EncoderState {
public:
  // Vocabulary values kept per categorical attribute, sorted; values seen
  // fewer than `rare_threshold` times in the training log are left out and
  // collapse into "other" at encode time.
  static constexpr int kRareThreshold = 10;

  static EncoderState fit(const EventLog& train);  // pre: train non-empty

  FeatureVector encode(const Prefix& prefix) const;

  int dim() const { return static_cast<int>(feature_names_.size()); }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  // Count columns occupy [0, n_count_cols): handy for monotonicity checks.
  int n_count_cols() const { return n_count_cols_; }

  const std::map<std::string, std::vector<std::string>>& vocabularies() const { return vocab_; }
  const std::vector<std::string>& numeric_attrs() const { return numeric_; }

  std::string to_json() const;
  static EncoderState from_json(const std::string& text);

  bool operator==(const EncoderState&) const = default;

private:
  void build_layout();

  std::map<std::string, std::vector<std::string>> vocab_;  // attr -> sorted kept values
  std::vector<std::string> numeric_;                       // sorted numeric attr names
  std::vector<std::string> feature_names_;
  int n_count_cols_ = 0;
};

}  // namespace ppm
