#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "ppm/encoding.hpp"
#include "ppm/event_log.hpp"
#include "ppm/series.hpp"

namespace ppm {

struct EstimatorParams {
  int n_rounds = 100;
  int max_depth = 3;
  double learning_rate = 0.1;
  int min_leaf = 20;
  std::uint64_t seed = 0;  // reserved; the exact greedy fit has no sampling
};

struct FitDiagnostics {
  std::vector<double> train_loss;  // logistic loss after each round
};

// Gradient-boosted shallow regression trees under logistic loss.
// Probability = sigmoid(bias + learning_rate * sum of tree outputs).
class GbtModel {
public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;

    bool is_leaf() const { return feature < 0; }
    bool operator==(const Node&) const = default;
  };
  struct Tree {
    std::vector<Node> nodes;  // nodes[0] is the root

    double predict(const FeatureVector& v) const;
    bool operator==(const Tree&) const = default;
  };

  // Deterministic: exact greedy split search over observed-value midpoints,
  // ties broken toward the lowest feature index, then lowest threshold.
  static GbtModel fit(const std::vector<FeatureVector>& features, const std::vector<bool>& labels,
                      const EstimatorParams& params, FitDiagnostics* diagnostics = nullptr);

  double predict_proba(const FeatureVector& v) const;

  int dim() const { return dim_; }
  double bias() const { return bias_; }
  const std::vector<Tree>& trees() const { return trees_; }

  std::string to_json() const;
  static GbtModel from_json(const std::string& text);

  bool operator==(const GbtModel&) const = default;

private:
  double bias_ = 0.0;
  double learning_rate_ = 0.1;
  int dim_ = 0;
  std::vector<Tree> trees_;
};

// Trivial estimators: a fixed probability, and the ground-truth oracle
// (outcome as 0/1, usable only when scoring labeled logs).
struct ConstantScore {
  double p = 0.5;
  bool operator==(const ConstantScore&) const = default;
};

struct OracleScore {
  bool operator==(const OracleScore&) const = default;
};

using Estimator = std::variant<GbtModel, ConstantScore, OracleScore>;

double predict_proba(const Estimator& est, const FeatureVector& v);

// One series per case, probs[k-1] = estimate for the first k events, ordered
// by case_id. The log must be fully labeled (evaluation is offline).
std::vector<ProbabilitySeries> score_log(const Estimator& est, const EventLog& log,
                                         const EncoderState& encoder, int max_len);

// Score file: CSV case_id,prefix_len,probability,outcome,trace_len.
void write_scores(const std::vector<ProbabilitySeries>& series, std::ostream& out);
std::vector<ProbabilitySeries> load_external_scores(std::istream& in);
std::vector<ProbabilitySeries> load_external_scores_file(const std::string& path);
void write_scores_file(const std::vector<ProbabilitySeries>& series, const std::string& path);

}  // namespace ppm
