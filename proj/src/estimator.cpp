#include "ppm/estimator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "ppm/csv.hpp"
#include "ppm/errors.hpp"

namespace ppm {

namespace {

constexpr double kLambda = 1e-6;  // hessian regularizer in leaf weights and gains

// Branching keeps sigmoid(z) and sigmoid(-z) an exact complement pair, which
// makes training commute with a global label flip down to float rounding.
double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  return 1.0 - 1.0 / (1.0 + std::exp(z));
}

void validate_params(const EstimatorParams& p) {
  if (p.n_rounds < 1) throw ConfigError("estimator: n_rounds must be >= 1");
  if (p.max_depth < 1) throw ConfigError("estimator: max_depth must be >= 1");
  if (!(p.learning_rate > 0.0 && p.learning_rate <= 1.0))
    throw ConfigError("estimator: learning_rate must lie in (0,1]");
  if (p.min_leaf < 1) throw ConfigError("estimator: min_leaf must be >= 1");
}

struct SplitChoice {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

// Newton leaf weight with a floored denominator. Per-sample logistic
// curvature is at most 1/4, so the applied step (value times the learning
// rate) provably lowers the training loss whenever the denominator is at
// least learning_rate * count / 8. Without the floor a nearly pure leaf
// drives its hessian to zero and the raw step overshoots.
double leaf_value(double G, double H, std::size_t count, double learning_rate) {
  const double safe = learning_rate * static_cast<double>(count) / 8.0;
  return -G / std::max(H + kLambda, safe);
}

}  // namespace

double GbtModel::Tree::predict(const FeatureVector& v) const {
  int at = 0;
  while (!nodes[static_cast<std::size_t>(at)].is_leaf()) {
    const Node& n = nodes[static_cast<std::size_t>(at)];
    at = v[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(at)].value;
}

GbtModel GbtModel::fit(const std::vector<FeatureVector>& features, const std::vector<bool>& labels,
                       const EstimatorParams& params, FitDiagnostics* diagnostics) {
  validate_params(params);
  const std::size_t n = features.size();
  if (n == 0 || labels.size() != n) throw ConfigError("estimator: features/labels size mismatch");
  const int dim = static_cast<int>(features[0].size());
  for (const FeatureVector& row : features)
    if (static_cast<int>(row.size()) != dim) throw ConfigError("estimator: ragged feature matrix");

  std::size_t pos = 0;
  for (bool y : labels) pos += y ? 1u : 0u;
  if (pos == 0 || pos == n) throw DataError("estimator: training labels are single-class");

  GbtModel model;
  model.dim_ = dim;
  model.learning_rate_ = params.learning_rate;
  model.bias_ = std::log(static_cast<double>(pos)) - std::log(static_cast<double>(n - pos));

  // Column-major copy plus one global value-sorted order per feature.
  std::vector<std::vector<double>> col(static_cast<std::size_t>(dim), std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (int f = 0; f < dim; ++f) col[static_cast<std::size_t>(f)][i] = features[i][static_cast<std::size_t>(f)];
  std::vector<std::vector<std::uint32_t>> order(static_cast<std::size_t>(dim));
  for (int f = 0; f < dim; ++f) {
    auto& ord = order[static_cast<std::size_t>(f)];
    ord.resize(n);
    for (std::size_t i = 0; i < n; ++i) ord[i] = static_cast<std::uint32_t>(i);
    const auto& c = col[static_cast<std::size_t>(f)];
    std::sort(ord.begin(), ord.end(), [&](std::uint32_t a, std::uint32_t b) {
      if (c[a] != c[b]) return c[a] < c[b];
      return a < b;
    });
  }

  std::vector<double> z(n, model.bias_);
  std::vector<double> g(n), h(n);
  std::vector<int> node_of(n);

  for (int round = 0; round < params.n_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double sp = sigmoid(z[i]);
      const double sn = sigmoid(-z[i]);
      g[i] = labels[i] ? -sn : sp;
      h[i] = sp * sn;
    }

    Tree tree;
    tree.nodes.push_back(Node{});
    std::fill(node_of.begin(), node_of.end(), 0);
    std::vector<int> active = {0};

    for (int depth = 0; depth < params.max_depth && !active.empty(); ++depth) {
      std::vector<int> slot_of_node(tree.nodes.size(), -1);
      for (std::size_t s = 0; s < active.size(); ++s)
        slot_of_node[static_cast<std::size_t>(active[s])] = static_cast<int>(s);

      struct Totals {
        double G = 0.0, H = 0.0;
        std::size_t count = 0;
      };
      std::vector<Totals> total(active.size());
      for (std::size_t i = 0; i < n; ++i) {
        const int slot = slot_of_node[static_cast<std::size_t>(node_of[i])];
        if (slot < 0) continue;
        total[static_cast<std::size_t>(slot)].G += g[i];
        total[static_cast<std::size_t>(slot)].H += h[i];
        ++total[static_cast<std::size_t>(slot)].count;
      }

      std::vector<SplitChoice> best(active.size());
      struct Scan {
        double G = 0.0, H = 0.0;
        std::size_t count = 0;
        double prev = 0.0;
        bool seen = false;
      };
      std::vector<Scan> scan(active.size());

      for (int f = 0; f < dim; ++f) {
        for (Scan& s : scan) s = Scan{};
        const auto& c = col[static_cast<std::size_t>(f)];
        for (std::uint32_t idx : order[static_cast<std::size_t>(f)]) {
          const int slot = slot_of_node[static_cast<std::size_t>(node_of[idx])];
          if (slot < 0) continue;
          Scan& s = scan[static_cast<std::size_t>(slot)];
          const Totals& t = total[static_cast<std::size_t>(slot)];
          const double v = c[idx];
          if (s.seen && v != s.prev && s.count >= static_cast<std::size_t>(params.min_leaf) &&
              t.count - s.count >= static_cast<std::size_t>(params.min_leaf)) {
            const double GR = t.G - s.G;
            const double HR = t.H - s.H;
            const double gain = s.G * s.G / (s.H + kLambda) + GR * GR / (HR + kLambda) -
                                t.G * t.G / (t.H + kLambda);
            if (gain > best[static_cast<std::size_t>(slot)].gain) {
              double thr = 0.5 * (s.prev + v);
              if (!(s.prev < thr && thr < v)) thr = s.prev;  // midpoint collapsed in float
              best[static_cast<std::size_t>(slot)] = SplitChoice{gain, f, thr};
            }
          }
          s.G += g[idx];
          s.H += h[idx];
          ++s.count;
          s.prev = v;
          s.seen = true;
        }
      }

      std::vector<int> next_active;
      for (std::size_t s = 0; s < active.size(); ++s) {
        Node& node = tree.nodes[static_cast<std::size_t>(active[s])];
        if (best[s].feature < 0 || !(best[s].gain > 0.0)) {
          node.value = leaf_value(total[s].G, total[s].H, total[s].count, params.learning_rate);
          continue;
        }
        node.feature = best[s].feature;
        node.threshold = best[s].threshold;
        node.left = static_cast<int>(tree.nodes.size());
        node.right = node.left + 1;
        tree.nodes.push_back(Node{});
        tree.nodes.push_back(Node{});
        next_active.push_back(node.left);
        next_active.push_back(node.right);
      }

      for (std::size_t i = 0; i < n; ++i) {
        const Node& node = tree.nodes[static_cast<std::size_t>(node_of[i])];
        if (node.is_leaf()) continue;
        node_of[i] = col[static_cast<std::size_t>(node.feature)][i] <= node.threshold ? node.left
                                                                                       : node.right;
      }
      active = std::move(next_active);
    }

    // Whatever is still active at the depth limit becomes a leaf.
    if (!active.empty()) {
      std::vector<double> G(tree.nodes.size(), 0.0), H(tree.nodes.size(), 0.0);
      std::vector<std::size_t> count(tree.nodes.size(), 0);
      for (std::size_t i = 0; i < n; ++i) {
        G[static_cast<std::size_t>(node_of[i])] += g[i];
        H[static_cast<std::size_t>(node_of[i])] += h[i];
        ++count[static_cast<std::size_t>(node_of[i])];
      }
      for (int id : active) {
        Node& node = tree.nodes[static_cast<std::size_t>(id)];
        node.value = leaf_value(G[static_cast<std::size_t>(id)], H[static_cast<std::size_t>(id)],
                                count[static_cast<std::size_t>(id)], params.learning_rate);
      }
    }

    for (std::size_t i = 0; i < n; ++i)
      z[i] += params.learning_rate * tree.nodes[static_cast<std::size_t>(node_of[i])].value;
    model.trees_.push_back(std::move(tree));

    if (diagnostics) {
      double loss = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        loss -= std::log(labels[i] ? sigmoid(z[i]) : sigmoid(-z[i]));
      diagnostics->train_loss.push_back(loss / static_cast<double>(n));
    }
  }
  return model;
}

double GbtModel::predict_proba(const FeatureVector& v) const {
  if (static_cast<int>(v.size()) != dim_)
    throw ConfigError("estimator: feature vector has dimension " + std::to_string(v.size()) +
                      ", model expects " + std::to_string(dim_));
  double z = bias_;
  for (const Tree& t : trees_) z += learning_rate_ * t.predict(v);
  return sigmoid(z);
}

std::string GbtModel::to_json() const {
  nlohmann::json j;
  j["bias"] = bias_;
  j["learning_rate"] = learning_rate_;
  j["dim"] = dim_;
  j["trees"] = nlohmann::json::array();
  for (const Tree& t : trees_) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const Node& n : t.nodes)
      nodes.push_back({{"feature", n.feature},
                       {"threshold", n.threshold},
                       {"left", n.left},
                       {"right", n.right},
                       {"value", n.value}});
    j["trees"].push_back(std::move(nodes));
  }
  return j.dump();
}

GbtModel GbtModel::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("estimator: invalid model JSON: ") + e.what());
  }
  GbtModel m;
  try {
    m.bias_ = j.at("bias").get<double>();
    m.learning_rate_ = j.at("learning_rate").get<double>();
    m.dim_ = j.at("dim").get<int>();
    for (const auto& tj : j.at("trees")) {
      Tree t;
      for (const auto& nj : tj)
        t.nodes.push_back(Node{nj.at("feature").get<int>(), nj.at("threshold").get<double>(),
                               nj.at("left").get<int>(), nj.at("right").get<int>(),
                               nj.at("value").get<double>()});
      if (t.nodes.empty()) throw ConfigError("estimator: empty tree in model JSON");
      m.trees_.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("estimator: bad model JSON: ") + e.what());
  }
  return m;
}

double predict_proba(const Estimator& est, const FeatureVector& v) {
  return std::visit(
      [&](const auto& e) -> double {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, GbtModel>) {
          return e.predict_proba(v);
        } else if constexpr (std::is_same_v<T, ConstantScore>) {
          if (!(e.p >= 0.0 && e.p <= 1.0)) throw ConfigError("estimator: constant p outside [0,1]");
          return e.p;
        } else {
          throw ConfigError("estimator: the oracle scores labeled logs, not feature vectors");
        }
      },
      est);
}

std::vector<ProbabilitySeries> score_log(const Estimator& est, const EventLog& log,
                                         const EncoderState& encoder, int max_len) {
  if (max_len < 1) throw ConfigError("score: max_len must be >= 1");
  if (!log.fully_labeled()) throw DataError("score: log must be fully labeled");

  std::vector<const Trace*> ordered;
  ordered.reserve(log.size());
  for (const Trace& t : log.traces()) ordered.push_back(&t);
  std::sort(ordered.begin(), ordered.end(),
            [](const Trace* a, const Trace* b) { return a->case_id < b->case_id; });

  std::vector<ProbabilitySeries> out;
  out.reserve(ordered.size());
  for (const Trace* t : ordered) {
    ProbabilitySeries s;
    s.case_id = t->case_id;
    s.outcome = *log.label(t->case_id);
    s.trace_len = t->length();
    for (const Prefix& p : prefixes(*t, max_len)) {
      double prob;
      if (std::holds_alternative<OracleScore>(est))
        prob = s.outcome ? 1.0 : 0.0;
      else
        prob = predict_proba(est, encoder.encode(p));
      if (!(prob >= 0.0 && prob <= 1.0))
        throw DataError("score: case '" + s.case_id + "': probability outside [0,1]");
      s.probs.push_back(prob);
    }
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

std::string format_number(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

void write_scores(const std::vector<ProbabilitySeries>& series, std::ostream& out) {
  write_csv_row(out, std::vector<std::string>{"case_id", "prefix_len", "probability", "outcome",
                                              "trace_len"});
  for (const ProbabilitySeries& s : series) {
    for (int k = 1; k <= s.n_prefixes(); ++k) {
      write_csv_row(out, std::vector<std::string>{
                             s.case_id, std::to_string(k),
                             format_number(s.probs[static_cast<std::size_t>(k) - 1]),
                             s.outcome ? "1" : "0", std::to_string(s.trace_len)});
    }
  }
}

std::vector<ProbabilitySeries> load_external_scores(std::istream& in) {
  const CsvTable table = read_csv(in);
  const int case_col = table.column("case_id");
  const int k_col = table.column("prefix_len");
  const int p_col = table.column("probability");
  const int out_col = table.column("outcome");
  const int len_col = table.column("trace_len");
  if (case_col < 0 || k_col < 0 || p_col < 0 || out_col < 0 || len_col < 0)
    throw DataError("scores: header must contain case_id,prefix_len,probability,outcome,trace_len");

  struct Partial {
    std::vector<std::pair<int, double>> probs;
    bool outcome = false;
    int trace_len = 0;
  };
  std::map<std::string, Partial> cases;

  for (const CsvRow& row : table.rows) {
    auto fail = [&](const std::string& msg) -> void {
      throw DataError("scores: line " + std::to_string(row.line) + ": " + msg);
    };
    const std::string& case_id = row.fields[static_cast<std::size_t>(case_col)];
    if (case_id.empty()) fail("empty case_id");

    auto parse_int = [&](const std::string& s, const char* what) {
      int v = 0;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || ptr != s.data() + s.size())
        fail(std::string("bad ") + what + " '" + s + "'");
      return v;
    };
    const int k = parse_int(row.fields[static_cast<std::size_t>(k_col)], "prefix_len");
    if (k < 1) fail("prefix_len must be >= 1");
    const int len = parse_int(row.fields[static_cast<std::size_t>(len_col)], "trace_len");
    if (len < 1) fail("trace_len must be >= 1");

    const std::string& ps = row.fields[static_cast<std::size_t>(p_col)];
    double p = 0.0;
    {
      auto [ptr, ec] = std::from_chars(ps.data(), ps.data() + ps.size(), p);
      if (ec != std::errc{} || ptr != ps.data() + ps.size()) fail("bad probability '" + ps + "'");
    }
    if (!(p >= 0.0 && p <= 1.0)) fail("probability " + ps + " outside [0,1]");

    const std::string& os = row.fields[static_cast<std::size_t>(out_col)];
    bool outcome;
    if (os == "1" || os == "true")
      outcome = true;
    else if (os == "0" || os == "false")
      outcome = false;
    else {
      fail("bad outcome '" + os + "'");
      outcome = false;
    }

    Partial& c = cases[case_id];
    if (!c.probs.empty()) {
      if (c.outcome != outcome) fail("outcome changed within case '" + case_id + "'");
      if (c.trace_len != len) fail("trace_len changed within case '" + case_id + "'");
    } else {
      c.outcome = outcome;
      c.trace_len = len;
    }
    c.probs.emplace_back(k, p);
  }

  std::vector<ProbabilitySeries> out;
  for (auto& [case_id, c] : cases) {
    std::sort(c.probs.begin(), c.probs.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    ProbabilitySeries s;
    s.case_id = case_id;
    s.outcome = c.outcome;
    s.trace_len = c.trace_len;
    for (std::size_t i = 0; i < c.probs.size(); ++i) {
      if (c.probs[i].first != static_cast<int>(i) + 1)
        throw DataError("scores: case '" + case_id + "': prefix_len values must be contiguous from 1");
      s.probs.push_back(c.probs[i].second);
    }
    if (s.n_prefixes() > s.trace_len)
      throw DataError("scores: case '" + case_id + "': more prefixes than trace_len");
    out.push_back(std::move(s));
  }
  if (out.empty()) throw DataError("scores: no rows");
  return out;
}

std::vector<ProbabilitySeries> load_external_scores_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("scores: cannot open '" + path + "'");
  return load_external_scores(in);
}

void write_scores_file(const std::vector<ProbabilitySeries>& series, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("scores: cannot open '" + path + "' for writing");
  write_scores(series, out);
}

}  // namespace ppm
