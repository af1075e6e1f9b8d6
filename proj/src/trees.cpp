#include "winelab/trees.hpp"

#include "winelab/error.hpp"
#include "winelab/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace winelab {
namespace {

constexpr double kMinDecrease = 1e-12;
constexpr double kAbsentClassScore = -30.0;

// Column-major copy of the rows one tree trains on, plus every feature's
// row order sorted by value. Positions index the sample, not the source matrix.
struct ColumnView {
  std::size_t rows = 0;
  std::size_t features = 0;
  std::vector<double> values;
  std::vector<std::vector<std::uint32_t>> sorted;

  double at(std::size_t pos, std::size_t f) const { return values[f * rows + pos]; }
};

ColumnView make_view(const Matrix& x, std::span<const std::size_t> sample) {
  ColumnView v;
  v.rows = sample.size();
  v.features = x.cols();
  v.values.resize(v.rows * v.features);
  for (std::size_t p = 0; p < v.rows; ++p) {
    for (std::size_t f = 0; f < v.features; ++f) v.values[f * v.rows + p] = x(sample[p], f);
  }
  v.sorted.resize(v.features);
  for (std::size_t f = 0; f < v.features; ++f) {
    auto& order = v.sorted[f];
    order.resize(v.rows);
    std::iota(order.begin(), order.end(), 0U);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return v.at(a, f) < v.at(b, f); });
  }
  return v;
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

struct Candidate {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double decrease = 0.0;

  void consider(std::size_t f, double thr, double dec) {
    if (!(dec > kMinDecrease)) return;
    if (!found || dec > decrease ||
        (dec == decrease && (f < feature || (f == feature && thr < threshold)))) {
      found = true;
      feature = f;
      threshold = thr;
      decrease = dec;
    }
  }
};

double midpoint(double a, double b) {
  const double m = a + 0.5 * (b - a);
  return m < b ? m : a;
}

std::size_t total_of(std::span<const std::size_t> counts) {
  std::size_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

struct ClassificationPolicy {
  std::vector<std::uint8_t> labels;  // per sample position
  SplitCriterion criterion;

  using Stats = ClassCounts;

  Stats stats(std::span<const std::uint32_t> rows) const {
    Stats s{};
    for (auto p : rows) ++s[labels[p]];
    return s;
  }
  bool pure(const Stats& s) const {
    return std::count_if(s.begin(), s.end(), [](std::size_t c) { return c > 0; }) <= 1;
  }
  void fill_leaf(TreeNode& node, const Stats& s) const { node.counts = s; }

  void scan(const ColumnView& v, std::size_t f, std::span<const std::uint32_t> order, const Stats& total,
            Candidate& best) const {
    const std::size_t m = order.size();
    const double parent = impurity(criterion, total);
    Stats left{};
    for (std::size_t k = 0; k + 1 < m; ++k) {
      ++left[labels[order[k]]];
      const double a = v.at(order[k], f);
      const double b = v.at(order[k + 1], f);
      if (!(a < b)) continue;
      Stats right{};
      for (std::size_t c = 0; c < kNumClasses; ++c) right[c] = total[c] - left[c];
      const double nl = static_cast<double>(k + 1);
      const double nr = static_cast<double>(m - k - 1);
      const double dm = static_cast<double>(m);
      const double dec = parent - (nl / dm) * impurity(criterion, left) - (nr / dm) * impurity(criterion, right);
      best.consider(f, midpoint(a, b), dec);
    }
  }
};

struct RegressionPolicy {
  std::vector<double> targets;  // per sample position

  struct Stats {
    double sum = 0.0;
    std::size_t n = 0;
  };

  Stats stats(std::span<const std::uint32_t> rows) const {
    Stats s;
    for (auto p : rows) s.sum += targets[p];
    s.n = rows.size();
    return s;
  }
  bool pure(const Stats&) const { return false; }
  void fill_leaf(TreeNode& node, const Stats& s) const {
    node.value = s.n > 0 ? s.sum / static_cast<double>(s.n) : 0.0;
  }

  // Decrease in squared error: sL^2/nL + sR^2/nR - s^2/n.
  void scan(const ColumnView& v, std::size_t f, std::span<const std::uint32_t> order, const Stats& total,
            Candidate& best) const {
    const std::size_t m = order.size();
    const double base = total.sum * total.sum / static_cast<double>(m);
    double left = 0.0;
    for (std::size_t k = 0; k + 1 < m; ++k) {
      left += targets[order[k]];
      const double a = v.at(order[k], f);
      const double b = v.at(order[k + 1], f);
      if (!(a < b)) continue;
      const double right = total.sum - left;
      const double nl = static_cast<double>(k + 1);
      const double nr = static_cast<double>(m - k - 1);
      best.consider(f, midpoint(a, b), left * left / nl + right * right / nr - base);
    }
  }
};

template <typename Policy>
class TreeBuilder {
 public:
  TreeBuilder(const ColumnView& view, const Policy& policy, std::optional<std::size_t> max_depth,
              std::size_t min_samples_split, std::size_t features_per_split, Rng* rng)
      : view_(view),
        policy_(policy),
        max_depth_(max_depth),
        min_split_(std::max<std::size_t>(min_samples_split, 2)),
        per_split_(features_per_split),
        rng_(rng),
        goes_left_(view.rows, 0) {}

  std::vector<TreeNode> build() {
    nodes_.clear();
    grow(view_.sorted, 0);
    return std::move(nodes_);
  }

 private:
  using Lists = std::vector<std::vector<std::uint32_t>>;

  std::int32_t grow(Lists lists, std::size_t depth) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    const auto& rows = lists.front();
    const auto stats = policy_.stats(rows);
    policy_.fill_leaf(nodes_[id], stats);
    if (rows.size() < min_split_ || (max_depth_ && depth >= *max_depth_) || policy_.pure(stats)) return id;

    const Candidate best = choose(lists, stats);
    if (!best.found) return id;

    for (auto p : lists[best.feature]) goes_left_[p] = view_.at(p, best.feature) <= best.threshold ? 1 : 0;
    Lists left(view_.features);
    Lists right(view_.features);
    for (std::size_t f = 0; f < view_.features; ++f) {
      for (auto p : lists[f]) (goes_left_[p] ? left[f] : right[f]).push_back(p);
    }
    Lists().swap(lists);

    nodes_[id].feature = static_cast<std::int32_t>(best.feature);
    nodes_[id].threshold = best.threshold;
    const auto l = grow(std::move(left), depth + 1);
    const auto r = grow(std::move(right), depth + 1);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  Candidate choose(const Lists& lists, const typename Policy::Stats& stats) {
    Candidate best;
    const std::size_t d = view_.features;
    if (per_split_ == 0 || per_split_ >= d || rng_ == nullptr) {
      for (std::size_t f = 0; f < d; ++f) policy_.scan(view_, f, lists[f], stats, best);
      return best;
    }
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng_->engine());
    for (std::size_t k = 0; k < d; ++k) {
      if (k >= per_split_ && best.found) break;
      policy_.scan(view_, order[k], lists[order[k]], stats, best);
    }
    return best;
  }

  const ColumnView& view_;
  const Policy& policy_;
  std::optional<std::size_t> max_depth_;
  std::size_t min_split_;
  std::size_t per_split_;
  Rng* rng_;
  std::vector<std::uint8_t> goes_left_;
  std::vector<TreeNode> nodes_;
};

ClassificationPolicy classification_policy(std::span<const QualityClass> labels,
                                           std::span<const std::size_t> sample, SplitCriterion criterion) {
  ClassificationPolicy p{{}, criterion};
  p.labels.reserve(sample.size());
  for (auto r : sample) p.labels.push_back(static_cast<std::uint8_t>(class_index(labels[r])));
  return p;
}

const TreeNode& descend(const std::vector<TreeNode>& nodes, std::span<const double> x) {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold
                                     ? nodes[i].left
                                     : nodes[i].right);
  }
  return nodes[i];
}

void check_arity(std::size_t expected, std::size_t got) {
  if (expected != got) {
    throw DataError("tree arity mismatch: model has " + std::to_string(expected) + " features, input has " +
                    std::to_string(got));
  }
}

std::size_t depth_from(const std::vector<TreeNode>& nodes, std::size_t i) {
  if (nodes[i].is_leaf()) return 0;
  return 1 + std::max(depth_from(nodes, static_cast<std::size_t>(nodes[i].left)),
                      depth_from(nodes, static_cast<std::size_t>(nodes[i].right)));
}

ClassScores softmax(const ClassScores& s) {
  const double mx = *std::max_element(s.begin(), s.end());
  ClassScores p;
  double z = 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    p[c] = std::exp(s[c] - mx);
    z += p[c];
  }
  for (auto& v : p) v /= z;
  return p;
}

Json nodes_json(const std::vector<TreeNode>& nodes, bool regression) {
  Json out = Json::array();
  for (const auto& n : nodes) {
    Json j;
    if (n.is_leaf()) {
      if (regression) {
        j["value"] = n.value;
      } else {
        j["counts"] = n.counts;
      }
    } else {
      j["feature"] = n.feature;
      j["threshold"] = n.threshold;
      j["left"] = n.left;
      j["right"] = n.right;
    }
    out.push_back(std::move(j));
  }
  return out;
}

std::vector<TreeNode> nodes_from_json(const Json& arr, bool regression) {
  std::vector<TreeNode> nodes;
  for (const auto& j : arr) {
    TreeNode n;
    if (j.contains("feature")) {
      n.feature = j.at("feature").get<std::int32_t>();
      n.threshold = j.at("threshold").get<double>();
      n.left = j.at("left").get<std::int32_t>();
      n.right = j.at("right").get<std::int32_t>();
    } else if (regression) {
      n.value = j.at("value").get<double>();
    } else {
      n.counts = j.at("counts").get<ClassCounts>();
    }
    nodes.push_back(n);
  }
  const auto size = static_cast<std::int32_t>(nodes.size());
  if (nodes.empty()) throw DataError("tree payload has no nodes");
  for (const auto& n : nodes) {
    if (!n.is_leaf() && (n.left <= 0 || n.right <= 0 || n.left >= size || n.right >= size)) {
      throw DataError("tree payload has a dangling child index");
    }
  }
  return nodes;
}

Json params_json(const TreeParams& p) {
  return Json{{"criterion", criterion_name(p.criterion)},
              {"max_depth", p.max_depth ? Json(*p.max_depth) : Json("unbounded")},
              {"min_samples_split", p.min_samples_split},
              {"features_per_split", p.features_per_split}};
}

TreeParams params_from_json(const Json& j) {
  TreeParams p;
  p.criterion = parse_criterion(j.at("criterion").get<std::string>());
  const auto& md = j.at("max_depth");
  if (md.is_number_integer()) p.max_depth = md.get<std::size_t>();
  p.min_samples_split = j.at("min_samples_split").get<std::size_t>();
  p.features_per_split = j.at("features_per_split").get<std::size_t>();
  return p;
}

}  // namespace

std::string_view criterion_name(SplitCriterion c) { return c == SplitCriterion::gini ? "gini" : "entropy"; }

SplitCriterion parse_criterion(std::string_view name) {
  if (name == "gini") return SplitCriterion::gini;
  if (name == "entropy") return SplitCriterion::entropy;
  throw ConfigError("unknown split criterion '" + std::string(name) + "' (valid: gini, entropy)");
}

double gini(std::span<const std::size_t> counts) {
  const std::size_t total = total_of(counts);
  if (total == 0) throw DataError("gini of an empty node");
  double s = 0.0;
  for (auto c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    s += p * p;
  }
  return 1.0 - s;
}

double entropy(std::span<const std::size_t> counts) {
  const std::size_t total = total_of(counts);
  if (total == 0) throw DataError("entropy of an empty node");
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

double impurity(SplitCriterion c, std::span<const std::size_t> counts) {
  return c == SplitCriterion::gini ? gini(counts) : entropy(counts);
}

std::optional<SplitChoice> best_split(const Matrix& rows, std::span<const QualityClass> labels,
                                      SplitCriterion criterion, std::span<const std::size_t> candidate_features) {
  if (rows.rows() != labels.size()) throw DataError("best_split: rows and labels differ in length");
  if (rows.rows() < 2) return std::nullopt;
  const auto sample = all_rows(rows.rows());
  const ColumnView view = make_view(rows, sample);
  const ClassificationPolicy policy = classification_policy(labels, sample, criterion);
  const auto total = policy.stats(view.sorted.front());
  Candidate best;
  for (auto f : candidate_features) {
    if (f >= rows.cols()) throw DataError("best_split: candidate feature out of range");
    policy.scan(view, f, view.sorted[f], total, best);
  }
  if (!best.found) return std::nullopt;
  return SplitChoice{best.feature, best.threshold, best.decrease};
}

const TreeNode& TreeModel::leaf_for(std::span<const double> x) const {
  check_arity(num_features, x.size());
  return descend(nodes, x);
}

std::size_t TreeModel::depth() const { return depth_from(nodes, 0); }

TreeModel fit_tree(const Matrix& x, std::span<const QualityClass> labels, const TreeParams& params,
                   std::uint64_t seed) {
  if (x.rows() == 0) throw DataError("cannot fit a tree on an empty training set");
  if (x.rows() != labels.size()) throw DataError("fit_tree: rows and labels differ in length");
  if (params.max_depth && *params.max_depth < 1) throw ConfigError("max_depth must be at least 1");
  const auto sample = all_rows(x.rows());
  const ColumnView view = make_view(x, sample);
  const ClassificationPolicy policy = classification_policy(labels, sample, params.criterion);
  Rng rng(seed, {stream::node});
  TreeBuilder<ClassificationPolicy> builder(view, policy, params.max_depth, params.min_samples_split,
                                            params.features_per_split, &rng);
  return TreeModel{builder.build(), params, x.cols()};
}

QualityClass predict_tree(const TreeModel& tree, std::span<const double> x) {
  return argmax_class(tree.leaf_for(x).counts);
}

ForestModel fit_forest(const Matrix& x, std::span<const QualityClass> labels, const ForestParams& params,
                       std::uint64_t seed) {
  if (params.trees < 1) throw ConfigError("a forest needs at least one tree");
  if (x.rows() == 0) throw DataError("cannot fit a forest on an empty training set");
  if (x.rows() != labels.size()) throw DataError("fit_forest: rows and labels differ in length");
  const std::size_t d = x.cols();
  std::size_t per_split = params.features_per_split;
  if (per_split == 0) per_split = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(d))));
  if (per_split > d) throw ConfigError("features_per_split exceeds the number of features");

  ForestModel forest;
  forest.features_per_split = per_split;
  forest.bootstrap = params.bootstrap;
  forest.num_features = d;
  forest.trees.resize(params.trees);
  forest.tree_seeds.resize(params.trees);
  TreeParams tp = params.tree;
  tp.features_per_split = per_split;

#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t t = 0; t < params.trees; ++t) {
    const std::uint64_t tree_seed = derive_seed(seed, {stream::forest, t});
    Rng rng(tree_seed);
    std::vector<std::size_t> sample(x.rows());
    if (params.bootstrap) {
      for (auto& s : sample) s = rng.index(x.rows());
    } else {
      std::iota(sample.begin(), sample.end(), std::size_t{0});
    }
    const ColumnView view = make_view(x, sample);
    const ClassificationPolicy policy = classification_policy(labels, sample, tp.criterion);
    TreeBuilder<ClassificationPolicy> builder(view, policy, tp.max_depth, tp.min_samples_split, per_split, &rng);
    forest.trees[t] = TreeModel{builder.build(), tp, d};
    forest.tree_seeds[t] = tree_seed;
  }
  return forest;
}

std::array<std::size_t, kNumClasses> forest_votes(const ForestModel& forest, std::span<const double> x) {
  check_arity(forest.num_features, x.size());
  std::array<std::size_t, kNumClasses> votes{};
  for (const auto& t : forest.trees) ++votes[class_index(predict_tree(t, x))];
  return votes;
}

QualityClass predict_forest(const ForestModel& forest, std::span<const double> x) {
  return argmax_class(forest_votes(forest, x));
}

double RegressionTree::predict(std::span<const double> x) const {
  check_arity(num_features, x.size());
  return descend(nodes, x).value;
}

namespace {

RegressionTree build_regression(const ColumnView& view, std::span<const double> targets, std::size_t max_depth) {
  RegressionPolicy policy{std::vector<double>(targets.begin(), targets.end())};
  TreeBuilder<RegressionPolicy> builder(view, policy, max_depth, 2, 0, nullptr);
  return RegressionTree{builder.build(), view.features};
}

}  // namespace

RegressionTree fit_regression_tree(const Matrix& x, std::span<const double> targets, std::size_t max_depth) {
  if (x.rows() == 0 || x.rows() != targets.size()) throw DataError("fit_regression_tree: bad input sizes");
  return build_regression(make_view(x, all_rows(x.rows())), targets, max_depth);
}

double softmax_cross_entropy(std::span<const ClassScores> scores, std::span<const QualityClass> labels) {
  double loss = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto& s = scores[i];
    const double mx = *std::max_element(s.begin(), s.end());
    double z = 0.0;
    for (double v : s) z += std::exp(v - mx);
    loss += mx + std::log(z) - s[class_index(labels[i])];
  }
  return loss;
}

std::vector<ClassScores> softmax_residuals(std::span<const ClassScores> scores,
                                           std::span<const QualityClass> labels) {
  std::vector<ClassScores> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const ClassScores p = softmax(scores[i]);
    for (std::size_t c = 0; c < kNumClasses; ++c) out[i][c] = (class_index(labels[i]) == c ? 1.0 : 0.0) - p[c];
  }
  return out;
}

GboostModel fit_gboost(const Matrix& x, std::span<const QualityClass> labels, const GboostParams& params) {
  if (!(params.learning_rate >= 0.0)) throw ConfigError("learning_rate must be non-negative");
  if (params.tree_depth < 1) throw ConfigError("tree_depth must be at least 1");
  if (x.rows() == 0) throw DataError("cannot fit boosting on an empty training set");
  if (x.rows() != labels.size()) throw DataError("fit_gboost: rows and labels differ in length");
  const std::size_t n = x.rows();

  GboostModel model;
  model.learning_rate = params.learning_rate;
  model.num_features = x.cols();
  const ClassCounts counts = count_classes(labels);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    model.initial_scores[c] = counts[c] > 0 ? std::log(static_cast<double>(counts[c]) / static_cast<double>(n))
                                            : kAbsentClassScore;
  }

  std::vector<ClassScores> scores(n, model.initial_scores);
  model.training_loss.push_back(softmax_cross_entropy(scores, labels) / static_cast<double>(n));
  const ColumnView view = make_view(x, all_rows(n));
  model.stages.reserve(params.iterations);

  for (std::size_t it = 0; it < params.iterations; ++it) {
    const auto residuals = softmax_residuals(scores, labels);
    std::array<RegressionTree, kNumClasses> stage;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      std::vector<double> target(n);
      for (std::size_t i = 0; i < n; ++i) target[i] = residuals[i][c];
      stage[c] = build_regression(view, target, params.tree_depth);
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < kNumClasses; ++c) scores[i][c] += params.learning_rate * stage[c].predict(x.row(i));
    }
    model.stages.push_back(std::move(stage));
    model.training_loss.push_back(softmax_cross_entropy(scores, labels) / static_cast<double>(n));
  }
  return model;
}

ClassScores gboost_scores(const GboostModel& model, std::span<const double> x) {
  check_arity(model.num_features, x.size());
  ClassScores s = model.initial_scores;
  for (const auto& stage : model.stages) {
    for (std::size_t c = 0; c < kNumClasses; ++c) s[c] += model.learning_rate * stage[c].predict(x);
  }
  return s;
}

QualityClass predict_gboost(const GboostModel& model, std::span<const double> x) {
  return argmax_class(gboost_scores(model, x));
}

void to_json(Json& j, const TreeModel& t) {
  j = Json{{"params", params_json(t.params)}, {"num_features", t.num_features}, {"nodes", nodes_json(t.nodes, false)}};
}

void from_json(const Json& j, TreeModel& t) {
  t.params = params_from_json(j.at("params"));
  t.num_features = j.at("num_features").get<std::size_t>();
  t.nodes = nodes_from_json(j.at("nodes"), false);
}

void to_json(Json& j, const ForestModel& f) {
  Json trees = Json::array();
  for (const auto& t : f.trees) trees.push_back(Json(t));
  j = Json{{"features_per_split", f.features_per_split},
           {"bootstrap", f.bootstrap},
           {"num_features", f.num_features},
           {"tree_seeds", f.tree_seeds},
           {"trees", std::move(trees)}};
}

void from_json(const Json& j, ForestModel& f) {
  f.features_per_split = j.at("features_per_split").get<std::size_t>();
  f.bootstrap = j.at("bootstrap").get<bool>();
  f.num_features = j.at("num_features").get<std::size_t>();
  f.tree_seeds = j.at("tree_seeds").get<std::vector<std::uint64_t>>();
  f.trees.clear();
  for (const auto& t : j.at("trees")) f.trees.push_back(t.get<TreeModel>());
  if (f.trees.empty()) throw DataError("forest payload has no trees");
}

void to_json(Json& j, const RegressionTree& t) {
  j = Json{{"num_features", t.num_features}, {"nodes", nodes_json(t.nodes, true)}};
}

void from_json(const Json& j, RegressionTree& t) {
  t.num_features = j.at("num_features").get<std::size_t>();
  t.nodes = nodes_from_json(j.at("nodes"), true);
}

void to_json(Json& j, const GboostModel& g) {
  Json stages = Json::array();
  for (const auto& s : g.stages) stages.push_back(Json::array({Json(s[0]), Json(s[1]), Json(s[2])}));
  j = Json{{"initial_scores", g.initial_scores},
           {"learning_rate", g.learning_rate},
           {"num_features", g.num_features},
           {"training_loss", g.training_loss},
           {"stages", std::move(stages)}};
}

void from_json(const Json& j, GboostModel& g) {
  g.initial_scores = j.at("initial_scores").get<ClassScores>();
  g.learning_rate = j.at("learning_rate").get<double>();
  g.num_features = j.at("num_features").get<std::size_t>();
  g.training_loss = j.at("training_loss").get<std::vector<double>>();
  g.stages.clear();
  for (const auto& s : j.at("stages")) {
    if (s.size() != kNumClasses) throw DataError("boosting stage must hold one tree per class");
    g.stages.push_back({s[0].get<RegressionTree>(), s[1].get<RegressionTree>(), s[2].get<RegressionTree>()});
  }
}

}  // namespace winelab
