#include "flowforest/forest.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "flowforest/kernels.hpp"
#include "flowforest/parallel.hpp"
#include "flowforest/rng.hpp"

namespace flowforest {

uint32_t MaxFeatures::resolve(uint32_t n_features) const {
  switch (kind) {
    case Kind::sqrt:
      return static_cast<uint32_t>(std::ceil(std::sqrt(static_cast<double>(n_features))));
    case Kind::half:
      return (n_features + 1) / 2;
    case Kind::all:
      return n_features;
    case Kind::exact:
      if (count == 0 || count > n_features) {
        throw std::invalid_argument("explicit max_features out of range");
      }
      return count;
  }
  return n_features;
}

namespace {

double gini_impurity(std::span<const double> targets) {
  std::map<double, size_t> counts;
  for (const double t : targets) ++counts[t];
  const double n = static_cast<double>(targets.size());
  double sum_sq = 0.0;
  for (const auto& [value, count] : counts) {
    const double p = static_cast<double>(count) / n;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

double variance(std::span<const double> targets) {
  const double n = static_cast<double>(targets.size());
  double sum = 0.0;
  for (const double t : targets) sum += t;
  const double mean = sum / n;
  double acc = 0.0;
  for (const double t : targets) acc += (t - mean) * (t - mean);
  return acc / n;
}

}  // namespace

double split_quality(std::span<const double> targets_left, std::span<const double> targets_right,
                     Criterion criterion) {
  if (targets_left.empty() || targets_right.empty()) {
    throw std::invalid_argument("split_quality: both partitions must be non-empty");
  }
  std::vector<double> parent(targets_left.begin(), targets_left.end());
  parent.insert(parent.end(), targets_right.begin(), targets_right.end());
  const double n = static_cast<double>(parent.size());
  const double wl = static_cast<double>(targets_left.size()) / n;
  const double wr = static_cast<double>(targets_right.size()) / n;
  if (criterion == Criterion::gini) {
    return gini_impurity(parent) - wl * gini_impurity(targets_left) -
           wr * gini_impurity(targets_right);
  }
  return variance(parent) - wl * variance(targets_left) - wr * variance(targets_right);
}

namespace {

struct TrainProblem {
  const FeatureMatrix& data;
  std::span<const uint8_t> labels;   // classifier
  std::span<const double> targets;   // regressor
  Criterion criterion;
  uint32_t n_classes;
  uint32_t max_feats;
  uint32_t min_samples_split;
  int64_t max_depth;  // -1 = unlimited
  bool bootstrap;
  uint64_t seed;
};

struct SortedEntry {
  double value;
  uint32_t index;
};

struct Workspace {
  std::vector<uint32_t> indices;
  std::vector<uint32_t> part_buf;
  std::vector<SortedEntry> sorted;
  std::vector<double> prefix;
  std::vector<double> scores;
  std::vector<uint32_t> feature_pool;
  std::vector<uint64_t> class_counts;
};

struct BuildTask {
  uint32_t begin;
  uint32_t end;
  int32_t parent;
  bool is_left;
  uint32_t depth;
};

struct BestSplit {
  bool found = false;
  double improvement = -std::numeric_limits<double>::infinity();
  uint32_t feature = 0;
  double threshold = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const TrainProblem& problem, Workspace& ws) : p_(problem), ws_(ws) {}

  Tree build(uint32_t tree_index) {
    const size_t n = p_.data.rows();
    Rng rng(derive_seed(p_.seed, "tree", tree_index));

    ws_.indices.resize(n);
    if (p_.bootstrap) {
      for (size_t i = 0; i < n; ++i) {
        ws_.indices[i] = rng.below(static_cast<uint32_t>(n));
      }
      std::sort(ws_.indices.begin(), ws_.indices.end());
    } else {
      std::iota(ws_.indices.begin(), ws_.indices.end(), 0u);
    }

    Tree tree;
    tree.nodes.reserve(64);
    std::vector<BuildTask> stack;
    stack.push_back({0, static_cast<uint32_t>(n), -1, false, 0});

    while (!stack.empty()) {
      const BuildTask task = stack.back();
      stack.pop_back();
      const auto node_index = static_cast<int32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      if (task.parent >= 0) {
        auto& parent = tree.nodes[task.parent];
        (task.is_left ? parent.left : parent.right) = node_index;
      }

      const uint32_t size = task.end - task.begin;
      const NodeStats stats = node_stats(task.begin, task.end);
      const bool depth_capped = p_.max_depth >= 0 && task.depth >= static_cast<uint64_t>(p_.max_depth);
      if (stats.pure || size < p_.min_samples_split || depth_capped) {
        make_leaf(tree.nodes[node_index], stats);
        continue;
      }

      const BestSplit best = find_best_split(task.begin, task.end, stats, rng);
      if (!best.found) {
        make_leaf(tree.nodes[node_index], stats);
        continue;
      }

      const uint32_t mid = partition(task.begin, task.end, best.feature, best.threshold);
      auto& node = tree.nodes[node_index];
      node.feature = static_cast<int32_t>(best.feature);
      node.threshold = best.threshold;
      // Right task first so the left subtree is built (and numbered) first.
      stack.push_back({mid, task.end, node_index, false, task.depth + 1});
      stack.push_back({task.begin, mid, node_index, true, task.depth + 1});
    }
    return tree;
  }

 private:
  struct NodeStats {
    bool pure = false;
    double target_sum = 0.0;   // regressor
    double leaf_value = 0.0;   // majority class or mean
    double parent_score = 0.0; // sum of squared class counts (gini) or target sum (mse)
    double total_ones = 0.0;   // binary gini
  };

  NodeStats node_stats(uint32_t begin, uint32_t end) {
    NodeStats stats;
    const uint32_t size = end - begin;
    if (p_.criterion == Criterion::gini) {
      ws_.class_counts.assign(p_.n_classes, 0);
      for (uint32_t i = begin; i < end; ++i) {
        ++ws_.class_counts[p_.labels[ws_.indices[i]]];
      }
      uint32_t majority = 0;
      double sum_sq = 0.0;
      for (uint32_t k = 0; k < p_.n_classes; ++k) {
        const auto c = static_cast<double>(ws_.class_counts[k]);
        sum_sq += c * c;
        if (ws_.class_counts[k] > ws_.class_counts[majority]) majority = k;
      }
      stats.pure = ws_.class_counts[majority] == size;
      stats.leaf_value = static_cast<double>(majority);
      stats.parent_score = sum_sq;
      if (p_.n_classes == 2) stats.total_ones = static_cast<double>(ws_.class_counts[1]);
    } else {
      const double first = p_.targets[ws_.indices[begin]];
      bool all_equal = true;
      double sum = 0.0;
      for (uint32_t i = begin; i < end; ++i) {
        const double t = p_.targets[ws_.indices[i]];
        sum += t;
        all_equal = all_equal && t == first;
      }
      stats.pure = all_equal;
      stats.target_sum = sum;
      stats.leaf_value = all_equal ? first : sum / static_cast<double>(size);
      stats.parent_score = sum;
    }
    return stats;
  }

  void make_leaf(TreeNode& node, const NodeStats& stats) {
    node.feature = -1;
    node.value = stats.leaf_value;
  }

  BestSplit find_best_split(uint32_t begin, uint32_t end, const NodeStats& stats, Rng& rng) {
    const uint32_t n_features = static_cast<uint32_t>(p_.data.cols());
    auto& pool = ws_.feature_pool;
    pool.resize(n_features);
    std::iota(pool.begin(), pool.end(), 0u);
    const uint32_t m = std::min(p_.max_feats, n_features);
    for (uint32_t i = 0; i < m; ++i) {
      const uint32_t j = i + rng.below(n_features - i);
      std::swap(pool[i], pool[j]);
    }

    const uint32_t size = end - begin;
    const double n = static_cast<double>(size);
    BestSplit best;
    for (uint32_t k = 0; k < m; ++k) {
      const uint32_t f = pool[k];
      const double* column = p_.data.col(f);

      ws_.sorted.resize(size);
      for (uint32_t i = 0; i < size; ++i) {
        const uint32_t sample = ws_.indices[begin + i];
        ws_.sorted[i] = {column[sample], sample};
      }
      std::sort(ws_.sorted.begin(), ws_.sorted.end(), [](const SortedEntry& a, const SortedEntry& b) {
        return a.value < b.value || (a.value == b.value && a.index < b.index);
      });
      if (ws_.sorted.front().value == ws_.sorted.back().value) continue;  // constant feature

      const uint32_t n_edges = size - 1;
      ws_.prefix.resize(n_edges);
      ws_.scores.resize(n_edges);

      if (p_.criterion == Criterion::gini && p_.n_classes == 2) {
        double ones = 0.0;
        for (uint32_t i = 0; i < n_edges; ++i) {
          ones += static_cast<double>(p_.labels[ws_.sorted[i].index]);
          ws_.prefix[i] = ones;
        }
        kern::gini_pair_scores(ws_.prefix.data(), stats.total_ones, size, ws_.scores.data(),
                               n_edges);
      } else if (p_.criterion == Criterion::gini) {
        multiclass_gini_scores(size);
      } else {
        double sum = 0.0;
        for (uint32_t i = 0; i < n_edges; ++i) {
          sum += p_.targets[ws_.sorted[i].index];
          ws_.prefix[i] = sum;
        }
        kern::mse_gain_scores(ws_.prefix.data(), stats.target_sum, size, ws_.scores.data(),
                              n_edges);
      }

      // Edges between equal values are not candidates.
      int64_t best_edge = -1;
      double best_score = -std::numeric_limits<double>::infinity();
      for (uint32_t i = 0; i < n_edges; ++i) {
        if (ws_.sorted[i].value == ws_.sorted[i + 1].value) continue;
        if (ws_.scores[i] > best_score) {
          best_score = ws_.scores[i];
          best_edge = i;
        }
      }
      if (best_edge < 0) continue;

      double improvement;
      if (p_.criterion == Criterion::gini) {
        improvement = (best_score - stats.parent_score / n) / n;
      } else {
        const double mean = stats.target_sum / n;
        improvement = best_score / n - mean * mean;
      }

      if (improvement > best.improvement ||
          (improvement == best.improvement && best.found && f < best.feature)) {
        const double lo = ws_.sorted[best_edge].value;
        const double hi = ws_.sorted[best_edge + 1].value;
        double threshold = lo + (hi - lo) / 2.0;
        if (!(threshold < hi)) threshold = lo;  // adjacent doubles: keep lo on the left
        best.found = true;
        best.improvement = improvement;
        best.feature = f;
        best.threshold = threshold;
      }
    }
    return best;
  }

  /// Generic K-class Gini edge scores via incremental squared-count updates.
  /// Counts are integers, so adding one sample of class k changes
  /// sum(c^2) by 2c+1 exactly.
  void multiclass_gini_scores(uint32_t size) {
    const uint32_t n_edges = size - 1;
    std::vector<uint64_t> left(p_.n_classes, 0);
    std::vector<uint64_t> right(ws_.class_counts);
    double left_sq = 0.0;
    double right_sq = 0.0;
    for (uint32_t k = 0; k < p_.n_classes; ++k) {
      const auto c = static_cast<double>(right[k]);
      right_sq += c * c;
    }
    const double n = static_cast<double>(size);
    for (uint32_t i = 0; i < n_edges; ++i) {
      const uint8_t cls = p_.labels[ws_.sorted[i].index];
      left_sq += 2.0 * static_cast<double>(left[cls]) + 1.0;
      right_sq -= 2.0 * static_cast<double>(right[cls]) - 1.0;
      ++left[cls];
      --right[cls];
      const double nl = static_cast<double>(i + 1);
      ws_.scores[i] = left_sq / nl + right_sq / (n - nl);
    }
  }

  uint32_t partition(uint32_t begin, uint32_t end, uint32_t feature, double threshold) {
    const double* column = p_.data.col(feature);
    auto& buf = ws_.part_buf;
    buf.clear();
    for (uint32_t i = begin; i < end; ++i) {
      if (column[ws_.indices[i]] <= threshold) buf.push_back(ws_.indices[i]);
    }
    const auto n_left = static_cast<uint32_t>(buf.size());
    for (uint32_t i = begin; i < end; ++i) {
      if (!(column[ws_.indices[i]] <= threshold)) buf.push_back(ws_.indices[i]);
    }
    std::copy(buf.begin(), buf.end(), ws_.indices.begin() + begin);
    return begin + n_left;
  }

  const TrainProblem& p_;
  Workspace& ws_;
};

std::vector<Tree> train_trees(const TrainProblem& problem, uint32_t n_trees, unsigned threads) {
  std::vector<Tree> trees(n_trees);
  parallel_for(0, n_trees, threads, [&](size_t t) {
    thread_local Workspace ws;
    TreeBuilder builder(problem, ws);
    trees[t] = builder.build(static_cast<uint32_t>(t));
  });
  return trees;
}

void validate_config(const TrainConfig& config, ForestMode mode) {
  if (config.n_estimators == 0) throw std::invalid_argument("n_estimators must be positive");
  if (config.min_samples_split < 2) throw std::invalid_argument("min_samples_split must be >= 2");
  if (mode == ForestMode::classifier && config.criterion != Criterion::gini) {
    throw std::invalid_argument("classifier mode requires the gini criterion");
  }
  if (mode == ForestMode::regressor && config.criterion != Criterion::mse) {
    throw std::invalid_argument("regressor mode requires the mse criterion");
  }
}

void write_u32(std::ostream& out, uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }
void write_u64(std::ostream& out, uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); }
void write_f64(std::ostream& out, double v) { out.write(reinterpret_cast<const char*>(&v), 8); }
void write_i32(std::ostream& out, int32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }
void write_u8(std::ostream& out, uint8_t v) { out.write(reinterpret_cast<const char*>(&v), 1); }

uint32_t read_u32(std::istream& in) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  return v;
}
uint64_t read_u64(std::istream& in) {
  uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 8);
  return v;
}
double read_f64(std::istream& in) {
  double v = 0;
  in.read(reinterpret_cast<char*>(&v), 8);
  return v;
}
int32_t read_i32(std::istream& in) {
  int32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  return v;
}
uint8_t read_u8(std::istream& in) {
  uint8_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 1);
  return v;
}

constexpr uint32_t kForestMagic = 0x46464f52;  // "FFOR"
constexpr uint32_t kForestVersion = 1;

}  // namespace

Forest Forest::train_classifier(const FeatureMatrix& data, std::span<const uint8_t> labels,
                                uint32_t n_classes, const TrainConfig& config,
                                uint64_t schema_fingerprint, unsigned threads) {
  validate_config(config, ForestMode::classifier);
  if (data.rows() == 0) throw std::invalid_argument("training data is empty");
  if (labels.size() != data.rows()) throw std::invalid_argument("labels/data size mismatch");
  if (n_classes < 2) throw std::invalid_argument("need at least two classes");
  for (const uint8_t y : labels) {
    if (y >= n_classes) throw std::invalid_argument("label out of range");
  }

  TrainProblem problem{data,
                       labels,
                       {},
                       Criterion::gini,
                       n_classes,
                       config.max_features.resolve(static_cast<uint32_t>(data.cols())),
                       config.min_samples_split,
                       config.max_depth ? static_cast<int64_t>(*config.max_depth) : -1,
                       config.bootstrap,
                       config.rng_seed};

  Forest forest;
  forest.mode_ = ForestMode::classifier;
  forest.n_classes_ = n_classes;
  forest.n_features_ = static_cast<uint32_t>(data.cols());
  forest.schema_fingerprint_ = schema_fingerprint;
  forest.config_ = config;
  forest.trees_ = train_trees(problem, config.n_estimators, threads);
  return forest;
}

Forest Forest::train_regressor(const FeatureMatrix& data, std::span<const double> targets,
                               const TrainConfig& config, uint64_t schema_fingerprint,
                               unsigned threads) {
  validate_config(config, ForestMode::regressor);
  if (data.rows() == 0) throw std::invalid_argument("training data is empty");
  if (targets.size() != data.rows()) throw std::invalid_argument("targets/data size mismatch");

  TrainProblem problem{data,
                       {},
                       targets,
                       Criterion::mse,
                       0,
                       config.max_features.resolve(static_cast<uint32_t>(data.cols())),
                       config.min_samples_split,
                       config.max_depth ? static_cast<int64_t>(*config.max_depth) : -1,
                       config.bootstrap,
                       config.rng_seed};

  Forest forest;
  forest.mode_ = ForestMode::regressor;
  forest.n_classes_ = 0;
  forest.n_features_ = static_cast<uint32_t>(data.cols());
  forest.schema_fingerprint_ = schema_fingerprint;
  forest.config_ = config;
  forest.trees_ = train_trees(problem, config.n_estimators, threads);
  return forest;
}

void Forest::expect_fingerprint(uint64_t fingerprint) const {
  if (fingerprint != schema_fingerprint_) {
    throw std::runtime_error("feature schema fingerprint mismatch");
  }
}

uint32_t Forest::predict_class(std::span<const double> row) const {
  if (mode_ != ForestMode::classifier) throw std::logic_error("predict_class on a regressor");
  std::vector<uint32_t> counts(n_classes_, 0);
  for (const Tree& tree : trees_) {
    ++counts[static_cast<uint32_t>(tree.predict(row.data()))];
  }
  uint32_t best = 0;
  for (uint32_t k = 1; k < n_classes_; ++k) {
    if (counts[k] > counts[best]) best = k;
  }
  return best;
}

std::vector<uint32_t> Forest::per_tree_votes(std::span<const double> row) const {
  if (mode_ != ForestMode::classifier) throw std::logic_error("per_tree_votes on a regressor");
  std::vector<uint32_t> votes;
  votes.reserve(trees_.size());
  for (const Tree& tree : trees_) {
    votes.push_back(static_cast<uint32_t>(tree.predict(row.data())));
  }
  return votes;
}

std::vector<double> Forest::vote_fractions(std::span<const double> row) const {
  if (mode_ != ForestMode::classifier) throw std::logic_error("vote_fractions on a regressor");
  std::vector<double> fractions(n_classes_, 0.0);
  for (const Tree& tree : trees_) {
    fractions[static_cast<uint32_t>(tree.predict(row.data()))] += 1.0;
  }
  const double n = static_cast<double>(trees_.size());
  for (double& f : fractions) f /= n;
  return fractions;
}

double Forest::predict_value(std::span<const double> row) const {
  if (mode_ != ForestMode::regressor) throw std::logic_error("predict_value on a classifier");
  double sum = 0.0;
  for (const Tree& tree : trees_) sum += tree.predict(row.data());
  return sum / static_cast<double>(trees_.size());
}

std::vector<uint8_t> Forest::predict_classes(const FeatureMatrix& data, unsigned threads) const {
  std::vector<uint8_t> out(data.rows());
  parallel_for(0, data.rows(), threads, [&](size_t i) {
    std::vector<double> row(data.cols());
    data.copy_row(i, row.data());
    out[i] = static_cast<uint8_t>(predict_class(row));
  });
  return out;
}

std::vector<double> Forest::predict_values(const FeatureMatrix& data, unsigned threads) const {
  std::vector<double> out(data.rows());
  parallel_for(0, data.rows(), threads, [&](size_t i) {
    std::vector<double> row(data.cols());
    data.copy_row(i, row.data());
    out[i] = predict_value(row);
  });
  return out;
}

std::vector<double> Forest::malicious_vote_fractions(const FeatureMatrix& data,
                                                     unsigned threads) const {
  if (mode_ != ForestMode::classifier) throw std::logic_error("vote fractions need a classifier");
  std::vector<double> out(data.rows());
  const double n = static_cast<double>(trees_.size());
  parallel_for(0, data.rows(), threads, [&](size_t i) {
    std::vector<double> row(data.cols());
    data.copy_row(i, row.data());
    double votes = 0.0;
    for (const Tree& tree : trees_) {
      if (static_cast<uint32_t>(tree.predict(row.data())) == 1) votes += 1.0;
    }
    out[i] = votes / n;
  });
  return out;
}

void Forest::save(std::ostream& out) const {
  write_u32(out, kForestMagic);
  write_u32(out, kForestVersion);
  write_u8(out, static_cast<uint8_t>(mode_));
  write_u32(out, n_classes_);
  write_u32(out, n_features_);
  write_u64(out, schema_fingerprint_);
  write_u32(out, config_.n_estimators);
  write_u8(out, static_cast<uint8_t>(config_.criterion));
  write_u8(out, static_cast<uint8_t>(config_.max_features.kind));
  write_u32(out, config_.max_features.count);
  write_u8(out, config_.bootstrap ? 1 : 0);
  write_u32(out, config_.min_samples_split);
  write_u8(out, config_.max_depth ? 1 : 0);
  write_u32(out, config_.max_depth.value_or(0));
  write_u64(out, config_.rng_seed);
  write_u32(out, static_cast<uint32_t>(trees_.size()));
  for (const Tree& tree : trees_) {
    write_u32(out, static_cast<uint32_t>(tree.nodes.size()));
    for (const TreeNode& node : tree.nodes) {
      write_i32(out, node.feature);
      write_f64(out, node.threshold);
      write_i32(out, node.left);
      write_i32(out, node.right);
      write_f64(out, node.value);
    }
  }
  if (!out) throw std::runtime_error("forest serialization failed");
}

Forest Forest::load(std::istream& in) {
  if (read_u32(in) != kForestMagic) throw std::runtime_error("not a forest model file");
  if (read_u32(in) != kForestVersion) throw std::runtime_error("unsupported forest version");
  Forest forest;
  forest.mode_ = static_cast<ForestMode>(read_u8(in));
  forest.n_classes_ = read_u32(in);
  forest.n_features_ = read_u32(in);
  forest.schema_fingerprint_ = read_u64(in);
  forest.config_.n_estimators = read_u32(in);
  forest.config_.criterion = static_cast<Criterion>(read_u8(in));
  forest.config_.max_features.kind = static_cast<MaxFeatures::Kind>(read_u8(in));
  forest.config_.max_features.count = read_u32(in);
  forest.config_.bootstrap = read_u8(in) != 0;
  forest.config_.min_samples_split = read_u32(in);
  const bool has_depth = read_u8(in) != 0;
  const uint32_t depth = read_u32(in);
  forest.config_.max_depth = has_depth ? std::optional<uint32_t>(depth) : std::nullopt;
  forest.config_.rng_seed = read_u64(in);
  const uint32_t n_trees = read_u32(in);
  if (!in) throw std::runtime_error("truncated forest model file");
  forest.trees_.resize(n_trees);
  for (Tree& tree : forest.trees_) {
    const uint32_t n_nodes = read_u32(in);
    if (!in) throw std::runtime_error("truncated forest model file");
    tree.nodes.resize(n_nodes);
    for (TreeNode& node : tree.nodes) {
      node.feature = read_i32(in);
      node.threshold = read_f64(in);
      node.left = read_i32(in);
      node.right = read_i32(in);
      node.value = read_f64(in);
      if (node.feature >= static_cast<int32_t>(forest.n_features_) ||
          (node.feature >= 0 && (node.left < 0 || node.right < 0 ||
                                 node.left >= static_cast<int32_t>(n_nodes) ||
                                 node.right >= static_cast<int32_t>(n_nodes)))) {
        throw std::runtime_error("corrupt forest model file");
      }
    }
  }
  if (!in) throw std::runtime_error("truncated forest model file");
  return forest;
}

Forest Forest::from_trees(ForestMode mode, uint32_t n_classes, uint32_t n_features,
                          std::vector<Tree> trees, const TrainConfig& config,
                          uint64_t schema_fingerprint) {
  Forest forest;
  forest.mode_ = mode;
  forest.n_classes_ = n_classes;
  forest.n_features_ = n_features;
  forest.schema_fingerprint_ = schema_fingerprint;
  forest.config_ = config;
  forest.trees_ = std::move(trees);
  return forest;
}

}  // namespace flowforest
