#include "tlf/forest.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <optional>
#include <random>
#include <thread>

#include <nlohmann/json.hpp>

#include "tlf/errors.hpp"

namespace tlf {

namespace {

constexpr int kForestFormatVersion = 1;
constexpr double kMinGain = 1e-12;

std::uint64_t tree_seed(std::uint64_t seed, std::size_t tree) {
  // splitmix64 finalizer over (seed, tree)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(tree) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double gini(std::span<const double> weights, double total) {
  if (total <= 0.0) return 0.0;
  double sum_sq = 0.0;
  for (double w : weights) sum_sq += (w / total) * (w / total);
  return 1.0 - sum_sq;
}

int argmax_lowest(std::span<const double> values) {
  return static_cast<int>(std::max_element(values.begin(), values.end()) - values.begin());
}

struct Split {
  double gain = 0.0;
  std::size_t attribute = 0;
  bool categorical = false;
  double threshold = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& ds, std::size_t min_leaf, std::uint64_t seed)
      : ds_(ds), min_leaf_(min_leaf), classes_(ds.num_classes()), rng_(seed) {}

  Tree build() {
    const auto n = ds_.size();
    weight_.assign(n, 0.0);
    std::uniform_int_distribution<std::size_t> draw(0, n - 1);
    for (std::size_t k = 0; k < n; ++k) weight_[draw(rng_)] += 1.0;
    std::vector<std::size_t> hit;
    for (std::size_t i = 0; i < n; ++i) {
      if (weight_[i] > 0.0) hit.push_back(i);
    }
    grow(std::move(hit));
    return std::move(tree_);
  }

 private:
  std::int32_t grow(std::vector<std::size_t> records) {
    const auto index = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();

    std::vector<double> counts(classes_, 0.0);
    for (auto i : records) counts[static_cast<std::size_t>(ds_.label(i))] += weight_[i];
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    const auto nonzero = std::count_if(counts.begin(), counts.end(), [](double w) { return w > 0.0; });

    std::optional<Split> split;
    if (nonzero > 1 && records.size() >= 2 * min_leaf_) {
      split = best_split(records, counts, total);
    }
    if (!split) {
      auto& leaf = tree_.nodes[static_cast<std::size_t>(index)];
      leaf.kind = TreeNode::Kind::leaf;
      leaf.leaf_id = tree_.num_leaves++;
      leaf.class_weights = std::move(counts);
      leaf.members = std::move(records);
      return index;
    }

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (auto i : records) {
      (goes_left(*split, ds_.cell(i, split->attribute)) ? left : right).push_back(i);
    }
    records.clear();
    records.shrink_to_fit();
    {
      auto& node = tree_.nodes[static_cast<std::size_t>(index)];
      node.kind = TreeNode::Kind::internal;
      node.attribute = split->attribute;
      node.categorical = split->categorical;
      node.threshold = split->threshold;
    }
    const auto l = grow(std::move(left));
    const auto r = grow(std::move(right));
    tree_.nodes[static_cast<std::size_t>(index)].left = l;
    tree_.nodes[static_cast<std::size_t>(index)].right = r;
    return index;
  }

  static bool goes_left(const Split& s, double value) {
    return s.categorical ? value == s.threshold : value <= s.threshold;
  }

  std::optional<Split> best_split(const std::vector<std::size_t>& records,
                                  const std::vector<double>& counts, double total) {
    const auto d = ds_.dims();
    if (d == 0) return std::nullopt;
    const auto m = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
    attributes_.resize(d);
    std::iota(attributes_.begin(), attributes_.end(), 0);
    for (std::size_t k = 0; k < m; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, d - 1);
      std::swap(attributes_[k], attributes_[pick(rng_)]);
    }

    const double parent = gini(counts, total);
    std::optional<Split> best;
    for (std::size_t k = 0; k < m; ++k) {
      const auto attr = attributes_[k];
      const bool categorical = ds_.schema()[attr].kind == AttributeKind::categorical;
      auto candidate = categorical ? categorical_split(records, attr, counts, total, parent)
                                   : numeric_split(records, attr, counts, total, parent);
      if (candidate && (!best || candidate->gain > best->gain)) best = candidate;
    }
    if (best && best->gain > kMinGain) return best;
    return std::nullopt;
  }

  std::optional<Split> numeric_split(const std::vector<std::size_t>& records, std::size_t attr,
                                     const std::vector<double>& counts, double total,
                                     double parent) {
    sorted_ = records;
    std::sort(sorted_.begin(), sorted_.end(), [&](std::size_t a, std::size_t b) {
      const double va = ds_.cell(a, attr);
      const double vb = ds_.cell(b, attr);
      return va < vb || (va == vb && a < b);
    });
    std::vector<double> left(classes_, 0.0);
    std::vector<double> right(counts);
    double left_total = 0.0;
    std::optional<Split> best;
    const auto size = sorted_.size();
    for (std::size_t k = 1; k < size; ++k) {
      const auto prev = sorted_[k - 1];
      const auto y = static_cast<std::size_t>(ds_.label(prev));
      left[y] += weight_[prev];
      right[y] -= weight_[prev];
      left_total += weight_[prev];
      if (k < min_leaf_ || size - k < min_leaf_) continue;
      const double a = ds_.cell(prev, attr);
      const double b = ds_.cell(sorted_[k], attr);
      if (!(a < b)) continue;
      const double right_total = total - left_total;
      const double gain = parent - (left_total / total) * gini(left, left_total) -
                          (right_total / total) * gini(right, right_total);
      if (!best || gain > best->gain) {
        double mid = a + (b - a) / 2.0;
        if (!(mid < b)) mid = a;
        best = Split{gain, attr, false, mid};
      }
    }
    return best;
  }

  std::optional<Split> categorical_split(const std::vector<std::size_t>& records, std::size_t attr,
                                         const std::vector<double>& counts, double total,
                                         double parent) {
    const auto categories = ds_.schema()[attr].categories.size();
    std::vector<std::vector<double>> per(categories, std::vector<double>(classes_, 0.0));
    std::vector<std::size_t> distinct(categories, 0);
    for (auto i : records) {
      const auto c = static_cast<std::size_t>(ds_.cell(i, attr));
      per[c][static_cast<std::size_t>(ds_.label(i))] += weight_[i];
      ++distinct[c];
    }
    std::optional<Split> best;
    std::vector<double> rest(classes_);
    for (std::size_t c = 0; c < categories; ++c) {
      if (distinct[c] < min_leaf_ || records.size() - distinct[c] < min_leaf_) continue;
      const double in_total = std::accumulate(per[c].begin(), per[c].end(), 0.0);
      for (std::size_t y = 0; y < classes_; ++y) rest[y] = counts[y] - per[c][y];
      const double out_total = total - in_total;
      const double gain = parent - (in_total / total) * gini(per[c], in_total) -
                          (out_total / total) * gini(rest, out_total);
      if (!best || gain > best->gain) best = Split{gain, attr, true, static_cast<double>(c)};
    }
    return best;
  }

  const Dataset& ds_;
  std::size_t min_leaf_;
  std::size_t classes_;
  std::mt19937_64 rng_;
  std::vector<double> weight_;
  std::vector<std::size_t> attributes_;
  std::vector<std::size_t> sorted_;
  Tree tree_;
};

std::vector<double> leaf_distribution(const TreeNode& leaf) {
  std::vector<double> p = leaf.class_weights;
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (total > 0.0) {
    for (auto& v : p) v /= total;
  }
  return p;
}

}  // namespace

const TreeNode& Tree::route(std::span<const double> record) const {
  const TreeNode* node = &nodes.at(0);
  while (!node->is_leaf()) {
    const double v = record[node->attribute];
    const bool left = node->categorical ? v == node->threshold : v <= node->threshold;
    node = &nodes[static_cast<std::size_t>(left ? node->left : node->right)];
  }
  return *node;
}

Forest::Forest(std::vector<Tree> trees, Schema schema, std::vector<std::string> class_names,
               std::size_t min_leaf_size, std::uint64_t seed)
    : trees_(std::move(trees)),
      schema_(std::move(schema)),
      class_names_(std::move(class_names)),
      min_leaf_size_(min_leaf_size),
      seed_(seed) {
  if (trees_.empty()) throw DataError("a forest needs at least one tree");
}

int Forest::predict(std::span<const double> record) const {
  if (record.size() != schema_.size()) {
    throw DataError("record has " + std::to_string(record.size()) + " cells but the forest expects " +
                    std::to_string(schema_.size()));
  }
  for (std::size_t j = 0; j < schema_.size(); ++j) {
    if (schema_[j].kind != AttributeKind::categorical) continue;
    const double v = record[j];
    if (v < 0 || v >= static_cast<double>(schema_[j].categories.size()) || v != std::floor(v)) {
      throw DataError("invalid category index for attribute " + schema_[j].name);
    }
  }
  std::vector<int> votes;
  std::vector<std::vector<double>> distributions;
  votes.reserve(trees_.size());
  distributions.reserve(trees_.size());
  for (const auto& tree : trees_) {
    const auto& leaf = tree.route(record);
    votes.push_back(argmax_lowest(leaf.class_weights));
    distributions.push_back(leaf_distribution(leaf));
  }
  return resolve_votes(votes, distributions, class_names_.size());
}

std::vector<int> Forest::predict(const Dataset& ds) const {
  if (ds.has_missing()) throw PreconditionError("prediction requires a dataset without missing cells");
  if (ds.schema() != schema_) throw SchemaError("dataset schema does not match the forest schema");
  std::vector<int> out;
  out.reserve(ds.size());
  std::vector<double> row(ds.dims());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < ds.dims(); ++j) row[j] = ds.cell(i, j);
    out.push_back(predict(row));
  }
  return out;
}

bool Forest::operator==(const Forest& other) const {
  if (schema_ != other.schema_ || class_names_ != other.class_names_ ||
      min_leaf_size_ != other.min_leaf_size_ || seed_ != other.seed_ ||
      trees_.size() != other.trees_.size()) {
    return false;
  }
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    const auto& a = trees_[t].nodes;
    const auto& b = other.trees_[t].nodes;
    if (a.size() != b.size()) return false;
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (a[k].kind != b[k].kind || a[k].attribute != b[k].attribute ||
          a[k].categorical != b[k].categorical || a[k].threshold != b[k].threshold ||
          a[k].left != b[k].left || a[k].right != b[k].right || a[k].leaf_id != b[k].leaf_id ||
          a[k].class_weights != b[k].class_weights || a[k].members != b[k].members) {
        return false;
      }
    }
  }
  return true;
}

Forest train_forest(const Dataset& ds, std::size_t trees, std::size_t min_leaf_size,
                    std::uint64_t seed) {
  if (ds.size() == 0) throw DataError("cannot train a forest on an empty dataset");
  if (ds.has_missing()) throw PreconditionError("forest training requires a dataset without missing cells");
  if (trees == 0) throw PreconditionError("a forest needs at least one tree");
  if (min_leaf_size == 0) throw PreconditionError("minimum leaf size must be at least 1");

  auto build_one = [&](std::size_t t) {
    return TreeBuilder(ds, min_leaf_size, tree_seed(seed, t)).build();
  };

  std::vector<Tree> built(trees);
  const auto workers = std::min<std::size_t>(trees, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t t = 0; t < trees; ++t) built[t] = build_one(t);
  } else {
    std::vector<std::future<void>> jobs;
    for (std::size_t w = 0; w < workers; ++w) {
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t t = w; t < trees; t += workers) built[t] = build_one(t);
      }));
    }
    for (auto& j : jobs) j.get();
  }
  return Forest(std::move(built), ds.schema(), ds.class_names(), min_leaf_size, seed);
}

std::vector<LeafRef> collect_leaves(const Forest& forest) {
  std::vector<LeafRef> leaves;
  for (std::size_t t = 0; t < forest.trees().size(); ++t) {
    std::vector<const TreeNode*> by_id(forest.trees()[t].num_leaves, nullptr);
    for (const auto& node : forest.trees()[t].nodes) {
      if (node.is_leaf()) by_id.at(node.leaf_id) = &node;
    }
    for (const auto* leaf : by_id) leaves.push_back({t, leaf->leaf_id, leaf->members});
  }
  return leaves;
}

int resolve_votes(std::span<const int> votes, std::span<const std::vector<double>> distributions,
                  std::size_t num_classes) {
  if (num_classes == 0) throw PreconditionError("no classes to vote over");
  std::vector<std::size_t> tally(num_classes, 0);
  for (int v : votes) tally.at(static_cast<std::size_t>(v)) += 1;
  const auto top = *std::max_element(tally.begin(), tally.end());
  std::vector<int> tied;
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (tally[c] == top) tied.push_back(static_cast<int>(c));
  }
  if (tied.size() == 1) return tied.front();

  std::vector<double> mass(num_classes, 0.0);
  for (const auto& dist : distributions) {
    for (std::size_t c = 0; c < num_classes && c < dist.size(); ++c) mass[c] += dist[c];
  }
  int best = tied.front();
  for (int c : tied) {
    if (mass[static_cast<std::size_t>(c)] > mass[static_cast<std::size_t>(best)]) best = c;
  }
  return best;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

nlohmann::json schema_to_json(const Schema& schema) {
  auto out = nlohmann::json::array();
  for (const auto& a : schema) {
    nlohmann::json attr{{"name", a.name}, {"kind", to_string(a.kind)}};
    if (a.kind == AttributeKind::categorical) attr["categories"] = a.categories;
    out.push_back(std::move(attr));
  }
  return out;
}

Schema schema_from_json(const nlohmann::json& doc) {
  Schema schema;
  for (const auto& attr : doc) {
    AttributeSchema a;
    a.name = attr.at("name").get<std::string>();
    const auto kind = attr.at("kind").get<std::string>();
    if (kind == "numeric") {
      a.kind = AttributeKind::numeric;
    } else if (kind == "categorical") {
      a.kind = AttributeKind::categorical;
      a.categories = attr.at("categories").get<std::vector<std::string>>();
    } else {
      throw DataError("unknown attribute kind in forest document: " + kind);
    }
    schema.push_back(std::move(a));
  }
  return schema;
}

}  // namespace

nlohmann::json to_json(const Forest& forest) {
  nlohmann::json doc;
  doc["format"] = "tlf-forest";
  doc["version"] = kForestFormatVersion;
  doc["schema"] = schema_to_json(forest.schema());
  doc["class_names"] = forest.class_names();
  doc["min_leaf_size"] = forest.min_leaf_size();
  doc["seed"] = forest.seed();
  auto trees = nlohmann::json::array();
  for (const auto& tree : forest.trees()) {
    auto nodes = nlohmann::json::array();
    for (const auto& node : tree.nodes) {
      if (node.is_leaf()) {
        nodes.push_back({{"kind", "leaf"},
                         {"leaf_id", node.leaf_id},
                         {"class_weights", node.class_weights},
                         {"members", node.members}});
      } else {
        nodes.push_back({{"kind", "internal"},
                         {"attribute", node.attribute},
                         {"categorical", node.categorical},
                         {"threshold", node.threshold},
                         {"left", node.left},
                         {"right", node.right}});
      }
    }
    trees.push_back({{"num_leaves", tree.num_leaves}, {"nodes", std::move(nodes)}});
  }
  doc["trees"] = std::move(trees);
  return doc;
}

Forest forest_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "tlf-forest") {
      throw DataError("not a forest document");
    }
    if (doc.at("version").get<int>() != kForestFormatVersion) {
      throw DataError("unsupported forest document version");
    }
    std::vector<Tree> trees;
    for (const auto& t : doc.at("trees")) {
      Tree tree;
      tree.num_leaves = t.at("num_leaves").get<std::size_t>();
      for (const auto& n : t.at("nodes")) {
        TreeNode node;
        if (n.at("kind").get<std::string>() == "leaf") {
          node.kind = TreeNode::Kind::leaf;
          node.leaf_id = n.at("leaf_id").get<std::size_t>();
          node.class_weights = n.at("class_weights").get<std::vector<double>>();
          node.members = n.at("members").get<std::vector<std::size_t>>();
        } else {
          node.kind = TreeNode::Kind::internal;
          node.attribute = n.at("attribute").get<std::size_t>();
          node.categorical = n.at("categorical").get<bool>();
          node.threshold = n.at("threshold").get<double>();
          node.left = n.at("left").get<std::int32_t>();
          node.right = n.at("right").get<std::int32_t>();
        }
        tree.nodes.push_back(std::move(node));
      }
      trees.push_back(std::move(tree));
    }
    return Forest(std::move(trees), schema_from_json(doc.at("schema")),
                  doc.at("class_names").get<std::vector<std::string>>(),
                  doc.at("min_leaf_size").get<std::size_t>(), doc.at("seed").get<std::uint64_t>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed forest document: ") + e.what());
  }
}

}  // namespace tlf
