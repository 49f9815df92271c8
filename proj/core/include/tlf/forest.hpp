#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tlf/dataset.hpp"

namespace tlf {

struct TreeNode {
  enum class Kind { internal, leaf };

  Kind kind = Kind::leaf;

  // internal: numeric attributes go left when value <= threshold; categorical
  // attributes go left when the category index equals `threshold`.
  std::size_t attribute = 0;
  bool categorical = false;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;

  // leaf
  std::size_t leaf_id = 0;
  std::vector<double> class_weights;   // bootstrap-weighted class counts
  std::vector<std::size_t> members;    // distinct training records routed here

  bool is_leaf() const noexcept { return kind == Kind::leaf; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::size_t num_leaves = 0;

  const TreeNode& route(std::span<const double> record) const;
};

struct LeafRef {
  std::size_t tree = 0;
  std::size_t leaf_id = 0;
  std::vector<std::size_t> members;
};

struct ForestParams {
  std::size_t trees = 10;
  std::size_t min_leaf_size = 20;
  std::uint64_t seed = 0;
};

class Forest {
 public:
  Forest() = default;
  Forest(std::vector<Tree> trees, Schema schema, std::vector<std::string> class_names,
         std::size_t min_leaf_size, std::uint64_t seed);

  const std::vector<Tree>& trees() const noexcept { return trees_; }
  const Schema& schema() const noexcept { return schema_; }
  const std::vector<std::string>& class_names() const noexcept { return class_names_; }
  std::size_t num_classes() const noexcept { return class_names_.size(); }
  std::size_t min_leaf_size() const noexcept { return min_leaf_size_; }
  std::uint64_t seed() const noexcept { return seed_; }

  int predict(std::span<const double> record) const;
  std::vector<int> predict(const Dataset& ds) const;

  bool operator==(const Forest&) const;

 private:
  std::vector<Tree> trees_;
  Schema schema_;
  std::vector<std::string> class_names_;
  std::size_t min_leaf_size_ = 1;
  std::uint64_t seed_ = 0;
};

// Random forest over a bootstrap sample per tree; each node scores ceil(sqrt(d))
// random attributes by weighted Gini reduction.
Forest train_forest(const Dataset& ds, std::size_t trees, std::size_t min_leaf_size,
                    std::uint64_t seed);
inline Forest train_forest(const Dataset& ds, const ForestParams& params) {
  return train_forest(ds, params.trees, params.min_leaf_size, params.seed);
}

// Alternative forest learners plug in through this signature.
using ForestTrainer = std::function<Forest(const Dataset&, const ForestParams&)>;

std::vector<LeafRef> collect_leaves(const Forest& forest);

// Majority vote over per-tree predictions. Ties are broken by the summed
// per-leaf class distributions of the tied classes, then by lowest index.
int resolve_votes(std::span<const int> votes, std::span<const std::vector<double>> distributions,
                  std::size_t num_classes);

nlohmann::json to_json(const Forest& forest);
Forest forest_from_json(const nlohmann::json& doc);

}  // namespace tlf
