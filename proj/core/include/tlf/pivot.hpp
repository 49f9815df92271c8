#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "tlf/dataset.hpp"
#include "tlf/forest.hpp"

namespace tlf {

// Per-leaf label distributions (V), centroids (W) and centroid labels (R) of
// one domain. Row i of each matrix describes the same leaf (or merged leaves).
struct DistributionBundle {
  Eigen::MatrixXd distributions;  // L x C, rows sum to 1
  Eigen::MatrixXd centroids;      // L x d
  std::vector<int> labels;        // L, argmax of each distribution row
  std::vector<AttributeKind> kinds;
  std::vector<std::string> class_names;
  DomainTag domain = DomainTag::source;

  std::size_t rows() const noexcept { return labels.size(); }
};

struct PivotPair {
  std::size_t source_row = 0;
  std::size_t target_row = 0;
  double divergence = 0.0;

  bool operator==(const PivotPair&) const = default;
};

// Matched rows of the deduplicated bundles. Labels are indices into
// `shared_classes`, the class names present in both domains (source order).
struct PivotSet {
  std::vector<PivotPair> pairs;
  Eigen::MatrixXd source_centroids;  // N_p x d_s
  Eigen::MatrixXd target_centroids;  // N_p x d_t
  std::vector<int> source_labels;
  std::vector<int> target_labels;
  std::vector<std::string> shared_classes;

  std::size_t size() const noexcept { return pairs.size(); }
};

// Leaf centroid cell for a numeric attribute: mean + ln(sample std), with the
// log term dropped when the std is zero or there is a single value.
double numeric_centroid(std::span<const double> values);

DistributionBundle extract_distributions(const Dataset& ds, std::span<const LeafRef> leaves);

struct DedupResult {
  DistributionBundle bundle;
  std::vector<std::size_t> row_of;  // input row -> output row
};

// Merges rows whose distributions agree after rounding to 6 decimals.
DedupResult dedup_with_map(const DistributionBundle& bundle);
DistributionBundle dedup(const DistributionBundle& bundle);

// Jensen-Shannon divergence with base-2 logarithms, in [0, 1].
double jsd(std::span<const double> p, std::span<const double> q);

// Greedy one-to-one selection over a divergence matrix: all cells below
// `threshold`, ascending by (divergence, source row, target row).
std::vector<PivotPair> select_pivot_pairs(const Eigen::MatrixXd& divergence, double threshold);

PivotSet match_pivots(const DistributionBundle& source, const DistributionBundle& target,
                      double threshold);

nlohmann::json to_json(const DistributionBundle& bundle);
nlohmann::json to_json(const PivotSet& pivots);

}  // namespace tlf
