#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "tlf/adapt.hpp"
#include "tlf/dataset.hpp"
#include "tlf/forest.hpp"
#include "tlf/pivot.hpp"

namespace tlf {

struct TlfConfig {
  std::size_t trees = 10;
  std::size_t min_leaf_size_small = 20;
  std::size_t min_leaf_size_large = 50;
  std::size_t large_threshold = 10000;  // datasets with more records count as large
  double pivot_threshold = 0.1;
  Regularization reg;
  KernelKind kernel = KernelKind::linear;
  AlphaMode alpha_mode = AlphaMode::literal;
  CrossTermForm cross_term = CrossTermForm::product;
  std::uint64_t seed = 0;

  void validate() const;
  AdaptOptions adapt_options() const { return {kernel, alpha_mode, cross_term, reg}; }
};

std::size_t min_leaf_size_for(std::size_t records, const TlfConfig& cfg);

struct TlfDiagnostics {
  std::size_t source_leaves = 0;
  std::size_t target_leaves = 0;
  std::size_t source_distributions = 0;  // after dedup
  std::size_t target_distributions = 0;
  std::size_t pivots = 0;
  std::vector<double> divergences;
  std::optional<double> mu;
  std::size_t selected_records = 0;
  std::size_t dropped_records = 0;  // selected but labelled outside the target classes
  std::size_t merged_records = 0;
  nlohmann::json adaptation;  // null when step 4 did not run
};

struct TlfModel {
  Forest forest;  // trained on the one-hot encoded target schema
  std::optional<Eigen::MatrixXd> projection;
  Schema target_schema;  // raw (pre-encoding) target schema
  TlfDiagnostics diagnostics;
  bool fallback = false;

  // Accepts records in either the raw or the encoded target schema.
  std::vector<int> predict(const Dataset& ds) const;
};

// Sorted indices of source records that belong to at least one leaf whose
// deduplicated distribution row was matched as a source pivot.
std::vector<std::size_t> select_transferable(std::span<const LeafRef> leaves, const PivotSet& pivots,
                                             std::span<const std::size_t> dedup_map);

struct ProjectedRecords {
  std::optional<Dataset> data;  // empty when nothing survives
  std::size_t dropped = 0;      // records whose label is not a target class
};

// Multiplies each encoded source row by `projection` and relabels it through
// class names into `target_classes`.
ProjectedRecords project_records(const Dataset& encoded_source, const Eigen::MatrixXd& projection,
                                 const Schema& target_schema,
                                 const std::vector<std::string>& target_classes);

Forest train_target_only(const Dataset& target, const TlfConfig& cfg);

TlfModel run_tlf(const Dataset& source, const Dataset& target, const TlfConfig& cfg,
                 const ForestTrainer& trainer = {});

nlohmann::json to_json(const TlfDiagnostics& diagnostics);

// Writes forest.json, projection.csv (row-major) and diagnostics.json.
void save_model(const TlfModel& model, const std::filesystem::path& dir);
TlfModel load_model(const std::filesystem::path& dir);

}  // namespace tlf
