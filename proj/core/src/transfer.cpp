#include "tlf/transfer.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "tlf/errors.hpp"
#include "log.hpp"

namespace tlf {

namespace {

Forest train_with(const ForestTrainer& trainer, const Dataset& ds, const ForestParams& params) {
  return trainer ? trainer(ds, params) : train_forest(ds, params);
}

template <typename F>
auto at_step(int step, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const PipelineError&) {
    throw;
  } catch (const NumericalError& e) {
    throw NumericalError("step " + std::to_string(step) + ": " + e.what());
  } catch (const DataError& e) {
    throw PipelineError(step, e.what());
  }
}

nlohmann::json schema_json(const Schema& schema) {
  auto out = nlohmann::json::array();
  for (const auto& a : schema) {
    out.push_back({{"name", a.name}, {"kind", to_string(a.kind)}, {"categories", a.categories}});
  }
  return out;
}

Schema schema_from(const nlohmann::json& doc) {
  Schema schema;
  for (const auto& a : doc) {
    const auto kind = a.at("kind").get<std::string>();
    schema.push_back({a.at("name").get<std::string>(),
                      kind == "categorical" ? AttributeKind::categorical : AttributeKind::numeric,
                      a.at("categories").get<std::vector<std::string>>()});
  }
  return schema;
}

}  // namespace

void TlfConfig::validate() const {
  if (trees < 1) throw UsageError("trees must be at least 1");
  if (min_leaf_size_small < 1 || min_leaf_size_large < 1) throw UsageError("minimum leaf sizes must be at least 1");
  if (large_threshold < 1) throw UsageError("large_threshold must be at least 1");
  if (!(pivot_threshold > 0.0 && pivot_threshold < 1.0)) throw UsageError("pivot_threshold must lie in (0, 1)");
  if (reg.ridge < 0.0 || reg.mmd < 0.0 || reg.manifold < 0.0) {
    throw UsageError("regularization coefficients must be non-negative");
  }
}

std::size_t min_leaf_size_for(std::size_t records, const TlfConfig& cfg) {
  return records > cfg.large_threshold ? cfg.min_leaf_size_large : cfg.min_leaf_size_small;
}

std::vector<int> TlfModel::predict(const Dataset& ds) const {
  if (ds.schema() == forest.schema()) return forest.predict(ds);
  if (ds.schema() == target_schema) return forest.predict(one_hot_encode(ds));
  throw SchemaError("records match neither the raw nor the encoded target schema");
}

std::vector<std::size_t> select_transferable(std::span<const LeafRef> leaves, const PivotSet& pivots,
                                             std::span<const std::size_t> dedup_map) {
  if (dedup_map.size() != leaves.size()) throw DataError("dedup map must cover every leaf");
  std::set<std::size_t> matched;
  for (const auto& p : pivots.pairs) matched.insert(p.source_row);
  std::set<std::size_t> selected;
  for (std::size_t l = 0; l < leaves.size(); ++l) {
    if (matched.count(dedup_map[l]) == 0) continue;
    selected.insert(leaves[l].members.begin(), leaves[l].members.end());
  }
  return {selected.begin(), selected.end()};
}

ProjectedRecords project_records(const Dataset& encoded_source, const Eigen::MatrixXd& projection,
                                 const Schema& target_schema,
                                 const std::vector<std::string>& target_classes) {
  if (!encoded_source.all_numeric()) throw PreconditionError("projection needs one-hot encoded source records");
  if (static_cast<std::size_t>(projection.rows()) != encoded_source.dims()) {
    throw DataError("projection has " + std::to_string(projection.rows()) + " rows but the source has " +
                    std::to_string(encoded_source.dims()) + " columns");
  }
  if (static_cast<std::size_t>(projection.cols()) != target_schema.size()) {
    throw DataError("projection width does not match the target schema");
  }
  std::vector<Eigen::Index> keep;
  std::vector<int> labels;
  ProjectedRecords out;
  for (std::size_t i = 0; i < encoded_source.size(); ++i) {
    const auto& name = encoded_source.class_names()[static_cast<std::size_t>(encoded_source.label(i))];
    auto it = std::find(target_classes.begin(), target_classes.end(), name);
    if (it == target_classes.end()) {
      ++out.dropped;
      continue;
    }
    keep.push_back(static_cast<Eigen::Index>(i));
    labels.push_back(static_cast<int>(it - target_classes.begin()));
  }
  if (out.dropped > 0) {
    log::warn("dropped {} source records whose labels are not target classes", out.dropped);
  }
  if (keep.empty()) return out;
  Eigen::MatrixXd cells = encoded_source.cells()(keep, Eigen::all) * projection;
  out.data.emplace(target_schema, std::move(cells), std::move(labels), target_classes, DomainTag::target,
                   encoded_source.label_name());
  return out;
}

Forest train_target_only(const Dataset& target, const TlfConfig& cfg) {
  const Dataset encoded = one_hot_encode(target);
  return train_forest(encoded, cfg.trees, min_leaf_size_for(encoded.size(), cfg), cfg.seed);
}

TlfModel run_tlf(const Dataset& source, const Dataset& target, const TlfConfig& cfg,
                 const ForestTrainer& trainer) {
  cfg.validate();
  if (source.has_missing() || target.has_missing()) {
    throw PreconditionError("run_tlf needs repaired datasets (missing cells present)");
  }
  {
    bool shared = false;
    for (const auto& c : source.class_names()) {
      shared = shared || std::find(target.class_names().begin(), target.class_names().end(), c) !=
                             target.class_names().end();
    }
    if (!shared) throw PipelineError(3, "source and target share no class labels");
  }

  TlfModel model;
  model.target_schema = target.schema();
  auto& diag = model.diagnostics;

  const Dataset enc_source = one_hot_encode(source).with_domain(DomainTag::source);
  const Dataset enc_target = one_hot_encode(target).with_domain(DomainTag::target);

  // Step 1: forests, leaves, distributions and centroids.
  const ForestParams target_params{cfg.trees, min_leaf_size_for(enc_target.size(), cfg), cfg.seed};
  const ForestParams source_params{cfg.trees, min_leaf_size_for(enc_source.size(), cfg), cfg.seed + 1};
  Forest target_forest = at_step(1, [&] { return train_with(trainer, enc_target, target_params); });
  const Forest source_forest = at_step(1, [&] { return train_with(trainer, enc_source, source_params); });
  const auto source_leaves = collect_leaves(source_forest);
  const auto target_leaves = collect_leaves(target_forest);
  diag.source_leaves = source_leaves.size();
  diag.target_leaves = target_leaves.size();
  const auto source_bundle = at_step(1, [&] { return extract_distributions(enc_source, source_leaves); });
  const auto target_bundle = at_step(1, [&] { return extract_distributions(enc_target, target_leaves); });

  // Step 2: deduplicate.
  const auto source_dedup = dedup_with_map(source_bundle);
  const auto target_dedup = dedup_with_map(target_bundle);
  diag.source_distributions = source_dedup.bundle.rows();
  diag.target_distributions = target_dedup.bundle.rows();

  // Step 3: pivots.
  const PivotSet pivots =
      at_step(3, [&] { return match_pivots(source_dedup.bundle, target_dedup.bundle, cfg.pivot_threshold); });
  diag.pivots = pivots.size();
  for (const auto& p : pivots.pairs) diag.divergences.push_back(p.divergence);

  auto fall_back = [&](const char* reason) {
    log::info("falling back to the target-only forest: {}", reason);
    model.fallback = true;
    model.projection.reset();
    model.forest = std::move(target_forest);
    diag.merged_records = enc_target.size();
    return std::move(model);
  };
  if (pivots.size() == 0) return fall_back("no pivots below the divergence threshold");

  // Step 4: projection matrix.
  const StackedPivots stacked = stack_pivots(pivots);
  const AdaptationState state = at_step(4, [&] { return adapt(stacked, cfg.adapt_options()); });
  diag.mu = state.mu;
  diag.adaptation = diagnostics_json(state);

  // Step 5: transfer, merge, final forest.
  const auto selected = select_transferable(source_leaves, pivots, source_dedup.row_of);
  diag.selected_records = selected.size();
  if (selected.empty()) return fall_back("no transferable source records");
  const Dataset transferable = enc_source.subset(selected);
  auto projected = at_step(5, [&] {
    return project_records(transferable, state.projection, enc_target.schema(), enc_target.class_names());
  });
  diag.dropped_records = projected.dropped;
  if (!projected.data) return fall_back("no transferable source record has a target class");

  const Dataset merged = at_step(5, [&] { return concat(enc_target, *projected.data); });
  diag.merged_records = merged.size();
  const ForestParams final_params{cfg.trees, min_leaf_size_for(merged.size(), cfg), cfg.seed};
  model.forest = at_step(5, [&] { return train_with(trainer, merged, final_params); });
  model.projection = state.projection;
  model.fallback = false;
  return model;
}

nlohmann::json to_json(const TlfDiagnostics& d) {
  nlohmann::json out{{"source_leaves", d.source_leaves},
                     {"target_leaves", d.target_leaves},
                     {"source_distributions", d.source_distributions},
                     {"target_distributions", d.target_distributions},
                     {"pivots", d.pivots},
                     {"divergences", d.divergences},
                     {"selected_records", d.selected_records},
                     {"dropped_records", d.dropped_records},
                     {"merged_records", d.merged_records},
                     {"adaptation", d.adaptation}};
  out["mu"] = d.mu ? nlohmann::json(*d.mu) : nlohmann::json(nullptr);
  return out;
}

void save_model(const TlfModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "forest.json");
    if (!out) throw DataError("cannot write " + (dir / "forest.json").string());
    out << to_json(model.forest).dump() << '\n';
  }
  {
    std::ofstream out(dir / "projection.csv");
    if (!out) throw DataError("cannot write " + (dir / "projection.csv").string());
    if (model.projection) {
      const auto& p = *model.projection;
      char buf[64];
      for (Eigen::Index i = 0; i < p.rows(); ++i) {
        for (Eigen::Index j = 0; j < p.cols(); ++j) {
          auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), p(i, j));
          if (j > 0) out << ',';
          out.write(buf, end - buf);
        }
        out << '\n';
      }
    }
  }
  {
    std::ofstream out(dir / "diagnostics.json");
    if (!out) throw DataError("cannot write " + (dir / "diagnostics.json").string());
    nlohmann::json doc{{"fallback", model.fallback},
                       {"target_schema", schema_json(model.target_schema)},
                       {"diagnostics", to_json(model.diagnostics)}};
    out << doc.dump(2) << '\n';
  }
}

TlfModel load_model(const std::filesystem::path& dir) {
  TlfModel model;
  try {
    std::ifstream forest_in(dir / "forest.json");
    if (!forest_in) throw DataError("cannot open " + (dir / "forest.json").string());
    model.forest = forest_from_json(nlohmann::json::parse(forest_in));

    std::ifstream diag_in(dir / "diagnostics.json");
    if (!diag_in) throw DataError("cannot open " + (dir / "diagnostics.json").string());
    const auto doc = nlohmann::json::parse(diag_in);
    model.fallback = doc.at("fallback").get<bool>();
    model.target_schema = schema_from(doc.at("target_schema"));
    const auto& d = doc.at("diagnostics");
    auto& diag = model.diagnostics;
    diag.source_leaves = d.at("source_leaves").get<std::size_t>();
    diag.target_leaves = d.at("target_leaves").get<std::size_t>();
    diag.source_distributions = d.at("source_distributions").get<std::size_t>();
    diag.target_distributions = d.at("target_distributions").get<std::size_t>();
    diag.pivots = d.at("pivots").get<std::size_t>();
    diag.divergences = d.at("divergences").get<std::vector<double>>();
    diag.selected_records = d.at("selected_records").get<std::size_t>();
    diag.dropped_records = d.at("dropped_records").get<std::size_t>();
    diag.merged_records = d.at("merged_records").get<std::size_t>();
    diag.adaptation = d.at("adaptation");
    if (!d.at("mu").is_null()) diag.mu = d.at("mu").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model files: ") + e.what());
  }

  std::ifstream proj_in(dir / "projection.csv");
  if (!proj_in) throw DataError("cannot open " + (dir / "projection.csv").string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(proj_in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{}) throw DataError("malformed projection.csv cell '" + cell + "'");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) throw DataError("ragged projection.csv");
    rows.push_back(std::move(row));
  }
  if (!rows.empty()) {
    Eigen::MatrixXd p(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < rows[i].size(); ++j) {
        p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
      }
    }
    model.projection = std::move(p);
  }
  if (model.fallback == model.projection.has_value()) {
    throw DataError("model files disagree: fallback flag and projection presence must differ");
  }
  return model;
}

}  // namespace tlf
