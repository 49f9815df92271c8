#include "tlf/pivot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <nlohmann/json.hpp>

#include "tlf/errors.hpp"

namespace tlf {

namespace {

constexpr double kDistributionTolerance = 1e-9;

int argmax_row(const Eigen::MatrixXd& m, Eigen::Index row) {
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < m.cols(); ++c) {
    if (m(row, c) > m(row, best)) best = c;
  }
  return static_cast<int>(best);
}

double mode_of(std::span<const double> category_indices) {
  std::map<double, std::size_t> counts;
  for (double v : category_indices) ++counts[v];
  double best = 0.0;
  std::size_t best_count = 0;
  for (const auto& [value, count] : counts) {  // ascending, so ties keep the lowest index
    if (count > best_count) {
      best = value;
      best_count = count;
    }
  }
  return best;
}

void check_distribution(std::span<const double> p) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DataError("distribution has a negative or non-finite entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kDistributionTolerance) throw DataError("distribution does not sum to 1");
}

double xlog2_ratio(double x, double m) { return x > 0.0 ? x * std::log2(x / m) : 0.0; }

}  // namespace

double numeric_centroid(std::span<const double> values) {
  if (values.empty()) throw DataError("centroid of an empty leaf");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() < 2) return mean;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (sd == 0.0) return mean;
  return mean + std::log(sd);
}

DistributionBundle extract_distributions(const Dataset& ds, std::span<const LeafRef> leaves) {
  const auto classes = ds.num_classes();
  const auto d = ds.dims();
  DistributionBundle out;
  out.distributions = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(leaves.size()),
                                            static_cast<Eigen::Index>(classes));
  out.centroids = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(leaves.size()),
                                        static_cast<Eigen::Index>(d));
  out.labels.reserve(leaves.size());
  out.class_names = ds.class_names();
  out.domain = ds.domain();
  for (const auto& a : ds.schema()) out.kinds.push_back(a.kind);

  std::vector<double> column;
  for (std::size_t l = 0; l < leaves.size(); ++l) {
    const auto& members = leaves[l].members;
    if (members.empty()) {
      throw DataError("leaf " + std::to_string(leaves[l].leaf_id) + " of tree " +
                      std::to_string(leaves[l].tree) + " has no members");
    }
    const auto row = static_cast<Eigen::Index>(l);
    for (auto i : members) {
      if (i >= ds.size()) throw DataError("leaf member index out of range");
      out.distributions(row, ds.label(i)) += 1.0;
    }
    out.distributions.row(row) /= static_cast<double>(members.size());
    out.labels.push_back(argmax_row(out.distributions, row));

    for (std::size_t j = 0; j < d; ++j) {
      column.clear();
      for (auto i : members) column.push_back(ds.cell(i, j));
      out.centroids(row, static_cast<Eigen::Index>(j)) =
          ds.schema()[j].kind == AttributeKind::numeric ? numeric_centroid(column) : mode_of(column);
    }
  }
  return out;
}

DedupResult dedup_with_map(const DistributionBundle& bundle) {
  const auto rows = bundle.rows();
  const auto classes = bundle.distributions.cols();
  std::map<std::vector<long long>, std::size_t> seen;
  std::vector<std::vector<std::size_t>> groups;
  DedupResult result;
  result.row_of.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<long long> key(static_cast<std::size_t>(classes));
    for (Eigen::Index c = 0; c < classes; ++c) {
      key[static_cast<std::size_t>(c)] =
          std::llround(bundle.distributions(static_cast<Eigen::Index>(i), c) * 1e6);
    }
    auto [it, inserted] = seen.emplace(std::move(key), groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
    result.row_of[i] = it->second;
  }

  auto& out = result.bundle;
  out.kinds = bundle.kinds;
  out.class_names = bundle.class_names;
  out.domain = bundle.domain;
  out.distributions.resize(static_cast<Eigen::Index>(groups.size()), classes);
  out.centroids.resize(static_cast<Eigen::Index>(groups.size()), bundle.centroids.cols());
  std::vector<double> column;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto row = static_cast<Eigen::Index>(g);
    const auto& members = groups[g];
    out.distributions.row(row) = bundle.distributions.row(static_cast<Eigen::Index>(members.front()));
    out.labels.push_back(argmax_row(out.distributions, row));
    for (Eigen::Index j = 0; j < bundle.centroids.cols(); ++j) {
      column.clear();
      for (auto i : members) column.push_back(bundle.centroids(static_cast<Eigen::Index>(i), j));
      const bool categorical = static_cast<std::size_t>(j) < bundle.kinds.size() &&
                               bundle.kinds[static_cast<std::size_t>(j)] == AttributeKind::categorical;
      out.centroids(row, j) =
          categorical ? mode_of(column)
                      : std::accumulate(column.begin(), column.end(), 0.0) /
                            static_cast<double>(column.size());
    }
  }
  return result;
}

DistributionBundle dedup(const DistributionBundle& bundle) { return dedup_with_map(bundle).bundle; }

double jsd(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw DataError("jsd: distributions have different lengths");
  if (p.empty()) throw DataError("jsd: empty distributions");
  check_distribution(p);
  check_distribution(q);
  double kl_p = 0.0;
  double kl_q = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    kl_p += xlog2_ratio(p[i], m);
    kl_q += xlog2_ratio(q[i], m);
  }
  return std::clamp(0.5 * kl_p + 0.5 * kl_q, 0.0, 1.0);
}

std::vector<PivotPair> select_pivot_pairs(const Eigen::MatrixXd& divergence, double threshold) {
  std::vector<PivotPair> candidates;
  for (Eigen::Index i = 0; i < divergence.rows(); ++i) {
    for (Eigen::Index k = 0; k < divergence.cols(); ++k) {
      if (divergence(i, k) < threshold) {
        candidates.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(k), divergence(i, k)});
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const PivotPair& a, const PivotPair& b) {
    if (a.divergence != b.divergence) return a.divergence < b.divergence;
    if (a.source_row != b.source_row) return a.source_row < b.source_row;
    return a.target_row < b.target_row;
  });
  std::vector<bool> used_source(static_cast<std::size_t>(divergence.rows()), false);
  std::vector<bool> used_target(static_cast<std::size_t>(divergence.cols()), false);
  std::vector<PivotPair> pairs;
  for (const auto& c : candidates) {
    if (used_source[c.source_row] || used_target[c.target_row]) continue;
    used_source[c.source_row] = true;
    used_target[c.target_row] = true;
    pairs.push_back(c);
  }
  return pairs;
}

PivotSet match_pivots(const DistributionBundle& source, const DistributionBundle& target,
                      double threshold) {
  PivotSet out;
  std::vector<std::size_t> source_cols;
  std::vector<std::size_t> target_cols;
  for (std::size_t c = 0; c < source.class_names.size(); ++c) {
    auto it = std::find(target.class_names.begin(), target.class_names.end(), source.class_names[c]);
    if (it == target.class_names.end()) continue;
    out.shared_classes.push_back(source.class_names[c]);
    source_cols.push_back(c);
    target_cols.push_back(static_cast<std::size_t>(it - target.class_names.begin()));
  }
  if (out.shared_classes.empty()) throw DataError("source and target share no class labels");

  // Restrict each row to the shared classes and renormalize; rows with no
  // shared mass cannot be compared.
  auto restrict = [](const DistributionBundle& b, const std::vector<std::size_t>& cols) {
    std::vector<std::vector<double>> rows(b.rows());
    for (std::size_t i = 0; i < b.rows(); ++i) {
      std::vector<double> p;
      double mass = 0.0;
      for (auto c : cols) {
        p.push_back(b.distributions(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)));
        mass += p.back();
      }
      if (mass <= 0.0) continue;
      for (auto& v : p) v /= mass;
      rows[i] = std::move(p);
    }
    return rows;
  };
  const auto src = restrict(source, source_cols);
  const auto tgt = restrict(target, target_cols);

  Eigen::MatrixXd divergence(static_cast<Eigen::Index>(src.size()), static_cast<Eigen::Index>(tgt.size()));
  for (std::size_t i = 0; i < src.size(); ++i) {
    for (std::size_t k = 0; k < tgt.size(); ++k) {
      divergence(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          src[i].empty() || tgt[k].empty() ? std::numeric_limits<double>::infinity() : jsd(src[i], tgt[k]);
    }
  }
  out.pairs = select_pivot_pairs(divergence, threshold);

  const auto np = static_cast<Eigen::Index>(out.pairs.size());
  out.source_centroids.resize(np, source.centroids.cols());
  out.target_centroids.resize(np, target.centroids.cols());
  auto shared_argmax = [](const std::vector<double>& p) {
    return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
  };
  for (Eigen::Index k = 0; k < np; ++k) {
    const auto& pair = out.pairs[static_cast<std::size_t>(k)];
    out.source_centroids.row(k) = source.centroids.row(static_cast<Eigen::Index>(pair.source_row));
    out.target_centroids.row(k) = target.centroids.row(static_cast<Eigen::Index>(pair.target_row));
    out.source_labels.push_back(shared_argmax(src[pair.source_row]));
    out.target_labels.push_back(shared_argmax(tgt[pair.target_row]));
  }
  return out;
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

nlohmann::json to_json(const DistributionBundle& bundle) {
  return {{"domain", bundle.domain == DomainTag::source ? "source" : "target"},
          {"class_names", bundle.class_names},
          {"distributions", matrix_to_json(bundle.distributions)},
          {"centroids", matrix_to_json(bundle.centroids)},
          {"labels", bundle.labels}};
}

nlohmann::json to_json(const PivotSet& pivots) {
  auto pairs = nlohmann::json::array();
  for (const auto& p : pivots.pairs) {
    pairs.push_back({{"source_row", p.source_row}, {"target_row", p.target_row}, {"divergence", p.divergence}});
  }
  return {{"count", pivots.size()},
          {"shared_classes", pivots.shared_classes},
          {"pairs", std::move(pairs)},
          {"source_labels", pivots.source_labels},
          {"target_labels", pivots.target_labels},
          {"source_centroids", matrix_to_json(pivots.source_centroids)},
          {"target_centroids", matrix_to_json(pivots.target_centroids)}};
}

}  // namespace tlf
