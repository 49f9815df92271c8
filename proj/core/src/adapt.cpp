#include "tlf/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "tlf/errors.hpp"

namespace tlf {

namespace {

constexpr std::size_t kMinNeighbors = 4;
constexpr double kMinReciprocalCondition = 1e-13;

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

}  // namespace

// ---------------------------------------------------------------------------
// StackedPivots

Eigen::MatrixXd StackedPivots::rows() const {
  const auto np = source.rows();
  const auto width = std::max(source.cols(), target.cols());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * np, width);
  out.topLeftCorner(np, source.cols()) = source;
  out.bottomLeftCorner(np, target.cols()) = target;
  return out;
}

Eigen::MatrixXd StackedPivots::padded() const {
  const auto np = source.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * np, source.cols() + target.cols());
  out.topLeftCorner(np, source.cols()) = source;
  out.bottomRightCorner(np, target.cols()) = target;
  return out;
}

Eigen::MatrixXd StackedPivots::source_embedding() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * source.rows(), source.cols());
  out.topRows(source.rows()) = source;
  return out;
}

Eigen::MatrixXd StackedPivots::target_embedding() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * target.rows(), target.cols());
  out.bottomRows(target.rows()) = target;
  return out;
}

void StackedPivots::validate() const {
  if (source.rows() != target.rows()) throw DataError("source and target pivot counts differ");
  if (source.rows() < 1) throw DataError("at least one pivot is required (z >= 2)");
  if (labels.size() != z()) throw DataError("pivot label count must equal z");
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) throw DataError("pivot label outside the shared class set");
  }
  if (!source.allFinite() || !target.allFinite()) throw NumericalError("pivot centroids contain non-finite values");
}

StackedPivots stack_pivots(const PivotSet& pivots) {
  StackedPivots out;
  out.source = pivots.source_centroids;
  out.target = pivots.target_centroids;
  out.labels = pivots.source_labels;
  out.labels.insert(out.labels.end(), pivots.target_labels.begin(), pivots.target_labels.end());
  out.num_classes = pivots.shared_classes.size();
  return out;
}

// ---------------------------------------------------------------------------
// Kernel

Eigen::MatrixXd build_kernel(const StackedPivots& pivots, KernelKind kind) {
  if (pivots.z() < 2) throw DataError("kernel needs z >= 2");
  const Eigen::MatrixXd x = pivots.padded();
  if (!x.allFinite()) throw NumericalError("kernel input contains non-finite values");
  if (kind == KernelKind::linear) {
    Eigen::MatrixXd k = x * x.transpose();
    return (k + k.transpose()) / 2.0;
  }

  const auto z = x.rows();
  Eigen::MatrixXd sq(z, z);
  std::vector<double> distances;
  for (Eigen::Index i = 0; i < z; ++i) {
    sq(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < z; ++j) {
      const double d2 = (x.row(i) - x.row(j)).squaredNorm();
      sq(i, j) = sq(j, i) = d2;
      if (d2 > 0.0) distances.push_back(std::sqrt(d2));
    }
  }
  if (distances.empty()) throw NumericalError("rbf bandwidth is zero: all pivot rows are identical");
  std::sort(distances.begin(), distances.end());
  const auto m = distances.size();
  const double h = m % 2 == 1 ? distances[m / 2] : (distances[m / 2 - 1] + distances[m / 2]) / 2.0;
  return (-sq.array() / (2.0 * h * h)).exp().matrix();
}

// ---------------------------------------------------------------------------
// Adaptive factor

double a_distance(const Eigen::MatrixXd& first, const Eigen::MatrixXd& second) {
  if (first.rows() == 0 || second.rows() == 0) return 0.0;
  const auto n = first.rows() + second.rows();
  Eigen::MatrixXd design(n, first.cols() + 1);
  design.topLeftCorner(first.rows(), first.cols()) = first;
  design.bottomLeftCorner(second.rows(), second.cols()) = second;
  design.col(first.cols()).setOnes();
  Eigen::VectorXd target(n);
  target.head(first.rows()).setOnes();
  target.tail(second.rows()).setConstant(-1.0);

  const Eigen::VectorXd w = design.completeOrthogonalDecomposition().solve(target);
  const Eigen::VectorXd score = design * w;
  Eigen::Index errors = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double predicted = score(i) >= 0.0 ? 1.0 : -1.0;
    if (predicted != target(i)) ++errors;
  }
  const double err = static_cast<double>(errors) / static_cast<double>(n);
  return std::clamp(2.0 * (1.0 - 2.0 * err), 0.0, 2.0);
}

double mu_from_distances(double marginal, double conditional_sum) {
  const double denom = marginal + conditional_sum;
  if (denom <= 0.0) return 0.5;
  return std::clamp(1.0 - marginal / denom, 0.0, 1.0);
}

double compute_mu(const StackedPivots& pivots) {
  pivots.validate();
  const Eigen::MatrixXd x = pivots.rows();
  const auto np = idx(pivots.pivots());
  const double marginal = a_distance(x.topRows(np), x.bottomRows(np));

  double conditional = 0.0;
  for (std::size_t c = 0; c < pivots.num_classes; ++c) {
    std::vector<Eigen::Index> src;
    std::vector<Eigen::Index> tgt;
    for (Eigen::Index i = 0; i < 2 * np; ++i) {
      if (pivots.labels[static_cast<std::size_t>(i)] != static_cast<int>(c)) continue;
      (i < np ? src : tgt).push_back(i);
    }
    if (src.empty() || tgt.empty()) continue;
    conditional += a_distance(x(src, Eigen::all), x(tgt, Eigen::all));
  }
  return mu_from_distances(marginal, conditional);
}

// ---------------------------------------------------------------------------
// MMD

Eigen::MatrixXd marginal_mmd_matrix(std::size_t pivots) {
  const auto np = idx(pivots);
  const double v = 1.0 / (static_cast<double>(pivots) * static_cast<double>(pivots));
  Eigen::MatrixXd m(2 * np, 2 * np);
  m.setConstant(-v);
  m.topLeftCorner(np, np).setConstant(v);
  m.bottomRightCorner(np, np).setConstant(v);
  return m;
}

Eigen::MatrixXd build_mmd_matrix(const StackedPivots& pivots, double mu, CrossTermForm cross) {
  pivots.validate();
  if (!(mu >= 0.0 && mu <= 1.0)) throw DataError("adaptive factor must lie in [0, 1]");
  const auto np = pivots.pivots();
  const auto z = idx(pivots.z());
  Eigen::MatrixXd conditional = Eigen::MatrixXd::Zero(z, z);
  for (std::size_t c = 0; c < pivots.num_classes; ++c) {
    std::vector<Eigen::Index> src;
    std::vector<Eigen::Index> tgt;
    for (std::size_t i = 0; i < pivots.z(); ++i) {
      if (pivots.labels[i] != static_cast<int>(c)) continue;
      (i < np ? src : tgt).push_back(idx(i));
    }
    const double n = static_cast<double>(src.size());
    const double m = static_cast<double>(tgt.size());
    for (auto i : src) {
      for (auto j : src) conditional(i, j) += 1.0 / (n * n);
    }
    for (auto i : tgt) {
      for (auto j : tgt) conditional(i, j) += 1.0 / (m * m);
    }
    if (src.empty() || tgt.empty()) continue;
    const double off = cross == CrossTermForm::product ? -1.0 / (n * m) : -1.0 / (n * n * m * m);
    for (auto i : src) {
      for (auto j : tgt) {
        conditional(i, j) += off;
        conditional(j, i) += off;
      }
    }
  }
  return (1.0 - mu) * marginal_mmd_matrix(np) + mu * conditional;
}

// ---------------------------------------------------------------------------
// Manifold graph

double cosine_similarity(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                         const Eigen::Ref<const Eigen::RowVectorXd>& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

std::size_t auto_k(std::span<const int> sorted_labels, int query_label) {
  std::size_t k = std::min(kMinNeighbors, sorted_labels.size());
  while (k < sorted_labels.size() && sorted_labels[k] == query_label) ++k;
  return k;
}

std::vector<std::size_t> auto_knn(const StackedPivots& pivots, std::size_t row) {
  const auto z = pivots.z();
  if (z < kMinNeighbors + 1) {
    throw DataError("automatic k needs at least 5 pivot rows, got " + std::to_string(z));
  }
  if (row >= z) throw DataError("auto_knn row index out of range");
  const Eigen::MatrixXd x = pivots.rows();
  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(z - 1);
  for (std::size_t j = 0; j < z; ++j) {
    if (j == row) continue;
    order.emplace_back(1.0 - cosine_similarity(x.row(idx(row)), x.row(idx(j))), j);
  }
  std::sort(order.begin(), order.end());
  std::vector<int> labels;
  labels.reserve(order.size());
  for (const auto& [dist, j] : order) labels.push_back(pivots.labels[j]);
  const auto k = auto_k(labels, pivots.labels[row]);
  std::vector<std::size_t> neighbors;
  neighbors.reserve(k);
  for (std::size_t r = 0; r < k; ++r) neighbors.push_back(order[r].second);
  return neighbors;
}

Eigen::MatrixXd normalized_laplacian(const Eigen::MatrixXd& affinity) {
  const auto z = affinity.rows();
  const Eigen::VectorXd degree = affinity.rowwise().sum();
  Eigen::VectorXd scale(z);
  for (Eigen::Index i = 0; i < z; ++i) scale(i) = degree(i) > 0.0 ? 1.0 / std::sqrt(degree(i)) : 0.0;
  Eigen::MatrixXd lap = -(scale.asDiagonal() * affinity * scale.asDiagonal());
  lap.diagonal().array() += 1.0;
  for (Eigen::Index i = 0; i < z; ++i) {
    if (degree(i) > 0.0) continue;
    lap.row(i).setZero();
    lap.col(i).setZero();
    lap(i, i) = 1.0;
  }
  return (lap + lap.transpose()) / 2.0;
}

AffinityGraph build_laplacian(const StackedPivots& pivots) {
  pivots.validate();
  const auto z = pivots.z();
  const Eigen::MatrixXd x = pivots.rows();
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(idx(z), idx(z));
  for (std::size_t i = 0; i < z; ++i) {
    std::vector<std::size_t> neighbors;
    if (z < kMinNeighbors + 1) {
      for (std::size_t j = 0; j < z; ++j) {
        if (j != i) neighbors.push_back(j);
      }
    } else {
      neighbors = auto_knn(pivots, i);
    }
    for (auto j : neighbors) {
      const double w = std::max(0.0, cosine_similarity(x.row(idx(i)), x.row(idx(j))));
      b(idx(i), idx(j)) = w;
      b(idx(j), idx(i)) = w;
    }
  }
  b.diagonal().setZero();
  return {b, normalized_laplacian(b)};
}

// ---------------------------------------------------------------------------
// Coefficients and projection

Eigen::MatrixXd system_matrix(const Eigen::MatrixXd& kernel, const Eigen::MatrixXd& mmd,
                              const Eigen::MatrixXd& laplacian, const Regularization& reg) {
  const auto z = kernel.rows();
  if (kernel.cols() != z || mmd.rows() != z || mmd.cols() != z || laplacian.rows() != z ||
      laplacian.cols() != z) {
    throw DataError("kernel, MMD and Laplacian matrices must all be z x z");
  }
  if (reg.ridge < 0.0 || reg.mmd < 0.0 || reg.manifold < 0.0) {
    throw DataError("regularization coefficients must be non-negative");
  }
  Eigen::MatrixXd a = (reg.mmd * mmd + reg.manifold * laplacian) * kernel;
  a.diagonal().array() += reg.ridge;
  return a;
}

Eigen::MatrixXd compute_alpha(const Eigen::MatrixXd& kernel, const Eigen::MatrixXd& mmd,
                              const Eigen::MatrixXd& laplacian, const Regularization& reg,
                              AlphaMode mode) {
  Eigen::MatrixXd a = system_matrix(kernel, mmd, laplacian, reg);
  if (mode == AlphaMode::literal) return a;

  const auto z = a.rows();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const double rcond = lu.rcond();
  if (!(rcond > kMinReciprocalCondition)) {
    throw NumericalError("coefficient system is singular (reciprocal condition estimate " +
                         std::to_string(rcond) + ")");
  }
  Eigen::MatrixXd alpha = lu.solve(Eigen::MatrixXd::Identity(z, z));
  const double residual = (a * alpha - Eigen::MatrixXd::Identity(z, z)).norm();
  if (!alpha.allFinite() || residual > 1e-6 * static_cast<double>(z)) {
    throw NumericalError("coefficient solve residual " + std::to_string(residual) +
                         " exceeds tolerance (reciprocal condition estimate " + std::to_string(rcond) + ")");
  }
  return alpha;
}

Eigen::MatrixXd build_projection(const StackedPivots& pivots, const Eigen::MatrixXd& alpha) {
  const auto z = idx(pivots.z());
  if (alpha.rows() != z || alpha.cols() != z) {
    throw DataError("alpha is " + std::to_string(alpha.rows()) + "x" + std::to_string(alpha.cols()) +
                    " but z = " + std::to_string(z));
  }
  if (pivots.source.rows() != pivots.target.rows()) throw DataError("source and target pivot counts differ");
  Eigen::MatrixXd p = pivots.source_embedding().transpose() * alpha * pivots.target_embedding();
  if (!p.allFinite()) throw NumericalError("projection matrix contains non-finite values");
  return p;
}

AdaptationState adapt(const StackedPivots& pivots, const AdaptOptions& options) {
  pivots.validate();
  AdaptationState state;
  state.reg = options.reg;
  state.kernel = build_kernel(pivots, options.kernel);
  state.mu = compute_mu(pivots);
  state.mmd = build_mmd_matrix(pivots, state.mu, options.cross_term);
  auto graph = build_laplacian(pivots);
  state.affinity = std::move(graph.affinity);
  state.laplacian = std::move(graph.laplacian);
  state.alpha = compute_alpha(state.kernel, state.mmd, state.laplacian, options.reg, options.alpha_mode);
  if (options.alpha_mode == AlphaMode::inverse) {
    const auto z = state.alpha.rows();
    state.residual = (system_matrix(state.kernel, state.mmd, state.laplacian, options.reg) * state.alpha -
                      Eigen::MatrixXd::Identity(z, z))
                         .norm();
  }
  state.projection = build_projection(pivots, state.alpha);
  return state;
}

nlohmann::json diagnostics_json(const AdaptationState& state) {
  auto spectrum = [](const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues();
    return nlohmann::json{{"min", ev.minCoeff()}, {"max", ev.maxCoeff()}};
  };
  nlohmann::json out{{"z", state.kernel.rows()},
                     {"mu", state.mu},
                     {"ridge", state.reg.ridge},
                     {"mmd", state.reg.mmd},
                     {"manifold", state.reg.manifold},
                     {"kernel_spectrum", spectrum(state.kernel)},
                     {"mmd_spectrum", spectrum(state.mmd)},
                     {"laplacian_spectrum", spectrum(state.laplacian)},
                     {"graph_edges", (state.affinity.array() > 0.0).count() / 2},
                     {"projection_frobenius", state.projection.norm()}};
  if (state.residual) out["residual"] = *state.residual;
  return out;
}

const char* to_string(KernelKind kind) { return kind == KernelKind::linear ? "linear" : "rbf"; }
const char* to_string(AlphaMode mode) { return mode == AlphaMode::literal ? "literal" : "inverse"; }
const char* to_string(CrossTermForm form) { return form == CrossTermForm::product ? "product" : "squared"; }

KernelKind parse_kernel_kind(const std::string& text) {
  if (text == "linear") return KernelKind::linear;
  if (text == "rbf") return KernelKind::rbf;
  throw UsageError("unknown kernel '" + text + "' (expected linear or rbf)");
}

AlphaMode parse_alpha_mode(const std::string& text) {
  if (text == "literal") return AlphaMode::literal;
  if (text == "inverse") return AlphaMode::inverse;
  throw UsageError("unknown alpha mode '" + text + "' (expected literal or inverse)");
}

CrossTermForm parse_cross_term(const std::string& text) {
  if (text == "product") return CrossTermForm::product;
  if (text == "squared") return CrossTermForm::squared;
  throw UsageError("unknown MMD cross term '" + text + "' (expected product or squared)");
}

}  // namespace tlf
