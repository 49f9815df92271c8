#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "tlf/pivot.hpp"

namespace tlf {

// The z = 2*N_p pivot centroids, source rows first. Labels index the shared
// class set.
struct StackedPivots {
  Eigen::MatrixXd source;  // N_p x d_s
  Eigen::MatrixXd target;  // N_p x d_t
  std::vector<int> labels; // z
  std::size_t num_classes = 0;

  std::size_t pivots() const noexcept { return static_cast<std::size_t>(source.rows()); }
  std::size_t z() const noexcept { return 2 * pivots(); }
  std::size_t source_dims() const noexcept { return static_cast<std::size_t>(source.cols()); }
  std::size_t target_dims() const noexcept { return static_cast<std::size_t>(target.cols()); }

  // z x max(d_s, d_t), every row left-aligned and zero-filled.
  Eigen::MatrixXd rows() const;
  // z x (d_s + d_t): source rows in the first d_s columns, target rows in the last d_t.
  Eigen::MatrixXd padded() const;
  // z x d_s with the source block on top, zeros below.
  Eigen::MatrixXd source_embedding() const;
  // z x d_t with zeros on top, the target block below.
  Eigen::MatrixXd target_embedding() const;

  void validate() const;
};

StackedPivots stack_pivots(const PivotSet& pivots);

enum class KernelKind { linear, rbf };
enum class AlphaMode { literal, inverse };
// Cross-domain entry of the per-class MMD block: -1/(n_c m_c), or the
// -1/(n_c^2 m_c^2) form kept for compatibility.
enum class CrossTermForm { product, squared };

struct Regularization {
  double ridge = 0.001;
  double mmd = 5.0;
  double manifold = 0.01;
};

Eigen::MatrixXd build_kernel(const StackedPivots& pivots, KernelKind kind);

// Proxy A-distance 2(1 - 2*err) of a least-squares linear separator trained and
// scored on the same rows; clamped to [0, 2]. Zero when either side is empty.
double a_distance(const Eigen::MatrixXd& first, const Eigen::MatrixXd& second);
double mu_from_distances(double marginal, double conditional_sum);
double compute_mu(const StackedPivots& pivots);

Eigen::MatrixXd marginal_mmd_matrix(std::size_t pivots);
Eigen::MatrixXd build_mmd_matrix(const StackedPivots& pivots, double mu,
                                 CrossTermForm cross = CrossTermForm::product);

// Neighbor count for a query given the labels of the other rows in ascending
// distance order: the first four always, then every following row until the
// first label that differs from the query's.
std::size_t auto_k(std::span<const int> sorted_labels, int query_label);
std::vector<std::size_t> auto_knn(const StackedPivots& pivots, std::size_t row);

double cosine_similarity(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                         const Eigen::Ref<const Eigen::RowVectorXd>& b);

struct AffinityGraph {
  Eigen::MatrixXd affinity;   // B
  Eigen::MatrixXd laplacian;  // I - D^-1/2 B D^-1/2
};

Eigen::MatrixXd normalized_laplacian(const Eigen::MatrixXd& affinity);
AffinityGraph build_laplacian(const StackedPivots& pivots);

Eigen::MatrixXd system_matrix(const Eigen::MatrixXd& kernel, const Eigen::MatrixXd& mmd,
                              const Eigen::MatrixXd& laplacian, const Regularization& reg);
Eigen::MatrixXd compute_alpha(const Eigen::MatrixXd& kernel, const Eigen::MatrixXd& mmd,
                              const Eigen::MatrixXd& laplacian, const Regularization& reg,
                              AlphaMode mode);

Eigen::MatrixXd build_projection(const StackedPivots& pivots, const Eigen::MatrixXd& alpha);

struct AdaptOptions {
  KernelKind kernel = KernelKind::linear;
  AlphaMode alpha_mode = AlphaMode::literal;
  CrossTermForm cross_term = CrossTermForm::product;
  Regularization reg;
};

struct AdaptationState {
  Eigen::MatrixXd kernel;
  Eigen::MatrixXd mmd;
  double mu = 0.5;
  Eigen::MatrixXd affinity;
  Eigen::MatrixXd laplacian;
  Eigen::MatrixXd alpha;
  Eigen::MatrixXd projection;  // d_s x d_t
  Regularization reg;
  std::optional<double> residual;  // inverse mode only
};

AdaptationState adapt(const StackedPivots& pivots, const AdaptOptions& options);

nlohmann::json diagnostics_json(const AdaptationState& state);

const char* to_string(KernelKind kind);
const char* to_string(AlphaMode mode);
const char* to_string(CrossTermForm form);
KernelKind parse_kernel_kind(const std::string& text);
AlphaMode parse_alpha_mode(const std::string& text);
CrossTermForm parse_cross_term(const std::string& text);

}  // namespace tlf
