#include "tlf/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "tlf/errors.hpp"

namespace tlf {

namespace {

// q_alpha for k = 2..20 (studentized range with infinite degrees of freedom / sqrt 2).
constexpr std::array<double, 19> kQ010{1.645, 2.052, 2.291, 2.460, 2.589, 2.693, 2.780, 2.855, 2.920, 2.978,
                                       3.030, 3.077, 3.120, 3.159, 3.196, 3.230, 3.261, 3.291, 3.319};
constexpr std::array<double, 19> kQ005{1.960, 2.344, 2.569, 2.728, 2.850, 2.948, 3.031, 3.102, 3.164, 3.219,
                                       3.268, 3.313, 3.354, 3.391, 3.426, 3.458, 3.489, 3.517, 3.544};
constexpr std::array<double, 19> kQ0025{2.241, 2.604, 2.817, 2.968, 3.084, 3.177, 3.256, 3.324, 3.383, 3.435,
                                        3.482, 3.525, 3.564, 3.600, 3.634, 3.665, 3.694, 3.721, 3.747};

}  // namespace

double sign_test(std::size_t wins, std::size_t losses) {
  const auto n = wins + losses;
  if (n == 0) throw DataError("sign test needs at least one non-tied comparison");
  const double nn = static_cast<double>(n);
  return (static_cast<double>(wins) - nn / 2.0 - 0.5) / (std::sqrt(nn) / 2.0);
}

SignCounts count_signs(std::span<const double> first, std::span<const double> second) {
  if (first.size() != second.size()) throw DataError("paired score lists differ in length");
  SignCounts out;
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (first[i] > second[i]) {
      ++out.wins;
    } else if (first[i] < second[i]) {
      ++out.losses;
    } else {
      ++out.ties;
    }
  }
  return out;
}

double nemenyi_cd(std::size_t num_methods, std::size_t num_datasets, double q_alpha) {
  if (num_methods < 2 || num_datasets < 2) throw DataError("Nemenyi test needs at least 2 methods and 2 datasets");
  if (!(q_alpha > 0.0)) throw DataError("q_alpha must be positive");
  const double k = static_cast<double>(num_methods);
  const double n = static_cast<double>(num_datasets);
  return q_alpha * std::sqrt(k * (k + 1.0) / (6.0 * n));
}

double nemenyi_q(std::size_t num_methods, double alpha) {
  if (num_methods < 2 || num_methods > 20) throw DataError("Nemenyi table covers 2 to 20 methods");
  const auto i = num_methods - 2;
  if (std::abs(alpha - 0.10) < 1e-12) return kQ010[i];
  if (std::abs(alpha - 0.05) < 1e-12) return kQ005[i];
  if (std::abs(alpha - 0.025) < 1e-12) return kQ0025[i];
  throw DataError("Nemenyi table covers alpha in {0.10, 0.05, 0.025}");
}

std::vector<double> mean_ranks(const std::vector<std::vector<double>>& scores) {
  if (scores.empty()) throw DataError("no datasets to rank");
  const auto k = scores.front().size();
  std::vector<double> total(k, 0.0);
  std::vector<std::size_t> order(k);
  for (const auto& row : scores) {
    if (row.size() != k) throw DataError("every dataset needs a score for every method");
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
    std::size_t start = 0;
    while (start < k) {
      std::size_t end = start + 1;
      while (end < k && row[order[end]] == row[order[start]]) ++end;
      const double rank = (static_cast<double>(start + 1) + static_cast<double>(end)) / 2.0;
      for (std::size_t r = start; r < end; ++r) total[order[r]] += rank;
      start = end;
    }
  }
  for (auto& t : total) t /= static_cast<double>(scores.size());
  return total;
}

}  // namespace tlf
