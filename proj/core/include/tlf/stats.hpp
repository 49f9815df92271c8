#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tlf {

// One-sided sign-test critical value at alpha = 0.025.
inline constexpr double kSignTestCritical = 1.96;

// Normal approximation with continuity correction:
// z = (wins - n/2 - 0.5) / (sqrt(n)/2), n = wins + losses (ties excluded).
double sign_test(std::size_t wins, std::size_t losses);

struct SignCounts {
  std::size_t wins = 0;
  std::size_t losses = 0;
  std::size_t ties = 0;
};

// Compares paired scores where larger is better.
SignCounts count_signs(std::span<const double> first, std::span<const double> second);

// CD = q_alpha * sqrt(k(k+1) / (6N)).
double nemenyi_cd(std::size_t num_methods, std::size_t num_datasets, double q_alpha);

// Studentized-range critical values divided by sqrt(2) for k = 2..20 at
// alpha in {0.10, 0.05, 0.025}.
double nemenyi_q(std::size_t num_methods, double alpha);

// Average ranks of the methods (columns) over the datasets (rows). Larger
// scores rank better (rank 1); ties share the mean of their ranks.
std::vector<double> mean_ranks(const std::vector<std::vector<double>>& scores);

}  // namespace tlf
