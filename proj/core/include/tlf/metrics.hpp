#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tlf/dataset.hpp"
#include "tlf/forest.hpp"
#include "tlf/transfer.hpp"

namespace tlf {

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;    // true records of the class
  std::size_t predicted = 0;  // records predicted as the class
};

struct Evaluation {
  double accuracy = 0.0;
  std::vector<ClassMetrics> per_class;
  // Unweighted means over classes that occur in the truth or the predictions.
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
};

// Predictions outside [0, num_classes) count as wrong for every class.
Evaluation evaluate_predictions(std::span<const int> truth, std::span<const int> predicted,
                                std::size_t num_classes);

Evaluation evaluate(const TlfModel& model, const Dataset& test);
// `test` must already be in the forest's schema.
Evaluation evaluate(const Forest& forest, const Dataset& test);

}  // namespace tlf
