#include "tlf/metrics.hpp"

#include "tlf/errors.hpp"

namespace tlf {

Evaluation evaluate_predictions(std::span<const int> truth, std::span<const int> predicted,
                                std::size_t num_classes) {
  if (truth.empty()) throw DataError("cannot evaluate on an empty test set");
  if (truth.size() != predicted.size()) throw DataError("prediction count does not match the test set");
  Evaluation out;
  out.per_class.resize(num_classes);
  std::vector<std::size_t> hits(num_classes, 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int y = truth[i];
    const int p = predicted[i];
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) throw DataError("true label out of range");
    out.per_class[static_cast<std::size_t>(y)].support += 1;
    if (p >= 0 && static_cast<std::size_t>(p) < num_classes) {
      out.per_class[static_cast<std::size_t>(p)].predicted += 1;
    }
    if (p == y) {
      ++correct;
      ++hits[static_cast<std::size_t>(y)];
    }
  }
  out.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());

  std::size_t active = 0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    auto& m = out.per_class[c];
    const double tp = static_cast<double>(hits[c]);
    m.precision = m.predicted > 0 ? tp / static_cast<double>(m.predicted) : 0.0;
    m.recall = m.support > 0 ? tp / static_cast<double>(m.support) : 0.0;
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    if (m.support == 0 && m.predicted == 0) continue;
    ++active;
    out.macro_precision += m.precision;
    out.macro_recall += m.recall;
    out.macro_f1 += m.f1;
  }
  if (active > 0) {
    out.macro_precision /= static_cast<double>(active);
    out.macro_recall /= static_cast<double>(active);
    out.macro_f1 /= static_cast<double>(active);
  }
  return out;
}

Evaluation evaluate(const TlfModel& model, const Dataset& test) {
  const auto predicted = model.predict(test);
  if (test.class_names() != model.forest.class_names()) {
    throw SchemaError("test classes do not match the model classes");
  }
  return evaluate_predictions(test.labels(), predicted, test.num_classes());
}

Evaluation evaluate(const Forest& forest, const Dataset& test) {
  if (test.schema() != forest.schema()) throw SchemaError("test schema does not match the forest schema");
  if (test.class_names() != forest.class_names()) {
    throw SchemaError("test classes do not match the forest classes");
  }
  const auto predicted = forest.predict(test);
  return evaluate_predictions(test.labels(), predicted, test.num_classes());
}

}  // namespace tlf
