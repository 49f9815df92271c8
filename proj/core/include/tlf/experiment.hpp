#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tlf/dataset.hpp"
#include "tlf/transfer.hpp"

namespace tlf {

enum class Method { tlf, source_only, target_only };

const char* to_string(Method method);
Method parse_method(const std::string& text);

struct ExperimentPair {
  std::string name;
  std::filesystem::path source;
  std::filesystem::path target;
};

struct ExperimentSpec {
  std::vector<ExperimentPair> pairs;
  std::string label_column = "label";
  SplitSpec split;  // split.seed + repeat index seeds each repeat
  std::size_t repeats = 1;
  std::vector<Method> methods{Method::tlf, Method::target_only};
  RepairMode missing_mode = RepairMode::impute;
  double missing_ratio = 0.0;  // injected into both domains before repair
  double nemenyi_alpha = 0.025;
  std::size_t jobs = 1;
  std::filesystem::path output;

  void validate() const;
};

// INI layout:
//
//   [experiment]
//   label_column = label
//   target_fraction = 0.05
//   seed = 0
//   repeats = 10
//   methods = tlf, target_only, source_only
//   missing_mode = impute          ; or srd
//   missing_ratio = 0
//   nemenyi_alpha = 0.025
//   jobs = 1
//   output = results
//
//   [pairs]
//   a_to_b = data/a.csv, data/b.csv
//
// Relative paths resolve against the spec file's directory. TLF config
// sections may appear in the same file.
ExperimentSpec parse_experiment_spec(std::istream& in, const std::filesystem::path& base_dir = {});
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

struct MethodResult {
  Method method = Method::tlf;
  bool ok = false;
  std::string error;
  double accuracy = 0.0;  // means over repeats
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<double> run_accuracies;
};

struct PairResult {
  std::string name;
  std::string source;
  std::string target;
  bool ok = false;
  std::string error;
  std::vector<MethodResult> methods;
  // TLF diagnostics averaged over repeats; mu over non-fallback repeats only.
  double pivots = 0.0;
  std::optional<double> mu;
  std::size_t fallbacks = 0;

  const MethodResult* find(Method m) const;
};

struct MethodAverage {
  Method method = Method::tlf;
  std::size_t pairs = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct SignTestResult {
  Method against = Method::target_only;
  std::size_t wins = 0;
  std::size_t losses = 0;
  std::size_t ties = 0;
  std::optional<double> z;
  bool significant = false;
};

struct NemenyiResult {
  std::vector<Method> methods;
  std::vector<double> mean_ranks;
  std::size_t units = 0;
  double q_alpha = 0.0;
  double critical_difference = 0.0;
};

struct Significance {
  std::string unit;  // "pair" or "dataset"
  std::vector<SignTestResult> sign_tests;
  std::optional<NemenyiResult> nemenyi;
};

struct EvaluationReport {
  std::vector<Method> methods;
  std::size_t repeats = 1;
  double nemenyi_alpha = 0.025;
  std::vector<PairResult> pairs;
  std::vector<MethodAverage> averages;
  std::vector<Significance> significance;

  bool all_failed() const;
};

EvaluationReport run_experiment(const ExperimentSpec& spec, const TlfConfig& cfg);

// Recomputes averages and significance from the per-pair cells.
void summarize(EvaluationReport& report);

nlohmann::json to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const nlohmann::json& doc);

// One row per (pair, method) plus AVERAGE rows; numbers with 6 decimals.
void write_report_csv(const EvaluationReport& report, std::ostream& out);
// Writes report.json and report.csv into `dir`.
void write_report(const EvaluationReport& report, const std::filesystem::path& dir);

}  // namespace tlf
