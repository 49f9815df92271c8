#include "tlf/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <future>
#include <istream>
#include <map>
#include <ostream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "log.hpp"
#include "tlf/errors.hpp"
#include "tlf/metrics.hpp"
#include "tlf/stats.hpp"

namespace tlf {

namespace pt = boost::property_tree;
namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(Method method) {
  switch (method) {
    case Method::tlf: return "tlf";
    case Method::source_only: return "source_only";
    case Method::target_only: return "target_only";
  }
  return "?";
}

Method parse_method(const std::string& text) {
  if (text == "tlf") return Method::tlf;
  if (text == "source_only") return Method::source_only;
  if (text == "target_only") return Method::target_only;
  throw UsageError("unknown method '" + text + "' (expected tlf, source_only or target_only)");
}

void ExperimentSpec::validate() const {
  if (pairs.empty()) throw UsageError("experiment needs at least one source/target pair");
  if (repeats < 1) throw UsageError("repeats must be at least 1");
  if (methods.empty()) throw UsageError("experiment needs at least one method");
  if (!(split.target_fraction > 0.0 && split.target_fraction < 1.0)) {
    throw UsageError("target_fraction must lie in (0, 1)");
  }
  if (!(missing_ratio >= 0.0 && missing_ratio <= 0.5)) throw UsageError("missing_ratio must lie in [0, 0.5]");
  if (jobs < 1) throw UsageError("jobs must be at least 1");
  for (std::size_t i = 0; i < methods.size(); ++i) {
    for (std::size_t j = i + 1; j < methods.size(); ++j) {
      if (methods[i] == methods[j]) throw UsageError(std::string("duplicate method ") + to_string(methods[i]));
    }
  }
  nemenyi_q(std::max<std::size_t>(methods.size(), 2), nemenyi_alpha);
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(boost::trim_copy(p));
  return path.is_relative() && !base.empty() ? base / path : path;
}

template <typename T>
void read_key(const pt::ptree& tree, const char* key, T& value) {
  if (auto node = tree.get_child_optional(key)) value = node->get_value<T>();
}

}  // namespace

ExperimentSpec parse_experiment_spec(std::istream& in, const fs::path& base_dir) {
  ExperimentSpec spec;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
    read_key(tree, "experiment.label_column", spec.label_column);
    read_key(tree, "experiment.target_fraction", spec.split.target_fraction);
    read_key(tree, "experiment.seed", spec.split.seed);
    read_key(tree, "experiment.repeats", spec.repeats);
    read_key(tree, "experiment.missing_ratio", spec.missing_ratio);
    read_key(tree, "experiment.nemenyi_alpha", spec.nemenyi_alpha);
    read_key(tree, "experiment.jobs", spec.jobs);
    if (auto v = tree.get_optional<std::string>("experiment.missing_mode")) {
      try {
        spec.missing_mode = parse_repair_mode(boost::trim_copy(*v));
      } catch (const DataError& e) {
        throw UsageError(e.what());
      }
    }
    if (auto v = tree.get_optional<std::string>("experiment.methods")) {
      spec.methods.clear();
      std::vector<std::string> parts;
      boost::split(parts, *v, boost::is_any_of(","));
      for (auto& p : parts) {
        boost::trim(p);
        if (!p.empty()) spec.methods.push_back(parse_method(p));
      }
    }
    if (auto v = tree.get_optional<std::string>("experiment.output")) spec.output = resolve(base_dir, *v);
    if (auto pairs = tree.get_child_optional("pairs")) {
      for (const auto& [name, node] : *pairs) {
        std::vector<std::string> parts;
        const auto value = node.get_value<std::string>();
        boost::split(parts, value, boost::is_any_of(","));
        if (parts.size() != 2) throw UsageError("pair '" + name + "' needs 'source.csv, target.csv'");
        spec.pairs.push_back({name, resolve(base_dir, parts[0]), resolve(base_dir, parts[1])});
      }
    }
  } catch (const pt::ptree_error& e) {
    throw UsageError(std::string("invalid experiment spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment_spec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open experiment spec " + path.string());
  return parse_experiment_spec(in, path.parent_path());
}

const MethodResult* PairResult::find(Method m) const {
  for (const auto& r : methods) {
    if (r.method == m) return &r;
  }
  return nullptr;
}

bool EvaluationReport::all_failed() const {
  return std::none_of(pairs.begin(), pairs.end(), [](const PairResult& p) { return p.ok; });
}

namespace {

// Predicts target test records with a forest grown on the source. Columns are
// matched by position; classes by name.
Evaluation evaluate_source_only(const Dataset& source, const Dataset& test, const TlfConfig& cfg) {
  const Dataset enc_source = one_hot_encode(source);
  const Dataset enc_test = one_hot_encode(test);
  if (enc_source.dims() != enc_test.dims()) {
    throw SchemaError("source_only needs equal encoded widths (source " + std::to_string(enc_source.dims()) +
                      ", target " + std::to_string(enc_test.dims()) + ")");
  }
  const Forest forest =
      train_forest(enc_source, cfg.trees, min_leaf_size_for(enc_source.size(), cfg), cfg.seed + 1);
  std::vector<int> to_target(forest.num_classes(), -1);
  const auto& tc = test.class_names();
  for (std::size_t c = 0; c < forest.num_classes(); ++c) {
    const auto it = std::find(tc.begin(), tc.end(), forest.class_names()[c]);
    if (it != tc.end()) to_target[c] = static_cast<int>(it - tc.begin());
  }
  std::vector<int> predicted(enc_test.size());
  Eigen::VectorXd row(enc_test.dims());
  for (std::size_t i = 0; i < enc_test.size(); ++i) {
    row = enc_test.cells().row(static_cast<Eigen::Index>(i)).transpose();
    predicted[i] = to_target[static_cast<std::size_t>(forest.predict(std::span<const double>(row.data(), row.size())))];
  }
  return evaluate_predictions(test.labels(), predicted, test.num_classes());
}

struct RepeatOutcome {
  Evaluation eval;
  std::size_t pivots = 0;
  std::optional<double> mu;
  bool fallback = false;
};

RepeatOutcome run_method(Method method, const Dataset& source, const Dataset& target, const Dataset& test,
                         const TlfConfig& cfg) {
  RepeatOutcome out;
  switch (method) {
    case Method::tlf: {
      const TlfModel model = run_tlf(source, target, cfg);
      out.eval = evaluate(model, test);
      out.pivots = model.diagnostics.pivots;
      out.mu = model.diagnostics.mu;
      out.fallback = model.fallback;
      break;
    }
    case Method::target_only:
      out.eval = evaluate(train_target_only(target, cfg), one_hot_encode(test));
      break;
    case Method::source_only:
      out.eval = evaluate_source_only(source, test, cfg);
      break;
  }
  return out;
}

Dataset prepare(const Dataset& ds, const ExperimentSpec& spec, std::uint64_t seed) {
  Dataset out = spec.missing_ratio > 0.0 ? inject_missing(ds, spec.missing_ratio, seed) : ds;
  return out.has_missing() ? repair_missing(out, spec.missing_mode) : out;
}

PairResult run_pair(const ExperimentPair& pair, const ExperimentSpec& spec, const TlfConfig& cfg) {
  PairResult result;
  result.name = pair.name;
  result.source = pair.source.string();
  result.target = pair.target.string();
  for (auto m : spec.methods) {
    MethodResult mr;
    mr.method = m;
    result.methods.push_back(std::move(mr));
  }

  std::optional<Dataset> source, target;
  try {
    source = load_csv(pair.source, spec.label_column).with_domain(DomainTag::source);
    target = load_csv(pair.target, spec.label_column).with_domain(DomainTag::target);
  } catch (const Error& e) {
    result.error = e.what();
    for (auto& m : result.methods) m.error = result.error;
    log::warn("pair {} failed: {}", pair.name, result.error);
    return result;
  }

  std::size_t tlf_runs = 0, mu_runs = 0;
  double pivot_sum = 0.0, mu_sum = 0.0;
  for (std::size_t r = 0; r < spec.repeats; ++r) {
    TlfConfig run_cfg = cfg;
    run_cfg.seed = cfg.seed + r;
    const std::uint64_t split_seed = spec.split.seed + r;
    std::optional<SplitResult> split;
    Dataset src = *source;
    try {
      // Injection seeds are offset so the two domains get independent masks.
      src = prepare(*source, spec, split_seed * 2);
      const Dataset tgt = prepare(*target, spec, split_seed * 2 + 1);
      split = split_target(tgt, {spec.split.target_fraction, split_seed});
    } catch (const Error& e) {
      result.error = e.what();
      for (auto& m : result.methods) {
        if (m.error.empty()) m.error = result.error;
      }
      break;
    }
    for (auto& m : result.methods) {
      if (!m.error.empty()) continue;
      try {
        const auto outcome = run_method(m.method, src, split->target, split->test, run_cfg);
        m.run_accuracies.push_back(outcome.eval.accuracy);
        m.precision += outcome.eval.macro_precision;
        m.recall += outcome.eval.macro_recall;
        m.f1 += outcome.eval.macro_f1;
        if (m.method == Method::tlf) {
          ++tlf_runs;
          pivot_sum += static_cast<double>(outcome.pivots);
          if (outcome.fallback) ++result.fallbacks;
          if (outcome.mu) {
            ++mu_runs;
            mu_sum += *outcome.mu;
          }
        }
      } catch (const Error& e) {
        m.error = e.what();
        log::warn("pair {} method {} repeat {} failed: {}", pair.name, to_string(m.method), r, m.error);
      }
    }
  }

  for (auto& m : result.methods) {
    m.ok = m.error.empty() && m.run_accuracies.size() == spec.repeats;
    if (!m.ok) {
      m.accuracy = m.precision = m.recall = m.f1 = 0.0;
      continue;
    }
    const double n = static_cast<double>(spec.repeats);
    double acc = 0.0;
    for (double a : m.run_accuracies) acc += a;
    m.accuracy = acc / n;
    m.precision /= n;
    m.recall /= n;
    m.f1 /= n;
  }
  if (tlf_runs > 0) result.pivots = pivot_sum / static_cast<double>(tlf_runs);
  if (mu_runs > 0) result.mu = mu_sum / static_cast<double>(mu_runs);
  result.ok = std::any_of(result.methods.begin(), result.methods.end(), [](const MethodResult& m) { return m.ok; });
  if (!result.ok && result.error.empty()) result.error = "every method failed";
  return result;
}

// Accuracy table over units where every method succeeded.
Significance significance_for(const std::string& unit, const std::vector<Method>& methods,
                              const std::vector<std::vector<double>>& table, double alpha) {
  Significance sig;
  sig.unit = unit;
  const auto tlf_it = std::find(methods.begin(), methods.end(), Method::tlf);
  if (tlf_it != methods.end()) {
    const auto t = static_cast<std::size_t>(tlf_it - methods.begin());
    for (std::size_t j = 0; j < methods.size(); ++j) {
      if (j == t) continue;
      std::vector<double> a, b;
      for (const auto& row : table) {
        a.push_back(row[t]);
        b.push_back(row[j]);
      }
      const auto counts = count_signs(a, b);
      SignTestResult st;
      st.against = methods[j];
      st.wins = counts.wins;
      st.losses = counts.losses;
      st.ties = counts.ties;
      if (counts.wins + counts.losses > 0) {
        st.z = sign_test(counts.wins, counts.losses);
        st.significant = *st.z > kSignTestCritical;
      }
      sig.sign_tests.push_back(st);
    }
  }
  if (methods.size() >= 2 && table.size() >= 2) {
    NemenyiResult nm;
    nm.methods = methods;
    nm.mean_ranks = mean_ranks(table);
    nm.units = table.size();
    nm.q_alpha = nemenyi_q(methods.size(), alpha);
    nm.critical_difference = nemenyi_cd(methods.size(), table.size(), nm.q_alpha);
    sig.nemenyi = nm;
  }
  return sig;
}

}  // namespace

void summarize(EvaluationReport& report) {
  report.averages.clear();
  report.significance.clear();
  for (auto method : report.methods) {
    MethodAverage avg;
    avg.method = method;
    for (const auto& p : report.pairs) {
      const auto* m = p.find(method);
      if (!m || !m->ok) continue;
      ++avg.pairs;
      avg.accuracy += m->accuracy;
      avg.precision += m->precision;
      avg.recall += m->recall;
      avg.f1 += m->f1;
    }
    if (avg.pairs > 0) {
      const double n = static_cast<double>(avg.pairs);
      avg.accuracy /= n;
      avg.precision /= n;
      avg.recall /= n;
      avg.f1 /= n;
    }
    report.averages.push_back(avg);
  }

  std::vector<std::vector<double>> by_pair;
  std::map<std::string, std::pair<std::vector<double>, std::size_t>> by_target;
  std::vector<std::string> target_order;
  for (const auto& p : report.pairs) {
    std::vector<double> row;
    for (auto method : report.methods) {
      const auto* m = p.find(method);
      if (!m || !m->ok) break;
      row.push_back(m->accuracy);
    }
    if (row.size() != report.methods.size()) continue;
    auto [it, fresh] = by_target.try_emplace(p.target, std::vector<double>(row.size(), 0.0), 0);
    if (fresh) target_order.push_back(p.target);
    for (std::size_t j = 0; j < row.size(); ++j) it->second.first[j] += row[j];
    ++it->second.second;
    by_pair.push_back(std::move(row));
  }
  std::vector<std::vector<double>> by_dataset;
  for (const auto& name : target_order) {
    auto [sum, count] = by_target.at(name);
    for (auto& v : sum) v /= static_cast<double>(count);
    by_dataset.push_back(std::move(sum));
  }
  report.significance.push_back(significance_for("pair", report.methods, by_pair, report.nemenyi_alpha));
  report.significance.push_back(significance_for("dataset", report.methods, by_dataset, report.nemenyi_alpha));
}

EvaluationReport run_experiment(const ExperimentSpec& spec, const TlfConfig& cfg) {
  spec.validate();
  cfg.validate();
  EvaluationReport report;
  report.methods = spec.methods;
  report.repeats = spec.repeats;
  report.nemenyi_alpha = spec.nemenyi_alpha;
  report.pairs.resize(spec.pairs.size());

  // Every task derives its randomness from its own seeds, so batching by
  // `jobs` does not change the results.
  for (std::size_t start = 0; start < spec.pairs.size(); start += spec.jobs) {
    const auto end = std::min(spec.pairs.size(), start + spec.jobs);
    if (end - start == 1) {
      report.pairs[start] = run_pair(spec.pairs[start], spec, cfg);
      continue;
    }
    std::vector<std::future<PairResult>> running;
    for (auto i = start; i < end; ++i) {
      running.push_back(std::async(std::launch::async, [&, i] { return run_pair(spec.pairs[i], spec, cfg); }));
    }
    for (auto i = start; i < end; ++i) report.pairs[i] = running[i - start].get();
  }
  summarize(report);
  return report;
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

std::vector<Method> methods_from(const json& j) {
  std::vector<Method> out;
  for (const auto& m : j) out.push_back(parse_method(m.get<std::string>()));
  return out;
}

json methods_json(const std::vector<Method>& methods) {
  json out = json::array();
  for (auto m : methods) out.push_back(to_string(m));
  return out;
}

}  // namespace

json to_json(const EvaluationReport& report) {
  json doc;
  doc["format"] = "tlf-report";
  doc["version"] = 1;
  doc["methods"] = methods_json(report.methods);
  doc["repeats"] = report.repeats;
  doc["nemenyi_alpha"] = report.nemenyi_alpha;
  json pairs = json::array();
  for (const auto& p : report.pairs) {
    json jp{{"name", p.name}, {"source", p.source}, {"target", p.target}, {"ok", p.ok}, {"error", p.error},
            {"pivots", p.pivots}, {"mu", opt(p.mu)}, {"fallbacks", p.fallbacks}};
    json ms = json::array();
    for (const auto& m : p.methods) {
      ms.push_back({{"method", to_string(m.method)}, {"ok", m.ok}, {"error", m.error}, {"accuracy", m.accuracy},
                    {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},
                    {"run_accuracies", m.run_accuracies}});
    }
    jp["methods"] = std::move(ms);
    pairs.push_back(std::move(jp));
  }
  doc["pairs"] = std::move(pairs);
  json avgs = json::array();
  for (const auto& a : report.averages) {
    avgs.push_back({{"method", to_string(a.method)}, {"pairs", a.pairs}, {"accuracy", a.accuracy},
                    {"precision", a.precision}, {"recall", a.recall}, {"f1", a.f1}});
  }
  doc["averages"] = std::move(avgs);
  json sigs = json::array();
  for (const auto& s : report.significance) {
    json js{{"unit", s.unit}};
    json tests = json::array();
    for (const auto& t : s.sign_tests) {
      tests.push_back({{"tlf_vs", to_string(t.against)}, {"wins", t.wins}, {"losses", t.losses}, {"ties", t.ties},
                       {"z", opt(t.z)}, {"critical", kSignTestCritical}, {"significant", t.significant}});
    }
    js["sign_tests"] = std::move(tests);
    if (s.nemenyi) {
      js["nemenyi"] = {{"methods", methods_json(s.nemenyi->methods)}, {"mean_ranks", s.nemenyi->mean_ranks},
                       {"units", s.nemenyi->units}, {"q_alpha", s.nemenyi->q_alpha},
                       {"critical_difference", s.nemenyi->critical_difference}};
    } else {
      js["nemenyi"] = nullptr;
    }
    sigs.push_back(std::move(js));
  }
  doc["significance"] = std::move(sigs);
  return doc;
}

EvaluationReport report_from_json(const json& doc) {
  try {
    if (doc.at("format") != "tlf-report") throw DataError("not a tlf report");
    if (doc.at("version") != 1) throw DataError("unsupported report version");
    EvaluationReport report;
    report.methods = methods_from(doc.at("methods"));
    report.repeats = doc.at("repeats").get<std::size_t>();
    report.nemenyi_alpha = doc.at("nemenyi_alpha").get<double>();
    for (const auto& jp : doc.at("pairs")) {
      PairResult p;
      p.name = jp.at("name").get<std::string>();
      p.source = jp.at("source").get<std::string>();
      p.target = jp.at("target").get<std::string>();
      p.ok = jp.at("ok").get<bool>();
      p.error = jp.at("error").get<std::string>();
      p.pivots = jp.at("pivots").get<double>();
      p.mu = opt_from(jp.at("mu"));
      p.fallbacks = jp.at("fallbacks").get<std::size_t>();
      for (const auto& jm : jp.at("methods")) {
        MethodResult m;
        m.method = parse_method(jm.at("method").get<std::string>());
        m.ok = jm.at("ok").get<bool>();
        m.error = jm.at("error").get<std::string>();
        m.accuracy = jm.at("accuracy").get<double>();
        m.precision = jm.at("precision").get<double>();
        m.recall = jm.at("recall").get<double>();
        m.f1 = jm.at("f1").get<double>();
        m.run_accuracies = jm.at("run_accuracies").get<std::vector<double>>();
        p.methods.push_back(std::move(m));
      }
      report.pairs.push_back(std::move(p));
    }
    summarize(report);
    return report;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  } catch (const UsageError& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
}

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void write_report_csv(const EvaluationReport& report, std::ostream& out) {
  out << "pair,source,target,method,status,accuracy,precision,recall,f1,pivots,mu,fallbacks\n";
  for (const auto& p : report.pairs) {
    for (const auto& m : p.methods) {
      out << csv_field(p.name) << ',' << csv_field(p.source) << ',' << csv_field(p.target) << ','
          << to_string(m.method) << ',' << (m.ok ? "ok" : "failed") << ',';
      if (m.ok) {
        out << fixed6(m.accuracy) << ',' << fixed6(m.precision) << ',' << fixed6(m.recall) << ',' << fixed6(m.f1);
      } else {
        out << ",,,";
      }
      out << ',';
      if (m.method == Method::tlf && m.ok) {
        out << fixed6(p.pivots) << ',' << (p.mu ? fixed6(*p.mu) : "") << ',' << p.fallbacks;
      } else {
        out << ",,";
      }
      out << '\n';
    }
  }
  for (const auto& a : report.averages) {
    out << "AVERAGE,,," << to_string(a.method) << ',' << a.pairs << ',';
    if (a.pairs > 0) {
      out << fixed6(a.accuracy) << ',' << fixed6(a.precision) << ',' << fixed6(a.recall) << ',' << fixed6(a.f1);
    } else {
      out << ",,,";
    }
    out << ",,,\n";
  }
}

void write_report(const EvaluationReport& report, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
  std::ofstream js(dir / "report.json");
  std::ofstream csv(dir / "report.csv");
  if (!js || !csv) throw DataError("cannot write report into " + dir.string());
  js << to_json(report).dump(2) << '\n';
  write_report_csv(report, csv);
}

}  // namespace tlf
