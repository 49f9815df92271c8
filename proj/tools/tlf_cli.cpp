// tlf: command-line front end for the TLF library.
//
//   tlf run --spec experiment.ini [--config tlf.ini] [--output dir]
//   tlf transfer --source s.csv --target t.csv --out model_dir [--test test.csv]
//   tlf predict --model model_dir --data records.csv [--output predictions.csv]
//   tlf inject-missing --input in.csv --output out.csv --ratio 0.1
//   tlf stats --report report.json
//   tlf default-config

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <boost/program_options.hpp>

#include "tlf/config.hpp"
#include "tlf/dataset.hpp"
#include "tlf/errors.hpp"
#include "tlf/experiment.hpp"
#include "tlf/logging.hpp"
#include "tlf/metrics.hpp"
#include "tlf/stats.hpp"
#include "tlf/transfer.hpp"

namespace po = boost::program_options;

namespace {

constexpr const char* kUsage =
    "usage: tlf <command> [options]\n"
    "\n"
    "commands:\n"
    "  run             run an experiment spec and write report.json / report.csv\n"
    "  transfer        train a TLF model on one source/target pair\n"
    "  predict         label records with a saved model\n"
    "  inject-missing  blank random cells in a CSV\n"
    "  stats           print sign-test and Nemenyi results from report.json\n"
    "  default-config  print the default configuration\n"
    "\n"
    "`tlf <command> --help` lists the options of a command.\n"
    "Set TLF_LOG_LEVEL=debug|info|warn|error for more or less logging.\n";

struct Parsed {
  po::variables_map vm;
  bool help = false;
};

Parsed parse(const std::vector<std::string>& args, const po::options_description& desc) {
  po::options_description all = desc;
  all.add_options()("help,h", "show this help");
  Parsed out;
  try {
    po::store(po::command_line_parser(args).options(all).run(), out.vm);
    if (out.vm.count("help")) {
      std::cout << all;
      out.help = true;
      return out;
    }
    po::notify(out.vm);
  } catch (const po::error& e) {
    throw tlf::UsageError(e.what());
  }
  return out;
}

tlf::TlfConfig config_from(const po::variables_map& vm, tlf::TlfConfig base = {}) {
  if (vm.count("config")) base = tlf::load_tlf_config(vm["config"].as<std::string>(), base);
  if (vm.count("seed")) base.seed = vm["seed"].as<std::uint64_t>();
  return base;
}

std::optional<tlf::Schema> schema_from(const po::variables_map& vm, const char* key) {
  if (!vm.count(key)) return std::nullopt;
  return tlf::read_schema_sidecar(vm[key].as<std::string>());
}

void print_evaluation(const tlf::Evaluation& e) {
  std::printf("accuracy  %.6f\nprecision %.6f\nrecall    %.6f\nf1        %.6f\n", e.accuracy,
              e.macro_precision, e.macro_recall, e.macro_f1);
}

void print_summary(const tlf::EvaluationReport& report) {
  std::printf("%-24s", "pair");
  for (auto m : report.methods) std::printf(" %12s", tlf::to_string(m));
  std::printf("\n");
  for (const auto& p : report.pairs) {
    std::printf("%-24s", p.name.c_str());
    for (const auto& m : p.methods) {
      if (m.ok) {
        std::printf(" %12.4f", m.accuracy);
      } else {
        std::printf(" %12s", "failed");
      }
    }
    std::printf("\n");
  }
  std::printf("%-24s", "AVERAGE");
  for (const auto& a : report.averages) {
    if (a.pairs > 0) {
      std::printf(" %12.4f", a.accuracy);
    } else {
      std::printf(" %12s", "-");
    }
  }
  std::printf("\n");
  for (const auto& p : report.pairs) {
    if (!p.error.empty()) std::printf("pair %s: %s\n", p.name.c_str(), p.error.c_str());
    for (const auto& m : p.methods) {
      if (!m.ok && !m.error.empty() && m.error != p.error) {
        std::printf("pair %s, %s: %s\n", p.name.c_str(), tlf::to_string(m.method), m.error.c_str());
      }
    }
  }
}

void print_significance(const tlf::EvaluationReport& report) {
  for (const auto& s : report.significance) {
    std::printf("\n[unit: %s]\n", s.unit.c_str());
    for (const auto& t : s.sign_tests) {
      std::printf("sign test tlf vs %s: wins %zu, losses %zu, ties %zu, ", tlf::to_string(t.against), t.wins,
                  t.losses, t.ties);
      if (t.z) {
        std::printf("z = %.4f (%s at %.2f)\n", *t.z, t.significant ? "significant" : "not significant",
                    tlf::kSignTestCritical);
      } else {
        std::printf("z undefined (no decisive comparisons)\n");
      }
    }
    if (s.nemenyi) {
      std::printf("Nemenyi over %zu units, q = %.3f, CD = %.4f\n", s.nemenyi->units, s.nemenyi->q_alpha,
                  s.nemenyi->critical_difference);
      for (std::size_t i = 0; i < s.nemenyi->methods.size(); ++i) {
        std::printf("  mean rank %-12s %.4f\n", tlf::to_string(s.nemenyi->methods[i]), s.nemenyi->mean_ranks[i]);
      }
    } else {
      std::printf("Nemenyi: needs at least 2 methods and 2 complete units\n");
    }
  }
}

int cmd_run(const std::vector<std::string>& args) {
  po::options_description desc("tlf run");
  desc.add_options()
      ("spec", po::value<std::string>()->required(), "experiment spec (INI)")
      ("config", po::value<std::string>(), "TLF config overriding sections embedded in the spec")
      ("seed", po::value<std::uint64_t>(), "base TLF seed")
      ("output", po::value<std::string>(), "report directory (default: spec's output key)");
  const auto p = parse(args, desc);
  if (p.help) return 0;
  const std::string spec_path = p.vm["spec"].as<std::string>();
  auto spec = tlf::load_experiment_spec(spec_path);
  const auto cfg = config_from(p.vm, tlf::load_tlf_config(spec_path));
  if (p.vm.count("output")) spec.output = p.vm["output"].as<std::string>();
  if (spec.output.empty()) throw tlf::UsageError("no output directory (use --output or [experiment] output)");

  const auto report = tlf::run_experiment(spec, cfg);
  tlf::write_report(report, spec.output);
  print_summary(report);
  print_significance(report);
  std::printf("\nreport written to %s\n", spec.output.string().c_str());
  if (report.all_failed()) {
    std::fprintf(stderr, "tlf: every pair failed\n");
    return static_cast<int>(tlf::ExitCode::data);
  }
  return 0;
}

int cmd_transfer(const std::vector<std::string>& args) {
  po::options_description desc("tlf transfer");
  desc.add_options()
      ("source", po::value<std::string>()->required(), "source CSV")
      ("target", po::value<std::string>()->required(), "labelled target CSV")
      ("label", po::value<std::string>()->default_value("label"), "label column name")
      ("source-schema", po::value<std::string>(), "schema sidecar for the source")
      ("target-schema", po::value<std::string>(), "schema sidecar for the target")
      ("missing", po::value<std::string>()->default_value("impute"), "missing-cell handling: impute | srd")
      ("config", po::value<std::string>(), "TLF config file")
      ("seed", po::value<std::uint64_t>(), "seed")
      ("out", po::value<std::string>()->required(), "model directory")
      ("test", po::value<std::string>(), "optional test CSV in the target schema");
  const auto p = parse(args, desc);
  if (p.help) return 0;
  const auto cfg = config_from(p.vm);
  const auto label = p.vm["label"].as<std::string>();
  const auto mode = tlf::parse_repair_mode(p.vm["missing"].as<std::string>());
  auto repaired = [&](const tlf::Dataset& ds) { return ds.has_missing() ? tlf::repair_missing(ds, mode) : ds; };

  const auto source = repaired(
      tlf::load_csv(p.vm["source"].as<std::string>(), label, schema_from(p.vm, "source-schema"))
          .with_domain(tlf::DomainTag::source));
  const auto target_schema = schema_from(p.vm, "target-schema");
  const auto target = repaired(tlf::load_csv(p.vm["target"].as<std::string>(), label, target_schema));
  const auto model = tlf::run_tlf(source, target, cfg);
  tlf::save_model(model, p.vm["out"].as<std::string>());

  const auto& d = model.diagnostics;
  std::printf("pivots %zu, selected %zu, dropped %zu, merged %zu, fallback %s", d.pivots, d.selected_records,
              d.dropped_records, d.merged_records, model.fallback ? "yes" : "no");
  if (d.mu) std::printf(", mu %.6f", *d.mu);
  std::printf("\nmodel written to %s\n", p.vm["out"].as<std::string>().c_str());

  if (p.vm.count("test")) {
    // Categories and classes follow first-appearance order, so the test file
    // is read against the target's schema and class list.
    const auto test = tlf::with_class_order(
        repaired(tlf::load_csv(p.vm["test"].as<std::string>(), label, target.schema())), target.class_names());
    print_evaluation(tlf::evaluate(model, test));
  }
  return 0;
}

int cmd_predict(const std::vector<std::string>& args) {
  po::options_description desc("tlf predict");
  desc.add_options()
      ("model", po::value<std::string>()->required(), "model directory written by `tlf transfer`")
      ("data", po::value<std::string>()->required(), "CSV in the target schema (label column may hold anything)")
      ("label", po::value<std::string>()->default_value("label"), "label column name")
      ("output", po::value<std::string>(), "write predictions here instead of stdout");
  const auto p = parse(args, desc);
  if (p.help) return 0;
  const auto model = tlf::load_model(p.vm["model"].as<std::string>());
  const auto data = tlf::load_csv(p.vm["data"].as<std::string>(), p.vm["label"].as<std::string>(),
                                  model.target_schema);
  const auto predicted = model.predict(data);
  std::ofstream file;
  if (p.vm.count("output")) {
    file.open(p.vm["output"].as<std::string>());
    if (!file) throw tlf::DataError("cannot write " + p.vm["output"].as<std::string>());
  }
  std::ostream& out = file.is_open() ? file : std::cout;
  out << "prediction\n";
  for (int c : predicted) out << model.forest.class_names()[static_cast<std::size_t>(c)] << '\n';
  return 0;
}

int cmd_inject(const std::vector<std::string>& args) {
  po::options_description desc("tlf inject-missing");
  desc.add_options()
      ("input", po::value<std::string>()->required(), "input CSV")
      ("output", po::value<std::string>()->required(), "output CSV")
      ("label", po::value<std::string>()->default_value("label"), "label column name")
      ("ratio", po::value<double>()->required(), "fraction of records to damage, in [0, 0.5]")
      ("seed", po::value<std::uint64_t>()->default_value(0), "seed");
  const auto p = parse(args, desc);
  if (p.help) return 0;
  const auto ds = tlf::load_csv(p.vm["input"].as<std::string>(), p.vm["label"].as<std::string>());
  const auto damaged = tlf::inject_missing(ds, p.vm["ratio"].as<double>(), p.vm["seed"].as<std::uint64_t>());
  tlf::save_csv(damaged, p.vm["output"].as<std::string>());
  std::printf("%zu of %zu records now have missing cells\n",
              [&] {
                std::size_t n = 0;
                for (std::size_t r = 0; r < damaged.size(); ++r) {
                  for (std::size_t c = 0; c < damaged.dims(); ++c) {
                    if (damaged.is_missing(r, c)) {
                      ++n;
                      break;
                    }
                  }
                }
                return n;
              }(),
              damaged.size());
  return 0;
}

int cmd_stats(const std::vector<std::string>& args) {
  po::options_description desc("tlf stats");
  desc.add_options()("report", po::value<std::string>()->required(), "report.json written by `tlf run`");
  const auto p = parse(args, desc);
  if (p.help) return 0;
  std::ifstream in(p.vm["report"].as<std::string>());
  if (!in) throw tlf::DataError("cannot open " + p.vm["report"].as<std::string>());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw tlf::DataError(std::string("report is not JSON: ") + e.what());
  }
  const auto report = tlf::report_from_json(doc);
  print_summary(report);
  print_significance(report);
  return 0;
}

int cmd_default_config(const std::vector<std::string>& args) {
  po::options_description desc("tlf default-config");
  if (parse(args, desc).help) return 0;
  tlf::write_tlf_config(std::cout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  tlf::init_logging_from_env();
  if (argc < 2) {
    std::fputs(kUsage, stderr);
    return static_cast<int>(tlf::ExitCode::usage);
  }
  const std::string command = argv[1];
  const std::vector<std::string> args(argv + 2, argv + argc);
  try {
    if (command == "run") return cmd_run(args);
    if (command == "transfer") return cmd_transfer(args);
    if (command == "predict") return cmd_predict(args);
    if (command == "inject-missing") return cmd_inject(args);
    if (command == "stats") return cmd_stats(args);
    if (command == "default-config") return cmd_default_config(args);
    if (command == "-h" || command == "--help" || command == "help") {
      std::fputs(kUsage, stdout);
      return 0;
    }
    std::fprintf(stderr, "tlf: unknown command '%s'\n\n%s", command.c_str(), kUsage);
    return static_cast<int>(tlf::ExitCode::usage);
  } catch (const tlf::Error& e) {
    std::fprintf(stderr, "tlf: %s\n", e.what());
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "tlf: %s\n", e.what());
    return static_cast<int>(tlf::ExitCode::data);
  }
}
