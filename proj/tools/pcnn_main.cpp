// SPDX-License-Identifier: MIT
//
// pcnn: build polynomial chaos surrogate models with consistency-regularized
// training and run reliability analysis on them.
//
// Exit codes: 0 success, 2 configuration error, 3 numeric/training failure,
// 4 I/O failure.

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>

#include "pcnn/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

int run_fit(const std::string& config_path, const std::string& output_dir,
            int threads, bool quiet) {
  pcnn::ProblemConfig config = pcnn::validate_config(config_path);
  if (!output_dir.empty()) config.output_dir = output_dir;
  if (threads > 0) config.threads = threads;
  const pcnn::RunSummary summary =
      pcnn::run_pipeline(config, quiet ? nullptr : &std::cerr);
  pcnn::print_summary(std::cout, summary);
  return kExitOk;
}

int run_eval(const std::string& model_path, const std::string& csv_path) {
  const pcnn::ErrorReport report =
      pcnn::evaluate_model_csv(model_path, csv_path);
  std::cout.precision(10);
  std::cout << "n_test: " << report.n_test << "\n"
            << "rmse:   " << report.rmse << "\n"
            << "mae:    " << report.mae << "\n"
            << "mre:    ";
  if (report.mre_defined)
    std::cout << report.mre << " (" << report.mre_excluded
              << " near-zero truths excluded)";
  else
    std::cout << "undefined (all truths near zero)";
  std::cout << "\n"
            << "r2:     " << report.r2 << "\n";
  return kExitOk;
}

int run_reliability(const std::string& model_path, std::uint64_t n_mcs,
                    std::uint64_t seed) {
  const pcnn::ReliabilityResult r =
      pcnn::reliability_of_model(model_path, n_mcs, seed);
  std::cout.precision(10);
  std::cout << "pf:        " << r.pf << "\n"
            << "std_error: " << r.std_error << "\n"
            << "failures:  " << r.failures << " of " << r.n_mcs << "\n"
            << "seed:      " << r.seed << "\n";
  return kExitOk;
}

int run_report(const std::string& run_dir) {
  const pcnn::RunSummary summary = pcnn::report_from_dir(run_dir);
  pcnn::print_summary(std::cout, summary);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polynomial chaos surrogate modeling and reliability analysis"};
  app.require_subcommand(1);

  std::string config_path, output_dir, model_path, csv_path, run_dir;
  std::uint64_t n_mcs = 1000000;
  std::uint64_t seed = 1;
  int threads = 0;
  bool quiet = false;

  auto* fit = app.add_subcommand("fit", "run the full pipeline from a config file");
  fit->add_option("config", config_path, "problem config JSON")->required();
  fit->add_option("--output-dir", output_dir, "override the config's output directory");
  fit->add_option("--threads", threads, "within-stage parallelism (default 1)");
  fit->add_flag("--quiet", quiet, "suppress progress output");

  auto* eval = app.add_subcommand("eval", "metrics of a saved model on a test CSV");
  eval->add_option("model", model_path, "model.json from a fit")->required();
  eval->add_option("test_csv", csv_path, "CSV of original-units inputs + label")
      ->required();

  auto* rel = app.add_subcommand("reliability",
                                 "Monte Carlo failure probability of a saved model");
  rel->add_option("model", model_path, "model.json from a fit")->required();
  rel->add_option("--n-mcs", n_mcs, "number of Monte Carlo samples");
  rel->add_option("--seed", seed, "sampling seed");

  auto* rep = app.add_subcommand("report", "regenerate the summary of a run directory");
  rep->add_option("run_dir", run_dir, "directory written by fit")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (app.got_subcommand(fit)) return run_fit(config_path, output_dir, threads, quiet);
    if (app.got_subcommand(eval)) return run_eval(model_path, csv_path);
    if (app.got_subcommand(rel)) return run_reliability(model_path, n_mcs, seed);
    if (app.got_subcommand(rep)) return run_report(run_dir);
  } catch (const pcnn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const pcnn::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const pcnn::ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const pcnn::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}
