// SPDX-License-Identifier: MIT
//
// Configuration schema and the end-to-end pipeline:
// sample -> moments -> bases -> labels -> initialization -> training ->
// test metrics -> surrogate MCS (moments, density, failure probability) ->
// serialized run bundle.
//
// A resolved configuration fully determines every output byte: every
// stochastic stage consumes its own named seed, files carry no timestamps,
// and the run id is a hash of the resolved configuration text.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pcnn/model_io.hpp"

namespace pcnn {

struct Seeds {
  std::uint64_t master = 1;
  // Stage seeds; when not given in the config they are derived from master.
  std::uint64_t unlabeled = 0;
  std::uint64_t labeled = 0;
  std::uint64_t init = 0;
  std::uint64_t test = 0;
  std::uint64_t mcs = 0;
};

struct ProblemConfig {
  std::string problem = "cantilever_tube";  // cantilever_tube | microsatellite | custom
  std::vector<RandomVariableSpec> variables;  // custom problems only
  double theta1_deg = 5.0;  // cantilever fixed parameters
  double theta2_deg = 10.0;

  int order_main = 4;   // p
  int order_aux = 2;    // p_tilde
  std::vector<int> aux_hidden = {32, 64, 128, 64, 64};

  std::size_t n_labeled = 90;
  std::size_t n_unlabeled = 20000;
  std::size_t n_test = 10000;
  std::size_t n_mcs = 1000000;
  int max_epochs = 5000;

  AdamParams adam;
  double eta_coeffs = -1.0;      // < 0: use adam.eta
  double lr_decay_factor = 1.0;  // optional step decay
  int lr_decay_every = 0;

  SampleKind labeled_kind = SampleKind::LatinHypercube;
  SampleKind unlabeled_kind = SampleKind::LatinHypercube;
  SampleKind test_kind = SampleKind::MonteCarlo;
  MomentSource moment_source = MomentSource::Empirical;
  std::size_t chunk_size = 0;

  Seeds seeds;
  int checkpoint_every = 0;
  std::string output_dir = "run";
  int threads = 1;
  std::string notes;
};

/// Parse + schema-check a config file. Applies documented defaults, derives
/// missing stage seeds from the master seed, and returns the fully resolved
/// config. Throws ConfigError listing every violation with a JSON-pointer
/// style path.
ProblemConfig validate_config(const std::filesystem::path& path);

/// Same, from in-memory JSON text.
ProblemConfig parse_config(const std::string& json_text);

/// Canonical resolved-config snapshot (itself a valid config). The run id is
/// the FNV-1a hash of this text.
std::string resolved_config_text(const ProblemConfig& config);
std::string run_id_for(const ProblemConfig& config);

/// The benchmark problem referenced by the config ("custom" yields a
/// spec-only bundle with no evaluator).
PerformanceFunction make_problem(const ProblemConfig& config);

/// File layout of a run directory.
struct RunPaths {
  std::filesystem::path dir;
  std::filesystem::path model;            // model.json
  std::filesystem::path loss_history;     // loss_history.csv
  std::filesystem::path error_report;     // error_report.json
  std::filesystem::path moment_summary;   // moment_summary.json
  std::filesystem::path reliability;      // reliability.json
  std::filesystem::path kde;              // kde.csv
  std::filesystem::path resolved_config;  // resolved_config.json
};
RunPaths run_paths(const std::filesystem::path& dir);

struct RunSummary {
  std::string run_id;
  std::string problem;
  int order_main = 0;
  int order_aux = 0;
  std::size_t basis_size = 0;
  std::size_t n_labeled = 0;
  std::size_t n_unlabeled = 0;
  int epochs = 0;
  LossBreakdown final_loss;
  ErrorReport errors;
  MomentSummary moments;
  ReliabilityResult reliability;
  RunPaths paths;
};

/// Execute the full pipeline and write the run bundle. Stage failures are
/// rethrown with the stage name and run id prefixed; outputs produced by
/// completed stages stay on disk. An optional stream receives progress lines.
RunSummary run_pipeline(const ProblemConfig& config, std::ostream* log = nullptr);

/// Rebuild the fit-time summary from an existing run directory.
RunSummary report_from_dir(const std::filesystem::path& dir);

/// Metrics of a saved model against a labeled CSV (original-units inputs).
ErrorReport evaluate_model_csv(const std::filesystem::path& model_path,
                               const std::filesystem::path& csv_path);

/// Monte Carlo failure probability of a saved model.
ReliabilityResult reliability_of_model(const std::filesystem::path& model_path,
                                       std::size_t n_mcs, std::uint64_t seed);

void print_summary(std::ostream& out, const RunSummary& summary);

}  // namespace pcnn
