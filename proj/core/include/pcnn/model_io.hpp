// SPDX-License-Identifier: MIT
//
// Serialization: the self-contained model bundle (variables, basis,
// coefficients, network, training metadata), flat reports, and CSV files.
// All output JSON is written with a deterministic writer that serializes
// numbers with 17 significant digits, so identical runs produce identical
// bytes.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pcnn/analyze.hpp"
#include "pcnn/problems.hpp"
#include "pcnn/train.hpp"

namespace pcnn {

/// Minimal streaming JSON writer: ordered keys, 2-space indent, doubles as
/// %.17g (NaN serializes as null).
class JsonWriter {
 public:
  explicit JsonWriter(std::ostream& out);

  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(std::string_view name);
  JsonWriter& value(double v);
  JsonWriter& value(std::int64_t v);
  JsonWriter& value(std::uint64_t v);
  JsonWriter& value(int v) { return value(static_cast<std::int64_t>(v)); }
  JsonWriter& value(bool v);
  JsonWriter& value(std::string_view v);
  JsonWriter& value(const char* v) { return value(std::string_view(v)); }
  JsonWriter& null();

 private:
  void before_value();
  void newline_indent();
  void write_escaped(std::string_view v);

  std::ostream& out_;
  struct Level {
    bool is_array = false;
    bool has_items = false;
  };
  std::vector<Level> stack_;
  bool pending_key_ = false;
};

/// FNV-1a 64-bit hash, used for run ids and spec fingerprints.
std::uint64_t fnv1a(std::string_view text);
std::string hex_id(std::uint64_t value);

struct TrainingMeta {
  std::uint64_t seed_init = 0;
  std::uint64_t seed_labeled = 0;
  std::uint64_t seed_unlabeled = 0;
  int epochs = 0;
  std::size_t n_labeled = 0;
  std::size_t n_unlabeled = 0;
  AdamParams adam;
  double eta_coeffs = -1.0;
  double lr_decay_factor = 1.0;
  int lr_decay_every = 0;
  LossBreakdown final_loss;
};

/// Everything needed to evaluate a trained model from a file: variable
/// specs (hence standardizers), both bases, coefficients, network weights.
struct ModelBundle {
  std::string run_id;
  std::string problem;
  std::vector<RandomVariableSpec> variables;
  PceModel main;
  AdaptivePceModel aux;
  TrainingMeta training;
};

void save_model(const std::filesystem::path& path, const ModelBundle& bundle);
ModelBundle load_model(const std::filesystem::path& path);

void write_error_report(const std::filesystem::path& path, const ErrorReport& r,
                        const std::string& run_id);
void write_moment_summary(const std::filesystem::path& path,
                          const MomentSummary& s, const std::string& run_id);
void write_reliability(const std::filesystem::path& path,
                       const ReliabilityResult& r, const std::string& run_id);

void write_loss_history(const std::filesystem::path& path,
                        const std::vector<LossBreakdown>& history);

void write_kde_csv(const std::filesystem::path& path,
                   const std::vector<double>& grid,
                   const std::vector<double>& density);

/// Labeled data as CSV (original-units inputs plus label column) with a JSON
/// sidecar recording seed, sampling kind and a fingerprint of the specs.
void save_labeled_csv(const std::filesystem::path& path,
                      const std::vector<RandomVariableSpec>& specs,
                      const LabeledSet& set);

struct LabeledCsv {
  std::vector<std::string> columns;  // input names then label
  Eigen::MatrixXd x;                 // original units
  Eigen::VectorXd y;
};
LabeledCsv read_labeled_csv(const std::filesystem::path& path);

/// Fingerprint of a variable list (order matters).
std::string specs_fingerprint(const std::vector<RandomVariableSpec>& specs);

}  // namespace pcnn
