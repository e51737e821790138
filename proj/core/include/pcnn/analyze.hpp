// SPDX-License-Identifier: MIT
//
// Accuracy metrics, moment statistics, kernel density estimates and Monte
// Carlo failure probability.

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pcnn/model.hpp"
#include "pcnn/rv.hpp"

namespace pcnn {

struct ErrorReport {
  double rmse = 0.0;
  double mae = 0.0;
  double mre = 0.0;        // mean |.(y - yhat)/y|, near-zero truths skipped
  double r2 = 0.0;         // 1 - SS_res / sum (y - ybar)^2, ybar = mean PREDICTION
  std::size_t n_test = 0;
  std::size_t mre_excluded = 0;  // truths with |y| < 1e-12 skipped by MRE
  bool mre_defined = true;       // false when every truth was near zero
};

/// Note: r2 uses the mean of the *predictions* as the centering value, which
/// differs from the conventional coefficient of determination; reports carry
/// a note to that effect. Requires n >= 2.
ErrorReport error_metrics(std::span<const double> y_true,
                          std::span<const double> y_pred);
ErrorReport error_metrics(const PceModel& model, const Eigen::MatrixXd& XI,
                          const Eigen::VectorXd& y);

struct MomentSummary {
  double mean = 0.0;
  double sd = 0.0;        // population standard deviation
  double skewness = 0.0;  // m3 / m2^(3/2)
  double kurtosis = 0.0;  // m4 / m2^2, non-excess (normal -> 3)
  std::size_t n = 0;
  bool shape_defined = true;  // false when the variance is zero
};

/// First four moments with population (1/n) normalization. Requires n >= 4.
MomentSummary moment_summary(std::span<const double> values);

struct ReliabilityResult {
  double pf = 0.0;
  std::size_t n_mcs = 0;
  std::size_t failures = 0;
  double std_error = 0.0;  // sqrt(pf (1-pf) / n)
  std::uint64_t seed = 0;
};

/// Failure probability of a function of the standardized inputs: draws n
/// Monte Carlo samples of the given variables, counts strictly negative
/// values. `fn` maps one standardized row to the performance value; use this
/// overload to evaluate a true performance function as an oracle.
ReliabilityResult failure_probability(
    const std::function<double(const Eigen::VectorXd&)>& fn,
    std::span<const RandomVariableSpec> specs, std::size_t n_mcs,
    std::uint64_t seed);

/// Failure probability of a trained model, evaluated in streaming batches.
ReliabilityResult failure_probability(const PceModel& model,
                                      std::span<const RandomVariableSpec> specs,
                                      std::size_t n_mcs, std::uint64_t seed);

/// Failure count over already-computed performance values.
ReliabilityResult failure_probability_from(std::span<const double> values,
                                           std::uint64_t seed);

/// Silverman's rule of thumb: 0.9 min(sd, iqr/1.34) n^(-1/5).
double silverman_bandwidth(std::span<const double> values);

/// Gaussian-kernel density on the given grid. bandwidth <= 0 selects
/// Silverman's rule. Requires n >= 10 and nonzero variance.
std::vector<double> kde_pdf(std::span<const double> values,
                            std::span<const double> grid,
                            double bandwidth = 0.0);

}  // namespace pcnn
