// SPDX-License-Identifier: MIT
#include "pcnn/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pcnn {

namespace {
constexpr double kMreTruthGuard = 1e-12;
}

ErrorReport error_metrics(std::span<const double> y_true,
                          std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size())
    throw ValidationError("error_metrics: size mismatch");
  if (y_true.size() < 2)
    throw ValidationError("error_metrics: need at least 2 test points");

  const auto n = y_true.size();
  double sq_sum = 0.0, abs_sum = 0.0, rel_sum = 0.0, pred_sum = 0.0;
  std::size_t rel_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double err = y_true[i] - y_pred[i];
    sq_sum += err * err;
    abs_sum += std::abs(err);
    pred_sum += y_pred[i];
    if (std::abs(y_true[i]) >= kMreTruthGuard) {
      rel_sum += std::abs(err / y_true[i]);
      ++rel_count;
    }
  }

  ErrorReport report;
  report.n_test = n;
  report.rmse = std::sqrt(sq_sum / static_cast<double>(n));
  report.mae = abs_sum / static_cast<double>(n);
  report.mre_excluded = n - rel_count;
  report.mre_defined = rel_count > 0;
  report.mre = report.mre_defined
                   ? rel_sum / static_cast<double>(n)
                   : std::numeric_limits<double>::quiet_NaN();

  const double pred_mean = pred_sum / static_cast<double>(n);
  double centered_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dev = y_true[i] - pred_mean;
    centered_sum += dev * dev;
  }
  report.r2 = 1.0 - sq_sum / centered_sum;
  return report;
}

ErrorReport error_metrics(const PceModel& model, const Eigen::MatrixXd& XI,
                          const Eigen::VectorXd& y) {
  const Eigen::VectorXd pred = model.eval_batch(XI);
  return error_metrics(
      std::span<const double>(y.data(), static_cast<std::size_t>(y.size())),
      std::span<const double>(pred.data(), static_cast<std::size_t>(pred.size())));
}

MomentSummary moment_summary(std::span<const double> values) {
  if (values.size() < 4)
    throw ValidationError("moment_summary: need at least 4 values");

  const auto n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;

  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double d = v - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;

  MomentSummary s;
  s.n = values.size();
  s.mean = mean;
  s.sd = std::sqrt(m2);
  if (m2 > 0.0) {
    s.skewness = m3 / std::pow(m2, 1.5);
    s.kurtosis = m4 / (m2 * m2);
  } else {
    s.shape_defined = false;
    s.skewness = std::numeric_limits<double>::quiet_NaN();
    s.kurtosis = std::numeric_limits<double>::quiet_NaN();
  }
  return s;
}

ReliabilityResult failure_probability(
    const std::function<double(const Eigen::VectorXd&)>& fn,
    std::span<const RandomVariableSpec> specs, std::size_t n_mcs,
    std::uint64_t seed) {
  if (n_mcs < 1) throw ValidationError("failure_probability: n_mcs must be >= 1");
  const SampleMatrix samples = sample(specs, n_mcs, SampleKind::MonteCarlo, seed);

  std::size_t failures = 0;
  Eigen::VectorXd xi(samples.data.cols());
  for (Eigen::Index i = 0; i < samples.data.rows(); ++i) {
    xi = samples.data.row(i).transpose();
    if (fn(xi) < 0.0) ++failures;
  }

  ReliabilityResult r;
  r.n_mcs = n_mcs;
  r.failures = failures;
  r.pf = static_cast<double>(failures) / static_cast<double>(n_mcs);
  r.std_error = std::sqrt(r.pf * (1.0 - r.pf) / static_cast<double>(n_mcs));
  r.seed = seed;
  return r;
}

ReliabilityResult failure_probability(const PceModel& model,
                                      std::span<const RandomVariableSpec> specs,
                                      std::size_t n_mcs, std::uint64_t seed) {
  if (n_mcs < 1) throw ValidationError("failure_probability: n_mcs must be >= 1");
  const SampleMatrix samples = sample(specs, n_mcs, SampleKind::MonteCarlo, seed);

  constexpr Eigen::Index kBatch = 8192;
  std::size_t failures = 0;
  for (Eigen::Index b = 0; b < samples.data.rows(); b += kBatch) {
    const Eigen::Index rows = std::min(kBatch, samples.data.rows() - b);
    const Eigen::VectorXd vals =
        model.eval_batch(samples.data.middleRows(b, rows));
    failures += static_cast<std::size_t>((vals.array() < 0.0).count());
  }

  ReliabilityResult r;
  r.n_mcs = n_mcs;
  r.failures = failures;
  r.pf = static_cast<double>(failures) / static_cast<double>(n_mcs);
  r.std_error = std::sqrt(r.pf * (1.0 - r.pf) / static_cast<double>(n_mcs));
  r.seed = seed;
  return r;
}

ReliabilityResult failure_probability_from(std::span<const double> values,
                                           std::uint64_t seed) {
  if (values.empty())
    throw ValidationError("failure_probability: need at least one value");
  std::size_t failures = 0;
  for (double v : values)
    if (v < 0.0) ++failures;

  ReliabilityResult r;
  r.n_mcs = values.size();
  r.failures = failures;
  r.pf = static_cast<double>(failures) / static_cast<double>(values.size());
  r.std_error = std::sqrt(r.pf * (1.0 - r.pf) / static_cast<double>(values.size()));
  r.seed = seed;
  return r;
}

double silverman_bandwidth(std::span<const double> values) {
  if (values.size() < 2)
    throw ValidationError("silverman_bandwidth: need at least 2 values");
  const auto n = static_cast<double>(values.size());

  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= n;
  const double sd = std::sqrt(var);

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto q = [&](double p) {
    const double idx = p * (n - 1.0);
    const auto lo = static_cast<std::size_t>(idx);
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = idx - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
  };
  const double iqr = q(0.75) - q(0.25);

  double spread = sd;
  if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0))
    throw ValidationError("silverman_bandwidth: data has zero spread");
  return 0.9 * spread * std::pow(n, -0.2);
}

std::vector<double> kde_pdf(std::span<const double> values,
                            std::span<const double> grid, double bandwidth) {
  if (values.size() < 10)
    throw ValidationError("kde_pdf: need at least 10 values");
  const double h = bandwidth > 0.0 ? bandwidth : silverman_bandwidth(values);

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  // Kernel contributions beyond 8.5 bandwidths are below double precision.
  const double cutoff = 8.5 * h;
  const double norm =
      1.0 / (static_cast<double>(values.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> density(grid.size(), 0.0);
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const auto lo = std::lower_bound(sorted.begin(), sorted.end(), grid[gi] - cutoff);
    const auto hi = std::upper_bound(lo, sorted.end(), grid[gi] + cutoff);
    double acc = 0.0;
    for (auto it = lo; it != hi; ++it) {
      const double z = (grid[gi] - *it) / h;
      acc += std::exp(-0.5 * z * z);
    }
    density[gi] = norm * acc;
  }
  return density;
}

}  // namespace pcnn
