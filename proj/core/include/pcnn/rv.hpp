// SPDX-License-Identifier: MIT
//
// Random-variable specifications, linear standardization, sampling and raw
// moments of standardized variables.

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pcnn/errors.hpp"

namespace pcnn {

enum class Family { Normal, Uniform, Gumbel };

const char* family_name(Family f);
Family family_from_name(const std::string& name);  // throws ValidationError

/// One input dimension. For Normal and Gumbel, (a, b) are mean and standard
/// deviation in original units; for Uniform they are the lower and upper
/// bounds.
struct RandomVariableSpec {
  std::string name;
  Family family = Family::Normal;
  double a = 0.0;
  double b = 1.0;
};

/// Throws ValidationError naming the offending field.
void validate(const RandomVariableSpec& spec);

/// Linear map xi = (x - mu) / sigma and its inverse.
struct Standardizer {
  double mu = 0.0;
  double sigma = 1.0;

  double standardize(double x) const { return (x - mu) / sigma; }
  double destandardize(double xi) const { return mu + sigma * xi; }
};

/// Exact analytic mean/sd of the family:
///   Normal(a, b)  -> (a, b)
///   Uniform(a, b) -> ((a+b)/2, (b-a)/sqrt(12))
///   Gumbel(a, b)  -> (a, b)      (specified directly by mean/sd)
Standardizer standardizer_for(const RandomVariableSpec& spec);

/// Invert a Gumbel's (mean, sd) to its (location, scale) parameters:
/// scale = sd*sqrt(6)/pi, location = mean - gamma*scale.
std::pair<double, double> gumbel_location_scale(double mean, double sd);

/// Euler-Mascheroni constant.
inline constexpr double kEulerGamma = 0.57721566490153286060651209;

/// Inverse CDF of the standard normal, full double precision.
double normal_quantile(double u);

/// Inverse CDF of the distribution described by `spec`, in original units.
double quantile(const RandomVariableSpec& spec, double u);

enum class SampleKind { MonteCarlo, LatinHypercube };

const char* sample_kind_name(SampleKind k);
SampleKind sample_kind_from_name(const std::string& name);

/// n x d matrix of standardized samples. Column k was generated from spec k
/// and standardized with standardizer_for(spec k).
struct SampleMatrix {
  Eigen::MatrixXd data;
  std::uint64_t seed = 0;
  SampleKind kind = SampleKind::MonteCarlo;
};

/// Draw n standardized samples of the given variables. Latin hypercube
/// sampling stratifies each marginal into n equiprobable bins with one
/// uniformly jittered point per bin and an independent random bin permutation
/// per dimension; points are mapped through the family's inverse CDF and then
/// standardized. Deterministic for a fixed seed; dimension k consumes stream
/// k of the seed.
SampleMatrix sample(std::span<const RandomVariableSpec> specs, std::size_t n,
                    SampleKind kind, std::uint64_t seed);

enum class MomentSource { Empirical, Analytic };

/// Raw moments mu^(0)..mu^(max_order) of a standardized variable.
struct MomentVector {
  std::vector<double> values;  // values[k] = E[xi^k]
  MomentSource source = MomentSource::Empirical;
  std::size_t sample_count = 0;  // 0 when analytic

  int max_order() const { return static_cast<int>(values.size()) - 1; }
  double operator[](std::size_t k) const { return values[k]; }
};

/// (1/n) sum xi^beta for beta = 0..max_order. Requires column length
/// >= 10*max_order.
MomentVector empirical_moments(std::span<const double> column, int max_order);

/// Closed-form raw moments of the standardized family. Supported for Normal
/// (0 odd, (beta-1)!! even) and Uniform (0 odd, 3^(beta/2)/(beta+1) even);
/// Gumbel has no analytic mode and must use the empirical path.
MomentVector analytic_moments(Family family, int max_order);

}  // namespace pcnn
