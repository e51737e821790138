// SPDX-License-Identifier: MIT
//
// Built-in benchmark problems and label generation.
//
// Unit convention for the cantilever tube: millimeters, Newtons, MPa
// (1 MPa = 1 N/mm^2). Force inputs in kN are converted by x1000, torque in
// N*m by x1000 to N*mm. Angles live in the problem's fixed parameters in
// degrees and are converted to radians internally.

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pcnn/rv.hpp"

namespace pcnn {

/// A scalar performance function of original-units inputs. Failure is the
/// event g < 0. `eval` may be empty for spec-only bundles, in which case
/// label generation reports a missing-function error.
struct PerformanceFunction {
  std::string name;
  std::vector<RandomVariableSpec> inputs;
  std::map<std::string, double> fixed_params;
  std::function<double(std::span<const double>)> eval;

  int dims() const { return static_cast<int>(inputs.size()); }
};

/// Cantilever tube stress margin. Inputs, in order:
///   t [mm], d [mm], L1 [mm], L2 [mm], F1 [kN], F2 [kN], P [kN], T [N*m],
///   Sy [MPa].
/// Computes the annulus area and second moment, the bending moment of the two
/// oblique forces, the normal and torsional stresses, and returns
/// Sy - sqrt(sigma_x^2 + 3 tau_zx^2) in MPa. Throws ValidationError when the
/// annulus is degenerate (d <= 2t) and NumericError on non-finite values.
double cantilever_g(std::span<const double> x, double theta1_rad,
                    double theta2_rad);

/// The nine-variable cantilever tube problem with its standard distributions.
PerformanceFunction cantilever_tube_problem(double theta1_deg = 5.0,
                                            double theta2_deg = 10.0);

/// The seven-variable conceptual-microsatellite problem: failure when the
/// mass model exceeds 183 kg, i.e. g = 183 - mass(x). The mass model itself
/// is user-supplied; without one the bundle is spec-only.
PerformanceFunction microsat_problem(
    std::function<double(std::span<const double>)> mass_fn = nullptr);

/// Standardized inputs paired with original-units labels.
struct LabeledSet {
  Eigen::MatrixXd xi;  // n x d standardized
  Eigen::VectorXd y;
  std::uint64_t seed = 0;
  SampleKind kind = SampleKind::LatinHypercube;
};

/// Sample n standardized points, destandardize per dimension, evaluate g.
/// Deterministic for a fixed seed. Errors from g are rethrown with the sample
/// index; a missing evaluator throws UsageError.
LabeledSet generate_labels(const PerformanceFunction& g, std::size_t n,
                           SampleKind kind, std::uint64_t seed);

/// Wrap a performance function as a function of standardized inputs, for use
/// with failure_probability and as a test-time oracle.
std::function<double(const Eigen::VectorXd&)> as_standardized_fn(
    const PerformanceFunction& g);

}  // namespace pcnn
