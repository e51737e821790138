// SPDX-License-Identifier: MIT
#include "pcnn/problems.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace pcnn {

double cantilever_g(std::span<const double> x, double theta1_rad,
                    double theta2_rad) {
  if (x.size() != 9)
    throw ValidationError("cantilever_g: expected 9 inputs, got " +
                          std::to_string(x.size()));
  const double t = x[0];
  const double d = x[1];
  const double len1 = x[2];
  const double len2 = x[3];
  const double f1 = x[4] * 1000.0;  // kN -> N
  const double f2 = x[5] * 1000.0;
  const double p = x[6] * 1000.0;
  const double torque = x[7] * 1000.0;  // N*m -> N*mm
  const double yield = x[8];            // MPa

  if (!(d > 2.0 * t) || !(t > 0.0))
    throw ValidationError("cantilever_g: tube geometry requires d > 2t > 0 (t=" +
                          std::to_string(t) + ", d=" + std::to_string(d) + ")");

  const double inner = d - 2.0 * t;
  const double area = std::numbers::pi / 4.0 * (d * d - inner * inner);
  const double second_moment =
      std::numbers::pi / 64.0 * (d * d * d * d - inner * inner * inner * inner);
  const double bending = f1 * len1 * std::cos(theta1_rad) +
                         f2 * len2 * std::cos(theta2_rad);
  const double sigma_x =
      (p + f1 * std::sin(theta1_rad) + f2 * std::sin(theta2_rad)) / area +
      bending * d / (2.0 * second_moment);
  const double tau_zx = torque * d / (4.0 * second_moment);
  const double g = yield - std::sqrt(sigma_x * sigma_x + 3.0 * tau_zx * tau_zx);
  if (!std::isfinite(g))
    throw NumericError("cantilever_g: non-finite result");
  return g;
}

PerformanceFunction cantilever_tube_problem(double theta1_deg, double theta2_deg) {
  PerformanceFunction pf;
  pf.name = "cantilever_tube";
  pf.inputs = {
      {"t", Family::Normal, 5.0, 0.1},        // mm
      {"d", Family::Normal, 42.0, 0.5},       // mm
      {"L1", Family::Uniform, 119.75, 120.25},  // mm
      {"L2", Family::Uniform, 59.75, 60.25},    // mm
      {"F1", Family::Normal, 3.0, 0.3},       // kN
      {"F2", Family::Normal, 3.0, 0.3},       // kN
      {"P", Family::Gumbel, 12.0, 1.2},       // kN
      {"T", Family::Normal, 90.0, 9.0},       // N*m
      {"Sy", Family::Normal, 220.0, 22.0},    // MPa
  };
  pf.fixed_params = {{"theta1_deg", theta1_deg}, {"theta2_deg", theta2_deg}};
  const double th1 = theta1_deg * std::numbers::pi / 180.0;
  const double th2 = theta2_deg * std::numbers::pi / 180.0;
  pf.eval = [th1, th2](std::span<const double> x) {
    return cantilever_g(x, th1, th2);
  };
  return pf;
}

PerformanceFunction microsat_problem(
    std::function<double(std::span<const double>)> mass_fn) {
  PerformanceFunction pf;
  pf.name = "conceptual_microsatellite";
  pf.inputs = {
      {"h_o", Family::Normal, 600.0, 6.0},     // km
      {"f_c", Family::Normal, 280.0, 1.0},     // mm
      {"b_sat", Family::Normal, 800.0, 10.0},  // mm
      {"l_sat", Family::Normal, 700.0, 10.0},  // mm
      {"t_sat", Family::Normal, 5.0, 0.1},     // mm
      {"c_DH", Family::Uniform, 0.04, 0.05},
      {"c_TTC", Family::Uniform, 0.05, 0.06},
  };
  pf.fixed_params = {{"mass_limit_kg", 183.0}};
  if (mass_fn) {
    pf.eval = [fn = std::move(mass_fn)](std::span<const double> x) {
      return 183.0 - fn(x);
    };
  }
  return pf;
}

LabeledSet generate_labels(const PerformanceFunction& g, std::size_t n,
                           SampleKind kind, std::uint64_t seed) {
  if (!g.eval)
    throw UsageError("problem '" + g.name +
                     "' has no performance evaluator; labels cannot be generated");
  if (n < 1) throw ValidationError("generate_labels: n must be >= 1");

  LabeledSet set;
  set.seed = seed;
  set.kind = kind;
  const SampleMatrix samples = sample(g.inputs, n, kind, seed);
  set.xi = samples.data;
  set.y.resize(static_cast<Eigen::Index>(n));

  std::vector<Standardizer> standardizers;
  standardizers.reserve(g.inputs.size());
  for (const auto& spec : g.inputs) standardizers.push_back(standardizer_for(spec));

  std::vector<double> x(g.inputs.size());
  for (Eigen::Index i = 0; i < set.xi.rows(); ++i) {
    for (std::size_t k = 0; k < g.inputs.size(); ++k)
      x[k] = standardizers[k].destandardize(set.xi(i, static_cast<Eigen::Index>(k)));
    try {
      set.y(i) = g.eval(x);
    } catch (const Error& e) {
      throw NumericError("generate_labels: sample " + std::to_string(i) + ": " +
                         e.what());
    }
  }
  return set;
}

std::function<double(const Eigen::VectorXd&)> as_standardized_fn(
    const PerformanceFunction& g) {
  if (!g.eval)
    throw UsageError("problem '" + g.name + "' has no performance evaluator");
  std::vector<Standardizer> standardizers;
  standardizers.reserve(g.inputs.size());
  for (const auto& spec : g.inputs) standardizers.push_back(standardizer_for(spec));
  return [eval = g.eval, standardizers](const Eigen::VectorXd& xi) {
    std::vector<double> x(standardizers.size());
    for (std::size_t k = 0; k < standardizers.size(); ++k)
      x[k] = standardizers[k].destandardize(xi(static_cast<Eigen::Index>(k)));
    return eval(x);
  };
}

}  // namespace pcnn
