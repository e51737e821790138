// SPDX-License-Identifier: MIT
#include "pcnn/rv.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pcnn/rng.hpp"

namespace pcnn {

const char* family_name(Family f) {
  switch (f) {
    case Family::Normal: return "normal";
    case Family::Uniform: return "uniform";
    case Family::Gumbel: return "gumbel";
  }
  return "?";
}

Family family_from_name(const std::string& name) {
  if (name == "normal") return Family::Normal;
  if (name == "uniform") return Family::Uniform;
  if (name == "gumbel") return Family::Gumbel;
  throw ValidationError("unknown distribution family '" + name +
                        "' (supported: normal, uniform, gumbel)");
}

void validate(const RandomVariableSpec& spec) {
  if (!std::isfinite(spec.a) || !std::isfinite(spec.b))
    throw ValidationError("variable '" + spec.name + "': parameters must be finite");
  switch (spec.family) {
    case Family::Normal:
    case Family::Gumbel:
      if (spec.b <= 0.0)
        throw ValidationError("variable '" + spec.name +
                              "': field b (standard deviation) must be > 0");
      break;
    case Family::Uniform:
      if (spec.a >= spec.b)
        throw ValidationError("variable '" + spec.name +
                              "': field a (lower bound) must be < b (upper bound)");
      break;
  }
}

Standardizer standardizer_for(const RandomVariableSpec& spec) {
  validate(spec);
  switch (spec.family) {
    case Family::Normal:
    case Family::Gumbel:
      return {spec.a, spec.b};
    case Family::Uniform:
      return {(spec.a + spec.b) / 2.0, (spec.b - spec.a) / std::sqrt(12.0)};
  }
  throw ValidationError("unreachable family");
}

std::pair<double, double> gumbel_location_scale(double mean, double sd) {
  if (!(sd > 0.0))
    throw ValidationError("gumbel standard deviation must be > 0");
  const double scale = sd * std::numbers::sqrt2 * std::numbers::sqrt3 / std::numbers::pi;
  const double location = mean - kEulerGamma * scale;
  return {location, scale};
}

namespace {

// Acklam's rational approximation to the standard normal inverse CDF,
// refined by one Halley step on Phi(x) - u computed via erfc. Accurate to a
// few ulp over (0, 1).
double normal_quantile_acklam(double u) {
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  const double ulow = 0.02425;
  double x;
  if (u < ulow) {
    const double q = std::sqrt(-2.0 * std::log(u));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (u <= 1.0 - ulow) {
    const double q = u - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - u));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Halley refinement.
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - u;
  const double f = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x -= f / (1.0 + 0.5 * x * f);
  return x;
}

}  // namespace

double normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0))
    throw ValidationError("normal_quantile: u must lie strictly in (0, 1)");
  return normal_quantile_acklam(u);
}

double quantile(const RandomVariableSpec& spec, double u) {
  if (!(u > 0.0 && u < 1.0))
    throw ValidationError("quantile: u must lie strictly in (0, 1)");
  switch (spec.family) {
    case Family::Normal:
      return spec.a + spec.b * normal_quantile(u);
    case Family::Uniform:
      return spec.a + u * (spec.b - spec.a);
    case Family::Gumbel: {
      const auto [location, scale] = gumbel_location_scale(spec.a, spec.b);
      return location - scale * std::log(-std::log(u));
    }
  }
  throw ValidationError("unreachable family");
}

const char* sample_kind_name(SampleKind k) {
  return k == SampleKind::MonteCarlo ? "mc" : "lhs";
}

SampleKind sample_kind_from_name(const std::string& name) {
  if (name == "mc") return SampleKind::MonteCarlo;
  if (name == "lhs") return SampleKind::LatinHypercube;
  throw ValidationError("unknown sampling kind '" + name + "' (supported: mc, lhs)");
}

SampleMatrix sample(std::span<const RandomVariableSpec> specs, std::size_t n,
                    SampleKind kind, std::uint64_t seed) {
  if (n < 1) throw ValidationError("sample: n must be >= 1");
  if (specs.empty()) throw ValidationError("sample: need at least one variable");
  for (const auto& s : specs) validate(s);

  const std::size_t d = specs.size();
  SampleMatrix out;
  out.data.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  out.seed = seed;
  out.kind = kind;

  for (std::size_t k = 0; k < d; ++k) {
    Xoshiro256 rng(seed, k);
    const Standardizer std_k = standardizer_for(specs[k]);
    auto col = out.data.col(static_cast<Eigen::Index>(k));

    if (kind == SampleKind::MonteCarlo) {
      for (std::size_t i = 0; i < n; ++i)
        col(static_cast<Eigen::Index>(i)) =
            std_k.standardize(quantile(specs[k], rng.next_unit()));
    } else {
      // One point per equiprobable bin, independent bin permutation and
      // uniform jitter per dimension.
      std::vector<std::uint32_t> perm(n);
      for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<std::uint32_t>(i);
      for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next() % (i + 1));
        std::swap(perm[i], perm[j]);
      }
      for (std::size_t i = 0; i < n; ++i) {
        const double u = (static_cast<double>(perm[i]) + rng.next_unit()) /
                         static_cast<double>(n);
        col(static_cast<Eigen::Index>(i)) =
            std_k.standardize(quantile(specs[k], u));
      }
    }
  }
  return out;
}

MomentVector empirical_moments(std::span<const double> column, int max_order) {
  if (max_order < 0) throw ValidationError("moments: max_order must be >= 0");
  if (column.size() < static_cast<std::size_t>(10 * std::max(1, max_order)))
    throw ValidationError("empirical_moments: need at least 10*max_order samples");

  MomentVector mv;
  mv.source = MomentSource::Empirical;
  mv.sample_count = column.size();
  mv.values.assign(static_cast<std::size_t>(max_order) + 1, 0.0);
  for (double x : column) {
    double p = 1.0;
    for (int beta = 0; beta <= max_order; ++beta) {
      mv.values[static_cast<std::size_t>(beta)] += p;
      p *= x;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(column.size());
  for (auto& v : mv.values) v *= inv_n;
  return mv;
}

MomentVector analytic_moments(Family family, int max_order) {
  if (max_order < 0) throw ValidationError("moments: max_order must be >= 0");
  if (family == Family::Gumbel)
    throw ValidationError(
        "analytic moments are not available for the gumbel family; use the "
        "empirical path");

  MomentVector mv;
  mv.source = MomentSource::Analytic;
  mv.values.assign(static_cast<std::size_t>(max_order) + 1, 0.0);
  mv.values[0] = 1.0;
  for (int beta = 2; beta <= max_order; beta += 2) {
    const auto i = static_cast<std::size_t>(beta);
    if (family == Family::Normal) {
      // (beta-1)!! via the recursion mu_beta = (beta-1) * mu_{beta-2}
      mv.values[i] = static_cast<double>(beta - 1) * mv.values[i - 2];
    } else {
      mv.values[i] = std::pow(3.0, beta / 2) / static_cast<double>(beta + 1);
    }
  }
  return mv;
}

}  // namespace pcnn
