// SPDX-License-Identifier: MIT
#include "pcnn/basis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pcnn {

double UnivariateBasis::eval(int j, double xi) const {
  double acc = 0.0;
  for (int m = j; m >= 0; --m) acc = acc * xi + coeffs(j, m);
  return acc;
}

void UnivariateBasis::eval_all(double xi, std::span<double> out) const {
  double p = 1.0;  // xi^m
  for (int j = 0; j <= degree; ++j) out[static_cast<std::size_t>(j)] = 0.0;
  for (int m = 0; m <= degree; ++m) {
    for (int j = m; j <= degree; ++j)
      out[static_cast<std::size_t>(j)] += coeffs(j, m) * p;
    p *= xi;
  }
}

double moment_inner_product(const UnivariateBasis& basis, int j, int k,
                            const MomentVector& moments) {
  if (moments.max_order() < j + k)
    throw ValidationError("moment_inner_product: moments must reach order j+k");
  double acc = 0.0;
  for (int m = 0; m <= j; ++m) {
    if (basis.coeffs(j, m) == 0.0) continue;
    for (int mp = 0; mp <= k; ++mp)
      acc += basis.coeffs(j, m) * basis.coeffs(k, mp) *
             moments[static_cast<std::size_t>(m + mp)];
  }
  return acc;
}

UnivariateBasis apc_univariate(const MomentVector& moments, int degree) {
  if (degree < 0) throw ValidationError("apc_univariate: degree must be >= 0");
  if (moments.max_order() < 2 * degree)
    throw ValidationError(
        "apc_univariate: need raw moments up to order 2*degree (got " +
        std::to_string(moments.max_order()) + ", need " +
        std::to_string(2 * degree) + ")");

  UnivariateBasis basis;
  basis.degree = degree;
  basis.coeffs = Eigen::MatrixXd::Zero(degree + 1, degree + 1);
  basis.norms = Eigen::VectorXd::Ones(degree + 1);

  constexpr double kRcondThreshold = 1e-13;

  // Solve in the rescaled variable eta = xi / scale so the moment-matrix
  // entries stay O(1); high-order raw moments span many decades and would
  // otherwise drown the condition estimate. Coefficients map back exactly.
  const double top = std::abs(moments[static_cast<std::size_t>(2 * degree)]);
  const double scale =
      degree > 0 ? std::max(1.0, std::pow(top, 1.0 / (2.0 * degree))) : 1.0;
  std::vector<double> scaled(moments.values.size());
  double power = 1.0;
  for (std::size_t m = 0; m < scaled.size(); ++m) {
    scaled[m] = moments.values[m] / power;
    power *= scale;
  }

  for (int j = 0; j <= degree; ++j) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(j + 1, j + 1);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(j + 1);
    for (int r = 0; r < j; ++r)
      for (int m = 0; m <= j; ++m)
        A(r, m) = scaled[static_cast<std::size_t>(r + m)];
    A(j, j) = 1.0;
    rhs(j) = 1.0;

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    if (j > 0 && lu.rcond() < kRcondThreshold)
      throw ConditioningError(
          "moment matrix too ill-conditioned at degree " + std::to_string(j) +
          " (rcond estimate " + std::to_string(lu.rcond()) + ")",
          j);
    Eigen::VectorXd a = lu.solve(rhs);
    if (a(j) == 0.0 || !a.allFinite())
      throw ConditioningError("degenerate solution at degree " + std::to_string(j),
                              j);
    a /= a(j);  // monic in eta
    // phi(xi) = scale^j * phi_eta(xi / scale): monic in xi as well.
    double back = 1.0;  // scale^(j-m), filled from m = j downward
    for (int m = j; m >= 0; --m) {
      basis.coeffs(j, m) = a(m) * back;
      back *= scale;
    }

    const double sq = moment_inner_product(basis, j, j, moments);
    if (!(sq > 0.0) || !std::isfinite(sq))
      throw ConditioningError("non-positive squared norm at degree " +
                                  std::to_string(j) +
                                  "; moment sequence is not positive definite",
                              j);
    const double norm = std::sqrt(sq);
    basis.norms(j) = norm;
    basis.coeffs.row(j) /= norm;
  }
  basis.normalized = true;
  return basis;
}

void reorthonormalize(UnivariateBasis& basis, std::span<const double> samples) {
  if (samples.size() < 2)
    throw ValidationError("reorthonormalize: need at least 2 samples");
  const auto n = static_cast<Eigen::Index>(samples.size());
  const int p = basis.degree;

  // Monomial powers of every sample; values of poly j are X * coeffs.row(j)^T.
  Eigen::MatrixXd X(n, p + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    double pw = 1.0;
    for (int m = 0; m <= p; ++m) {
      X(i, m) = pw;
      pw *= samples[static_cast<std::size_t>(i)];
    }
  }

  Eigen::MatrixXd values(n, p + 1);
  for (int j = 0; j <= p; ++j)
    values.col(j) = X * basis.coeffs.row(j).transpose();

  const double inv_n = 1.0 / static_cast<double>(n);
  for (int j = 0; j <= p; ++j) {
    for (int k = 0; k < j; ++k) {
      const double r = values.col(j).dot(values.col(k)) * inv_n;
      values.col(j) -= r * values.col(k);
      basis.coeffs.row(j) -= r * basis.coeffs.row(k);
    }
    const double sq = values.col(j).squaredNorm() * inv_n;
    if (!(sq > 0.0))
      throw ConditioningError(
          "sample Gram matrix degenerate at degree " + std::to_string(j), j);
    const double norm = std::sqrt(sq);
    values.col(j) /= norm;
    basis.coeffs.row(j) /= norm;
  }
  basis.mgs_applied = true;
}

UnivariateBasis truncated(const UnivariateBasis& basis, int degree) {
  if (degree < 0 || degree > basis.degree)
    throw ValidationError("truncated: degree must lie in [0, " +
                          std::to_string(basis.degree) + "]");
  UnivariateBasis out;
  out.degree = degree;
  out.coeffs = basis.coeffs.topLeftCorner(degree + 1, degree + 1);
  out.norms = basis.norms.head(degree + 1);
  out.normalized = basis.normalized;
  out.mgs_applied = basis.mgs_applied;
  return out;
}

std::size_t basis_size(int d, int p) {
  if (d < 1) throw ValidationError("basis_size: d must be >= 1");
  if (p < 0) throw ValidationError("basis_size: p must be >= 0");
  // C(d+p, p) incrementally; detect overflow before it happens.
  std::size_t m = 1;
  for (int i = 1; i <= p; ++i) {
    const auto num = static_cast<std::size_t>(d + i);
    if (m > std::numeric_limits<std::size_t>::max() / num)
      throw CapacityError("basis size C(d+p, p) overflows size_t for d=" +
                          std::to_string(d) + ", p=" + std::to_string(p));
    m = m * num / static_cast<std::size_t>(i);
  }
  return m;
}

namespace {

void enumerate_degree(int d, int total, int dim, std::vector<int>& current,
                      std::vector<std::vector<int>>& out) {
  if (dim == d - 1) {
    current[static_cast<std::size_t>(dim)] = total;
    out.push_back(current);
    return;
  }
  for (int s = total; s >= 0; --s) {
    current[static_cast<std::size_t>(dim)] = s;
    enumerate_degree(d, total - s, dim + 1, current, out);
  }
}

}  // namespace

MultiIndexSet multi_indices(int d, int p) {
  const std::size_t m = basis_size(d, p);
  if (m > static_cast<std::size_t>(std::numeric_limits<Eigen::Index>::max()))
    throw CapacityError("basis size exceeds matrix index range");

  std::vector<std::vector<int>> rows;
  rows.reserve(m);
  std::vector<int> current(static_cast<std::size_t>(d), 0);
  for (int g = 0; g <= p; ++g) enumerate_degree(d, g, 0, current, rows);

  MultiIndexSet set;
  set.dims = d;
  set.order = p;
  set.indices.resize(static_cast<Eigen::Index>(rows.size()), d);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int k = 0; k < d; ++k)
      set.indices(static_cast<Eigen::Index>(i), k) = rows[i][static_cast<std::size_t>(k)];
  return set;
}

void OrthonormalBasis::eval(const Eigen::VectorXd& xi, std::span<double> out) const {
  const int d = dims();
  if (xi.size() != d)
    throw ValidationError("eval_basis: point dimension mismatch");
  if (!xi.allFinite()) throw NumericError("eval_basis: non-finite input");

  // Univariate values, laid out dimension-major. Families may carry degrees
  // beyond the index order, so the stride follows the largest family.
  int max_degree = 0;
  for (const auto& u : univariate) max_degree = std::max(max_degree, u.degree);
  const std::size_t stride = static_cast<std::size_t>(max_degree) + 1;
  thread_local std::vector<double> table;
  table.resize(static_cast<std::size_t>(d) * stride);
  for (int k = 0; k < d; ++k) {
    const auto& u = univariate[static_cast<std::size_t>(k)];
    u.eval_all(xi(k),
               std::span<double>(table.data() + static_cast<std::size_t>(k) * stride,
                                 static_cast<std::size_t>(u.degree) + 1));
  }

  const auto M = static_cast<Eigen::Index>(size());
  for (Eigen::Index i = 0; i < M; ++i) {
    double prod = 1.0;
    for (int k = 0; k < d; ++k) {
      const int deg = index_set.indices(i, k);
      if (deg != 0)
        prod *= table[static_cast<std::size_t>(k) * stride + static_cast<std::size_t>(deg)];
    }
    out[static_cast<std::size_t>(i)] = prod;
  }
}

Eigen::VectorXd OrthonormalBasis::eval(const Eigen::VectorXd& xi) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
  eval(xi, std::span<double>(out.data(), size()));
  return out;
}

RowMajorMatrixXd OrthonormalBasis::eval_matrix(const Eigen::MatrixXd& XI) const {
  if (XI.cols() != dims())
    throw ValidationError("eval_matrix: sample dimension mismatch");
  RowMajorMatrixXd PHI(XI.rows(), static_cast<Eigen::Index>(size()));
  Eigen::VectorXd pt(XI.cols());
  for (Eigen::Index i = 0; i < XI.rows(); ++i) {
    pt = XI.row(i).transpose();
    eval(pt, std::span<double>(PHI.data() + i * PHI.cols(),
                               static_cast<std::size_t>(PHI.cols())));
  }
  return PHI;
}

OrthonormalBasis tensor_basis(std::vector<UnivariateBasis> univariate, int p,
                              MomentProvenance provenance) {
  if (univariate.empty())
    throw ValidationError("tensor_basis: need at least one dimension");
  for (const auto& u : univariate)
    if (u.degree < p)
      throw ValidationError("tensor_basis: univariate family degree " +
                            std::to_string(u.degree) +
                            " below requested order " + std::to_string(p));
  OrthonormalBasis basis;
  basis.index_set = multi_indices(static_cast<int>(univariate.size()), p);
  basis.univariate = std::move(univariate);
  basis.provenance = provenance;
  return basis;
}

std::vector<UnivariateBasis> univariate_bases(
    std::span<const RandomVariableSpec> specs,
    const Eigen::MatrixXd& standardized_pool, int degree, MomentSource source) {
  if (standardized_pool.cols() != static_cast<Eigen::Index>(specs.size()))
    throw ValidationError("univariate_bases: pool/spec dimension mismatch");

  std::vector<UnivariateBasis> families;
  families.reserve(specs.size());
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const auto col = standardized_pool.col(static_cast<Eigen::Index>(k));
    MomentVector moments =
        source == MomentSource::Analytic
            ? analytic_moments(specs[k].family, 2 * degree)
            : empirical_moments(
                  std::span<const double>(col.data(), static_cast<std::size_t>(col.size())),
                  2 * degree);
    UnivariateBasis u = apc_univariate(moments, degree);
    if (source == MomentSource::Empirical && degree >= 7)
      reorthonormalize(u, std::span<const double>(col.data(),
                                                  static_cast<std::size_t>(col.size())));
    families.push_back(std::move(u));
  }
  return families;
}

}  // namespace pcnn
