// SPDX-License-Identifier: MIT
#include "pcnn/model.hpp"

#include <Eigen/QR>
#include <cmath>
#include <string>

#include "pcnn/rng.hpp"

namespace pcnn {

void PceModel::validate() const {
  if (static_cast<std::size_t>(coeffs.size()) != basis.size())
    throw ValidationError("pce model: coefficient count " +
                          std::to_string(coeffs.size()) +
                          " != basis size " + std::to_string(basis.size()));
  if (!coeffs.allFinite())
    throw NumericError("pce model: non-finite coefficients");
}

double PceModel::eval(const Eigen::VectorXd& xi) const {
  return basis.eval(xi).dot(coeffs);
}

Eigen::VectorXd PceModel::eval_batch(const Eigen::MatrixXd& XI) const {
  return basis.eval_matrix(XI) * coeffs;
}

void AdaptivePceModel::validate() const {
  if (net.input_size() != basis.dims())
    throw ValidationError("adaptive model: net input width != basis dims");
  if (static_cast<std::size_t>(net.output_size()) != basis.size())
    throw ValidationError("adaptive model: net output width " +
                          std::to_string(net.output_size()) +
                          " != basis size " + std::to_string(basis.size()));
}

AuxOutput AdaptivePceModel::forward(const Eigen::VectorXd& xi) const {
  AuxOutput out;
  const Eigen::MatrixXd c = net.forward(xi.transpose());
  out.coeffs = c.row(0).transpose();
  out.prediction = out.coeffs.dot(basis.eval(xi));
  return out;
}

Eigen::VectorXd AdaptivePceModel::predict_batch(const Eigen::MatrixXd& XI) const {
  const Eigen::MatrixXd c = net.forward(XI);
  const RowMajorMatrixXd phi = basis.eval_matrix(XI);
  return (c.array() * phi.array()).rowwise().sum().matrix();
}

OlsFit ols_fit(const OrthonormalBasis& basis, const Eigen::MatrixXd& XI,
               const Eigen::VectorXd& y, double ridge) {
  if (XI.rows() != y.size())
    throw ValidationError("ols_fit: sample/label count mismatch");
  if (XI.rows() < 1) throw ValidationError("ols_fit: empty labeled set");
  if (ridge < 0.0) throw ValidationError("ols_fit: ridge must be >= 0");

  const auto M = static_cast<Eigen::Index>(basis.size());
  const RowMajorMatrixXd PHI = basis.eval_matrix(XI);

  Eigen::MatrixXd A;
  Eigen::VectorXd rhs;
  if (ridge > 0.0) {
    A.resize(PHI.rows() + M, M);
    A.topRows(PHI.rows()) = PHI;
    A.bottomRows(M) = std::sqrt(ridge) * Eigen::MatrixXd::Identity(M, M);
    rhs.setZero(PHI.rows() + M);
    rhs.head(PHI.rows()) = y;
  } else {
    A = PHI;
    rhs = y;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (ridge == 0.0 && qr.rank() < M)
    throw RankError(
        "ols_fit: design matrix is rank deficient (rank " +
        std::to_string(qr.rank()) + " of " + std::to_string(M) +
        "); pass ridge > 0 or provide more samples");

  OlsFit fit;
  fit.coeffs = qr.solve(rhs);
  fit.order = basis.order();
  fit.residual_rms = std::sqrt((PHI * fit.coeffs - y).squaredNorm() /
                               static_cast<double>(y.size()));
  return fit;
}

double population_variance(const Eigen::VectorXd& y) {
  if (y.size() < 1) throw ValidationError("population_variance: empty vector");
  const double mean = y.mean();
  const double mean_sq = y.array().square().mean();
  return mean_sq - mean * mean;
}

Eigen::VectorXd init_coeffs(const Eigen::MatrixXd& XI_labeled,
                            const Eigen::VectorXd& y_labeled,
                            const OrthonormalBasis& basis_high,
                            const OrthonormalBasis& basis_low,
                            std::uint64_t seed) {
  if (y_labeled.size() < 1)
    throw ValidationError("init_coeffs: labeled set must be nonempty");

  const auto M = static_cast<Eigen::Index>(basis_high.size());
  Eigen::VectorXd c = Eigen::VectorXd::Zero(M);

  const double variance = std::max(0.0, population_variance(y_labeled));
  if (variance == 0.0) {
    c(0) = y_labeled(0);
    return c;
  }

  const double ridge =
      XI_labeled.rows() < static_cast<Eigen::Index>(basis_low.size()) ? 1e-10 : 0.0;
  const OlsFit low = ols_fit(basis_low, XI_labeled, y_labeled, ridge);
  c(0) = low.coeffs(0);

  const double half_width = std::sqrt(variance);
  Xoshiro256 rng(seed);
  for (Eigen::Index i = 1; i < M; ++i)
    c(i) = half_width * (2.0 * rng.next_unit() - 1.0);
  return c;
}

}  // namespace pcnn
