// SPDX-License-Identifier: MIT
//
// Surrogate models over an orthonormal polynomial basis.
//
// PceModel is the high-order model: a basis layer followed by a single linear
// output neuron whose weights are the expansion coefficients. There is no
// bias and no activation, so the constant is carried entirely by the first
// (identically 1) basis function.
//
// AdaptivePceModel is the low-order model: an MLP maps the input point to the
// expansion coefficients, and the prediction is their dot product with the
// low-order basis row at that point.

#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "pcnn/basis.hpp"
#include "pcnn/mlp.hpp"

namespace pcnn {

struct PceModel {
  OrthonormalBasis basis;
  Eigen::VectorXd coeffs;  // length M

  double eval(const Eigen::VectorXd& xi) const;
  Eigen::VectorXd eval_batch(const Eigen::MatrixXd& XI) const;
  void validate() const;
};

struct AuxOutput {
  Eigen::VectorXd coeffs;  // adaptive expansion coefficients at this point
  double prediction = 0.0;
};

struct AdaptivePceModel {
  Mlp net;                 // input d, output M_low
  OrthonormalBasis basis;  // low order

  AuxOutput forward(const Eigen::VectorXd& xi) const;
  /// Predictions (and, via the out parameter, coefficients) for a batch.
  Eigen::VectorXd predict_batch(const Eigen::MatrixXd& XI) const;
  void validate() const;
};

struct OlsFit {
  Eigen::VectorXd coeffs;
  int order = 0;
  double residual_rms = 0.0;
};

/// Least-squares expansion coefficients over the given basis:
/// minimizes sum_l (y_l - sum_i c_i Phi_i(xi_l))^2 + ridge*|c|^2, solved via
/// column-pivoted QR of the (possibly ridge-augmented) design matrix.
/// A rank-deficient design with ridge == 0 throws RankError advising a
/// positive ridge or more samples.
OlsFit ols_fit(const OrthonormalBasis& basis, const Eigen::MatrixXd& XI,
               const Eigen::VectorXd& y, double ridge = 0.0);

/// Coefficient initialization for the high-order model. The first entry is
/// the constant coefficient of a low-order least-squares fit; the remaining
/// M-1 entries are drawn i.i.d. uniform from
/// [-sqrt(D), +sqrt(D)] with D the population variance of the labels. When
/// all labels are equal (D == 0) the result degenerates to (label, 0, ..., 0).
/// A tiny ridge (1e-10) is applied automatically when the labeled set is
/// smaller than the low-order basis.
Eigen::VectorXd init_coeffs(const Eigen::MatrixXd& XI_labeled,
                            const Eigen::VectorXd& y_labeled,
                            const OrthonormalBasis& basis_high,
                            const OrthonormalBasis& basis_low,
                            std::uint64_t seed);

/// Population variance (1/N normalization) of a label vector.
double population_variance(const Eigen::VectorXd& y);

}  // namespace pcnn
