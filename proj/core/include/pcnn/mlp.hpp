// SPDX-License-Identifier: MIT
//
// A small fixed-architecture multilayer perceptron with rectified-linear
// hidden layers, hand-derived reverse-mode gradients, and the Adam optimizer.
// Batches are row-major: one sample per row.

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "pcnn/errors.hpp"

namespace pcnn {

struct MlpGradients {
  std::vector<Eigen::MatrixXd> d_weights;
  std::vector<Eigen::VectorXd> d_biases;

  MlpGradients& operator+=(const MlpGradients& other);
};

class Mlp {
 public:
  Mlp() = default;

  /// Zero-initialized network with the given layer sizes (input, hidden...,
  /// output). Throws ValidationError on an inconsistent chain.
  explicit Mlp(std::vector<int> layer_sizes);

  /// Scaled-uniform fan-based initialization: weights of layer l drawn from
  /// U(-r, r) with r = sqrt(6 / (fan_in + fan_out)); biases zero. Seeded and
  /// reproducible.
  static Mlp uniform_init(std::vector<int> layer_sizes, std::uint64_t seed);

  /// Activations cached by a forward pass, consumed by backward().
  struct Cache {
    Eigen::MatrixXd input;
    std::vector<Eigen::MatrixXd> hidden;  // post-activation per hidden layer
    bool valid = false;
  };

  /// Forward pass: X is n x input_size, result n x output_size. Hidden layers
  /// apply the rectifier, the output layer is affine.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& X) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& X, Cache& cache) const;

  /// Exact reverse-mode gradients of sum_n <output_grad row, output row>
  /// with respect to every weight and bias. The rectifier subgradient at 0
  /// is 0. Throws UsageError when the cache is missing or stale.
  MlpGradients backward(const Cache& cache,
                        const Eigen::MatrixXd& output_grad) const;

  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  int input_size() const { return layer_sizes_.front(); }
  int output_size() const { return layer_sizes_.back(); }
  std::size_t n_layers() const { return weights_.size(); }

  std::vector<Eigen::MatrixXd>& weights() { return weights_; }
  std::vector<Eigen::VectorXd>& biases() { return biases_; }
  const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
  const std::vector<Eigen::VectorXd>& biases() const { return biases_; }

  Eigen::Index n_params() const;

  /// Flat parameter vector (weights row-major then bias, layer by layer).
  Eigen::VectorXd pack_params() const;
  void set_params(const Eigen::VectorXd& flat);

  Eigen::VectorXd pack(const MlpGradients& grads) const;
  MlpGradients zero_gradients() const;

 private:
  std::vector<int> layer_sizes_;
  std::vector<Eigen::MatrixXd> weights_;  // weights_[l] is in x out
  std::vector<Eigen::VectorXd> biases_;   // biases_[l] is out
};

/// Adam hyperparameters. The defaults follow common practice; the training
/// loop exposes the step size through its config.
struct AdamParams {
  double eta = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam state over a flat parameter vector: first/second moment accumulators
/// and the step counter, with bias correction. A step with any non-finite
/// gradient entry throws NumericError and leaves parameters and state
/// untouched.
class Adam {
 public:
  Adam(AdamParams params, Eigen::Index n);

  /// One update in place. `lr_scale` multiplies eta (step-decay hook).
  void step(Eigen::Ref<Eigen::VectorXd> parameters,
            const Eigen::Ref<const Eigen::VectorXd>& gradient,
            double lr_scale = 1.0);

  std::int64_t t() const { return t_; }
  const AdamParams& params() const { return params_; }

 private:
  AdamParams params_;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  std::int64_t t_ = 0;
};

}  // namespace pcnn
