// SPDX-License-Identifier: MIT
#include "pcnn/mlp.hpp"

#include <cmath>
#include <string>

#include "pcnn/rng.hpp"

namespace pcnn {

MlpGradients& MlpGradients::operator+=(const MlpGradients& other) {
  if (d_weights.size() != other.d_weights.size())
    throw ValidationError("gradient accumulate: layer count mismatch");
  for (std::size_t l = 0; l < d_weights.size(); ++l) {
    d_weights[l] += other.d_weights[l];
    d_biases[l] += other.d_biases[l];
  }
  return *this;
}

Mlp::Mlp(std::vector<int> layer_sizes) : layer_sizes_(std::move(layer_sizes)) {
  if (layer_sizes_.size() < 2)
    throw ValidationError("mlp: need at least input and output layers");
  for (int s : layer_sizes_)
    if (s < 1)
      throw ValidationError("mlp: every layer must have at least one neuron");
  const std::size_t n_layers = layer_sizes_.size() - 1;
  weights_.reserve(n_layers);
  biases_.reserve(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    weights_.emplace_back(Eigen::MatrixXd::Zero(layer_sizes_[l], layer_sizes_[l + 1]));
    biases_.emplace_back(Eigen::VectorXd::Zero(layer_sizes_[l + 1]));
  }
}

Mlp Mlp::uniform_init(std::vector<int> layer_sizes, std::uint64_t seed) {
  Mlp net(std::move(layer_sizes));
  Xoshiro256 rng(seed);
  for (std::size_t l = 0; l < net.weights_.size(); ++l) {
    auto& W = net.weights_[l];
    const double r = std::sqrt(6.0 / static_cast<double>(W.rows() + W.cols()));
    // Row-major fill so the draw order matches the packed layout.
    for (Eigen::Index i = 0; i < W.rows(); ++i)
      for (Eigen::Index j = 0; j < W.cols(); ++j)
        W(i, j) = r * (2.0 * rng.next_unit() - 1.0);
  }
  return net;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& X) const {
  Cache scratch;
  return forward(X, scratch);
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& X, Cache& cache) const {
  if (X.cols() != input_size())
    throw ValidationError("mlp forward: input width " + std::to_string(X.cols()) +
                          " != " + std::to_string(input_size()));
  cache.input = X;
  cache.hidden.clear();
  cache.hidden.reserve(n_layers() - 1);

  Eigen::MatrixXd a = X;
  for (std::size_t l = 0; l + 1 < n_layers(); ++l) {
    a = ((a * weights_[l]).rowwise() + biases_[l].transpose()).cwiseMax(0.0);
    cache.hidden.push_back(a);
  }
  Eigen::MatrixXd out =
      (a * weights_.back()).rowwise() + biases_.back().transpose();
  if (!out.allFinite())
    throw NumericError("mlp forward: non-finite output (check parameters and inputs)");
  cache.valid = true;
  return out;
}

MlpGradients Mlp::backward(const Cache& cache,
                           const Eigen::MatrixXd& output_grad) const {
  if (!cache.valid || cache.hidden.size() != n_layers() - 1)
    throw UsageError("mlp backward: forward cache missing or stale");
  if (output_grad.rows() != cache.input.rows() ||
      output_grad.cols() != output_size())
    throw ValidationError("mlp backward: output gradient shape mismatch");

  MlpGradients g = zero_gradients();
  Eigen::MatrixXd delta = output_grad;
  for (std::size_t l = n_layers(); l-- > 0;) {
    const Eigen::MatrixXd& a_prev = l == 0 ? cache.input : cache.hidden[l - 1];
    g.d_weights[l].noalias() = a_prev.transpose() * delta;
    g.d_biases[l] = delta.colwise().sum().transpose();
    if (l > 0) {
      // Rectifier mask: post-activation > 0 iff pre-activation > 0.
      delta = (delta * weights_[l].transpose()).array() *
              (cache.hidden[l - 1].array() > 0.0).cast<double>();
    }
  }
  return g;
}

Eigen::Index Mlp::n_params() const {
  Eigen::Index n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l)
    n += weights_[l].size() + biases_[l].size();
  return n;
}

Eigen::VectorXd Mlp::pack_params() const {
  Eigen::VectorXd flat(n_params());
  Eigen::Index pos = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const auto& W = weights_[l];
    for (Eigen::Index i = 0; i < W.rows(); ++i)
      for (Eigen::Index j = 0; j < W.cols(); ++j) flat(pos++) = W(i, j);
    flat.segment(pos, biases_[l].size()) = biases_[l];
    pos += biases_[l].size();
  }
  return flat;
}

void Mlp::set_params(const Eigen::VectorXd& flat) {
  if (flat.size() != n_params())
    throw ValidationError("mlp set_params: flat size mismatch");
  Eigen::Index pos = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    auto& W = weights_[l];
    for (Eigen::Index i = 0; i < W.rows(); ++i)
      for (Eigen::Index j = 0; j < W.cols(); ++j) W(i, j) = flat(pos++);
    biases_[l] = flat.segment(pos, biases_[l].size());
    pos += biases_[l].size();
  }
}

Eigen::VectorXd Mlp::pack(const MlpGradients& grads) const {
  Eigen::VectorXd flat(n_params());
  Eigen::Index pos = 0;
  for (std::size_t l = 0; l < grads.d_weights.size(); ++l) {
    const auto& W = grads.d_weights[l];
    for (Eigen::Index i = 0; i < W.rows(); ++i)
      for (Eigen::Index j = 0; j < W.cols(); ++j) flat(pos++) = W(i, j);
    flat.segment(pos, grads.d_biases[l].size()) = grads.d_biases[l];
    pos += grads.d_biases[l].size();
  }
  return flat;
}

MlpGradients Mlp::zero_gradients() const {
  MlpGradients g;
  g.d_weights.reserve(weights_.size());
  g.d_biases.reserve(biases_.size());
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    g.d_weights.emplace_back(Eigen::MatrixXd::Zero(weights_[l].rows(), weights_[l].cols()));
    g.d_biases.emplace_back(Eigen::VectorXd::Zero(biases_[l].size()));
  }
  return g;
}

Adam::Adam(AdamParams params, Eigen::Index n)
    : params_(params),
      m_(Eigen::VectorXd::Zero(n)),
      v_(Eigen::VectorXd::Zero(n)) {}

void Adam::step(Eigen::Ref<Eigen::VectorXd> parameters,
                const Eigen::Ref<const Eigen::VectorXd>& gradient,
                double lr_scale) {
  if (parameters.size() != m_.size() || gradient.size() != m_.size())
    throw ValidationError("adam: parameter/gradient size mismatch");
  if (!gradient.allFinite())
    throw NumericError("adam: non-finite gradient; step aborted");

  ++t_;
  m_ = params_.beta1 * m_ + (1.0 - params_.beta1) * gradient;
  v_ = params_.beta2 * v_ +
       (1.0 - params_.beta2) * gradient.array().square().matrix();
  const double bc1 = 1.0 - std::pow(params_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(params_.beta2, static_cast<double>(t_));
  parameters.array() -= lr_scale * params_.eta * (m_.array() / bc1) /
                        ((v_.array() / bc2).sqrt() + params_.epsilon);
}

}  // namespace pcnn
