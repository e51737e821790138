// SPDX-License-Identifier: MIT
#include "pcnn/train.hpp"

#include <cmath>
#include <string>

#include "pcnn/rng.hpp"

namespace pcnn {

namespace {

// One-norm subgradient with the tie defined as 0.
inline double sign0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void check_labeled(const Eigen::MatrixXd& XI, const Eigen::VectorXd& y) {
  if (XI.rows() != y.size())
    throw ValidationError("labeled set: sample/label count mismatch");
  if (XI.rows() < 1) throw ValidationError("labeled set must be nonempty");
}

}  // namespace

double loss_supervised_main(const PceModel& main, const Eigen::MatrixXd& XI,
                            const Eigen::VectorXd& y) {
  check_labeled(XI, y);
  return (y - main.eval_batch(XI)).cwiseAbs().mean();
}

double loss_consistency(const PceModel& main, const AdaptivePceModel& aux,
                        const Eigen::MatrixXd& XI_unlabeled) {
  if (XI_unlabeled.rows() < 1)
    throw ValidationError("consistency loss: unlabeled set must be nonempty");
  return (aux.predict_batch(XI_unlabeled) - main.eval_batch(XI_unlabeled))
      .cwiseAbs()
      .mean();
}

double loss_supervised_aux(const AdaptivePceModel& aux, const Eigen::MatrixXd& XI,
                           const Eigen::VectorXd& y) {
  check_labeled(XI, y);
  return (y - aux.predict_batch(XI)).cwiseAbs().mean();
}

std::pair<double, double> loss_property(const AdaptivePceModel& aux,
                                        const Eigen::MatrixXd& XI_unlabeled) {
  if (XI_unlabeled.rows() < 2)
    throw ValidationError(
        "property losses need at least 2 unlabeled points (variance undefined)");
  const Eigen::MatrixXd C = aux.net.forward(XI_unlabeled);
  const RowMajorMatrixXd PHI = aux.basis.eval_matrix(XI_unlabeled);
  const Eigen::VectorXd preds = (C.array() * PHI.array()).rowwise().sum();
  const double mean_pred = preds.mean();
  const double var_pred = preds.array().square().mean() - mean_pred * mean_pred;
  const Eigen::VectorXd coeff_means = C.colwise().mean();
  const double prop_mean = std::abs(mean_pred - coeff_means(0));
  const double prop_var =
      std::abs(var_pred - coeff_means.tail(coeff_means.size() - 1).squaredNorm());
  return {prop_mean, prop_var};
}

Trainer::Trainer(PceModel main, AdaptivePceModel aux, Eigen::MatrixXd XI_labeled,
                 Eigen::VectorXd y_labeled, Eigen::MatrixXd XI_unlabeled,
                 TrainConfig config)
    : main_(std::move(main)),
      aux_(std::move(aux)),
      xi_labeled_(std::move(XI_labeled)),
      y_labeled_(std::move(y_labeled)),
      xi_unlabeled_(std::move(XI_unlabeled)),
      config_(std::move(config)),
      adam_coeffs_(
          AdamParams{config_.eta_coeffs > 0.0 ? config_.eta_coeffs
                                              : config_.adam.eta,
                     config_.adam.beta1, config_.adam.beta2, config_.adam.epsilon},
          main_.coeffs.size()),
      adam_net_(config_.adam, aux_.net.n_params()) {
  main_.validate();
  aux_.validate();
  check_labeled(xi_labeled_, y_labeled_);
  if (xi_labeled_.cols() != main_.basis.dims() ||
      xi_unlabeled_.cols() != main_.basis.dims())
    throw ValidationError("trainer: sample dimension mismatch");
  if (xi_unlabeled_.rows() < 2)
    throw ValidationError("trainer: unlabeled pool needs at least 2 points");

  phi_labeled_ = main_.basis.eval_matrix(xi_labeled_);
  phi_low_labeled_ = aux_.basis.eval_matrix(xi_labeled_);

  pool_cached_ = config_.chunk_size == 0 ||
                 config_.chunk_size >= static_cast<std::size_t>(xi_unlabeled_.rows());
  if (pool_cached_) {
    phi_unlabeled_ = main_.basis.eval_matrix(xi_unlabeled_);
    phi_low_unlabeled_ = aux_.basis.eval_matrix(xi_unlabeled_);
  }
}

double Trainer::lr_scale() const {
  if (config_.lr_decay_every <= 0 || config_.lr_decay_factor == 1.0) return 1.0;
  return std::pow(config_.lr_decay_factor,
                  static_cast<double>(epochs_run_ / config_.lr_decay_every));
}

Trainer::EpochWork Trainer::compute() {
  const auto& w = config_.weights;
  const auto n_gd = static_cast<double>(xi_labeled_.rows());
  const auto n_ce = static_cast<double>(xi_unlabeled_.rows());
  const Eigen::VectorXd& c = main_.coeffs;
  const auto m_low = static_cast<Eigen::Index>(aux_.basis.size());

  EpochWork work;

  // Labeled set: both models, supervised terms.
  const Eigen::VectorXd yhat_gd = phi_labeled_ * c;
  const Eigen::MatrixXd coeffs_gd = aux_.net.forward(xi_labeled_, cache_labeled_);
  const Eigen::VectorXd ytil_gd =
      (coeffs_gd.array() * phi_low_labeled_.array()).rowwise().sum();

  const Eigen::ArrayXd err_main = (yhat_gd - y_labeled_).array();
  const Eigen::ArrayXd err_aux = (ytil_gd - y_labeled_).array();
  work.losses.supervised_main = err_main.abs().mean();
  work.losses.supervised_aux = err_aux.abs().mean();

  work.grad_coeffs =
      (w.supervised_main / n_gd) *
      (phi_labeled_.transpose() * err_main.unaryExpr(&sign0).matrix());

  const Eigen::MatrixXd g_out_gd =
      (phi_low_labeled_.array().colwise() *
       ((w.supervised_aux / n_gd) * err_aux.unaryExpr(&sign0)))
          .matrix();
  work.grad_net = aux_.net.backward(cache_labeled_, g_out_gd);

  // Unlabeled pool. Pass 1 gathers pool statistics, the consistency term and
  // its (coefficient-only) gradient; pass 2 backpropagates the property
  // terms, which need the statistics first.
  const auto n_rows = xi_unlabeled_.rows();
  const auto chunk = pool_cached_
                         ? n_rows
                         : static_cast<Eigen::Index>(config_.chunk_size);

  double sum_pred = 0.0, sum_pred_sq = 0.0, sum_abs_gap = 0.0;
  Eigen::VectorXd coeff_mean_sum = Eigen::VectorXd::Zero(m_low);
  Eigen::VectorXd grad_consistency = Eigen::VectorXd::Zero(c.size());

  struct ChunkView {
    Eigen::Index begin, rows;
  };
  std::vector<ChunkView> chunks;
  for (Eigen::Index b = 0; b < n_rows; b += chunk)
    chunks.push_back({b, std::min(chunk, n_rows - b)});

  std::vector<Eigen::VectorXd> pool_preds(chunks.size());
  for (std::size_t ci = 0; ci < chunks.size(); ++ci) {
    const auto [b, rows] = chunks[ci];
    const auto xi_block = xi_unlabeled_.middleRows(b, rows);
    RowMajorMatrixXd phi =
        pool_cached_ ? RowMajorMatrixXd() : main_.basis.eval_matrix(xi_block);
    RowMajorMatrixXd phi_low = pool_cached_
                                   ? RowMajorMatrixXd()
                                   : aux_.basis.eval_matrix(xi_block);
    const auto& phi_ref = pool_cached_ ? phi_unlabeled_ : phi;
    const auto& phi_low_ref = pool_cached_ ? phi_low_unlabeled_ : phi_low;
    const auto row0 = pool_cached_ ? b : 0;

    const Eigen::VectorXd yhat = phi_ref.middleRows(row0, rows) * c;
    const Eigen::MatrixXd coeffs_ce = aux_.net.forward(xi_block, cache_pool_);
    const Eigen::VectorXd ytil =
        (coeffs_ce.array() * phi_low_ref.middleRows(row0, rows).array())
            .rowwise()
            .sum();
    pool_preds[ci] = ytil;

    sum_pred += ytil.sum();
    sum_pred_sq += ytil.array().square().sum();
    coeff_mean_sum += coeffs_ce.colwise().sum().transpose();
    sum_abs_gap += (ytil - yhat).cwiseAbs().sum();

    // Pseudo labels are constants here: only c receives this gradient.
    grad_consistency.noalias() +=
        phi_ref.middleRows(row0, rows).transpose() *
        (yhat - ytil).array().unaryExpr(&sign0).matrix();
  }

  work.losses.consistency = sum_abs_gap / n_ce;
  work.grad_coeffs += (w.consistency / n_ce) * grad_consistency;

  const double mean_pred = sum_pred / n_ce;
  const double var_pred = sum_pred_sq / n_ce - mean_pred * mean_pred;
  const Eigen::VectorXd coeff_means = coeff_mean_sum / n_ce;
  const double var_from_coeffs =
      coeff_means.tail(m_low - 1).squaredNorm();

  work.losses.property_mean = std::abs(mean_pred - coeff_means(0));
  work.losses.property_var = std::abs(var_pred - var_from_coeffs);
  const double sign_mean = sign0(mean_pred - coeff_means(0));
  const double sign_var = sign0(var_pred - var_from_coeffs);

  // Constant row added to every sample's output gradient: the direct
  // dependence of the property terms on the coefficient means.
  Eigen::RowVectorXd direct = Eigen::RowVectorXd::Zero(m_low);
  direct(0) = -w.property_mean * sign_mean / n_ce;
  direct.tail(m_low - 1) =
      (-w.property_var * sign_var * 2.0 / n_ce) * coeff_means.tail(m_low - 1).transpose();

  for (std::size_t ci = 0; ci < chunks.size(); ++ci) {
    const auto [b, rows] = chunks[ci];
    const auto xi_block = xi_unlabeled_.middleRows(b, rows);
    const bool reuse_cache = pool_cached_ && chunks.size() == 1;
    if (!reuse_cache) aux_.net.forward(xi_block, cache_pool_);

    RowMajorMatrixXd phi_low = pool_cached_
                                   ? RowMajorMatrixXd()
                                   : aux_.basis.eval_matrix(xi_block);
    const auto& phi_low_ref = pool_cached_ ? phi_low_unlabeled_ : phi_low;
    const auto row0 = pool_cached_ ? b : 0;

    const Eigen::ArrayXd through_pred =
        (w.property_mean * sign_mean +
         w.property_var * sign_var * 2.0 * (pool_preds[ci].array() - mean_pred)) /
        n_ce;
    Eigen::MatrixXd g_out =
        (phi_low_ref.middleRows(row0, rows).array().colwise() * through_pred)
            .matrix();
    g_out.rowwise() += direct;
    work.grad_net += aux_.net.backward(cache_pool_, g_out);
  }

  work.losses.main_total = w.supervised_main * work.losses.supervised_main +
                           w.consistency * work.losses.consistency;
  work.losses.aux_total = w.supervised_aux * work.losses.supervised_aux +
                          w.property_mean * work.losses.property_mean +
                          w.property_var * work.losses.property_var;
  work.losses.total = work.losses.main_total + work.losses.aux_total;
  return work;
}

LossBreakdown Trainer::epoch() {
  EpochWork work = compute();
  if (!std::isfinite(work.losses.total))
    throw NumericError(
        "non-finite loss at epoch " + std::to_string(epochs_run_ + 1) +
        " (supervised_main=" + std::to_string(work.losses.supervised_main) +
        ", consistency=" + std::to_string(work.losses.consistency) +
        ", supervised_aux=" + std::to_string(work.losses.supervised_aux) +
        ", property_mean=" + std::to_string(work.losses.property_mean) +
        ", property_var=" + std::to_string(work.losses.property_var) + ")");

  const double scale = lr_scale();
  adam_coeffs_.step(main_.coeffs, work.grad_coeffs, scale);
  Eigen::VectorXd theta = aux_.net.pack_params();
  adam_net_.step(theta, aux_.net.pack(work.grad_net), scale);
  aux_.net.set_params(theta);

  ++epochs_run_;
  history_.push_back(work.losses);
  if (config_.checkpoint_every > 0 && config_.checkpoint_hook &&
      epochs_run_ % config_.checkpoint_every == 0)
    config_.checkpoint_hook(epochs_run_, main_, aux_);
  return work.losses;
}

TrainResult Trainer::run() {
  for (int ep = 0; ep < config_.max_epochs; ++ep) epoch();
  TrainResult result;
  result.main = std::move(main_);
  result.aux = std::move(aux_);
  result.history = std::move(history_);
  return result;
}

LossBreakdown Trainer::current_losses() { return compute().losses; }

Trainer::Gradients Trainer::current_gradients() {
  EpochWork work = compute();
  Gradients g;
  g.wrt_coeffs = std::move(work.grad_coeffs);
  g.wrt_net = aux_.net.pack(work.grad_net);
  return g;
}

TrainResult train(const OrthonormalBasis& basis_high,
                  const OrthonormalBasis& basis_low,
                  const Eigen::MatrixXd& XI_labeled,
                  const Eigen::VectorXd& y_labeled,
                  const Eigen::MatrixXd& XI_unlabeled,
                  const std::vector<int>& aux_hidden, const TrainConfig& config) {
  if (basis_high.order() <= basis_low.order())
    throw ConfigError("expansion order p (" + std::to_string(basis_high.order()) +
                      ") must exceed the auxiliary order p_tilde (" +
                      std::to_string(basis_low.order()) + ")");

  PceModel main;
  main.basis = basis_high;
  main.coeffs = init_coeffs(XI_labeled, y_labeled, basis_high, basis_low,
                            config.init_seed);

  std::vector<int> sizes;
  sizes.reserve(aux_hidden.size() + 2);
  sizes.push_back(basis_low.dims());
  sizes.insert(sizes.end(), aux_hidden.begin(), aux_hidden.end());
  sizes.push_back(static_cast<int>(basis_low.size()));

  AdaptivePceModel aux;
  aux.net = Mlp::uniform_init(std::move(sizes), derive_seed(config.init_seed, 1));
  aux.basis = basis_low;

  // Seed the output-layer bias with the low-order least-squares coefficients:
  // the adaptive model then starts at the OLS surrogate instead of zero.
  // Labels live on an arbitrary scale, and Adam moves each parameter at most
  // eta per step, so a zero-bias network spends the whole epoch budget
  // inflating weights toward the label scale and generalizes poorly.
  {
    const double ridge = XI_labeled.rows() < static_cast<Eigen::Index>(basis_low.size())
                             ? 1e-10
                             : 0.0;
    if (population_variance(y_labeled) > 0.0) {
      const OlsFit low = ols_fit(basis_low, XI_labeled, y_labeled, ridge);
      aux.net.biases().back() = low.coeffs;
    } else {
      aux.net.biases().back()(0) = y_labeled(0);
    }
  }

  Trainer trainer(std::move(main), std::move(aux), XI_labeled, y_labeled,
                  XI_unlabeled, config);
  return trainer.run();
}

}  // namespace pcnn
