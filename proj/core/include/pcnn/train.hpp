// SPDX-License-Identifier: MIT
//
// Joint training of the high-order model and the low-order adaptive model.
//
// Per epoch, both models run over the full labeled set and the full unlabeled
// pool; pool-wide prediction and coefficient statistics are recomputed from
// the current parameters; one Adam update is applied to the expansion
// coefficients and the network parameters. Five gradient paths drive the
// update:
//
//   coefficients c:  d(supervised main)/dc, d(consistency)/dc
//   network theta:   d(supervised aux)/dtheta, d(mean property)/dtheta,
//                    d(variance property)/dtheta
//
// The consistency term treats the adaptive model's predictions as constants
// (pseudo labels): its gradient is blocked from reaching theta, so training
// with only the consistency loss active leaves the network bit-identical.

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

#include "pcnn/model.hpp"

namespace pcnn {

/// Multipliers on the five loss terms. All default to 1, matching the
/// unweighted sums of the training objective; they exist for experiments and
/// for isolating terms in tests.
struct LossWeights {
  double supervised_main = 1.0;
  double consistency = 1.0;
  double supervised_aux = 1.0;
  double property_mean = 1.0;
  double property_var = 1.0;
};

struct LossBreakdown {
  double supervised_main = 0.0;  // mean |y - main(xi)| over labeled data
  double consistency = 0.0;      // mean |aux(xi) - main(xi)| over the pool
  double supervised_aux = 0.0;   // mean |y - aux(xi)| over labeled data
  double property_mean = 0.0;    // |E[aux] - E[c~_1]|
  double property_var = 0.0;     // |D[aux] - sum_{i>=2} E[c~_i]^2|
  double main_total = 0.0;       // supervised_main + consistency
  double aux_total = 0.0;        // supervised_aux + property terms
  double total = 0.0;            // main_total + aux_total
};

struct TrainConfig {
  int max_epochs = 1;  // 0 runs initialization only
  AdamParams adam;     // shared hyperparameters; eta drives theta
  double eta_coeffs = -1.0;  // step size for c; < 0 means use adam.eta
  double lr_decay_factor = 1.0;  // optional step decay (1 = off)
  int lr_decay_every = 0;        // epochs per decay step (0 = off)
  LossWeights weights;
  std::size_t chunk_size = 0;  // unlabeled pool sweep chunk; 0 = whole pool
  std::uint64_t init_seed = 0;
  int checkpoint_every = 0;
  std::function<void(int epoch, const PceModel&, const AdaptivePceModel&)>
      checkpoint_hook;
};

struct TrainResult {
  PceModel main;
  AdaptivePceModel aux;
  std::vector<LossBreakdown> history;  // one entry per epoch
};

// ---------------------------------------------------------------------------
// Standalone loss terms (pure; the trainer's cached-matrix path must agree
// with these to rounding).

double loss_supervised_main(const PceModel& main, const Eigen::MatrixXd& XI,
                            const Eigen::VectorXd& y);

/// Mean one-norm gap between the two models on unlabeled points. The value
/// is symmetric; the gradient contract (pseudo-label detachment) lives in the
/// trainer.
double loss_consistency(const PceModel& main, const AdaptivePceModel& aux,
                        const Eigen::MatrixXd& XI_unlabeled);

double loss_supervised_aux(const AdaptivePceModel& aux, const Eigen::MatrixXd& XI,
                           const Eigen::VectorXd& y);

/// (mean property, variance property) over the full unlabeled pool.
/// Requires at least 2 points.
std::pair<double, double> loss_property(const AdaptivePceModel& aux,
                                        const Eigen::MatrixXd& XI_unlabeled);

// ---------------------------------------------------------------------------

class Trainer {
 public:
  /// Takes ownership of both models. Design matrices for the labeled set are
  /// precomputed; the unlabeled pool is precomputed too unless chunking is
  /// requested, in which case it is swept (and re-evaluated) chunk by chunk
  /// each epoch to bound memory.
  Trainer(PceModel main, AdaptivePceModel aux, Eigen::MatrixXd XI_labeled,
          Eigen::VectorXd y_labeled, Eigen::MatrixXd XI_unlabeled,
          TrainConfig config);

  /// One full-batch epoch: losses, five gradients, one Adam update per
  /// parameter group. Throws NumericError (with the epoch index) on a
  /// non-finite loss.
  LossBreakdown epoch();

  /// Run config.max_epochs epochs and move the models out.
  TrainResult run();

  struct Gradients {
    Eigen::VectorXd wrt_coeffs;  // length M
    Eigen::VectorXd wrt_net;     // packed like Mlp::pack_params
  };

  /// Loss terms at the current parameters; no state change.
  LossBreakdown current_losses();
  /// Analytic gradients at the current parameters; no state change.
  Gradients current_gradients();

  const PceModel& main() const { return main_; }
  const AdaptivePceModel& aux() const { return aux_; }
  PceModel& main_mutable() { return main_; }
  AdaptivePceModel& aux_mutable() { return aux_; }
  int epochs_run() const { return epochs_run_; }
  const std::vector<LossBreakdown>& history() const { return history_; }

 private:
  struct EpochWork {
    LossBreakdown losses;
    Eigen::VectorXd grad_coeffs;
    MlpGradients grad_net;
  };
  EpochWork compute();
  double lr_scale() const;

  PceModel main_;
  AdaptivePceModel aux_;
  Eigen::MatrixXd xi_labeled_;
  Eigen::VectorXd y_labeled_;
  Eigen::MatrixXd xi_unlabeled_;
  TrainConfig config_;

  RowMajorMatrixXd phi_labeled_;       // N_gd x M
  RowMajorMatrixXd phi_low_labeled_;   // N_gd x M_low
  RowMajorMatrixXd phi_unlabeled_;     // cached only when not chunking
  RowMajorMatrixXd phi_low_unlabeled_;
  bool pool_cached_ = false;

  Adam adam_coeffs_;
  Adam adam_net_;
  Mlp::Cache cache_labeled_;
  Mlp::Cache cache_pool_;

  int epochs_run_ = 0;
  std::vector<LossBreakdown> history_;
};

/// Build both models and train them. The main model's coefficients follow the
/// initialization strategy (low-order constant coefficient plus
/// label-variance-bounded uniform noise); the coefficient network gets
/// scaled-uniform weights and its output-layer bias seeded with the low-order
/// least-squares coefficients, so the adaptive model starts at the OLS
/// surrogate instead of at zero (labels live on an arbitrary scale, and Adam
/// cannot cross that scale within a realistic epoch budget). `aux_hidden`
/// lists the hidden layer widths of the coefficient network. Throws
/// ConfigError unless the high order exceeds the low order.
TrainResult train(const OrthonormalBasis& basis_high,
                  const OrthonormalBasis& basis_low,
                  const Eigen::MatrixXd& XI_labeled,
                  const Eigen::VectorXd& y_labeled,
                  const Eigen::MatrixXd& XI_unlabeled,
                  const std::vector<int>& aux_hidden, const TrainConfig& config);

}  // namespace pcnn
