#pragma once

#include <cstdint>
#include <vector>

#include "pntk/common.hpp"
#include "pntk/dataset.hpp"
#include "pntk/hyperparams.hpp"
#include "pntk/pnn.hpp"

namespace pntk {

// KL(Q_t || Q_0) for diagonal Gaussians over all probabilistic layers,
// 0.5 * (log(s0^2/s^2) + (s^2 - s0^2)/s0^2 + (mu - mu0)^2/s0^2) per
// coordinate. The grouping keeps the sigma terms exactly zero when sigma
// still equals the prior bitwise, so a frozen-sigma run reports the clean
// ||mu - mu0||_F^2 / (2 sigma0^2).
double kl_gaussian_diag(const PNNState& state);

// Monte-Carlo posterior risk, 1/2 * (1/n) * sum_i ||f(x_i) - y_i||^2
// averaged over S independent draws.
double empirical_risk_mse(const PNNState& state, const Dataset& ds, int samples,
                          std::uint64_t seed);

struct ObjectiveEval {
  double value = 0.0;  // risk estimate + lambda * KL / n
  double risk = 0.0;
  double kl = 0.0;
  std::vector<Matrix> grad_mu;
  std::vector<Matrix> grad_sigma;
};

// Objective and gradients at one training step. The step index selects the
// epsilon draws, so re-evaluating the same step reproduces the same numbers.
ObjectiveEval pacbayes_objective(const PNNState& state, const Dataset& ds,
                                 const HyperParams& hp, std::uint64_t step);

// The trainer's epsilon schedule: even sample indices are fresh draws and
// each odd index negates the draw before it. Pairing the signs cancels the
// odd terms of the risk gradient's epsilon expansion, which otherwise leave
// a Monte-Carlo noise floor under the sigma gradient long after the mean
// gradient has converged. Symmetry of the Gaussian keeps the estimator
// unbiased. Plain independent draws stay in use everywhere outside the
// trainer (risk estimates, certificates).
EpsilonDraw make_train_eps(const PNNState& state, std::uint64_t seed,
                           std::uint64_t step, std::uint64_t sample);

struct StepRecord {
  int step = 0;
  double objective = 0.0;
  double risk = 0.0;
  double kl = 0.0;
  double grad_mu_norm = 0.0;
  double grad_sigma_norm = 0.0;
};

struct TrainTrace {
  std::vector<StepRecord> records;  // exactly T entries
  PNNState final_state;
};

// Full-batch gradient descent from a given state. Records one StepRecord per
// step, evaluated before the update is applied.
TrainTrace train_from(PNNState state, const Dataset& ds, const HyperParams& hp);

// Initializes per hp (depth and output size default to theory mode) and runs
// train_from. Deterministic for fixed (ds, hp).
TrainTrace train(const Dataset& ds, const HyperParams& hp, int depth = 1,
                 int out_dim = 1, InitOptions init_opts = {});

// Deterministic ERM on the mean weights (epsilon identically zero), then the
// prior copies are reset to the trained values so later KL terms measure
// against this data-dependent prior.
PNNState pretrain_prior(const Dataset& prior_ds, const HyperParams& hp, int depth = 1,
                        int out_dim = 1);

}  // namespace pntk
