#include "pntk/objective.hpp"

#include <cmath>
#include <cstdint>
#include <utility>

#include "pntk/rng.hpp"

namespace pntk {

namespace {

constexpr double kDivergenceGuard = 1e6;
constexpr double kSigmaFloor = 1e-12;

void check_data(const PNNState& state, const Dataset& ds) {
  if (ds.n() == 0) throw invalid_input("training data is empty");
  if (ds.d() != state.in_dim()) throw invalid_input("dataset dimension mismatch");
  if (ds.c() != state.out_dim) throw invalid_input("dataset label width mismatch");
}

struct BatchGrads {
  double sq_error = 0.0;  // sum_i ||f(x_i) - y_i||^2 for this draw
  std::vector<Matrix> d_mu;
};

// Loss gradients of 0.5/n * sum_i ||f(x_i) - y_i||^2 for one epsilon draw,
// batched over the whole dataset. Returns mu gradients; sigma gradients are
// the elementwise eps product, taken by the caller.
BatchGrads batch_risk_grads(const PNNState& state, const EpsilonDraw& eps,
                            const Matrix& x, const Matrix& y) {
  const double root_m = std::sqrt(static_cast<double>(state.m));
  const double n = static_cast<double>(x.rows());
  BatchGrads out;
  out.d_mu.resize(state.layers.size());

  if (state.theory_mode()) {
    const Matrix w = state.layers[0].mu + state.layers[0].sigma.cwiseProduct(eps.eps[0]);
    Matrix pre = x * w.transpose();
    Matrix mask = (pre.array() >= 0.0).cast<double>();
    Matrix act = pre.cwiseProduct(mask);
    Vector f = act * state.v / root_m;
    Vector resid = (f - y.col(0)) / n;
    out.sq_error = (f - y.col(0)).squaredNorm();
    Matrix coef = (resid * state.v.transpose() / root_m).cwiseProduct(mask);
    out.d_mu[0] = coef.transpose() * x;
    return out;
  }

  const std::size_t records = state.layers.size();
  std::vector<Matrix> w(records);
  std::vector<Matrix> acts(records);   // input to each layer
  std::vector<Matrix> masks(records);  // indicator per hidden preactivation
  Matrix h = x;
  for (std::size_t l = 0; l < records; ++l) {
    w[l] = state.layers[l].mu + state.layers[l].sigma.cwiseProduct(eps.eps[l]);
    acts[l] = h;
    Matrix pre = h * w[l].transpose();
    if (l > 0) pre /= root_m;
    if (l + 1 == records) {
      h = std::move(pre);  // network output, no activation on the last layer
      break;
    }
    masks[l] = (pre.array() >= 0.0).cast<double>();
    h = pre.cwiseProduct(masks[l]);
  }

  Matrix resid = (h - y) / n;
  out.sq_error = (h - y).squaredNorm();
  out.d_mu[records - 1] = resid.transpose() * acts[records - 1] / root_m;
  Matrix gh = resid * w[records - 1] / root_m;
  for (std::size_t l = records - 1; l-- > 0;) {
    Matrix gz = gh.cwiseProduct(masks[l]);
    const double scale = (l > 0) ? 1.0 / root_m : 1.0;
    out.d_mu[l] = scale * gz.transpose() * acts[l];
    if (l > 0) gh = gz * w[l] / root_m;
  }
  return out;
}

double frobenius_over_layers(const std::vector<Matrix>& blocks) {
  double sq = 0.0;
  for (const auto& b : blocks) sq += b.squaredNorm();
  return std::sqrt(sq);
}

}  // namespace

double kl_gaussian_diag(const PNNState& state) {
  if (state.prior.size() != state.layers.size())
    throw invalid_input("kl_gaussian_diag: prior copies missing");
  double log_term = 0.0;
  double var_term = 0.0;
  double mean_term = 0.0;
  for (std::size_t l = 0; l < state.layers.size(); ++l) {
    const auto& s = state.layers[l].sigma.array();
    const auto& s0 = state.prior[l].sigma.array();
    if ((s <= 0.0).any() || (s0 <= 0.0).any())
      throw invalid_input("kl_gaussian_diag: nonpositive sigma");
    const auto s_sq = s.square();
    const auto s0_sq = s0.square();
    log_term += (s0_sq / s_sq).log().sum();
    var_term += ((s_sq - s0_sq) / s0_sq).sum();
    mean_term +=
        ((state.layers[l].mu - state.prior[l].mu).array().square() / s0_sq).sum();
  }
  const double kl = 0.5 * (log_term + var_term + mean_term);
  return kl < 0.0 ? 0.0 : kl;
}

double empirical_risk_mse(const PNNState& state, const Dataset& ds, int samples,
                          std::uint64_t seed) {
  if (samples < 1) throw invalid_input("empirical_risk_mse requires samples >= 1");
  check_data(state, ds);
  double total = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Matrix f = forward_batch(state, make_eps(state, seed, 0, s), ds.features);
    total += (f - ds.labels).squaredNorm();
  }
  return 0.5 * total / (static_cast<double>(samples) * ds.n());
}

EpsilonDraw make_train_eps(const PNNState& state, std::uint64_t seed,
                           std::uint64_t step, std::uint64_t sample) {
  if (sample % 2 == 0) return make_eps(state, seed, step, sample);
  EpsilonDraw draw = make_eps(state, seed, step, sample - 1);
  for (auto& e : draw.eps) e = -e;
  draw.sample = sample;
  return draw;
}

ObjectiveEval pacbayes_objective(const PNNState& state, const Dataset& ds,
                                 const HyperParams& hp, std::uint64_t step) {
  check_data(state, ds);
  const double n = static_cast<double>(ds.n());

  ObjectiveEval eval;
  eval.grad_mu.resize(state.layers.size());
  eval.grad_sigma.resize(state.layers.size());
  for (std::size_t l = 0; l < state.layers.size(); ++l) {
    eval.grad_mu[l] = Matrix::Zero(state.layers[l].mu.rows(), state.layers[l].mu.cols());
    eval.grad_sigma[l] = eval.grad_mu[l];
  }

  double sq_error = 0.0;
  for (int s = 0; s < hp.mc_train; ++s) {
    const EpsilonDraw eps = make_train_eps(state, hp.seed, step, s);
    BatchGrads g = batch_risk_grads(state, eps, ds.features, ds.labels);
    sq_error += g.sq_error;
    for (std::size_t l = 0; l < state.layers.size(); ++l) {
      eval.grad_mu[l] += g.d_mu[l];
      eval.grad_sigma[l] += g.d_mu[l].cwiseProduct(eps.eps[l]);
    }
  }
  const double inv_s = 1.0 / hp.mc_train;
  for (std::size_t l = 0; l < state.layers.size(); ++l) {
    eval.grad_mu[l] *= inv_s;
    eval.grad_sigma[l] *= inv_s;
  }
  eval.risk = 0.5 * sq_error * inv_s / n;
  eval.kl = kl_gaussian_diag(state);
  eval.value = eval.risk + hp.lambda * eval.kl / n;

  if (hp.lambda > 0.0) {
    const double scale = hp.lambda / n;
    for (std::size_t l = 0; l < state.layers.size(); ++l) {
      const auto& s0 = state.prior[l].sigma.array();
      const auto& sg = state.layers[l].sigma.array();
      eval.grad_mu[l].array() +=
          scale * (state.layers[l].mu - state.prior[l].mu).array() / s0.square();
      eval.grad_sigma[l].array() += scale * (sg / s0.square() - sg.inverse());
    }
  }
  return eval;
}

TrainTrace train_from(PNNState state, const Dataset& ds, const HyperParams& hp) {
  hp.validate();
  check_data(state, ds);

  TrainTrace trace;
  trace.records.reserve(hp.steps);
  for (int t = 0; t < hp.steps; ++t) {
    ObjectiveEval eval = pacbayes_objective(state, ds, hp, t);
    if (!(eval.value <= kDivergenceGuard))
      throw numeric_error("learning rate too large");
    StepRecord rec;
    rec.step = t;
    rec.objective = eval.value;
    rec.risk = eval.risk;
    rec.kl = eval.kl;
    rec.grad_mu_norm = frobenius_over_layers(eval.grad_mu);
    rec.grad_sigma_norm = frobenius_over_layers(eval.grad_sigma);
    trace.records.push_back(rec);

    for (std::size_t l = 0; l < state.layers.size(); ++l) {
      state.layers[l].mu -= hp.eta * eval.grad_mu[l];
      if (!hp.freeze_sigma) {
        state.layers[l].sigma -= hp.eta * eval.grad_sigma[l];
        state.layers[l].sigma = state.layers[l].sigma.cwiseMax(kSigmaFloor);
      }
    }
  }
  trace.final_state = std::move(state);
  return trace;
}

TrainTrace train(const Dataset& ds, const HyperParams& hp, int depth, int out_dim,
                 InitOptions init_opts) {
  hp.validate();
  PNNState state =
      init_pnn(static_cast<int>(ds.d()), hp.m, depth, hp, hp.seed, init_opts, out_dim);
  return train_from(std::move(state), ds, hp);
}

PNNState pretrain_prior(const Dataset& prior_ds, const HyperParams& hp, int depth,
                        int out_dim) {
  hp.validate();
  PNNState state = init_pnn(static_cast<int>(prior_ds.d()), hp.m, depth, hp, hp.seed,
                            InitOptions{}, out_dim);
  check_data(state, prior_ds);

  EpsilonDraw zero;
  zero.eps.resize(state.layers.size());
  for (std::size_t l = 0; l < state.layers.size(); ++l)
    zero.eps[l] = Matrix::Zero(state.layers[l].mu.rows(), state.layers[l].mu.cols());

  const double n = static_cast<double>(prior_ds.n());
  for (int t = 0; t < hp.steps; ++t) {
    BatchGrads g = batch_risk_grads(state, zero, prior_ds.features, prior_ds.labels);
    const double risk = 0.5 * g.sq_error / n;
    if (!(risk <= kDivergenceGuard)) throw numeric_error("learning rate too large");
    for (std::size_t l = 0; l < state.layers.size(); ++l)
      state.layers[l].mu -= hp.eta * g.d_mu[l];
  }
  state.prior = state.layers;
  return state;
}

}  // namespace pntk
