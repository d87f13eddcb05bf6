#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pntk/common.hpp"
#include "pntk/hyperparams.hpp"

namespace pntk {

struct LayerParams {
  Matrix mu;     // fan_out x fan_in
  Matrix sigma;  // same shape, strictly positive
};

// Posterior parameters of a probabilistic ReLU network together with the
// frozen prior copy they are measured against.
//
// Depth-1 "theory mode" (L == 1) is the network of the convergence and KRR
// analyses: one trained probabilistic layer W (m x d), a fixed +-1 output
// vector v, scalar output f(x) = (1/sqrt m) v . relu(Wx). Deeper nets exist
// for the drift study: L hidden activations, every layer probabilistic, the
// output layer a probabilistic C x m matrix, and all preactivations past the
// input layer scaled by 1/sqrt(fan_in).
struct PNNState {
  std::vector<LayerParams> layers;  // L+1 records (input, hidden..., output)
  std::vector<LayerParams> prior;   // frozen at init or after prior pretraining
  Vector v;                         // output signs, used only when L == 1
  int m = 0;                        // width
  int L = 1;                        // number of hidden layers
  int out_dim = 1;                  // C

  bool theory_mode() const { return L == 1; }
  Eigen::Index in_dim() const { return layers.front().mu.cols(); }
};

// One reparameterization draw: eps matrices matching the layer shapes,
// regenerable bit-exactly from (seed, step, sample_index).
struct EpsilonDraw {
  std::vector<Matrix> eps;
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
  std::uint64_t sample = 0;
};

// log(1 + e^rho), overflow-safe: returns rho unchanged for rho > 30.
double softplus(double rho);

// Inverse of softplus on (0, inf); used to report rho drift from sigma.
double inv_softplus(double s);

struct InitOptions {
  // Pair unit r with unit r + m/2: identical mu rows, opposite output signs.
  // The paired init gives E[f] == 0 at initialization exactly, realizing the
  // vanishing-initial-output premise of the infinite-width equivalence run.
  // Requires even m; depth-1 only.
  bool symmetric_pairs = false;
};

PNNState init_pnn(int d, int m, int L, const HyperParams& hp, std::uint64_t seed,
                  InitOptions opts = {}, int out_dim = 1);

EpsilonDraw make_eps(const PNNState& state, std::uint64_t seed, std::uint64_t step,
                     std::uint64_t sample);

// Forward pass for a single unit-norm input.
Vector forward(const PNNState& state, const EpsilonDraw& eps, const Vector& x);

// Batched forward over unit-norm rows of X; returns n x C outputs.
Matrix forward_batch(const PNNState& state, const EpsilonDraw& eps, const Matrix& x);

// Analytic d f_c / d mu and d f_c / d sigma for every layer, at one input and
// one output coordinate. In theory mode these are the displayed closed forms
//   df/dmu_r = (1/sqrt m) v_r 1{w_r.x >= 0} x,   df/dsigma = df/dmu (*) eps.
struct ParamGrads {
  std::vector<Matrix> d_mu;
  std::vector<Matrix> d_sigma;
};
ParamGrads grad_params(const PNNState& state, const EpsilonDraw& eps, const Vector& x,
                       int output = 0);

// Monte-Carlo posterior mean of forward over S fresh draws, with a standard
// error estimate per output.
struct MeanForwardResult {
  Vector mean;
  Vector std_error;
};
MeanForwardResult mean_forward(const PNNState& state, const Vector& x, int samples,
                               std::uint64_t seed);
Matrix mean_forward_batch(const PNNState& state, const Matrix& x, int samples,
                          std::uint64_t seed);

}  // namespace pntk
