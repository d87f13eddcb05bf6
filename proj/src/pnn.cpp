#include "pntk/pnn.hpp"

#include <cmath>
#include <cstdint>

#include "pntk/rng.hpp"

namespace pntk {

namespace {

constexpr std::uint64_t kInitTag = 0x696E6974;  // "init"
constexpr std::uint64_t kMuTag = 0x6D75;        // "mu"
constexpr std::uint64_t kSignTag = 0x76;        // "v"

// Shapes of the probabilistic layer records. Theory mode keeps only the
// input layer here; the fixed output signs live in PNNState::v. Deep mode
// carries L+1 probabilistic records ending in a C x m output matrix.
std::vector<std::pair<int, int>> layer_shapes(int d, int m, int L, int out_dim) {
  std::vector<std::pair<int, int>> shapes;
  shapes.emplace_back(m, d);
  if (L > 1) {
    for (int l = 1; l < L; ++l) shapes.emplace_back(m, m);
    shapes.emplace_back(out_dim, m);
  }
  return shapes;
}

void check_shapes(const PNNState& state, const EpsilonDraw& eps) {
  if (eps.eps.size() != state.layers.size())
    throw invalid_input("epsilon draw has wrong layer count");
  for (std::size_t l = 0; l < state.layers.size(); ++l) {
    if (eps.eps[l].rows() != state.layers[l].mu.rows() ||
        eps.eps[l].cols() != state.layers[l].mu.cols())
      throw invalid_input("epsilon draw shape mismatch");
  }
}

}  // namespace

double softplus(double rho) {
  if (rho > 30.0) return rho;
  return std::log1p(std::exp(rho));
}

double inv_softplus(double s) {
  if (!(s > 0.0)) throw invalid_input("inv_softplus requires a positive argument");
  if (s > 30.0) return s;
  return std::log(std::expm1(s));
}

PNNState init_pnn(int d, int m, int L, const HyperParams& hp, std::uint64_t seed,
                  InitOptions opts, int out_dim) {
  if (d < 1 || m < 1 || L < 1) throw invalid_input("init_pnn requires d, m, L >= 1");
  if (!(hp.sigma_hat > 0.0)) throw invalid_input("sigma_hat must be positive");
  if (out_dim < 1) throw invalid_input("out_dim must be >= 1");
  if (opts.symmetric_pairs && (L != 1 || m % 2 != 0))
    throw invalid_input("symmetric_pairs needs depth-1 and even width");

  PNNState state;
  state.m = m;
  state.L = L;
  state.out_dim = (L == 1) ? 1 : out_dim;

  const double sigma0 = softplus(hp.rho0);
  const auto shapes = layer_shapes(d, m, L, state.out_dim);
  state.layers.resize(shapes.size());
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    auto& layer = state.layers[l];
    layer.mu.resize(shapes[l].first, shapes[l].second);
    CounterRng rng(seed, stream_id(kInitTag, kMuTag, l));
    rng.fill_trunc_normal(layer.mu, 2.0);
    layer.mu *= hp.sigma_hat;
    layer.sigma = Matrix::Constant(shapes[l].first, shapes[l].second, sigma0);
  }

  if (L == 1) {
    state.v.resize(m);
    if (opts.symmetric_pairs) {
      // Mirror halves: unit r and unit r + m/2 share a mu row and take
      // opposite signs, so every epsilon-average output starts at zero.
      const int half = m / 2;
      state.layers[0].mu.bottomRows(half) = state.layers[0].mu.topRows(half);
      state.v.head(half).setConstant(1.0);
      state.v.tail(half).setConstant(-1.0);
    } else {
      CounterRng rng(seed, stream_id(kInitTag, kSignTag, 0));
      for (int r = 0; r < m; ++r) state.v(r) = rng.next_unit() < 0.5 ? -1.0 : 1.0;
    }
  }

  state.prior = state.layers;
  return state;
}

EpsilonDraw make_eps(const PNNState& state, std::uint64_t seed, std::uint64_t step,
                     std::uint64_t sample) {
  EpsilonDraw draw;
  draw.seed = seed;
  draw.step = step;
  draw.sample = sample;
  draw.eps.resize(state.layers.size());
  for (std::size_t l = 0; l < state.layers.size(); ++l) {
    draw.eps[l].resize(state.layers[l].mu.rows(), state.layers[l].mu.cols());
    CounterRng rng(seed, stream_id(step, sample, l));
    rng.fill_normal(draw.eps[l]);
  }
  return draw;
}

Vector forward(const PNNState& state, const EpsilonDraw& eps, const Vector& x) {
  if (x.size() != state.in_dim()) throw invalid_input("forward: input dimension mismatch");
  check_shapes(state, eps);

  const double root_m = std::sqrt(static_cast<double>(state.m));
  if (state.theory_mode()) {
    const Matrix w = state.layers[0].mu + state.layers[0].sigma.cwiseProduct(eps.eps[0]);
    Vector pre = w * x;
    // The indicator convention puts zero preactivations on the active side.
    Vector act = (pre.array() >= 0.0).select(pre, 0.0);
    Vector out(1);
    out(0) = state.v.dot(act) / root_m;
    return out;
  }

  Vector h = x;
  for (std::size_t l = 0; l < state.layers.size(); ++l) {
    const Matrix w = state.layers[l].mu + state.layers[l].sigma.cwiseProduct(eps.eps[l]);
    Vector pre = w * h;
    if (l > 0) pre /= root_m;
    if (l + 1 == state.layers.size()) return pre;
    h = (pre.array() >= 0.0).select(pre, 0.0);
  }
  return h;  // unreachable
}

Matrix forward_batch(const PNNState& state, const EpsilonDraw& eps, const Matrix& x) {
  if (x.cols() != state.in_dim())
    throw invalid_input("forward_batch: input dimension mismatch");
  check_shapes(state, eps);

  const double root_m = std::sqrt(static_cast<double>(state.m));
  if (state.theory_mode()) {
    const Matrix w = state.layers[0].mu + state.layers[0].sigma.cwiseProduct(eps.eps[0]);
    Matrix pre = x * w.transpose();
    Matrix act = (pre.array() >= 0.0).select(pre, 0.0);
    return act * state.v / root_m;
  }

  Matrix h = x;
  for (std::size_t l = 0; l < state.layers.size(); ++l) {
    const Matrix w = state.layers[l].mu + state.layers[l].sigma.cwiseProduct(eps.eps[l]);
    Matrix pre = h * w.transpose();
    if (l > 0) pre /= root_m;
    if (l + 1 == state.layers.size()) return pre;
    h = (pre.array() >= 0.0).select(pre, 0.0);
  }
  return h;  // unreachable
}

ParamGrads grad_params(const PNNState& state, const EpsilonDraw& eps, const Vector& x,
                       int output) {
  if (x.size() != state.in_dim())
    throw invalid_input("grad_params: input dimension mismatch");
  check_shapes(state, eps);
  if (output < 0 || output >= state.out_dim)
    throw invalid_input("grad_params: output index out of range");

  const double root_m = std::sqrt(static_cast<double>(state.m));
  ParamGrads grads;
  grads.d_mu.resize(state.layers.size());
  grads.d_sigma.resize(state.layers.size());

  if (state.theory_mode()) {
    const Matrix w = state.layers[0].mu + state.layers[0].sigma.cwiseProduct(eps.eps[0]);
    const Vector pre = w * x;
    // df/dmu_r = (1/sqrt m) v_r 1{w_r.x >= 0} x; df/dsigma_r multiplies in eps_r.
    Vector coeff(state.m);
    for (int r = 0; r < state.m; ++r)
      coeff(r) = pre(r) >= 0.0 ? state.v(r) / root_m : 0.0;
    grads.d_mu[0] = coeff * x.transpose();
    grads.d_sigma[0] = grads.d_mu[0].cwiseProduct(eps.eps[0]);
    return grads;
  }

  const std::size_t records = state.layers.size();
  std::vector<Matrix> w(records);
  std::vector<Vector> inputs(records);   // activation fed into each layer
  std::vector<Vector> masks(records);    // indicator of the layer's preactivation
  Vector h = x;
  for (std::size_t l = 0; l < records; ++l) {
    w[l] = state.layers[l].mu + state.layers[l].sigma.cwiseProduct(eps.eps[l]);
    inputs[l] = h;
    Vector pre = w[l] * h;
    if (l > 0) pre /= root_m;
    if (l + 1 == records) break;
    masks[l] = (pre.array() >= 0.0).select(Vector::Ones(pre.size()), 0.0);
    h = pre.cwiseProduct(masks[l]);
  }

  // Backward from the chosen output coordinate.
  Vector g = w.back().row(output).transpose() / root_m;
  grads.d_mu[records - 1] = Matrix::Zero(w.back().rows(), w.back().cols());
  grads.d_mu[records - 1].row(output) = inputs[records - 1].transpose() / root_m;
  for (std::size_t l = records - 1; l-- > 0;) {
    Vector gz = g.cwiseProduct(masks[l]);
    const double scale = (l > 0) ? 1.0 / root_m : 1.0;
    grads.d_mu[l] = scale * gz * inputs[l].transpose();
    if (l > 0) g = w[l].transpose() * gz / root_m;
  }
  for (std::size_t l = 0; l < records; ++l)
    grads.d_sigma[l] = grads.d_mu[l].cwiseProduct(eps.eps[l]);
  return grads;
}

MeanForwardResult mean_forward(const PNNState& state, const Vector& x, int samples,
                               std::uint64_t seed) {
  if (samples < 1) throw invalid_input("mean_forward requires samples >= 1");
  Vector sum = Vector::Zero(state.out_dim);
  Vector sum_sq = Vector::Zero(state.out_dim);
  for (int s = 0; s < samples; ++s) {
    const Vector f = forward(state, make_eps(state, seed, 0, s), x);
    sum += f;
    sum_sq += f.cwiseProduct(f);
  }
  MeanForwardResult result;
  result.mean = sum / samples;
  if (samples > 1) {
    Vector var = (sum_sq - sum.cwiseProduct(sum) / samples) / (samples - 1);
    result.std_error = (var.cwiseMax(0.0) / samples).cwiseSqrt();
  } else {
    result.std_error = Vector::Zero(state.out_dim);
  }
  return result;
}

Matrix mean_forward_batch(const PNNState& state, const Matrix& x, int samples,
                          std::uint64_t seed) {
  if (samples < 1) throw invalid_input("mean_forward_batch requires samples >= 1");
  Matrix sum = Matrix::Zero(x.rows(), state.out_dim);
  for (int s = 0; s < samples; ++s)
    sum += forward_batch(state, make_eps(state, seed, 0, s), x);
  return sum / samples;
}

}  // namespace pntk
