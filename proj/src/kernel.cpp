#include "pntk/kernel.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

#include "pntk/rng.hpp"

namespace pntk {

namespace {

constexpr std::uint64_t kLimitingTag = 0x6C696D77;  // "limw"

void check_theory_inputs(const PNNState& state, const EpsilonDraw& eps, const Matrix& x) {
  if (!state.theory_mode())
    throw invalid_input("empirical tangent kernels require depth-1 mode");
  if (x.cols() != state.in_dim()) throw invalid_input("kernel: input dimension mismatch");
  if (eps.eps.size() != state.layers.size() ||
      eps.eps[0].rows() != state.layers[0].mu.rows() ||
      eps.eps[0].cols() != state.layers[0].mu.cols())
    throw invalid_input("kernel: epsilon draw shape mismatch");
}

// Indicator matrix of unit activations, one row per input.
Matrix active_mask(const PNNState& state, const EpsilonDraw& eps, const Matrix& x) {
  const Matrix w = state.layers[0].mu + state.layers[0].sigma.cwiseProduct(eps.eps[0]);
  return ((x * w.transpose()).array() >= 0.0).cast<double>();
}

}  // namespace

KernelMatrix::KernelMatrix(Matrix v, KernelSource src) : source(src) {
  if (v.rows() != v.cols()) throw invalid_input("kernel matrix must be square");
  values = 0.5 * (v + v.transpose());
  lambda_min = pntk::lambda_min(values);
}

KernelMatrix pntk_mu(const PNNState& state, const EpsilonDraw& eps, const Matrix& x) {
  check_theory_inputs(state, eps, x);
  const Matrix mask = active_mask(state, eps, x);
  Matrix k = (x * x.transpose()).cwiseProduct(mask * mask.transpose()) / state.m;
  return KernelMatrix(std::move(k), KernelSource::mu);
}

KernelMatrix pntk_sigma(const PNNState& state, const EpsilonDraw& eps, const Matrix& x) {
  check_theory_inputs(state, eps, x);
  const Matrix mask = active_mask(state, eps, x);
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();

  // Gram of df/dsigma: coordinate k contributes x_ik x_jk with the indicator
  // pattern reweighted by the squared draws of that coordinate.
  Matrix k = Matrix::Zero(n, n);
  Matrix weighted(n, state.m);
  for (Eigen::Index c = 0; c < d; ++c) {
    const auto eps_sq = eps.eps[0].col(c).array().square();
    weighted = mask.array().rowwise() * eps_sq.transpose();
    k += (x.col(c) * x.col(c).transpose()).cwiseProduct(weighted * mask.transpose());
  }
  k /= state.m;
  return KernelMatrix(std::move(k), KernelSource::sigma);
}

KernelMatrix limiting_ntk(const Matrix& x, double var) {
  if (!(var > 0.0)) throw invalid_input("limiting_ntk: variance must be positive");
  const Eigen::Index n = x.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    if (std::abs(x.row(i).norm() - 1.0) > 1e-8)
      throw invalid_input("limiting_ntk requires unit-norm rows");

  const Matrix gram = x * x.transpose();
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = 0.5;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double g = std::clamp(gram(i, j), -1.0, 1.0);
      const double theta = std::acos(g);
      k(i, j) = g * (std::numbers::pi - theta) / (2.0 * std::numbers::pi);
      k(j, i) = k(i, j);
    }
  }
  return KernelMatrix(std::move(k), KernelSource::limiting_closed);
}

KernelMatrix limiting_ntk_mc(const Matrix& x, double var, int n_w, std::uint64_t seed) {
  if (!(var > 0.0)) throw invalid_input("limiting_ntk_mc: variance must be positive");
  if (n_w < 1) throw invalid_input("limiting_ntk_mc requires n_w >= 1");

  Matrix w(n_w, x.cols());
  CounterRng rng(seed, stream_id(kLimitingTag));
  rng.fill_normal(w);
  w *= std::sqrt(var);

  const Matrix mask = ((x * w.transpose()).array() >= 0.0).cast<double>();
  Matrix k = (x * x.transpose()).cwiseProduct(mask * mask.transpose()) / n_w;
  return KernelMatrix(std::move(k), KernelSource::limiting_mc);
}

double lambda_min(const Matrix& k) {
  if (k.rows() != k.cols()) throw invalid_input("lambda_min: matrix must be square");
  const double asym = (k - k.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9) throw invalid_input("lambda_min: matrix asymmetry beyond 1e-9");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (k + k.transpose()),
                                               Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw numeric_error("lambda_min: eigensolver failed to converge");
  return solver.eigenvalues().minCoeff();
}

KernelDistance kernel_distance(const KernelMatrix& k1, const KernelMatrix& k2) {
  if (k1.values.rows() != k2.values.rows() || k1.values.cols() != k2.values.cols())
    throw invalid_input("kernel_distance: shape mismatch");
  const Matrix diff = k1.values - k2.values;
  KernelDistance dist;
  dist.frobenius = diff.norm();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(diff.transpose() * diff,
                                               Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw numeric_error("kernel_distance: eigensolver failed to converge");
  dist.spectral = std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
  return dist;
}

}  // namespace pntk
