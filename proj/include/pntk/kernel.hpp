#pragma once

#include <cstdint>
#include <utility>

#include "pntk/common.hpp"
#include "pntk/pnn.hpp"

namespace pntk {

enum class KernelSource { mu, sigma, limiting_closed, limiting_mc };

// Symmetric kernel matrix with its smallest eigenvalue cached at
// construction (computed on the symmetrized values, which also absorbs
// assembly round-off).
struct KernelMatrix {
  Matrix values;
  double lambda_min = 0.0;
  KernelSource source = KernelSource::mu;

  KernelMatrix() = default;
  KernelMatrix(Matrix v, KernelSource src);

  Eigen::Index n() const { return values.rows(); }
};

// Empirical tangent kernel of the mu gradients at the given draw,
//   K_ij = (x_i . x_j / m) sum_r 1{w_r.x_i >= 0} 1{w_r.x_j >= 0}.
// Depth-1 only.
KernelMatrix pntk_mu(const PNNState& state, const EpsilonDraw& eps, const Matrix& x);

// Exact Gram matrix of the sigma gradients: the indicator pattern of pntk_mu
// with each input coordinate weighted by the squared epsilon draw.
KernelMatrix pntk_sigma(const PNNState& state, const EpsilonDraw& eps, const Matrix& x);

// Infinite-width limit for unit inputs and zero-mean spherical Gaussian
// weights: K_ij = (x_i . x_j)(pi - theta_ij)/(2 pi). The variance argument is
// kept for interface parity with the Monte-Carlo estimator; the limit does
// not depend on it.
KernelMatrix limiting_ntk(const Matrix& x, double var);

// Monte-Carlo evaluation of the same expectation over n_w weight draws from
// N(0, var I). Serves as the in-repo oracle for the closed form.
KernelMatrix limiting_ntk_mc(const Matrix& x, double var, int n_w, std::uint64_t seed);

// Smallest eigenvalue of a symmetric matrix; rejects inputs whose asymmetry
// exceeds 1e-9 and symmetrizes what remains.
double lambda_min(const Matrix& k);

struct KernelDistance {
  double spectral = 0.0;
  double frobenius = 0.0;
};
KernelDistance kernel_distance(const KernelMatrix& k1, const KernelMatrix& k2);

}  // namespace pntk
