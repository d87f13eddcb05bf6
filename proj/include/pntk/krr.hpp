#pragma once

#include "pntk/common.hpp"
#include "pntk/kernel.hpp"

namespace pntk {

// Kernel ridge regression against the limiting kernel: the closed-form
// infinite-width limit of the PAC-Bayes training dynamics. The ridge is
// lambda / sigma0^2.
struct KRRModel {
  Matrix alpha;           // n x C dual coefficients
  double ridge = 0.0;
  Matrix train_features;  // retained for cross-kernel evaluation
};

// Solves (K + ridge I) X = rhs by Cholesky, escalating a jitter of
// 1e-12 * trace/n by factors of ten (three retries) if the factorization
// fails. Shared by the fit below and the certificate quadratic forms.
Matrix solve_regularized(const Matrix& k, const Matrix& rhs, double ridge);

// Fits dual coefficients to residual <= 1e-8 relative. Training features are
// optional at fit time but required before krr_predict; a ridge of zero is
// accepted only for kernels bounded away from singularity.
KRRModel krr_fit(const KernelMatrix& k, const Matrix& y, double ridge,
                 Matrix train_features = Matrix());

// Limiting cross-kernel between two unit-row feature sets.
Matrix limiting_ntk_cross(const Matrix& x_test, const Matrix& x_train);

// Predictions at unit-norm test rows via the limiting cross-kernel.
Matrix krr_predict(const KRRModel& model, const Matrix& x_test);

}  // namespace pntk
