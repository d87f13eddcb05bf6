#include "pntk/krr.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <numbers>
#include <utility>

namespace pntk {

Matrix solve_regularized(const Matrix& k, const Matrix& rhs, double ridge) {
  if (k.rows() != k.cols()) throw invalid_input("solve_regularized: kernel must be square");
  if (rhs.rows() != k.rows()) throw invalid_input("solve_regularized: rhs row mismatch");
  if (ridge < 0.0) throw invalid_input("solve_regularized: ridge must be >= 0");

  const Eigen::Index n = k.rows();
  const double base_jitter = 1e-12 * k.trace() / static_cast<double>(n);
  double jitter = 0.0;
  for (int attempt = 0; attempt <= 3; ++attempt) {
    Matrix system = k;
    system.diagonal().array() += ridge + jitter;
    Eigen::LLT<Matrix> llt(system);
    if (llt.info() == Eigen::Success) {
      Matrix x = llt.solve(rhs);
      const double resid = (system * x - rhs).norm();
      if (resid <= 1e-8 * std::max(1.0, rhs.norm())) return x;
    }
    jitter = (attempt == 0) ? base_jitter : jitter * 10.0;
  }
  throw numeric_error("solve_regularized: singular system after jitter escalation");
}

KRRModel krr_fit(const KernelMatrix& k, const Matrix& y, double ridge,
                 Matrix train_features) {
  if (y.rows() != k.values.rows()) throw invalid_input("krr_fit: label row mismatch");
  if (train_features.size() != 0 && train_features.rows() != k.values.rows())
    throw invalid_input("krr_fit: feature row mismatch");
  if (ridge == 0.0 && k.lambda_min <= 1e-10)
    throw invalid_input("krr_fit: zero ridge needs a nonsingular kernel");

  KRRModel model;
  model.ridge = ridge;
  model.alpha = solve_regularized(k.values, y, ridge);
  model.train_features = std::move(train_features);
  return model;
}

Matrix limiting_ntk_cross(const Matrix& x_test, const Matrix& x_train) {
  if (x_test.cols() != x_train.cols())
    throw invalid_input("limiting_ntk_cross: dimension mismatch");
  for (Eigen::Index i = 0; i < x_test.rows(); ++i)
    if (std::abs(x_test.row(i).norm() - 1.0) > 1e-8)
      throw invalid_input("limiting_ntk_cross requires unit-norm rows");

  Matrix gram = x_test * x_train.transpose();
  for (Eigen::Index i = 0; i < gram.rows(); ++i) {
    for (Eigen::Index j = 0; j < gram.cols(); ++j) {
      const double g = std::clamp(gram(i, j), -1.0, 1.0);
      const double theta = std::acos(g);
      gram(i, j) = g * (std::numbers::pi - theta) / (2.0 * std::numbers::pi);
    }
  }
  return gram;
}

Matrix krr_predict(const KRRModel& model, const Matrix& x_test) {
  if (model.train_features.size() == 0)
    throw invalid_input("krr_predict: model has no stored training features");
  return limiting_ntk_cross(x_test, model.train_features) * model.alpha;
}

}  // namespace pntk
