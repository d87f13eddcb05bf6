#include "pntk/bounds.hpp"

#include <cmath>
#include <limits>

#include "pntk/krr.hpp"

namespace pntk {

namespace {

double zero_one_loss(const Matrix& predictions, const Matrix& labels) {
  const Eigen::Index n = predictions.rows();
  double errors = 0.0;
  if (labels.cols() == 1) {
    for (Eigen::Index i = 0; i < n; ++i)
      if (predictions(i, 0) * labels(i, 0) <= 0.0) errors += 1.0;
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index pred, truth;
      predictions.row(i).maxCoeff(&pred);
      labels.row(i).maxCoeff(&truth);
      if (pred != truth) errors += 1.0;
    }
  }
  return errors / static_cast<double>(n);
}

// Shared quadratic forms of the NTK bounds: A = (K + r I)^{-1} Y with
// r = lambda/sigma0^2, returning tr(Y'A) and ||A||_F.
struct QuadForms {
  double y_t_a = 0.0;
  double a_norm = 0.0;
};
QuadForms ntk_quad_forms(const KernelMatrix& k, const Matrix& y, double lambda,
                         double sigma0) {
  if (y.rows() != k.values.rows()) throw invalid_input("ntk bound: label row mismatch");
  if (!(sigma0 > 0.0)) throw invalid_input("ntk bound: sigma0 must be positive");
  if (lambda < 0.0) throw invalid_input("ntk bound: lambda must be >= 0");
  if (lambda == 0.0 && k.lambda_min <= 0.0)
    throw invalid_input("ntk bound: zero lambda needs a positive-definite kernel");
  const double ridge = lambda / (sigma0 * sigma0);
  const Matrix a = solve_regularized(k.values, y, ridge);
  QuadForms q;
  q.y_t_a = (y.transpose() * a).trace();
  q.a_norm = a.norm();
  return q;
}

}  // namespace

double binary_kl(double q, double q2) {
  if (q < 0.0 || q > 1.0) throw invalid_input("binary_kl: q must lie in [0,1]");
  if (q2 <= 0.0 || q2 >= 1.0)
    throw invalid_input("binary_kl: q2 must lie strictly in (0,1)");
  double value = 0.0;
  if (q > 0.0) value += q * std::log(q / q2);
  if (q < 1.0) value += (1.0 - q) * std::log((1.0 - q) / (1.0 - q2));
  return value < 0.0 ? 0.0 : value;
}

double kl_inverse(double q_hat, double budget) {
  if (q_hat < 0.0 || q_hat > 1.0) throw invalid_input("kl_inverse: q_hat must lie in [0,1]");
  if (budget < 0.0) throw invalid_input("kl_inverse: budget must be >= 0");
  const double hi_cap = 1.0 - 1e-15;
  if (q_hat >= hi_cap) return 1.0;
  if (binary_kl(q_hat, hi_cap) <= budget) return 1.0;
  double lo = q_hat;
  double hi = hi_cap;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (binary_kl(q_hat, mid) <= budget)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

CertifiedRisk mc_risk_certified(const PNNState& state, const Dataset& ds, int samples,
                                double delta_mc, std::uint64_t seed) {
  if (samples < 1) throw invalid_input("mc_risk_certified requires samples >= 1");
  if (!(delta_mc > 0.0 && delta_mc < 1.0))
    throw invalid_input("mc_risk_certified: delta_mc must lie in (0,1)");
  if (ds.n() == 0) throw invalid_input("mc_risk_certified: empty dataset");

  double total = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Matrix f = forward_batch(state, make_eps(state, seed, 0, s), ds.features);
    total += zero_one_loss(f, ds.labels);
  }
  CertifiedRisk out;
  out.risk_mc = total / samples;
  out.risk_mc_upper = kl_inverse(out.risk_mc, std::log(2.0 / delta_mc) / samples);
  return out;
}

double pb_kl_bound(double risk_upper, double kl_value, int n, double delta) {
  if (n < 1) throw invalid_input("pb_kl_bound: n must be >= 1");
  if (!(delta > 0.0 && delta <= 1.0)) throw invalid_input("pb_kl_bound: bad delta");
  const double budget =
      (kl_value + std::log(2.0 * std::sqrt(static_cast<double>(n)) / delta)) / n;
  return kl_inverse(risk_upper, budget);
}

double pb_lambda_bound(double risk, double kl_value, int n, double delta,
                       double lambda_bar) {
  if (n < 1) throw invalid_input("pb_lambda_bound: n must be >= 1");
  if (!(lambda_bar > 0.0 && lambda_bar < 2.0))
    throw invalid_input("pb_lambda_bound: lambda_bar must lie in (0,2)");
  const double half_slack = 1.0 - lambda_bar / 2.0;
  const double budget =
      kl_value + std::log(2.0 * std::sqrt(static_cast<double>(n)) / delta);
  return risk / half_slack + budget / (n * lambda_bar * half_slack);
}

double pb_lambda_bound_min(double risk, double kl_value, int n, double delta) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= 199; ++i) {
    const double lb = 0.01 * i;
    const double value = pb_lambda_bound(risk, kl_value, n, delta, lb);
    if (value < best) best = value;
  }
  return best;
}

double ntk_pb_delta_term(int n, double delta) {
  return std::log(2.0 * std::sqrt(static_cast<double>(n)) / delta) / n;
}

double ntk_rad_delta_term(int n, double delta, double lambda0) {
  if (!(lambda0 > 0.0))
    throw invalid_input("ntk_rad_delta_term: lambda0 must be positive");
  return 3.0 * std::sqrt(std::log(2.0 * n / (lambda0 * delta)) / (2.0 * n));
}

double ntk_pacbayes_bound(const KernelMatrix& k, const Matrix& y, double lambda,
                          double sigma0, int n, double delta) {
  if (n < 1) throw invalid_input("ntk bound: n must be >= 1");
  const QuadForms q = ntk_quad_forms(k, y, lambda, sigma0);
  const double s0_sq = sigma0 * sigma0;
  return q.y_t_a / (n * s0_sq) + (lambda / s0_sq) * q.a_norm / std::sqrt(double(n)) +
         ntk_pb_delta_term(n, delta);
}

double ntk_rademacher_bound(const KernelMatrix& k, const Matrix& y, double lambda,
                            double sigma0, int n, double delta) {
  if (n < 1) throw invalid_input("ntk bound: n must be >= 1");
  const QuadForms q = ntk_quad_forms(k, y, lambda, sigma0);
  const double s0_sq = sigma0 * sigma0;
  return std::sqrt(std::max(0.0, q.y_t_a) / n) +
         (lambda / s0_sq) * q.a_norm / std::sqrt(double(n)) +
         ntk_rad_delta_term(n, delta, k.lambda_min);
}

double pa_score(const KernelMatrix& k, const Matrix& y, double lambda, double sigma0,
                int n) {
  if (n < 1) throw invalid_input("pa_score: n must be >= 1");
  const QuadForms q = ntk_quad_forms(k, y, lambda, sigma0);
  const double s0_sq = sigma0 * sigma0;
  return q.y_t_a / (n * s0_sq) + (lambda / s0_sq) * q.a_norm / std::sqrt(double(n));
}

double kendall_tau(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw invalid_input("kendall_tau: length mismatch");
  if (a.size() < 2) throw invalid_input("kendall_tau: need at least two points");
  const std::size_t n = a.size();
  long long concordant = 0, discordant = 0, ties_a = 0, ties_b = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double da = a[i] - a[j];
      const double db = b[i] - b[j];
      if (da == 0.0 && db == 0.0) {
        ++ties_a;
        ++ties_b;
      } else if (da == 0.0) {
        ++ties_a;
      } else if (db == 0.0) {
        ++ties_b;
      } else if ((da > 0.0) == (db > 0.0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const long long total = static_cast<long long>(n) * (n - 1) / 2;
  const double denom = std::sqrt(static_cast<double>(total - ties_a)) *
                       std::sqrt(static_cast<double>(total - ties_b));
  if (denom == 0.0) throw invalid_input("kendall_tau: a list is all ties");
  return (concordant - discordant) / denom;
}

}  // namespace pntk
