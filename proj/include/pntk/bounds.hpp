#pragma once

#include <cstdint>
#include <vector>

#include "pntk/common.hpp"
#include "pntk/dataset.hpp"
#include "pntk/hyperparams.hpp"
#include "pntk/kernel.hpp"
#include "pntk/pnn.hpp"

namespace pntk {

// Everything a certificate run produces for one configuration. The two delta
// terms are the instantiated O(.) constants of the NTK bounds, kept visible
// so they can be re-weighted without re-deriving the quadratic forms.
struct BoundReport {
  double risk_mc = 0.0;
  double risk_mc_upper = 0.0;
  double kl_value = 0.0;
  double kl_bound = 0.0;
  double lambda_bound = 0.0;
  double ntk_pb_bound = 0.0;
  double ntk_rad_bound = 0.0;
  double ntk_pb_delta_term = 0.0;
  double ntk_rad_delta_term = 0.0;
  double pa_score = 0.0;
  double test_error = -1.0;  // negative means not evaluated
  HyperParams config;
};

struct GridPoint {
  double rho0 = 0.0;
  double lambda = 0.0;
  double prior_fraction = 0.0;
  BoundReport report;
};

// kl(q || q2) for Bernoulli parameters, with the 0 log 0 = 0 convention.
double binary_kl(double q, double q2);

// sup{p in [q_hat, 1) : kl(q_hat || p) <= budget}, bisected to 1e-9 within
// the bracket [q_hat, 1 - 1e-15]; returns 1 when even that endpoint fits.
double kl_inverse(double q_hat, double budget);

// Monte-Carlo 0-1 risk over S posterior draws (argmax mismatch for C >= 2,
// sign mismatch for C == 1) and its Chernoff-style upper confidence value
// kl_inverse(risk_mc, log(2/delta_mc)/S).
struct CertifiedRisk {
  double risk_mc = 0.0;
  double risk_mc_upper = 0.0;
};
CertifiedRisk mc_risk_certified(const PNNState& state, const Dataset& ds, int samples,
                                double delta_mc, std::uint64_t seed);

// Inversion of the kl concentration statement:
// kl(risk || bound) <= (kl_value + log(2 sqrt(n)/delta)) / n.
double pb_kl_bound(double risk_upper, double kl_value, int n, double delta);

// risk/(1 - lb/2) + (kl_value + log(2 sqrt(n)/delta)) / (n lb (1 - lb/2)).
double pb_lambda_bound(double risk, double kl_value, int n, double delta,
                       double lambda_bar);

// The same bound minimized over 199 lambda_bar values evenly spaced across
// {0.01, 0.02, ..., 1.99}.
double pb_lambda_bound_min(double risk, double kl_value, int n, double delta);

// Training-free NTK bounds. With A = (K + lambda/sigma0^2 I)^{-1} Y:
//   pb  = tr(Y'A)/(n sigma0^2) + (lambda/sigma0^2) ||A||_F/sqrt(n) + log(2 sqrt(n)/delta)/n
//   rad = sqrt(tr(Y'A)/n) + (lambda/sigma0^2) ||A||_F/sqrt(n)
//         + 3 sqrt(log(2n/(lambda0 delta)) / (2n))
// The count n enters the scaling terms directly and may differ from the
// kernel's size (the grid search scores a fixed kernel at varying posterior
// sizes).
double ntk_pacbayes_bound(const KernelMatrix& k, const Matrix& y, double lambda,
                          double sigma0, int n, double delta);
double ntk_rademacher_bound(const KernelMatrix& k, const Matrix& y, double lambda,
                            double sigma0, int n, double delta);
double ntk_pb_delta_term(int n, double delta);
double ntk_rad_delta_term(int n, double delta, double lambda0);

// Training-free proxy: the PAC-Bayes NTK bound without its delta term.
double pa_score(const KernelMatrix& k, const Matrix& y, double lambda, double sigma0,
                int n);

// Tie-corrected (tau-b) Kendall rank correlation by O(n^2) pair counting.
double kendall_tau(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace pntk
