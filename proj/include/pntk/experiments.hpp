#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pntk/bounds.hpp"
#include "pntk/common.hpp"
#include "pntk/dataset.hpp"
#include "pntk/hyperparams.hpp"
#include "pntk/objective.hpp"

namespace pntk {

// Least-squares line fit; slope carries the scaling laws, r_squared the
// linearity checks.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};
LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys);

// ---------------------------------------------------------------------------
// Kernel concentration at initialization.

struct ConcentrationReport {
  std::vector<int> widths;
  std::vector<double> median_mu_dist;     // ||K_mu(0) - K_inf||_F per width
  std::vector<double> median_sigma_dist;  // ||K_sigma(0) - K_inf||_F per width
  std::vector<double> median_cross_dist;  // ||K_sigma(0) - K_mu(0)||_F per width
  bool slope_available = false;           // false for single-width sweeps
  double slope_mu = 0.0;
  double slope_sigma = 0.0;
};

ConcentrationReport run_ntk_concentration(int n, int d, const std::vector<int>& widths,
                                          int seeds, std::uint64_t base_seed,
                                          int threads = 1);

// ---------------------------------------------------------------------------
// Weight-drift scaling across widths for a deep all-probabilistic net.

struct DriftRecord {
  int m = 0;
  std::string layer;  // input | hidden | output
  std::string param;  // mu | rho
  double rel_frobenius = 0.0;
};

struct DriftSlope {
  std::string layer;
  std::string param;
  double slope = 0.0;
};

struct DriftStudyReport {
  std::vector<DriftRecord> records;
  std::vector<DriftSlope> slopes;  // fitted per (layer, param) group
};

DriftStudyReport run_drift_study(int depth, const std::vector<int>& widths,
                                 const Dataset& ds, HyperParams hp, int steps,
                                 int threads = 1);

// ---------------------------------------------------------------------------
// Gradient-norm comparison between the mu and sigma directions.

struct GradNormReport {
  std::vector<int> widths;
  std::vector<double> mean_grad_mu;
  std::vector<double> mean_grad_sigma;
  std::vector<double> mean_ratio;  // per-step ||grad sigma|| / ||grad mu||, averaged
};

GradNormReport run_grad_norm_study(const Dataset& ds, HyperParams hp,
                                   const std::vector<int>& widths, int threads = 1);

// ---------------------------------------------------------------------------
// Trained posterior mean vs kernel ridge regression on held-out points.

struct KrrEquivalenceReport {
  std::vector<int> widths;
  std::vector<double> max_abs_error;   // held-out max |mean_forward - krr_predict|
  std::vector<double> init_mean_abs;   // measured |f(x, 0)| before training
  double ridge = 0.0;
};

KrrEquivalenceReport run_krr_equivalence(int n, int d, const std::vector<int>& widths,
                                         HyperParams hp, int n_test = 24,
                                         double margin = 0.1, int threads = 1);

// ---------------------------------------------------------------------------
// Convergence run with the linear-rate diagnostics.

struct ConvergenceReport {
  double final_risk = 0.0;
  double r_squared = 0.0;    // of log risk vs step over [fit_start, T)
  double fitted_rate = 0.0;  // negated slope of that fit
  double rate_reference = 0.0;  // eta * lambda_min(K_mu(0)+K_sigma(0)) / n
  std::vector<double> risk_curve;
};

ConvergenceReport run_convergence(const Dataset& ds, const HyperParams& hp,
                                  int fit_start = 100);

// ---------------------------------------------------------------------------
// Kernel drift of the trained net, epsilon frozen at its initial draw.

struct KernelStabilityReport {
  std::vector<int> widths;
  std::vector<double> rel_drift;  // ||K_mu(T) - K_mu(0)||_F / ||K_mu(0)||_F
};

KernelStabilityReport run_kernel_stability(const Dataset& ds, HyperParams hp,
                                           const std::vector<int>& widths,
                                           int threads = 1);

// ---------------------------------------------------------------------------
// Certificate validity over seeded runs: train, certify, compare against
// held-out error.

struct ValidityReport {
  std::vector<double> kl_bounds;
  std::vector<double> lambda_bounds;
  std::vector<double> test_errors;
  int holds = 0;  // runs with kl_bound >= held-out error
  int runs = 0;
};

ValidityReport run_bound_validity(int runs, int n, int d, HyperParams hp,
                                  double margin = 0.5, int threads = 1);

// ---------------------------------------------------------------------------
// Certification of one trained configuration (the `certify` CLI path).

BoundReport certify_state(const PNNState& state, const Dataset& train_ds,
                          const HyperParams& hp, double delta_mc,
                          const Dataset* test_ds = nullptr);

// ---------------------------------------------------------------------------
// Grid search: training-free PA ranking against brute-force certification.

struct GridSearchResult {
  std::vector<GridPoint> points;  // sorted by (rho0, lambda, prior_fraction)
  double tau_pa_vs_bound = 0.0;
  GridPoint best_by_pa;
  GridPoint best_by_bound;
  double wall_time_pa = 0.0;     // seconds
  double wall_time_brute = 0.0;  // seconds
};

// The PA score for each coordinate is computed from the limiting kernel on
// one fixed subsample of the pool (min(n, 64 per class) rows) and the
// coordinate's posterior count; the label-ordering information lives in the
// kernel while the prior fraction enters through the 1/n scaling, mirroring
// how the fraction enters the certified bound. Training runs use a common
// certification seed so Monte-Carlo noise cancels across coordinates.
GridSearchResult run_grid_search(const Dataset& pool, const std::vector<double>& rho0_grid,
                                 const std::vector<double>& lambda_grid,
                                 const std::vector<double>& prior_fracs,
                                 HyperParams hp_base, const Dataset* test_ds = nullptr,
                                 int threads = 1);

// Appendix-style default grids, truncated to the first `budget` values each.
std::vector<double> default_rho0_grid(int budget);
std::vector<double> default_lambda_grid(int budget);
std::vector<double> default_prior_fracs(int budget);

}  // namespace pntk
