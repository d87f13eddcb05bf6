#pragma once

#include <cstdint>

#include "pntk/common.hpp"

namespace pntk {

// Everything the trainer, certifier, and experiment drivers need to know
// about a configuration. Defaults are the desk-scale conventions used across
// the experiment suite; validate() enforces the domain constraints.
struct HyperParams {
  double lambda = 0.0;         // KL penalty weight
  double rho0 = 0.05;          // sigma0 = softplus(rho0)
  double sigma_hat = 1.0;      // init std of mu (before 2-sigma truncation)
  double eta = 1.0;            // learning rate
  int steps = 1000;            // T
  int m = 512;                 // width
  double delta = 0.05;         // confidence for certificates
  int mc_train = 1;            // epsilon draws per GD step
  int mc_cert = 1000;          // posterior draws per certificate
  double lambda_bar = 1.0;     // PAC-Bayes-lambda parameter, in (0,2)
  double prior_fraction = 0.0; // share of data used to pretrain the prior
  std::uint64_t seed = 1;
  bool freeze_sigma = true;

  void validate() const {
    if (lambda < 0.0) throw invalid_input("hyperparams: lambda must be >= 0");
    if (sigma_hat <= 0.0) throw invalid_input("hyperparams: sigma_hat must be > 0");
    if (eta < 0.0) throw invalid_input("hyperparams: eta must be >= 0");
    if (steps < 0) throw invalid_input("hyperparams: steps must be >= 0");
    if (m < 1) throw invalid_input("hyperparams: width must be >= 1");
    if (!(delta > 0.0 && delta <= 1.0))
      throw invalid_input("hyperparams: delta must lie in (0,1]");
    if (mc_train < 1) throw invalid_input("hyperparams: mc_train must be >= 1");
    if (mc_cert < 1) throw invalid_input("hyperparams: mc_cert must be >= 1");
    if (!(lambda_bar > 0.0 && lambda_bar < 2.0))
      throw invalid_input("hyperparams: lambda_bar must lie strictly in (0,2)");
    if (prior_fraction < 0.0 || prior_fraction >= 1.0)
      throw invalid_input("hyperparams: prior_fraction must lie in [0,1)");
  }
};

}  // namespace pntk
