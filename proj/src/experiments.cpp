#include "pntk/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <utility>

#include "pntk/kernel.hpp"
#include "pntk/krr.hpp"
#include "pntk/rng.hpp"
#include "pntk/threadpool.hpp"

namespace pntk {

namespace {

constexpr std::uint64_t kConcTag = 0x636F6E63;   // "conc"
constexpr std::uint64_t kDriftTag = 0x64726966;  // "drif"
constexpr std::uint64_t kGradTag = 0x6772616E;   // "gran"
constexpr std::uint64_t kKrrTag = 0x6B727265;    // "krre"
constexpr std::uint64_t kStabTag = 0x73746162;   // "stab"
constexpr std::uint64_t kValidTag = 0x76616C69;  // "vali"
constexpr std::uint64_t kCertTag = 0x63657274;   // "cert"
constexpr std::uint64_t kTestTag = 0x74657374;   // "test"
constexpr std::uint64_t kMeanTag = 0x6D65616E;   // "mean"

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Dataset slice_rows(const Dataset& ds, Eigen::Index start, Eigen::Index count) {
  Dataset out;
  out.features = ds.features.middleRows(start, count);
  out.labels = ds.labels.middleRows(start, count);
  out.ids.assign(ds.ids.begin() + start, ds.ids.begin() + start + count);
  return out;
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw invalid_input("fit_line: length mismatch");
  if (xs.size() < 2) throw invalid_input("fit_line: need at least two points");
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw invalid_input("fit_line: degenerate abscissae");
  LineFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss_res = 0.0, ss_tot = 0.0;
  const double mean_y = sy / n;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double pred = fit.intercept + fit.slope * xs[i];
    ss_res += (ys[i] - pred) * (ys[i] - pred);
    ss_tot += (ys[i] - mean_y) * (ys[i] - mean_y);
  }
  fit.r_squared = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
  return fit;
}

ConcentrationReport run_ntk_concentration(int n, int d, const std::vector<int>& widths,
                                          int seeds, std::uint64_t base_seed,
                                          int threads) {
  if (widths.empty()) throw invalid_input("concentration: widths must be nonempty");
  if (!std::is_sorted(widths.begin(), widths.end()))
    throw invalid_input("concentration: widths must be increasing");
  if (seeds < 1) throw invalid_input("concentration: seeds must be >= 1");

  const Dataset ds = synth_two_class(n, d, 0.3, base_seed);
  const KernelMatrix k_inf = limiting_ntk(ds.features, 1.0);
  // The sigma kernel weights each activation pattern by squared epsilon
  // draws, and those two are only decoupled when sigma0 is small next to the
  // init scale of the means. The study therefore initializes in that regime;
  // at sigma0 comparable to sigma_hat the coupling leaves a width-independent
  // bias floor under the sigma-kernel distance.
  HyperParams hp;
  hp.rho0 = -3.0;

  const int w_count = static_cast<int>(widths.size());
  std::vector<std::vector<double>> mu_dist(widths.size());
  std::vector<std::vector<double>> sigma_dist(widths.size());
  std::vector<std::vector<double>> cross_dist(widths.size());
  for (auto& v : mu_dist) v.resize(seeds);
  for (auto& v : sigma_dist) v.resize(seeds);
  for (auto& v : cross_dist) v.resize(seeds);

  parallel_for(w_count * seeds, threads, [&](int job) {
    const int wi = job / seeds;
    const int si = job % seeds;
    const std::uint64_t seed = stream_id(base_seed, kConcTag, job);
    const PNNState state = init_pnn(d, widths[static_cast<std::size_t>(wi)], 1, hp, seed);
    const EpsilonDraw eps = make_eps(state, seed, 0, 0);
    const KernelMatrix k_mu = pntk_mu(state, eps, ds.features);
    const KernelMatrix k_sigma = pntk_sigma(state, eps, ds.features);
    mu_dist[wi][si] = kernel_distance(k_mu, k_inf).frobenius;
    sigma_dist[wi][si] = kernel_distance(k_sigma, k_inf).frobenius;
    cross_dist[wi][si] = kernel_distance(k_sigma, k_mu).frobenius;
  });

  ConcentrationReport report;
  report.widths = widths;
  std::vector<double> log_m, log_mu, log_sigma;
  for (std::size_t wi = 0; wi < widths.size(); ++wi) {
    report.median_mu_dist.push_back(median(mu_dist[wi]));
    report.median_sigma_dist.push_back(median(sigma_dist[wi]));
    report.median_cross_dist.push_back(median(cross_dist[wi]));
    log_m.push_back(std::log(static_cast<double>(widths[wi])));
    log_mu.push_back(std::log(report.median_mu_dist.back()));
    log_sigma.push_back(std::log(report.median_sigma_dist.back()));
  }
  if (widths.size() >= 2) {
    report.slope_available = true;
    report.slope_mu = fit_line(log_m, log_mu).slope;
    report.slope_sigma = fit_line(log_m, log_sigma).slope;
  }
  return report;
}

DriftStudyReport run_drift_study(int depth, const std::vector<int>& widths,
                                 const Dataset& ds, HyperParams hp, int steps,
                                 int threads) {
  if (depth < 2) throw invalid_input("drift study: depth must be >= 2");
  if (widths.empty()) throw invalid_input("drift study: widths must be nonempty");
  hp.steps = steps;
  hp.freeze_sigma = false;
  const int out_dim = static_cast<int>(ds.c());

  struct WidthDrift {
    std::vector<double> mu;   // per layer record
    std::vector<double> rho;
  };
  std::vector<WidthDrift> drifts(widths.size());

  parallel_for(static_cast<int>(widths.size()), threads, [&](int wi) {
    HyperParams hp_w = hp;
    hp_w.m = widths[static_cast<std::size_t>(wi)];
    hp_w.seed = stream_id(hp.seed, kDriftTag, hp_w.m);
    PNNState init = init_pnn(static_cast<int>(ds.d()), hp_w.m, depth, hp_w, hp_w.seed,
                             {}, out_dim);
    const TrainTrace trace = train_from(init, ds, hp_w);
    const PNNState& fin = trace.final_state;
    auto& slot = drifts[static_cast<std::size_t>(wi)];
    for (std::size_t l = 0; l < init.layers.size(); ++l) {
      slot.mu.push_back((fin.layers[l].mu - init.layers[l].mu).norm() /
                        init.layers[l].mu.norm());
      const Matrix rho0 = init.layers[l].sigma.unaryExpr(&inv_softplus);
      const Matrix rho1 = fin.layers[l].sigma.unaryExpr(&inv_softplus);
      slot.rho.push_back((rho1 - rho0).norm() / rho0.norm());
    }
  });

  DriftStudyReport report;
  const std::size_t records = static_cast<std::size_t>(depth) + 1;
  auto tag_of = [records](std::size_t l) -> std::string {
    if (l == 0) return "input";
    if (l + 1 == records) return "output";
    return "hidden";
  };
  for (std::size_t wi = 0; wi < widths.size(); ++wi) {
    for (std::size_t l = 0; l < records; ++l) {
      report.records.push_back(
          {widths[wi], tag_of(l), "mu", drifts[wi].mu[l]});
      report.records.push_back(
          {widths[wi], tag_of(l), "rho", drifts[wi].rho[l]});
    }
  }

  if (widths.size() >= 2) {
    for (const std::string& layer : {"input", "hidden", "output"}) {
      for (const std::string& param : {"mu", "rho"}) {
        std::vector<double> log_m, log_drift;
        for (std::size_t wi = 0; wi < widths.size(); ++wi) {
          double sum = 0.0;
          int count = 0;
          for (const auto& rec : report.records) {
            if (rec.m == widths[wi] && rec.layer == layer && rec.param == param) {
              sum += rec.rel_frobenius;
              ++count;
            }
          }
          if (count == 0) continue;
          log_m.push_back(std::log(static_cast<double>(widths[wi])));
          log_drift.push_back(std::log(std::max(sum / count, 1e-300)));
        }
        if (log_m.size() >= 2)
          report.slopes.push_back({layer, param, fit_line(log_m, log_drift).slope});
      }
    }
  }
  return report;
}

GradNormReport run_grad_norm_study(const Dataset& ds, HyperParams hp,
                                   const std::vector<int>& widths, int threads) {
  if (widths.empty()) throw invalid_input("grad norm study: widths must be nonempty");
  GradNormReport report;
  report.widths = widths;
  report.mean_grad_mu.resize(widths.size());
  report.mean_grad_sigma.resize(widths.size());
  report.mean_ratio.resize(widths.size());

  parallel_for(static_cast<int>(widths.size()), threads, [&](int wi) {
    HyperParams hp_w = hp;
    hp_w.m = widths[static_cast<std::size_t>(wi)];
    hp_w.seed = stream_id(hp.seed, kGradTag, hp_w.m);
    const TrainTrace trace = train(ds, hp_w);
    double sum_mu = 0.0, sum_sigma = 0.0, sum_ratio = 0.0;
    int ratio_count = 0;
    for (const auto& rec : trace.records) {
      sum_mu += rec.grad_mu_norm;
      sum_sigma += rec.grad_sigma_norm;
      if (rec.grad_mu_norm > 0.0) {
        sum_ratio += rec.grad_sigma_norm / rec.grad_mu_norm;
        ++ratio_count;
      }
    }
    const double steps = static_cast<double>(trace.records.size());
    report.mean_grad_mu[static_cast<std::size_t>(wi)] = sum_mu / steps;
    report.mean_grad_sigma[static_cast<std::size_t>(wi)] = sum_sigma / steps;
    report.mean_ratio[static_cast<std::size_t>(wi)] =
        ratio_count > 0 ? sum_ratio / ratio_count : 0.0;
  });
  return report;
}

KrrEquivalenceReport run_krr_equivalence(int n, int d, const std::vector<int>& widths,
                                         HyperParams hp, int n_test, double margin,
                                         int threads) {
  if (widths.empty()) throw invalid_input("krr equivalence: widths must be nonempty");
  if (!(hp.lambda > 0.0)) throw invalid_input("krr equivalence: lambda must be > 0");
  if (!hp.freeze_sigma) throw invalid_input("krr equivalence: sigma must stay frozen");

  // Held-out points come from the same generative draw as the training set:
  // one pool, first n rows train, remainder test.
  const Dataset pool = synth_two_class(n + n_test, d, margin, hp.seed);
  const Dataset train_ds = slice_rows(pool, 0, n);
  const Dataset test_ds = slice_rows(pool, n, n_test);

  const double sigma0 = softplus(hp.rho0);
  const double ridge = hp.lambda / (sigma0 * sigma0);
  const KernelMatrix k = limiting_ntk(train_ds.features, 1.0);
  const KRRModel model = krr_fit(k, train_ds.labels, ridge, train_ds.features);
  const Matrix krr_preds = krr_predict(model, test_ds.features);

  KrrEquivalenceReport report;
  report.ridge = ridge;
  report.widths = widths;
  report.max_abs_error.resize(widths.size());
  report.init_mean_abs.resize(widths.size());

  parallel_for(static_cast<int>(widths.size()), threads, [&](int wi) {
    HyperParams hp_w = hp;
    hp_w.m = widths[static_cast<std::size_t>(wi)];
    hp_w.seed = stream_id(hp.seed, kKrrTag, hp_w.m);
    InitOptions opts;
    opts.symmetric_pairs = true;
    PNNState state = init_pnn(d, hp_w.m, 1, hp_w, hp_w.seed, opts);

    const std::uint64_t mean_seed = stream_id(hp_w.seed, kMeanTag);
    const Matrix init_mean = mean_forward_batch(state, test_ds.features, 1024, mean_seed);
    report.init_mean_abs[static_cast<std::size_t>(wi)] =
        init_mean.cwiseAbs().maxCoeff();

    const TrainTrace trace = train_from(std::move(state), train_ds, hp_w);
    // The remaining gap past m ~ 2^11 sits near the Monte-Carlo floor of this
    // mean, so the sample count is kept high enough to expose the width trend.
    const Matrix post_mean =
        mean_forward_batch(trace.final_state, test_ds.features, 8192, mean_seed + 1);
    report.max_abs_error[static_cast<std::size_t>(wi)] =
        (post_mean - krr_preds).cwiseAbs().maxCoeff();
  });
  return report;
}

ConvergenceReport run_convergence(const Dataset& ds, const HyperParams& hp,
                                  int fit_start) {
  hp.validate();
  const PNNState state0 =
      init_pnn(static_cast<int>(ds.d()), hp.m, 1, hp, hp.seed);
  const EpsilonDraw eps0 = make_eps(state0, hp.seed, 0, 0);
  const Matrix kernel_sum = pntk_mu(state0, eps0, ds.features).values +
                            pntk_sigma(state0, eps0, ds.features).values;
  const double lambda0_hat = lambda_min(kernel_sum);

  const TrainTrace trace = train_from(state0, ds, hp);

  ConvergenceReport report;
  report.rate_reference = hp.eta * lambda0_hat / static_cast<double>(ds.n());
  report.risk_curve.reserve(trace.records.size());
  for (const auto& rec : trace.records) report.risk_curve.push_back(rec.risk);
  report.final_risk = trace.records.empty() ? 0.0 : trace.records.back().risk;

  if (fit_start < 0 || fit_start >= static_cast<int>(trace.records.size()) - 1)
    throw invalid_input("convergence: fit window is empty");
  std::vector<double> ts, log_risk;
  for (std::size_t t = static_cast<std::size_t>(fit_start); t < trace.records.size();
       ++t) {
    ts.push_back(static_cast<double>(t));
    log_risk.push_back(std::log(std::max(trace.records[t].risk, 1e-300)));
  }
  const LineFit fit = fit_line(ts, log_risk);
  report.fitted_rate = -fit.slope;
  report.r_squared = fit.r_squared;
  return report;
}

KernelStabilityReport run_kernel_stability(const Dataset& ds, HyperParams hp,
                                           const std::vector<int>& widths,
                                           int threads) {
  if (widths.empty()) throw invalid_input("kernel stability: widths must be nonempty");
  KernelStabilityReport report;
  report.widths = widths;
  report.rel_drift.resize(widths.size());

  parallel_for(static_cast<int>(widths.size()), threads, [&](int wi) {
    HyperParams hp_w = hp;
    hp_w.m = widths[static_cast<std::size_t>(wi)];
    hp_w.seed = stream_id(hp.seed, kStabTag, hp_w.m);
    PNNState state0 = init_pnn(static_cast<int>(ds.d()), hp_w.m, 1, hp_w, hp_w.seed);
    // The drift convention freezes epsilon at its initial draw, so the final
    // kernel is evaluated with the same draw that defined the initial one.
    const EpsilonDraw eps0 = make_eps(state0, hp_w.seed, 0, 0);
    const KernelMatrix k0 = pntk_mu(state0, eps0, ds.features);
    const TrainTrace trace = train_from(std::move(state0), ds, hp_w);
    const KernelMatrix kt = pntk_mu(trace.final_state, eps0, ds.features);
    report.rel_drift[static_cast<std::size_t>(wi)] =
        kernel_distance(kt, k0).frobenius / k0.values.norm();
  });
  return report;
}

BoundReport certify_state(const PNNState& state, const Dataset& train_ds,
                          const HyperParams& hp, double delta_mc,
                          const Dataset* test_ds) {
  const int n = static_cast<int>(train_ds.n());
  const double sigma0 = softplus(hp.rho0);

  BoundReport report;
  report.config = hp;
  const CertifiedRisk cert = mc_risk_certified(state, train_ds, hp.mc_cert, delta_mc,
                                               stream_id(hp.seed, kCertTag));
  report.risk_mc = cert.risk_mc;
  report.risk_mc_upper = cert.risk_mc_upper;
  report.kl_value = kl_gaussian_diag(state);
  report.kl_bound = pb_kl_bound(report.risk_mc_upper, report.kl_value, n, hp.delta);
  report.lambda_bound =
      pb_lambda_bound_min(report.risk_mc_upper, report.kl_value, n, hp.delta);

  const KernelMatrix k = limiting_ntk(train_ds.features, 1.0);
  report.ntk_pb_bound =
      ntk_pacbayes_bound(k, train_ds.labels, hp.lambda, sigma0, n, hp.delta);
  report.ntk_rad_bound =
      ntk_rademacher_bound(k, train_ds.labels, hp.lambda, sigma0, n, hp.delta);
  report.ntk_pb_delta_term = ntk_pb_delta_term(n, hp.delta);
  report.ntk_rad_delta_term = ntk_rad_delta_term(n, hp.delta, k.lambda_min);
  report.pa_score = pa_score(k, train_ds.labels, hp.lambda, sigma0, n);

  if (test_ds != nullptr) {
    const CertifiedRisk test = mc_risk_certified(state, *test_ds, hp.mc_cert, delta_mc,
                                                 stream_id(hp.seed, kTestTag));
    report.test_error = test.risk_mc;
  }
  return report;
}

ValidityReport run_bound_validity(int runs, int n, int d, HyperParams hp, double margin,
                                  int threads) {
  if (runs < 1) throw invalid_input("bound validity: runs must be >= 1");
  ValidityReport report;
  report.runs = runs;
  report.kl_bounds.resize(runs);
  report.lambda_bounds.resize(runs);
  report.test_errors.resize(runs);

  parallel_for(runs, threads, [&](int k) {
    HyperParams hp_k = hp;
    hp_k.seed = stream_id(hp.seed, kValidTag, static_cast<std::uint64_t>(k));
    const Dataset pool = synth_two_class(2 * n, d, margin, hp_k.seed);
    const Dataset train_ds = slice_rows(pool, 0, n);
    const Dataset test_ds = slice_rows(pool, n, n);
    const TrainTrace trace = train(train_ds, hp_k);
    const BoundReport rep = certify_state(trace.final_state, train_ds, hp_k, 0.01,
                                          &test_ds);
    report.kl_bounds[static_cast<std::size_t>(k)] = rep.kl_bound;
    report.lambda_bounds[static_cast<std::size_t>(k)] = rep.lambda_bound;
    report.test_errors[static_cast<std::size_t>(k)] = rep.test_error;
  });
  for (int k = 0; k < runs; ++k)
    if (report.kl_bounds[static_cast<std::size_t>(k)] >=
        report.test_errors[static_cast<std::size_t>(k)])
      ++report.holds;
  return report;
}

std::vector<double> default_rho0_grid(int budget) {
  std::vector<double> grid = {0.03, 0.05, 0.07, 0.09, 0.1, 0.3, 0.5, 0.7};
  if (budget > 0 && budget < static_cast<int>(grid.size()))
    grid.resize(static_cast<std::size_t>(budget));
  return grid;
}

std::vector<double> default_lambda_grid(int budget) {
  std::vector<double> grid = {0.0001, 0.0005, 0.001, 0.005, 0.01, 0.05, 0.1, 0.5, 1.0};
  if (budget > 0 && budget < static_cast<int>(grid.size()))
    grid.resize(static_cast<std::size_t>(budget));
  return grid;
}

std::vector<double> default_prior_fracs(int budget) {
  std::vector<double> grid = {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  if (budget > 0 && budget < static_cast<int>(grid.size()))
    grid.resize(static_cast<std::size_t>(budget));
  return grid;
}

GridSearchResult run_grid_search(const Dataset& pool,
                                 const std::vector<double>& rho0_grid,
                                 const std::vector<double>& lambda_grid,
                                 const std::vector<double>& prior_fracs,
                                 HyperParams hp_base, const Dataset* test_ds,
                                 int threads) {
  if (rho0_grid.empty() || lambda_grid.empty() || prior_fracs.empty())
    throw invalid_input("grid search: grids must be nonempty");

  struct Coord {
    double rho0, lambda, pf;
  };
  std::vector<Coord> coords;
  for (double r : rho0_grid)
    for (double l : lambda_grid)
      for (double p : prior_fracs) coords.push_back({r, l, p});
  const int n_points = static_cast<int>(coords.size());

  GridSearchResult result;
  result.points.resize(coords.size());

  // Training-free pass: one fixed per-class subsample of the pool carries the
  // label geometry; each coordinate is scored against its own posterior count
  // so the prior fraction prices in exactly as it does in the bound.
  const auto pa_start = std::chrono::steady_clock::now();
  {
    const Eigen::Index n_classes = pool.c() == 1 ? 2 : pool.c();
    const Eigen::Index per_class = 64;
    std::vector<Eigen::Index> chosen;
    std::vector<Eigen::Index> class_counts(static_cast<std::size_t>(n_classes), 0);
    for (Eigen::Index i = 0; i < pool.n(); ++i) {
      Eigen::Index cls;
      if (pool.c() == 1) {
        cls = pool.labels(i, 0) > 0.0 ? 0 : 1;
      } else {
        pool.labels.row(i).maxCoeff(&cls);
      }
      if (class_counts[static_cast<std::size_t>(cls)] < per_class) {
        ++class_counts[static_cast<std::size_t>(cls)];
        chosen.push_back(i);
      }
    }
    Matrix x_sub(static_cast<Eigen::Index>(chosen.size()), pool.d());
    Matrix y_sub(static_cast<Eigen::Index>(chosen.size()), pool.c());
    for (std::size_t i = 0; i < chosen.size(); ++i) {
      x_sub.row(static_cast<Eigen::Index>(i)) = pool.features.row(chosen[i]);
      y_sub.row(static_cast<Eigen::Index>(i)) = pool.labels.row(chosen[i]);
    }
    const KernelMatrix k_sub = limiting_ntk(x_sub, 1.0);
    for (int i = 0; i < n_points; ++i) {
      const auto& c = coords[static_cast<std::size_t>(i)];
      const auto n_prior = static_cast<Eigen::Index>(
          std::floor(c.pf * static_cast<double>(pool.n())));
      const int n_post = static_cast<int>(pool.n() - n_prior);
      result.points[static_cast<std::size_t>(i)].report.pa_score =
          pa_score(k_sub, y_sub, c.lambda, softplus(c.rho0), n_post);
    }
  }
  result.wall_time_pa = elapsed_seconds(pa_start);

  const auto brute_start = std::chrono::steady_clock::now();
  parallel_for(n_points, threads, [&](int i) {
    const auto& c = coords[static_cast<std::size_t>(i)];
    HyperParams hp = hp_base;
    hp.rho0 = c.rho0;
    hp.lambda = c.lambda;
    hp.prior_fraction = c.pf;

    SplitSpec spec;
    spec.prior_fraction = c.pf;
    spec.seed = hp_base.seed;
    auto [prior_ds, post_ds] = split(pool, spec);

    PNNState state =
        prior_ds.n() > 0
            ? pretrain_prior(prior_ds, hp, 1, static_cast<int>(pool.c()))
            : init_pnn(static_cast<int>(pool.d()), hp.m, 1, hp, hp.seed, {},
                       static_cast<int>(pool.c()));
    const TrainTrace trace = train_from(std::move(state), post_ds, hp);

    const double pa = result.points[static_cast<std::size_t>(i)].report.pa_score;
    BoundReport report = certify_state(trace.final_state, post_ds, hp, 0.01, test_ds);
    report.pa_score = pa;  // the grid ranks by the subsample proxy above
    result.points[static_cast<std::size_t>(i)] = {c.rho0, c.lambda, c.pf, report};
  });
  result.wall_time_brute = elapsed_seconds(brute_start);

  std::vector<double> pa_list, bound_list;
  for (const auto& p : result.points) {
    pa_list.push_back(p.report.pa_score);
    bound_list.push_back(p.report.lambda_bound);
  }
  result.tau_pa_vs_bound = kendall_tau(pa_list, bound_list);

  std::size_t best_pa = 0, best_bound = 0;
  for (std::size_t i = 1; i < result.points.size(); ++i) {
    if (result.points[i].report.pa_score < result.points[best_pa].report.pa_score)
      best_pa = i;
    if (result.points[i].report.lambda_bound <
        result.points[best_bound].report.lambda_bound)
      best_bound = i;
  }
  result.best_by_pa = result.points[best_pa];
  result.best_by_bound = result.points[best_bound];
  return result;
}

}  // namespace pntk
