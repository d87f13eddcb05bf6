#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pntk/experiments.hpp"
#include "pntk/krr.hpp"
#include "pntk/serialize.hpp"
#include "pntk/threadpool.hpp"

namespace fs = std::filesystem;
using namespace pntk;

namespace {

// Exit codes: 0 ok, 2 a built-in check failed, 1 hard error.
int g_rc = 0;

bool check(bool ok, const std::string& what) {
  std::cout << (ok ? "[PASS] " : "[FAIL] ") << what << '\n';
  if (!ok) g_rc = 2;
  return ok;
}

void ensure_dir(const std::string& dir) {
  if (!dir.empty()) fs::create_directories(dir);
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

// One row per width: a leading width column then one column per series.
void write_width_csv(const std::string& path, const std::vector<int>& widths,
                     const std::vector<std::string>& names,
                     const std::vector<const std::vector<double>*>& cols) {
  std::ofstream out(path);
  if (!out) throw format_error("cannot open for writing: " + path);
  out << "m";
  for (const auto& name : names) out << ',' << name;
  out << '\n';
  char buf[64];
  for (std::size_t i = 0; i < widths.size(); ++i) {
    out << widths[i];
    for (const auto* col : cols) {
      std::snprintf(buf, sizeof(buf), "%.17g", (*col)[i]);
      out << ',' << buf;
    }
    out << '\n';
  }
}

void write_matrix_csv(const Matrix& m, const std::string& path,
                      const std::string& prefix) {
  std::ofstream out(path);
  if (!out) throw format_error("cannot open for writing: " + path);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    out << (j ? "," : "") << prefix << j;
  out << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic NTK toolkit: training, certification, and the "
               "experiment suite"};
  app.require_subcommand(1);
  int threads = default_threads();
  app.add_option("--threads", threads, "Worker threads for sweeps");

  // ---------------------------------------------------------------- gen-data
  struct {
    int n = 256, d = 16, classes = 2;
    double margin = 0.5;
    std::uint64_t seed = 1;
    std::string out;
  } gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Write a synthetic dataset CSV");
  gen_cmd->add_option("--n", gen.n, "Number of rows");
  gen_cmd->add_option("--d", gen.d, "Input dimension");
  gen_cmd->add_option("--classes", gen.classes, "Number of classes");
  gen_cmd->add_option("--margin", gen.margin, "Cluster separation in (0,1)");
  gen_cmd->add_option("--seed", gen.seed, "Generator seed");
  gen_cmd->add_option("--out", gen.out, "Output CSV path")->required();
  gen_cmd->callback([&] {
    const Dataset ds = gen.classes == 2
                           ? synth_two_class(gen.n, gen.d, gen.margin, gen.seed)
                           : synth_classes(gen.n, gen.d, gen.classes, gen.margin,
                                           gen.seed);
    save_csv(ds, gen.out);
    std::cout << "wrote " << ds.n() << " rows (" << ds.d() << " features, "
              << ds.c() << " label column" << (ds.c() == 1 ? "" : "s") << ") to "
              << gen.out << '\n';
  });

  // ------------------------------------------------------------------- train
  struct {
    std::string data, out_dir;
    int label_cols = 1, depth = 1;
    HyperParams hp;
  } tr;
  auto* tr_cmd = app.add_subcommand("train", "Train a probabilistic network");
  tr_cmd->add_option("--data", tr.data, "Training CSV")->required();
  tr_cmd->add_option("--label-cols", tr.label_cols, "Trailing label columns");
  tr_cmd->add_option("--depth", tr.depth, "Hidden layers");
  tr_cmd->add_option("--m", tr.hp.m, "Width");
  tr_cmd->add_option("--lambda", tr.hp.lambda, "KL penalty weight");
  tr_cmd->add_option("--rho0", tr.hp.rho0, "Prior scale parameter");
  tr_cmd->add_option("--sigma-hat", tr.hp.sigma_hat, "Init std of the means");
  tr_cmd->add_option("--eta", tr.hp.eta, "Learning rate");
  tr_cmd->add_option("--steps", tr.hp.steps, "Gradient steps");
  tr_cmd->add_option("--mc-train", tr.hp.mc_train, "Draws per step");
  tr_cmd->add_option("--prior-fraction", tr.hp.prior_fraction,
                     "Share of data used to pretrain the prior");
  tr_cmd->add_option("--seed", tr.hp.seed, "Run seed");
  tr_cmd->add_flag("--freeze-sigma,!--no-freeze-sigma", tr.hp.freeze_sigma,
                   "Keep sigma fixed during training");
  tr_cmd->add_option("--out-dir", tr.out_dir, "Output directory")->required();
  tr_cmd->callback([&] {
    const Dataset full = load_csv(tr.data, tr.label_cols);
    const int out_dim = static_cast<int>(full.c());
    ensure_dir(tr.out_dir);

    TrainTrace trace;
    if (tr.hp.prior_fraction > 0.0) {
      SplitSpec spec{tr.hp.prior_fraction, tr.hp.seed};
      auto [prior_ds, post_ds] = split(full, spec);
      PNNState state = pretrain_prior(prior_ds, tr.hp, tr.depth, out_dim);
      trace = train_from(std::move(state), post_ds, tr.hp);
    } else {
      trace = train(full, tr.hp, tr.depth, out_dim);
    }

    save_trace_csv(trace, join(tr.out_dir, "trace.csv"));
    save_state(trace.final_state, join(tr.out_dir, "state.bin"));
    ordered_json summary;
    const auto& last = trace.records.back();
    summary["final_objective"] = last.objective;
    summary["final_risk"] = last.risk;
    summary["final_kl"] = last.kl;
    summary["config"] = to_json(tr.hp);
    write_json(summary, join(tr.out_dir, "summary.json"));
    std::cout << "final objective " << last.objective << ", risk " << last.risk
              << ", kl " << last.kl << "; artifacts in " << tr.out_dir << '\n';
  });

  // --------------------------------------------------------------------- krr
  struct {
    std::string data, test, out;
    int label_cols = 1;
    double lambda = 0.01, rho0 = 0.05;
  } kr;
  auto* kr_cmd = app.add_subcommand(
      "krr", "Kernel ridge regression against the limiting kernel");
  kr_cmd->add_option("--data", kr.data, "Training CSV")->required();
  kr_cmd->add_option("--label-cols", kr.label_cols, "Trailing label columns");
  kr_cmd->add_option("--test", kr.test, "Optional CSV of points to predict at");
  kr_cmd->add_option("--lambda", kr.lambda, "KL penalty weight");
  kr_cmd->add_option("--rho0", kr.rho0, "Prior scale parameter");
  kr_cmd->add_option("--out", kr.out, "Predictions CSV path")->required();
  kr_cmd->callback([&] {
    const Dataset train_ds = load_csv(kr.data, kr.label_cols);
    const double sigma0 = softplus(kr.rho0);
    const double ridge = kr.lambda / (sigma0 * sigma0);
    const KernelMatrix k = limiting_ntk(train_ds.features, 1.0);
    const KRRModel model = krr_fit(k, train_ds.labels, ridge, train_ds.features);
    Matrix x_eval = train_ds.features;
    if (!kr.test.empty()) x_eval = load_csv(kr.test, kr.label_cols).features;
    const Matrix preds = krr_predict(model, x_eval);
    write_matrix_csv(preds, kr.out, "pred");
    std::cout << "ridge " << ridge << ", wrote " << preds.rows()
              << " predictions to " << kr.out << '\n';
  });

  // ----------------------------------------------------------------- certify
  struct {
    std::string data, test, state, out;
    int label_cols = 1, depth = 1;
    HyperParams hp;
  } ce;
  auto* ce_cmd = app.add_subcommand("certify",
                                    "Train (or load) a posterior and emit its "
                                    "certificate report");
  ce_cmd->add_option("--data", ce.data, "Training CSV")->required();
  ce_cmd->add_option("--label-cols", ce.label_cols, "Trailing label columns");
  ce_cmd->add_option("--test", ce.test, "Optional held-out CSV");
  ce_cmd->add_option("--state", ce.state, "Skip training, certify this state file");
  ce_cmd->add_option("--depth", ce.depth, "Hidden layers");
  ce_cmd->add_option("--m", ce.hp.m, "Width");
  ce_cmd->add_option("--lambda", ce.hp.lambda, "KL penalty weight");
  ce_cmd->add_option("--rho0", ce.hp.rho0, "Prior scale parameter");
  ce_cmd->add_option("--eta", ce.hp.eta, "Learning rate");
  ce_cmd->add_option("--steps", ce.hp.steps, "Gradient steps");
  ce_cmd->add_option("--mc-train", ce.hp.mc_train, "Draws per step");
  ce_cmd->add_option("--mc-cert", ce.hp.mc_cert, "Posterior draws for the certificate");
  ce_cmd->add_option("--delta", ce.hp.delta, "Certificate confidence");
  ce_cmd->add_option("--prior-fraction", ce.hp.prior_fraction,
                     "Share of data used to pretrain the prior");
  ce_cmd->add_option("--seed", ce.hp.seed, "Run seed");
  ce_cmd->add_flag("--freeze-sigma,!--no-freeze-sigma", ce.hp.freeze_sigma,
                   "Keep sigma fixed during training");
  ce_cmd->add_option("--out", ce.out, "Report JSON path")->required();
  ce_cmd->callback([&] {
    const Dataset full = load_csv(ce.data, ce.label_cols);
    const int out_dim = static_cast<int>(full.c());
    Dataset test_ds;
    if (!ce.test.empty()) test_ds = load_csv(ce.test, ce.label_cols);

    Dataset post_ds = full;
    PNNState state;
    if (!ce.state.empty()) {
      state = load_state(ce.state);
    } else if (ce.hp.prior_fraction > 0.0) {
      SplitSpec spec{ce.hp.prior_fraction, ce.hp.seed};
      auto [prior_ds, rest] = split(full, spec);
      post_ds = std::move(rest);
      PNNState prior_state = pretrain_prior(prior_ds, ce.hp, ce.depth, out_dim);
      state = train_from(std::move(prior_state), post_ds, ce.hp).final_state;
    } else {
      state = train(full, ce.hp, ce.depth, out_dim).final_state;
    }

    const BoundReport report = certify_state(
        state, post_ds, ce.hp, 0.01, ce.test.empty() ? nullptr : &test_ds);
    write_json(to_json(report), ce.out);
    std::cout << "risk_mc " << report.risk_mc << " (upper " << report.risk_mc_upper
              << "), kl " << report.kl_value << ", kl_bound " << report.kl_bound
              << ", lambda_bound " << report.lambda_bound;
    if (report.test_error >= 0.0) std::cout << ", test_error " << report.test_error;
    std::cout << "; report at " << ce.out << '\n';
  });

  // -------------------------------------------------------------- ntk-verify
  struct {
    int n = 16, d = 8, seeds = 20;
    std::vector<int> widths = {64, 256, 1024, 4096};
    std::uint64_t seed = 1;
    std::string out, out_dir;
    bool json = true, csv = false;
  } nv;
  auto* nv_cmd = app.add_subcommand(
      "ntk-verify", "Kernel concentration sweep against the limiting kernel");
  nv_cmd->add_option("--n", nv.n, "Rows");
  nv_cmd->add_option("--d", nv.d, "Input dimension");
  nv_cmd->add_option("--widths", nv.widths, "Widths, comma separated")
      ->delimiter(',');
  nv_cmd->add_option("--seeds", nv.seeds, "Seeds per width");
  nv_cmd->add_option("--seed", nv.seed, "Base seed");
  nv_cmd->add_option("--out", nv.out, "Report JSON path");
  nv_cmd->add_option("--out-dir", nv.out_dir, "Directory for report files");
  nv_cmd->add_flag("--json,!--no-json", nv.json, "Write report.json");
  nv_cmd->add_flag("--csv", nv.csv, "Write report.csv");
  nv_cmd->callback([&] {
    const ConcentrationReport report =
        run_ntk_concentration(nv.n, nv.d, nv.widths, nv.seeds, nv.seed, threads);
    for (std::size_t i = 0; i < report.widths.size(); ++i)
      std::cout << "m=" << report.widths[i] << "  mu dist "
                << report.median_mu_dist[i] << "  sigma dist "
                << report.median_sigma_dist[i] << "  cross "
                << report.median_cross_dist[i] << '\n';
    if (!nv.out.empty()) write_json(to_json(report), nv.out);
    if (!nv.out_dir.empty()) {
      ensure_dir(nv.out_dir);
      if (nv.json) write_json(to_json(report), join(nv.out_dir, "report.json"));
      if (nv.csv)
        write_width_csv(join(nv.out_dir, "report.csv"), report.widths,
                        {"median_mu_dist", "median_sigma_dist", "median_cross_dist"},
                        {&report.median_mu_dist, &report.median_sigma_dist,
                         &report.median_cross_dist});
    }
    if (report.slope_available) {
      std::cout << "slope_mu " << report.slope_mu << ", slope_sigma "
                << report.slope_sigma << '\n';
      check(std::abs(report.slope_mu + 0.5) <= 0.15,
            "mu concentration slope within 0.15 of -0.5");
      check(std::abs(report.slope_sigma + 0.5) <= 0.15,
            "sigma concentration slope within 0.15 of -0.5");
    }
  });

  // ------------------------------------------------------------- drift-study
  struct {
    int depth = 3, n = 128, d = 16, steps = 2000;
    std::vector<int> widths = {64, 128, 256, 512, 1024};
    double margin = 0.2;
    std::string mnist_images, mnist_labels, out_dir;
    bool json = true, csv = false;
    HyperParams hp;
  } dr;
  auto* dr_cmd = app.add_subcommand(
      "drift-study", "Relative weight drift across widths for a deep net");
  dr.hp.lambda = 0.001;
  dr.hp.rho0 = -3.0;
  dr.hp.eta = 0.25;  // deep nets need a smaller step than the depth-1 default
  dr_cmd->add_option("--depth", dr.depth, "Hidden layers (>= 2)");
  dr_cmd->add_option("--widths", dr.widths, "Widths, comma separated")
      ->delimiter(',');
  dr_cmd->add_option("--n", dr.n, "Rows (synthetic or IDX subset)");
  dr_cmd->add_option("--d", dr.d, "Input dimension (synthetic)");
  dr_cmd->add_option("--margin", dr.margin, "Cluster separation (synthetic)");
  dr_cmd->add_option("--steps", dr.steps, "Gradient steps");
  dr_cmd->add_option("--lambda", dr.hp.lambda, "KL penalty weight");
  dr_cmd->add_option("--rho0", dr.hp.rho0, "Prior scale parameter");
  dr_cmd->add_option("--eta", dr.hp.eta, "Learning rate");
  dr_cmd->add_option("--seed", dr.hp.seed, "Run seed");
  dr_cmd->add_option("--mnist-images", dr.mnist_images, "IDX image file");
  dr_cmd->add_option("--mnist-labels", dr.mnist_labels, "IDX label file");
  dr_cmd->add_option("--out-dir", dr.out_dir, "Directory for report files");
  dr_cmd->add_flag("--json,!--no-json", dr.json, "Write report.json");
  dr_cmd->add_flag("--csv", dr.csv, "Write report.csv");
  dr_cmd->callback([&] {
    Dataset ds;
    if (!dr.mnist_images.empty()) {
      if (dr.mnist_labels.empty())
        throw invalid_input("drift-study: --mnist-labels required with images");
      ds = load_idx(dr.mnist_images, dr.mnist_labels,
                    static_cast<std::size_t>(dr.n));
    } else {
      ds = synth_classes(dr.n, dr.d, 10, dr.margin, dr.hp.seed);
    }
    const DriftStudyReport report =
        run_drift_study(dr.depth, dr.widths, ds, dr.hp, dr.steps, threads);
    if (!dr.out_dir.empty()) {
      ensure_dir(dr.out_dir);
      if (dr.json) write_json(to_json(report), join(dr.out_dir, "report.json"));
      if (dr.csv) {
        std::ofstream out(join(dr.out_dir, "report.csv"));
        if (!out) throw format_error("cannot open report.csv for writing");
        out << "m,layer,param,rel_frobenius\n";
        char buf[64];
        for (const auto& rec : report.records) {
          std::snprintf(buf, sizeof(buf), "%.17g", rec.rel_frobenius);
          out << rec.m << ',' << rec.layer << ',' << rec.param << ',' << buf
              << '\n';
        }
      }
    }
    for (const auto& s : report.slopes)
      std::cout << s.layer << ' ' << s.param << " slope " << s.slope << '\n';
    for (const auto& s : report.slopes) {
      if (s.param != "mu") continue;
      if (s.layer == "hidden")
        check(std::abs(s.slope + 1.0) <= 0.25,
              "hidden mu drift slope within 0.25 of -1.0");
      else
        check(std::abs(s.slope + 0.5) <= 0.15,
              s.layer + " mu drift slope within 0.15 of -0.5");
    }
  });

  // -------------------------------------------------------------- grad-norms
  struct {
    int n = 32, d = 16;
    std::vector<int> widths = {256, 1024, 4096};
    double margin = 0.1;
    std::string out_dir;
    bool json = true, csv = false;
    HyperParams hp;
  } gn;
  auto* gn_cmd = app.add_subcommand(
      "grad-norms", "Mean mu and sigma gradient norms across widths");
  gn.hp.rho0 = -6.0;
  gn.hp.steps = 500;
  gn.hp.mc_train = 16;
  gn.hp.freeze_sigma = false;
  gn_cmd->add_option("--widths", gn.widths, "Widths, comma separated")
      ->delimiter(',');
  gn_cmd->add_option("--n", gn.n, "Rows");
  gn_cmd->add_option("--d", gn.d, "Input dimension");
  gn_cmd->add_option("--margin", gn.margin, "Cluster separation");
  gn_cmd->add_option("--steps", gn.hp.steps, "Gradient steps");
  gn_cmd->add_option("--mc-train", gn.hp.mc_train, "Draws per step");
  gn_cmd->add_option("--rho0", gn.hp.rho0, "Prior scale parameter");
  gn_cmd->add_option("--lambda", gn.hp.lambda, "KL penalty weight");
  gn_cmd->add_option("--eta", gn.hp.eta, "Learning rate");
  gn_cmd->add_option("--seed", gn.hp.seed, "Run seed");
  gn_cmd->add_option("--out-dir", gn.out_dir, "Directory for report files");
  gn_cmd->add_flag("--json,!--no-json", gn.json, "Write report.json");
  gn_cmd->add_flag("--csv", gn.csv, "Write report.csv");
  gn_cmd->callback([&] {
    const Dataset ds = synth_two_class(gn.n, gn.d, gn.margin, gn.hp.seed);
    const GradNormReport report =
        run_grad_norm_study(ds, gn.hp, gn.widths, threads);
    if (!gn.out_dir.empty()) {
      ensure_dir(gn.out_dir);
      if (gn.json) write_json(to_json(report), join(gn.out_dir, "report.json"));
      if (gn.csv)
        write_width_csv(join(gn.out_dir, "report.csv"), report.widths,
                        {"mean_grad_mu", "mean_grad_sigma", "mean_ratio"},
                        {&report.mean_grad_mu, &report.mean_grad_sigma,
                         &report.mean_ratio});
    }
    for (std::size_t i = 0; i < report.widths.size(); ++i)
      std::cout << "m=" << report.widths[i] << "  |grad mu| "
                << report.mean_grad_mu[i] << "  |grad sigma| "
                << report.mean_grad_sigma[i] << "  ratio " << report.mean_ratio[i]
                << '\n';
    check(report.mean_ratio.back() < 0.1,
          "sigma/mu gradient ratio below 0.1 at the largest width");
  });

  // --------------------------------------------------------------- krr-equiv
  struct {
    int n = 32, d = 16, n_test = 24;
    std::vector<int> widths = {1024, 2048, 4096, 8192};
    double margin = 0.1;
    std::string out_dir;
    bool json = true, csv = false;
    HyperParams hp;
  } ke;
  auto* ke_cmd = app.add_subcommand(
      "krr-equiv", "Trained posterior mean against the kernel ridge limit");
  ke.hp.lambda = 0.01;
  ke.hp.rho0 = -3.0;
  ke.hp.steps = 5000;
  ke.hp.mc_train = 4;
  ke_cmd->add_option("--widths", ke.widths, "Widths, comma separated")
      ->delimiter(',');
  ke_cmd->add_option("--n", ke.n, "Training rows");
  ke_cmd->add_option("--n-test", ke.n_test, "Held-out rows");
  ke_cmd->add_option("--d", ke.d, "Input dimension");
  ke_cmd->add_option("--margin", ke.margin, "Cluster separation");
  ke_cmd->add_option("--lambda", ke.hp.lambda, "KL penalty weight");
  ke_cmd->add_option("--rho0", ke.hp.rho0, "Prior scale parameter");
  ke_cmd->add_option("--steps", ke.hp.steps, "Gradient steps");
  ke_cmd->add_option("--mc-train", ke.hp.mc_train, "Draws per step");
  ke_cmd->add_option("--eta", ke.hp.eta, "Learning rate");
  ke_cmd->add_option("--seed", ke.hp.seed, "Run seed");
  ke_cmd->add_option("--out-dir", ke.out_dir, "Directory for report files");
  ke_cmd->add_flag("--json,!--no-json", ke.json, "Write report.json");
  ke_cmd->add_flag("--csv", ke.csv, "Write report.csv");
  ke_cmd->callback([&] {
    const KrrEquivalenceReport report = run_krr_equivalence(
        ke.n, ke.d, ke.widths, ke.hp, ke.n_test, ke.margin, threads);
    if (!ke.out_dir.empty()) {
      ensure_dir(ke.out_dir);
      if (ke.json) write_json(to_json(report), join(ke.out_dir, "report.json"));
      if (ke.csv)
        write_width_csv(join(ke.out_dir, "report.csv"), report.widths,
                        {"max_abs_error", "init_mean_abs"},
                        {&report.max_abs_error, &report.init_mean_abs});
    }
    for (std::size_t i = 0; i < report.widths.size(); ++i)
      std::cout << "m=" << report.widths[i] << "  max err "
                << report.max_abs_error[i] << "  init |mean| "
                << report.init_mean_abs[i] << '\n';
    check(report.max_abs_error.back() <= 0.1,
          "held-out gap to the kernel ridge limit at most 0.1 at the largest "
          "width");
    int inversions = 0;
    for (std::size_t i = 1; i < report.max_abs_error.size(); ++i)
      if (report.max_abs_error[i] > report.max_abs_error[i - 1]) ++inversions;
    check(inversions <= 1, "gap decreases with width (at most one inversion)");
  });

  // ------------------------------------------------------------- grid-search
  struct {
    std::string data, out_dir;
    int label_cols = 1, n = 224, d = 16, held_out = 64;
    double margin = 0.5;
    std::uint64_t data_seed = 42;
    int budget = 0, budget_rho0 = 4, budget_lambda = 4, budget_pf = 2;
    HyperParams hp;
  } gs;
  auto* gs_cmd = app.add_subcommand(
      "grid-search", "Training-free PA ranking against brute-force certification");
  gs.hp.m = 256;
  gs.hp.steps = 300;
  gs.hp.mc_train = 2;
  gs.hp.mc_cert = 2000;
  gs_cmd->add_option("--data", gs.data, "Pool CSV (synthetic pool otherwise)");
  gs_cmd->add_option("--label-cols", gs.label_cols, "Trailing label columns");
  gs_cmd->add_option("--n", gs.n, "Synthetic pool size");
  gs_cmd->add_option("--d", gs.d, "Synthetic input dimension");
  gs_cmd->add_option("--margin", gs.margin, "Synthetic cluster separation");
  gs_cmd->add_option("--data-seed", gs.data_seed, "Synthetic pool seed");
  gs_cmd->add_option("--held-out", gs.held_out, "Rows reserved for test error");
  gs_cmd->add_option("--budget", gs.budget,
                     "Truncate every default grid to this many values");
  gs_cmd->add_option("--budget-rho0", gs.budget_rho0, "Prior-scale grid budget");
  gs_cmd->add_option("--budget-lambda", gs.budget_lambda, "Penalty grid budget");
  gs_cmd->add_option("--budget-pf", gs.budget_pf, "Prior-fraction grid budget");
  gs_cmd->add_option("--m", gs.hp.m, "Width");
  gs_cmd->add_option("--steps", gs.hp.steps, "Gradient steps per phase");
  gs_cmd->add_option("--mc-train", gs.hp.mc_train, "Draws per step");
  gs_cmd->add_option("--mc-cert", gs.hp.mc_cert, "Posterior draws per certificate");
  gs_cmd->add_option("--delta", gs.hp.delta, "Certificate confidence");
  gs_cmd->add_option("--eta", gs.hp.eta, "Learning rate");
  gs_cmd->add_option("--seed", gs.hp.seed, "Run seed");
  gs_cmd->add_option("--out-dir", gs.out_dir, "Directory for grid.csv/grid.json");
  gs_cmd->callback([&] {
    Dataset full = gs.data.empty()
                       ? synth_two_class(gs.n, gs.d, gs.margin, gs.data_seed)
                       : load_csv(gs.data, gs.label_cols);
    if (gs.held_out < 0 || gs.held_out >= full.n())
      throw invalid_input("grid-search: held-out size out of range");
    Dataset pool, test_ds;
    const Eigen::Index n_pool = full.n() - gs.held_out;
    pool.features = full.features.topRows(n_pool);
    pool.labels = full.labels.topRows(n_pool);
    pool.ids.assign(full.ids.begin(), full.ids.begin() + n_pool);
    test_ds.features = full.features.bottomRows(gs.held_out);
    test_ds.labels = full.labels.bottomRows(gs.held_out);
    test_ds.ids.assign(full.ids.begin() + n_pool, full.ids.end());

    const int b_rho0 = gs.budget > 0 ? gs.budget : gs.budget_rho0;
    const int b_lambda = gs.budget > 0 ? gs.budget : gs.budget_lambda;
    const int b_pf = gs.budget > 0 ? gs.budget : gs.budget_pf;
    const GridSearchResult result = run_grid_search(
        pool, default_rho0_grid(b_rho0), default_lambda_grid(b_lambda),
        default_prior_fracs(b_pf), gs.hp,
        gs.held_out > 0 ? &test_ds : nullptr, threads);

    if (!gs.out_dir.empty()) {
      ensure_dir(gs.out_dir);
      write_grid_csv(result, join(gs.out_dir, "grid.csv"));
      write_json(to_json(result), join(gs.out_dir, "grid.json"));
    }
    std::cout << result.points.size() << " grid points; tau "
              << result.tau_pa_vs_bound << "; proxy pass " << result.wall_time_pa
              << "s vs brute " << result.wall_time_brute << "s\n";
    auto show = [](const char* tag, const GridPoint& p) {
      std::cout << tag << ": rho0 " << p.rho0 << ", lambda " << p.lambda
                << ", prior_fraction " << p.prior_fraction << ", bound "
                << p.report.lambda_bound;
      if (p.report.test_error >= 0.0)
        std::cout << ", test_error " << p.report.test_error;
      std::cout << '\n';
    };
    show("best by proxy", result.best_by_pa);
    show("best by bound", result.best_by_bound);
    check(result.tau_pa_vs_bound > 0.5,
          "proxy ranking agrees with the certified bound (tau > 0.5)");
    const double gap = result.best_by_pa.report.lambda_bound -
                       result.best_by_bound.report.lambda_bound;
    check(gap <= 0.05, "proxy pick within 0.05 bound of the bound pick");
    check(result.wall_time_pa < result.wall_time_brute / 5.0,
          "proxy pass at least five times faster than brute force");
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return g_rc;
}
