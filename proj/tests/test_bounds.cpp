#include <doctest.h>

#include <cmath>
#include <vector>

#include "pntk/bounds.hpp"
#include "pntk/dataset.hpp"
#include "pntk/kernel.hpp"
#include "pntk/pnn.hpp"

#include "oracles.hpp"

using namespace pntk;

namespace {

// Width-2 depth-1 net that classifies e1 -> +1 and e2 -> -1 deterministically
// (sigma is softplus(-40), eleven orders of magnitude below the activation
// margins, so no posterior draw can flip a sign).
PNNState perfect_classifier(Dataset& ds) {
  ds.features = Matrix::Identity(2, 2);
  ds.labels = Matrix(2, 1);
  ds.labels << 1.0, -1.0;
  ds.ids = {0, 1};
  HyperParams hp;
  hp.rho0 = -40.0;
  PNNState state = init_pnn(2, 2, 1, hp, 1);
  state.layers[0].mu << 1.0, -1.0, -1.0, 1.0;
  state.v << 1.0, -1.0;
  return state;
}

}  // namespace

TEST_CASE("binary_kl closed forms and frozen value") {
  CHECK(binary_kl(0.3, 0.3) == 0.0);
  CHECK(std::abs(binary_kl(0.0, 0.5) - 0.69314718055994530942) <= 1e-12);
  CHECK(std::abs(binary_kl(0.1, 0.3) - 0.11632175658600450078) <= 1e-12);
  for (double q : {0.0, 0.2, 0.5, 0.9, 1.0})
    for (double p : {0.1, 0.4, 0.8}) {
      const double v = binary_kl(q, p);
      CHECK(v >= 0.0);
      if (q != p) CHECK(v > 0.0);
    }
  CHECK_THROWS_AS(binary_kl(0.5, 0.0), invalid_input);
  CHECK_THROWS_AS(binary_kl(0.5, 1.0), invalid_input);
  CHECK_THROWS_AS(binary_kl(-0.1, 0.5), invalid_input);
}

TEST_CASE("kl_inverse boundary forms, oracle agreement, monotonicity") {
  // at budget zero the root test saturates on the rounding noise of
  // binary_kl near q_hat, a little above the nominal bisection resolution
  CHECK(std::abs(kl_inverse(0.3, 0.0) - 0.3) <= 1e-8);
  CHECK(std::abs(kl_inverse(0.0, 0.2) - (1.0 - std::exp(-0.2))) <= 2e-9);
  CHECK(std::abs(kl_inverse(0.1, 0.05) - 0.22007860110692461786) <= 2e-9);
  CHECK(std::abs(kl_inverse(0.1, 0.05) - oracles::grid_scan_kl_inverse(0.1, 0.05)) <=
        2e-6);
  CHECK(kl_inverse(0.5, 1e6) == 1.0);  // nothing below 1 satisfies the cap
  double prev = 0.0;
  for (double budget : {0.0, 0.01, 0.05, 0.2, 1.0, 3.0}) {
    const double p = kl_inverse(0.2, budget);
    CHECK(p >= prev);
    CHECK(p >= 0.2);
    prev = p;
  }
}

TEST_CASE("mc risk certificate on a deterministic perfect classifier") {
  Dataset ds;
  const PNNState state = perfect_classifier(ds);
  const CertifiedRisk small = mc_risk_certified(state, ds, 100, 0.01, 5);
  CHECK(small.risk_mc == 0.0);
  CHECK(std::abs(small.risk_mc_upper - (1.0 - std::pow(0.005, 0.01))) <= 1e-8);

  // growing the sample count drives the upper confidence value toward the
  // estimate itself
  const CertifiedRisk big = mc_risk_certified(state, ds, 200000, 0.01, 5);
  CHECK(big.risk_mc == 0.0);
  CHECK(big.risk_mc_upper < small.risk_mc_upper);
  CHECK(big.risk_mc_upper < 1e-4);
}

TEST_CASE("mc risk estimates concentrate per hoeffding") {
  const Dataset ds = synth_two_class(8, 4, 0.3, 21);
  HyperParams hp;
  hp.rho0 = 0.5;  // wide posterior so draws genuinely vary
  const PNNState state = init_pnn(4, 16, 1, hp, 3);
  const int s = 10000;
  const double est1 = mc_risk_certified(state, ds, s, 0.01, 100).risk_mc;
  const double est2 = mc_risk_certified(state, ds, s, 0.01, 200).risk_mc;
  CHECK(std::abs(est1 - est2) < 4.0 * std::sqrt(0.25 / s));
}

TEST_CASE("pb_kl_bound plug-in value and limits") {
  CHECK(std::abs(pb_kl_bound(0.0, 0.0, 100, 0.05) - 0.058155079116972268969) <= 2e-9);
  // huge n shrinks the budget so the bound hugs the risk
  const double near = pb_kl_bound(0.3, 5.0, 10000000, 0.05);
  CHECK(near >= 0.3);
  CHECK(near - 0.3 < 0.01);
  double prev = 0.0;
  for (double klv : {0.0, 1.0, 5.0, 20.0}) {
    const double b = pb_kl_bound(0.1, klv, 200, 0.05);
    CHECK(b >= prev);
    CHECK(b >= 0.1);  // never below the empirical estimate
    prev = b;
  }
}

TEST_CASE("pb_lambda_bound algebra and minimized variant") {
  const int n = 150;
  const double delta = 0.05;
  const double log_term = std::log(2.0 * std::sqrt(double(n)) / delta);

  const double at_zero = pb_lambda_bound(0.0, 0.0, n, delta, 0.8);
  CHECK(std::abs(at_zero - log_term / (n * 0.8 * 0.6)) <= 1e-15 * at_zero);

  const double risk = 0.12, klv = 3.0;
  const double at_one = pb_lambda_bound(risk, klv, n, delta, 1.0);
  const double expected = 2.0 * risk + 2.0 * (klv + log_term) / n;
  CHECK(std::abs(at_one - expected) <= 1e-14 * expected);

  CHECK(pb_lambda_bound_min(risk, klv, n, delta) <= at_one);
  CHECK_THROWS_AS(pb_lambda_bound(risk, klv, n, delta, 2.0), invalid_input);
  CHECK_THROWS_AS(pb_lambda_bound(risk, klv, n, delta, 0.0), invalid_input);
}

TEST_CASE("kl form dominates the lambda form at small risk") {
  const int n = 100;
  const double delta = 0.05;
  const double log_term = std::log(2.0 * std::sqrt(double(n)) / delta);
  for (double budget : {0.07, 0.1, 0.2, 0.3, 0.5}) {
    const double klv = budget * n - log_term;
    REQUIRE(klv >= 0.0);
    for (double risk : {0.0, 0.02, 0.05, 0.1}) {
      const double kl_form = pb_kl_bound(risk, klv, n, delta);
      const double lambda_form = pb_lambda_bound_min(risk, klv, n, delta);
      CHECK(kl_form <= lambda_form + 1e-12);
    }
  }
}

TEST_CASE("ntk bounds on the diagonal instance") {
  const KernelMatrix k(Matrix::Identity(2, 2), KernelSource::limiting_closed);
  Matrix y(2, 1);
  y << 1.0, -1.0;
  const double delta = 0.05;

  const double pb = ntk_pacbayes_bound(k, y, 1.0, 1.0, 2, delta);
  const double pb_expected = 0.5 + 0.5 + std::log(2.0 * std::sqrt(2.0) / delta) / 2.0;
  CHECK(std::abs(pb - pb_expected) <= 1e-12);

  const double rad = ntk_rademacher_bound(k, y, 1.0, 1.0, 2, delta);
  const double rad_expected = std::sqrt(0.5) + 0.5 +
                              3.0 * std::sqrt(std::log(4.0 / (1.0 * delta)) / 4.0);
  CHECK(std::abs(rad - rad_expected) <= 1e-12);

  CHECK(std::abs(pa_score(k, y, 1.0, 1.0, 2) - 1.0) <= 1e-12);

  // vanishing ridge keeps only the quadratic-form term and the delta term
  const double pb_small = ntk_pacbayes_bound(k, y, 1e-12, 1.0, 2, delta);
  const double first_only = 1.0 + ntk_pb_delta_term(2, delta);
  CHECK(std::abs(pb_small - first_only) <= 1e-6);
}

TEST_CASE("ntk bounds match the dense gauss-jordan oracle") {
  const Dataset ds = synth_two_class(6, 5, 0.4, 3);
  const KernelMatrix k = limiting_ntk(ds.features, 1.0);
  const Matrix& y = ds.labels;
  const double lam = 0.05, s0 = 0.7, delta = 0.05;
  const int n = 6;
  const double ridge = lam / (s0 * s0);

  const Matrix a = oracles::gj_solve(k.values + ridge * Matrix::Identity(n, n), y);
  const double quad = (y.transpose() * a).trace();
  const double second = ridge * a.norm() / std::sqrt(double(n));
  const double pb_star =
      quad / (n * s0 * s0) + second + std::log(2.0 * std::sqrt(double(n)) / delta) / n;
  const double rad_star =
      std::sqrt(quad / n) + second +
      3.0 * std::sqrt(std::log(2.0 * n / (k.lambda_min * delta)) / (2.0 * n));

  CHECK(std::abs(ntk_pacbayes_bound(k, y, lam, s0, n, delta) - pb_star) <= 1e-10);
  CHECK(std::abs(ntk_rademacher_bound(k, y, lam, s0, n, delta) - rad_star) <= 1e-10);

  // the two first terms are the same quadratic form in different scalings
  const double pa = pa_score(k, y, lam, s0, n);
  const double pb_first = pa - second;
  const double rad_first = ntk_rademacher_bound(k, y, lam, s0, n, delta) -
                           ntk_rad_delta_term(n, delta, k.lambda_min) - second;
  CHECK(std::abs(pb_first - rad_first * rad_first / (s0 * s0)) <= 1e-10);
}

TEST_CASE("pa score is the pac-bayes bound without its delta term") {
  const Dataset ds = synth_two_class(10, 6, 0.3, 8);
  const KernelMatrix k = limiting_ntk(ds.features, 1.0);
  const Matrix& y = ds.labels;
  for (int n : {10, 77, 500}) {
    const double lhs = pa_score(k, y, 0.02, 0.6, n);
    const double rhs =
        ntk_pacbayes_bound(k, y, 0.02, 0.6, n, 0.05) - ntk_pb_delta_term(n, 0.05);
    CHECK(std::abs(lhs - rhs) <= 1e-12);
  }

  // permuting rows of Y together with rows/cols of K changes nothing
  std::vector<int> perm{3, 1, 4, 0, 9, 2, 7, 5, 8, 6};
  Matrix kp(10, 10);
  Matrix yp(10, 1);
  for (int i = 0; i < 10; ++i) {
    yp(i, 0) = y(perm[i], 0);
    for (int j = 0; j < 10; ++j) kp(i, j) = k.values(perm[i], perm[j]);
  }
  const KernelMatrix kperm(kp, KernelSource::limiting_closed);
  CHECK(std::abs(pa_score(kperm, yp, 0.02, 0.6, 10) - pa_score(k, y, 0.02, 0.6, 10)) <=
        1e-12);
}

TEST_CASE("delta terms follow their literal rate formulas") {
  const double delta = 0.05;
  for (int n : {4, 64, 1024}) {
    const double pb_ratio =
        ntk_pb_delta_term(n, delta) * n / std::log(2.0 * std::sqrt(double(n)) / delta);
    CHECK(std::abs(pb_ratio - 1.0) <= 1e-15);
    const double lam0 = 0.11;
    const double rad_scaled = ntk_rad_delta_term(n, delta, lam0) * std::sqrt(double(n));
    const double expected = 3.0 * std::sqrt(std::log(2.0 * n / (lam0 * delta)) / 2.0);
    CHECK(std::abs(rad_scaled - expected) <= 1e-14 * expected);
  }
}

TEST_CASE("kendall tau examples, brute-force oracle, and error cases") {
  // the tau-b denominator is a product of square roots, so the tie-free
  // extremes land within an ulp of +-1 rather than exactly on them
  const std::vector<double> a{1.0, 5.0, 3.0, 2.0};
  CHECK(std::abs(kendall_tau(a, a) - 1.0) <= 1e-12);
  const std::vector<double> asc{1.0, 2.0, 3.0, 5.0}, desc{5.0, 3.0, 2.0, 1.0};
  CHECK(std::abs(kendall_tau(asc, desc) + 1.0) <= 1e-12);
  const std::vector<double> p{1.0, 2.0, 3.0, 4.0}, q{1.0, 3.0, 2.0, 4.0};
  CHECK(std::abs(kendall_tau(p, q) - 2.0 / 3.0) <= 1e-15);

  // tie handling against the explicit pair counter
  const std::vector<double> t1{1.0, 1.0, 2.0, 3.0, 2.0, 0.0};
  const std::vector<double> t2{0.0, 2.0, 2.0, 3.0, 1.0, 1.0};
  CHECK(std::abs(kendall_tau(t1, t2) - oracles::brute_kendall_tau(t1, t2)) <= 1e-15);

  CHECK_THROWS_AS(kendall_tau({1.0, 2.0}, {1.0}), invalid_input);
  CHECK_THROWS_AS(kendall_tau({1.0}, {1.0}), invalid_input);
  CHECK_THROWS_AS(kendall_tau({2.0, 2.0, 2.0}, {1.0, 2.0, 3.0}), invalid_input);
}

TEST_CASE("ntk bound rejects degenerate inputs") {
  const KernelMatrix k(Matrix::Identity(2, 2), KernelSource::limiting_closed);
  Matrix y(2, 1);
  y << 1.0, -1.0;
  CHECK_THROWS_AS(ntk_pacbayes_bound(k, y, 0.1, 0.0, 2, 0.05), invalid_input);
  CHECK_THROWS_AS(ntk_pacbayes_bound(k, y, -0.1, 1.0, 2, 0.05), invalid_input);
  Matrix rank1 = Matrix::Constant(2, 2, 0.5);
  const KernelMatrix singular(rank1, KernelSource::limiting_closed);
  CHECK_THROWS_AS(ntk_pacbayes_bound(singular, y, 0.0, 1.0, 2, 0.05), invalid_input);
  Matrix y3(3, 1);
  y3 << 1.0, 1.0, -1.0;
  CHECK_THROWS_AS(ntk_pacbayes_bound(k, y3, 0.1, 1.0, 2, 0.05), invalid_input);
}
