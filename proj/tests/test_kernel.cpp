#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "pntk/dataset.hpp"
#include "pntk/kernel.hpp"
#include "pntk/pnn.hpp"
#include "pntk/rng.hpp"

using namespace pntk;

namespace {

PNNState small_state(int d, int m, double rho0, std::uint64_t seed) {
  HyperParams hp;
  hp.rho0 = rho0;
  return init_pnn(d, m, 1, hp, seed);
}

}  // namespace

TEST_CASE("pntk_mu matches its definition on small instances") {
  SUBCASE("single input counts active units over m") {
    const Dataset ds = synth_two_class(2, 4, 0.3, 5);
    const Matrix x = ds.features.topRows(1);
    const PNNState state = small_state(4, 16, 0.1, 3);
    const EpsilonDraw eps = make_eps(state, 8, 0, 0);
    const Matrix w = state.layers[0].mu + state.layers[0].sigma.cwiseProduct(eps.eps[0]);
    int active = 0;
    for (int r = 0; r < 16; ++r)
      if (w.row(r).dot(x.row(0)) >= 0.0) ++active;
    const KernelMatrix k = pntk_mu(state, eps, x);
    CHECK(std::abs(k.values(0, 0) - x.row(0).squaredNorm() * active / 16.0) <= 1e-15);
  }

  SUBCASE("duplicated inputs produce equal entries") {
    const Dataset ds = synth_two_class(2, 4, 0.3, 5);
    Matrix x(2, 4);
    x.row(0) = ds.features.row(0);
    x.row(1) = ds.features.row(0);
    const PNNState state = small_state(4, 16, 0.1, 3);
    const EpsilonDraw eps = make_eps(state, 8, 0, 0);
    const KernelMatrix k = pntk_mu(state, eps, x);
    CHECK(k.values(0, 0) == k.values(0, 1));
    CHECK(k.values(0, 0) == k.values(1, 1));
  }

  SUBCASE("deep states are rejected") {
    HyperParams hp;
    const PNNState deep = init_pnn(4, 8, 2, hp, 1);
    const EpsilonDraw eps = make_eps(deep, 1, 0, 0);
    const Dataset ds = synth_two_class(2, 4, 0.3, 5);
    CHECK_THROWS_AS(pntk_mu(deep, eps, ds.features), invalid_input);
    CHECK_THROWS_AS(pntk_sigma(deep, eps, ds.features), invalid_input);
  }
}

TEST_CASE("empirical kernels are gram matrices of the parameter gradients") {
  const Dataset ds = synth_two_class(6, 4, 0.3, 9);
  const PNNState state = small_state(4, 32, 0.2, 7);
  const EpsilonDraw eps = make_eps(state, 12, 0, 0);

  Matrix ref_mu = Matrix::Zero(6, 6);
  Matrix ref_sigma = Matrix::Zero(6, 6);
  std::vector<ParamGrads> grads;
  for (int i = 0; i < 6; ++i)
    grads.push_back(grad_params(state, eps, ds.features.row(i).transpose()));
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      ref_mu(i, j) = grads[i].d_mu[0].cwiseProduct(grads[j].d_mu[0]).sum();
      ref_sigma(i, j) = grads[i].d_sigma[0].cwiseProduct(grads[j].d_sigma[0]).sum();
    }

  const KernelMatrix k_mu = pntk_mu(state, eps, ds.features);
  const KernelMatrix k_sigma = pntk_sigma(state, eps, ds.features);
  CHECK((k_mu.values - ref_mu).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((k_sigma.values - ref_sigma).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("pntk_sigma degenerate draws") {
  const Dataset ds = synth_two_class(4, 5, 0.3, 2);
  const PNNState state = small_state(5, 12, 0.1, 4);
  EpsilonDraw eps = make_eps(state, 3, 0, 0);

  SUBCASE("unit epsilon reproduces the mu kernel") {
    eps.eps[0].setOnes();
    const KernelMatrix k_sigma = pntk_sigma(state, eps, ds.features);
    const KernelMatrix k_mu = pntk_mu(state, eps, ds.features);
    CHECK((k_sigma.values - k_mu.values).cwiseAbs().maxCoeff() <= 1e-12);
  }

  SUBCASE("zero epsilon gives the zero matrix exactly") {
    eps.eps[0].setZero();
    const KernelMatrix k = pntk_sigma(state, eps, ds.features);
    CHECK(k.values == Matrix::Zero(4, 4));
    CHECK(k.lambda_min == 0.0);
  }
}

TEST_CASE("sigma kernel concentrates on the mu kernel at a tight posterior") {
  // At tiny sigma0 the activation pattern never flips across draws, so the
  // average over eps^2 converges to the mu kernel entrywise.
  const Dataset ds = synth_two_class(4, 6, 0.3, 8);
  const PNNState state = small_state(6, 64, -40.0, 5);
  const int draws = 10000;

  Matrix sum = Matrix::Zero(4, 4);
  Matrix sum_sq = Matrix::Zero(4, 4);
  for (int s = 0; s < draws; ++s) {
    const Matrix k = pntk_sigma(state, make_eps(state, 17, 0, s), ds.features).values;
    sum += k;
    sum_sq += k.cwiseProduct(k);
  }
  const Matrix mean = sum / draws;
  const KernelMatrix k_mu = pntk_mu(state, make_eps(state, 17, 0, 0), ds.features);

  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double var =
          (sum_sq(i, j) / draws - mean(i, j) * mean(i, j)) * draws / (draws - 1.0);
      const double se = std::sqrt(std::max(var, 0.0) / draws);
      CHECK(std::abs(mean(i, j) - k_mu.values(i, j)) <= 3.0 * se + 1e-12);
    }
}

TEST_CASE("limiting kernel closed forms") {
  SUBCASE("unit diagonal entries are exactly one half") {
    const Dataset ds = synth_two_class(8, 5, 0.3, 6);
    const KernelMatrix k = limiting_ntk(ds.features, 1.0);
    for (int i = 0; i < 8; ++i) CHECK(k.values(i, i) == 0.5);
  }

  SUBCASE("orthogonal rows decouple") {
    Matrix x = Matrix::Identity(2, 3);
    const KernelMatrix k = limiting_ntk(x, 1.0);
    CHECK(k.values(0, 1) == 0.0);
  }

  SUBCASE("rows at sixty degrees score one sixth") {
    Matrix x(2, 2);
    x << 1.0, 0.0, 0.5, std::sqrt(3.0) / 2.0;
    const KernelMatrix k = limiting_ntk(x, 2.5);
    // cos(pi/3) * (pi - pi/3) / (2 pi) = (1/2)(1/3) = 1/6
    CHECK(std::abs(k.values(0, 1) - 1.0 / 6.0) <= 1e-15);
  }

  SUBCASE("rows must be unit norm") {
    Matrix x = Matrix::Ones(2, 2);
    CHECK_THROWS_AS(limiting_ntk(x, 1.0), invalid_input);
  }

  SUBCASE("the limit is positive semidefinite") {
    const Dataset ds = synth_two_class(20, 5, 0.2, 13);
    const KernelMatrix k = limiting_ntk(ds.features, 1.0);
    CHECK(k.lambda_min >= -1e-10);
  }
}

TEST_CASE("monte carlo limit estimator") {
  const int n_w = 40000;
  Matrix x(2, 2);
  x << 1.0, 0.0, 0.5, std::sqrt(3.0) / 2.0;

  SUBCASE("off-diagonal entry lands near the closed form") {
    const KernelMatrix k = limiting_ntk_mc(x, 1.0, n_w, 7);
    // per-draw value 0.5 * Bernoulli(1/3): std = 0.5 sqrt(2)/3
    const double se = 0.5 * std::sqrt(2.0) / 3.0 / std::sqrt(double(n_w));
    CHECK(std::abs(k.values(0, 1) - 1.0 / 6.0) <= 4.0 * se);
  }

  SUBCASE("the weight variance drops out bit for bit") {
    const KernelMatrix k1 = limiting_ntk_mc(x, 1.0, 5000, 11);
    const KernelMatrix k4 = limiting_ntk_mc(x, 4.0, 5000, 11);
    CHECK(k1.values == k4.values);
  }

  SUBCASE("a single input estimates one half") {
    const Matrix one = x.topRows(1);
    const KernelMatrix k = limiting_ntk_mc(one, 1.0, n_w, 3);
    CHECK(std::abs(k.values(0, 0) - 0.5) <= 3.0 * 0.5 / std::sqrt(double(n_w)));
  }

  SUBCASE("degenerate arguments are rejected") {
    CHECK_THROWS_AS(limiting_ntk_mc(x, 0.0, 100, 1), invalid_input);
    CHECK_THROWS_AS(limiting_ntk_mc(x, 1.0, 0, 1), invalid_input);
  }
}

TEST_CASE("lambda_min agrees with independent eigensolvers") {
  SUBCASE("identity") {
    CHECK(std::abs(lambda_min(Matrix::Identity(5, 5)) - 1.0) <= 1e-10);
  }

  SUBCASE("rank one") {
    CounterRng rng(5, 0);
    Matrix u(8, 1);
    rng.fill_normal(u);
    const Matrix a = u * u.transpose();
    CHECK(std::abs(lambda_min(a)) <= 1e-10);
  }

  SUBCASE("dense symmetric vs jacobi sweep oracle") {
    CounterRng rng(6, 1);
    Matrix a(8, 8);
    rng.fill_normal(a);
    const Matrix b = a.transpose() * a / 8.0;
    const std::vector<double> evs = oracles::jacobi_eigenvalues(b);
    CHECK(std::abs(lambda_min(b) - evs.front()) <= 1e-8);
  }

  SUBCASE("asymmetry beyond the gate is rejected") {
    Matrix a = Matrix::Identity(3, 3);
    a(0, 1) += 1e-6;
    CHECK_THROWS_WITH_AS(lambda_min(a), doctest::Contains("asymmetry"), invalid_input);
    CHECK_THROWS_AS(lambda_min(Matrix::Ones(2, 3)), invalid_input);
  }
}

TEST_CASE("kernel distances behave like norms") {
  const Dataset a = synth_two_class(6, 4, 0.3, 1);
  const Dataset b = synth_two_class(6, 4, 0.3, 2);
  const KernelMatrix ka = limiting_ntk(a.features, 1.0);
  const KernelMatrix kb = limiting_ntk(b.features, 1.0);

  const KernelDistance self = kernel_distance(ka, ka);
  CHECK(self.spectral == 0.0);
  CHECK(self.frobenius == 0.0);

  const KernelDistance ab = kernel_distance(ka, kb);
  const KernelDistance ba = kernel_distance(kb, ka);
  CHECK(std::abs(ab.spectral - ba.spectral) <= 1e-14);
  CHECK(ab.frobenius == ba.frobenius);
  CHECK(ab.frobenius >= ab.spectral - 1e-12);
  CHECK(ab.spectral > 0.0);

  const Dataset c = synth_two_class(4, 4, 0.3, 1);
  const KernelMatrix kc = limiting_ntk(c.features, 1.0);
  CHECK_THROWS_AS(kernel_distance(ka, kc), invalid_input);
}

TEST_CASE("kernel matrices symmetrize and cache their smallest eigenvalue") {
  Matrix v(2, 2);
  v << 1.0, 0.3, 0.1, 1.0;
  const KernelMatrix k(v, KernelSource::mu);
  CHECK(k.values(0, 1) == 0.2);
  CHECK(k.values(1, 0) == 0.2);
  CHECK(std::abs(k.lambda_min - 0.8) <= 1e-12);
  CHECK(k.n() == 2);
  CHECK_THROWS_AS(KernelMatrix(Matrix::Ones(2, 3), KernelSource::mu), invalid_input);
}
