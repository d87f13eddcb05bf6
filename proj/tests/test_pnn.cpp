#include <doctest.h>

#include <cmath>
#include <vector>

#include "pntk/dataset.hpp"
#include "pntk/pnn.hpp"
#include "pntk/rng.hpp"

using namespace pntk;

namespace {

EpsilonDraw zero_eps(const PNNState& state) {
  EpsilonDraw draw = make_eps(state, 1, 0, 0);
  for (Matrix& e : draw.eps) e.setZero();
  return draw;
}

}  // namespace

TEST_CASE("softplus closed forms and overflow guard") {
  CHECK(std::abs(softplus(0.0) - 0.69314718055994530942) <= 1e-15);
  const double tiny = softplus(-40.0);
  CHECK(tiny > 0.0);
  CHECK(std::abs(tiny - 4.2483542552915889863e-18) <= 1e-30);
  CHECK(softplus(100.0) == 100.0);
  CHECK(softplus(31.0) == 31.0);
  for (double s : {0.01, 0.3, 1.0, 5.0})
    CHECK(std::abs(softplus(inv_softplus(s)) - s) <= 1e-12 * s);
  CHECK_THROWS_AS(inv_softplus(0.0), invalid_input);
}

TEST_CASE("initialization is deterministic with frozen prior copies") {
  HyperParams hp;
  const PNNState a = init_pnn(2, 4, 1, hp, 3);
  const PNNState b = init_pnn(2, 4, 1, hp, 3);
  CHECK(a.layers[0].mu == b.layers[0].mu);
  CHECK(a.layers[0].sigma == b.layers[0].sigma);
  CHECK(a.v == b.v);
  CHECK(a.prior[0].mu == a.layers[0].mu);
  CHECK(a.prior[0].sigma == a.layers[0].sigma);
  const PNNState c = init_pnn(2, 4, 1, hp, 4);
  CHECK(a.layers[0].mu != c.layers[0].mu);
}

TEST_CASE("initial weights are truncated and sigma is constant softplus") {
  HyperParams hp;
  hp.sigma_hat = 0.5;
  hp.rho0 = 0.2;
  const PNNState state = init_pnn(8, 64, 1, hp, 9);
  CHECK(state.layers[0].mu.cwiseAbs().maxCoeff() <= 2.0 * hp.sigma_hat);
  const double s0 = softplus(0.2);
  CHECK((state.layers[0].sigma.array() == s0).all());
  for (Eigen::Index r = 0; r < state.v.size(); ++r)
    CHECK(std::abs(state.v(r)) == 1.0);
  HyperParams bad;
  bad.sigma_hat = 0.0;
  CHECK_THROWS_AS(init_pnn(2, 2, 1, bad, 1), invalid_input);
}

TEST_CASE("empirical spread of the truncated init matches the 2-sigma law") {
  HyperParams hp;
  const PNNState state = init_pnn(1000, 1000, 1, hp, 17);
  const Matrix& mu = state.layers[0].mu;
  const double n = static_cast<double>(mu.size());
  const double mean = mu.sum() / n;
  const double stddev = std::sqrt(mu.array().square().sum() / n - mean * mean);
  const double expected = 0.87962566103423975041;  // std of N(0,1) cut at 2
  CHECK(std::abs(stddev - expected) / expected < 0.02);
}

TEST_CASE("single-unit forward arithmetic") {
  HyperParams hp;
  hp.rho0 = -40.0;
  PNNState state = init_pnn(2, 1, 1, hp, 1);
  state.layers[0].mu << 1.0, 0.0;
  state.v << 1.0;
  Vector x(2);
  x << 1.0, 0.0;
  CHECK(forward(state, zero_eps(state), x)(0) == 1.0);
}

TEST_CASE("relu kills a fully negative preactivation pattern") {
  HyperParams hp;
  PNNState state = init_pnn(2, 4, 1, hp, 1);
  state.layers[0].mu = -Matrix::Ones(4, 2);
  Vector x(2);
  x << 1.0, 0.0;
  CHECK(forward(state, zero_eps(state), x)(0) == 0.0);
}

TEST_CASE("paired signs on identical rows cancel the output") {
  HyperParams hp;
  PNNState state = init_pnn(3, 2, 1, hp, 2);
  state.layers[0].mu.row(1) = state.layers[0].mu.row(0);
  state.v << 1.0, -1.0;
  Vector x(3);
  x << 0.6, 0.8, 0.0;
  CHECK(forward(state, zero_eps(state), x)(0) == 0.0);
}

TEST_CASE("symmetric paired initialization zeroes the deterministic output") {
  HyperParams hp;
  hp.rho0 = -40.0;
  InitOptions opts;
  opts.symmetric_pairs = true;
  const PNNState state = init_pnn(6, 64, 1, hp, 4, opts);
  for (int r = 0; r < 32; ++r) {
    CHECK(state.layers[0].mu.row(r) == state.layers[0].mu.row(r + 32));
    CHECK(state.v(r) == -state.v(r + 32));
  }
  const Dataset ds = synth_two_class(8, 6, 0.3, 5);
  const Matrix out = forward_batch(state, zero_eps(state), ds.features);
  CHECK(out.cwiseAbs().maxCoeff() <= 1e-10);
  CHECK_THROWS_AS(init_pnn(6, 63, 1, hp, 4, opts), invalid_input);
}

TEST_CASE("forward validates shapes") {
  HyperParams hp;
  const PNNState state = init_pnn(4, 8, 1, hp, 1);
  const PNNState other = init_pnn(5, 8, 1, hp, 1);
  Vector x = Vector::Zero(4);
  x(0) = 1.0;
  CHECK_THROWS_AS(forward(state, make_eps(other, 1, 0, 0), x), invalid_input);
  Vector bad = Vector::Zero(5);
  bad(0) = 1.0;
  CHECK_THROWS_AS(forward(state, make_eps(state, 1, 0, 0), bad), invalid_input);
}

TEST_CASE("epsilon draws replay bit-exactly from their path") {
  HyperParams hp;
  const PNNState state = init_pnn(4, 8, 1, hp, 1);
  const EpsilonDraw a = make_eps(state, 7, 3, 2);
  const EpsilonDraw b = make_eps(state, 7, 3, 2);
  CHECK(a.eps[0] == b.eps[0]);
  const EpsilonDraw c = make_eps(state, 7, 3, 3);
  CHECK(a.eps[0] != c.eps[0]);
  const EpsilonDraw d = make_eps(state, 7, 4, 2);
  CHECK(a.eps[0] != d.eps[0]);
}

TEST_CASE("gradients vanish exactly on inactive units") {
  HyperParams hp;
  hp.rho0 = 0.1;
  const PNNState state = init_pnn(5, 16, 1, hp, 6);
  const EpsilonDraw eps = make_eps(state, 11, 0, 0);
  const Dataset ds = synth_two_class(4, 5, 0.3, 7);
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    const Vector x = ds.features.row(i).transpose();
    const ParamGrads g = grad_params(state, eps, x);
    for (int r = 0; r < state.m; ++r) {
      const double pre =
          (state.layers[0].mu.row(r) +
           state.layers[0].sigma.row(r).cwiseProduct(eps.eps[0].row(r)))
              .dot(x.transpose());
      if (pre < 0.0) {
        CHECK(g.d_mu[0].row(r).cwiseAbs().maxCoeff() == 0.0);
        CHECK(g.d_sigma[0].row(r).cwiseAbs().maxCoeff() == 0.0);
      } else {
        CHECK(g.d_mu[0].row(r).cwiseAbs().maxCoeff() > 0.0);
      }
    }
    // chain rule structure: the sigma gradient is the mu gradient weighted
    // by the draw
    for (int r = 0; r < state.m; ++r)
      for (Eigen::Index c = 0; c < 5; ++c)
        if (g.d_mu[0](r, c) != 0.0)
          CHECK(g.d_sigma[0](r, c) / g.d_mu[0](r, c) ==
                doctest::Approx(eps.eps[0](r, c)).epsilon(1e-12));
  }
}

TEST_CASE("analytic gradients agree with central differences") {
  HyperParams hp;
  hp.rho0 = 0.3;
  PNNState state = init_pnn(3, 8, 1, hp, 13);
  const EpsilonDraw eps = make_eps(state, 5, 0, 0);
  Vector x(3);
  x << 0.48, 0.6, 0.64;
  REQUIRE(std::abs(x.norm() - 1.0) <= 1e-12);
  const ParamGrads g = grad_params(state, eps, x);
  const double h = 1e-6;
  double worst = 0.0;
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 3; ++c) {
      PNNState up = state, dn = state;
      up.layers[0].mu(r, c) += h;
      dn.layers[0].mu(r, c) -= h;
      const double fd =
          (forward(up, eps, x)(0) - forward(dn, eps, x)(0)) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - g.d_mu[0](r, c)) /
                                  std::max(std::abs(g.d_mu[0](r, c)), 1e-6));
      up = state;
      dn = state;
      up.layers[0].sigma(r, c) += h;
      dn.layers[0].sigma(r, c) -= h;
      const double fd_s =
          (forward(up, eps, x)(0) - forward(dn, eps, x)(0)) / (2.0 * h);
      worst = std::max(worst, std::abs(fd_s - g.d_sigma[0](r, c)) /
                                  std::max(std::abs(g.d_sigma[0](r, c)), 1e-6));
    }
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("mean_forward degenerates to the deterministic forward") {
  HyperParams hp;
  hp.rho0 = -40.0;
  const PNNState state = init_pnn(4, 32, 1, hp, 8);
  Vector x(4);
  x << 0.5, 0.5, 0.5, 0.5;
  const double det = forward(state, zero_eps(state), x)(0);
  for (int s : {1, 7, 64})
    CHECK(std::abs(mean_forward(state, x, s, 99).mean(0) - det) <= 1e-12);
}

TEST_CASE("mean_forward with one sample equals forward on that draw") {
  HyperParams hp;
  hp.rho0 = 0.2;
  const PNNState state = init_pnn(4, 16, 1, hp, 8);
  Vector x(4);
  x << 1.0, 0.0, 0.0, 0.0;
  const double one = mean_forward(state, x, 1, 31).mean(0);
  const double direct = forward(state, make_eps(state, 31, 0, 0), x)(0);
  CHECK(one == direct);
}

TEST_CASE("mean_forward is self-consistent across sample counts") {
  HyperParams hp;
  hp.rho0 = 0.4;
  const PNNState state = init_pnn(2, 64, 1, hp, 10);
  Vector x(2);
  x << 0.6, 0.8;
  const MeanForwardResult small = mean_forward(state, x, 100000, 1);
  const MeanForwardResult big = mean_forward(state, x, 1000000, 2);
  const double combined = std::hypot(small.std_error(0), big.std_error(0));
  CHECK(std::abs(small.mean(0) - big.mean(0)) <= 4.0 * combined);
}

TEST_CASE("shifting mu matches shifting the draw by c over sigma") {
  HyperParams hp;
  hp.rho0 = 0.25;
  const PNNState base = init_pnn(3, 8, 1, hp, 14);
  const EpsilonDraw eps = make_eps(base, 3, 0, 0);
  Vector x(3);
  x << 0.0, 0.6, 0.8;
  const double c = 0.375;

  PNNState shifted_mu = base;
  shifted_mu.layers[0].mu.array() += c;

  EpsilonDraw shifted_eps = eps;
  shifted_eps.eps[0].array() += c / softplus(hp.rho0);

  CHECK(forward(shifted_mu, eps, x)(0) ==
        doctest::Approx(forward(base, shifted_eps, x)(0)).epsilon(1e-12));
}

TEST_CASE("output variance stays order one across widths") {
  Vector x(4);
  x << 0.5, -0.5, 0.5, 0.5;
  HyperParams hp;
  for (int m : {64, 256, 1024, 4096}) {
    double sum = 0.0, sumsq = 0.0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
      const PNNState state = init_pnn(4, m, 1, hp, 1000 + t);
      const double f = forward(state, make_eps(state, 77 + t, 0, 0), x)(0);
      sum += f;
      sumsq += f * f;
    }
    const double mean = sum / trials;
    const double var = sumsq / trials - mean * mean;
    CHECK(var >= 0.1);
    CHECK(var <= 10.0);
  }
}

TEST_CASE("deep mode carries one record per layer and scaled preactivations") {
  HyperParams hp;
  hp.rho0 = -2.0;
  const PNNState state = init_pnn(6, 16, 3, hp, 21, {}, 10);
  CHECK(state.layers.size() == 4);  // input, two hidden, output
  CHECK(state.L == 3);
  CHECK(state.out_dim == 10);
  CHECK(state.layers[0].mu.rows() == 16);
  CHECK(state.layers[0].mu.cols() == 6);
  CHECK(state.layers[1].mu.rows() == 16);
  CHECK(state.layers[1].mu.cols() == 16);
  CHECK(state.layers[3].mu.rows() == 10);
  CHECK(state.v.size() == 0);  // sign vector only exists in theory mode
  Vector x = Vector::Zero(6);
  x(0) = 1.0;
  const Vector out = forward(state, make_eps(state, 2, 0, 0), x);
  CHECK(out.size() == 10);
  CHECK(out.allFinite());
}
