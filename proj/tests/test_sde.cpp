#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fasr/sde.hpp"

using namespace fasr;

TEST_CASE("schedule invariants and endpoints") {
  const NoiseSchedule s;
  CHECK(s.sigma(0.0) == doctest::Approx(0.001).epsilon(1e-12));
  CHECK(s.sigma(s.horizon) == doctest::Approx(348.0).epsilon(1e-12));
  CHECK(s.sigma(s.horizon / 2) ==
        doctest::Approx(std::sqrt(0.001 * 348.0)).epsilon(1e-12));
  CHECK_THROWS_AS(s.sigma(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(s.sigma(1.1), std::invalid_argument);
  CHECK_THROWS_AS(NoiseSchedule(1.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(NoiseSchedule(0.001, 348.0, 0.0), std::invalid_argument);
}

TEST_CASE("log sigma is affine in t") {
  const NoiseSchedule s;
  const double slope = std::log(348.0 / 0.001);
  for (int i = 0; i <= 50; ++i) {
    const double t = i / 50.0;
    const double expect = std::log(0.001) + slope * t;
    CHECK(std::log(s.sigma(t)) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("diffusion coefficient matches finite difference of sigma^2") {
  const NoiseSchedule s;
  // closed-form endpoints
  CHECK(s.diffusion_coeff(0.0) ==
        doctest::Approx(0.001 * std::sqrt(2.0 * std::log(348000.0)))
            .epsilon(1e-9));
  CHECK(s.diffusion_coeff(1.0) ==
        doctest::Approx(348.0 * std::sqrt(2.0 * std::log(348000.0)))
            .epsilon(1e-9));
  for (double t : {0.05, 0.3, 0.6, 0.95}) {
    const double h = 1e-8;
    const double sp = s.sigma(t + h), sm = s.sigma(t - h);
    const double fd = std::sqrt((sp * sp - sm * sm) / (2.0 * h));
    CHECK(s.diffusion_coeff(t) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("marginal std endpoints") {
  const NoiseSchedule s;
  CHECK(s.marginal_std(0.0) == 0.0);
  CHECK(std::fabs(s.marginal_std(1.0) - 348.0) / 348.0 < 1e-11);
  CHECK(s.marginal_std(0.5) ==
        doctest::Approx(std::sqrt(0.348 - 1e-6)).epsilon(1e-12));
  // monotone
  double prev = 0.0;
  for (int i = 1; i <= 20; ++i) {
    const double v = s.marginal_std(i / 20.0);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("perturb: zero noise and t=0 return x0") {
  const NoiseSchedule s;
  const Tensor x0({3}, {0.1, 0.5, 0.9});
  const Tensor z({3});
  const Tensor a = perturb_with_noise(x0, 0.7, s, z);
  for (std::size_t i = 0; i < 3; ++i) CHECK(a[i] == x0[i]);
  RngStream rng(1, 0);
  const Tensor b = perturb(x0, 0.0, s, rng);
  for (std::size_t i = 0; i < 3; ++i) CHECK(b[i] == x0[i]);
}

TEST_CASE("perturb: terminal sample std near sigma_max") {
  const NoiseSchedule s;
  RngStream rng(2, 0);
  const Tensor x0({1});
  const std::size_t n = 10000;
  double s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Tensor xt = perturb(x0, 1.0, s, rng);
    s2 += xt[0] * xt[0];
  }
  const double std = std::sqrt(s2 / n);
  CHECK(std::fabs(std - 348.0) / 348.0 < 0.03);
}

TEST_CASE("analytic score closed form and finite-difference agreement") {
  const NoiseSchedule s;
  const Tensor x0({1}, {0.0});
  const Tensor xt({1}, {1.0});
  const Tensor sc = analytic_score(xt, x0, 1.0, s);
  CHECK(sc[0] == doctest::Approx(-1.0 / (348.0 * 348.0 - 1e-6)).epsilon(1e-12));

  // score at the mean is zero
  const Tensor z = analytic_score(x0, x0, 0.5, s);
  CHECK(z[0] == 0.0);

  CHECK_THROWS_AS(analytic_score(xt, x0, 0.0, s), std::invalid_argument);
  CHECK_THROWS_AS(analytic_score(xt, Tensor({2}), 0.5, s),
                  std::invalid_argument);

  RngStream rng(3, 0);
  for (int i = 0; i < 100; ++i) {
    const double t = s.t_floor() + rng.uniform() * (1.0 - s.t_floor());
    const double var = s.marginal_var(t);
    const double x0v = rng.normal();
    const double xtv = x0v + std::sqrt(var) * rng.normal();
    const double score =
        analytic_score(Tensor::scalar(xtv), Tensor::scalar(x0v), t, s)[0];
    const double h = 1e-5 * std::sqrt(var) * std::max(1.0, std::fabs(xtv));
    auto logp = [&](double x) { return -0.5 * (x - x0v) * (x - x0v) / var; };
    const double fd = (logp(xtv + h) - logp(xtv - h)) / (2.0 * h);
    const double denom = std::max({std::fabs(fd), std::fabs(score), 1e-12});
    CHECK(std::fabs(score - fd) / denom < 1e-5);
  }
}

TEST_CASE("forward Euler-Maruyama variance agrees with the transition kernel") {
  // reduced-size version of the full consistency check (acceptance runs the
  // larger one)
  const NoiseSchedule s;
  const std::size_t steps = 500, trials = 2000;
  const double dt = 1.0 / steps;
  double sum2 = 0.0;
  for (std::size_t k = 0; k < trials; ++k) {
    RngStream rng(77, k);
    double x = 0.0;
    for (std::size_t i = 0; i < steps; ++i) {
      x += s.diffusion_coeff(i * dt) * std::sqrt(dt) * rng.normal();
    }
    sum2 += x * x;
  }
  const double var = sum2 / trials;
  CHECK(std::fabs(var - s.marginal_var(1.0)) / s.marginal_var(1.0) < 0.08);
}
