#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "fasr/evalkit.hpp"
#include "fasr/rng.hpp"

using namespace fasr;

namespace {

// quadratic-time reference: mean over all (g, i) pairs of 1/0.5/0
double auc_bruteforce(const std::vector<double>& genuine,
                      const std::vector<double>& impostor) {
  double total = 0.0;
  for (double g : genuine) {
    for (double im : impostor) {
      if (g > im) total += 1.0;
      else if (g == im) total += 0.5;
    }
  }
  return total / (static_cast<double>(genuine.size()) *
                  static_cast<double>(impostor.size()));
}

double cmc_bruteforce(const SimilarityMatrix& sim, std::size_t k) {
  const std::size_t rows = sim.values.dim(0), cols = sim.values.dim(1);
  std::size_t hits = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<std::size_t> order(cols);
    for (std::size_t c = 0; c < cols; ++c) order[c] = c;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return sim.values.at2(r, a) > sim.values.at2(r, b);
                     });
    for (std::size_t pos = 0; pos < std::min(k, cols); ++pos) {
      if (order[pos] == sim.truth[r]) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(rows);
}

}  // namespace

TEST_CASE("cosine similarity: hand values, scale invariance, errors") {
  FeatureVector a{Tensor({3}, {1.0, 0.0, 0.0})};
  FeatureVector b{Tensor({3}, {0.0, 1.0, 0.0})};
  FeatureVector c{Tensor({3}, {2.0, 0.0, 0.0})};
  FeatureVector d{Tensor({3}, {-3.0, 0.0, 0.0})};
  CHECK(cosine_similarity(a, b) == 0.0);
  CHECK(cosine_similarity(a, c) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cosine_similarity(a, d) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(cosine_similarity(a, a) <= 1.0);  // clamped despite rounding

  FeatureVector zero{Tensor({3}, {0.0, 0.0, 0.0})};
  CHECK_THROWS_AS(cosine_similarity(a, zero), std::invalid_argument);
  FeatureVector other_dim{Tensor({2}, {1.0, 0.0})};
  CHECK_THROWS_AS(cosine_similarity(a, other_dim), std::invalid_argument);
}

TEST_CASE("auc: separable, reversed, tied and mixed cases") {
  CHECK(verification_auc({0.9, 0.8}, {0.1, 0.2}) == 1.0);
  CHECK(verification_auc({0.1, 0.2}, {0.9, 0.8}) == 0.0);
  CHECK(verification_auc({0.5, 0.5}, {0.5, 0.5}) == 0.5);
  CHECK(verification_auc({0.9, 0.3}, {0.5, 0.1}) == doctest::Approx(0.75));
  CHECK_THROWS_AS(verification_auc({}, {0.1}), std::invalid_argument);
  CHECK_THROWS_AS(verification_auc({0.1}, {}), std::invalid_argument);
}

TEST_CASE("auc: rank-sum implementation matches brute force with ties") {
  RngStream rng(3, 0);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<double> gen, imp;
    const std::size_t ng = 1 + static_cast<std::size_t>(rng.uniform() * 30);
    const std::size_t ni = 1 + static_cast<std::size_t>(rng.uniform() * 30);
    for (std::size_t i = 0; i < ng; ++i) {
      // quantized scores force ties often
      gen.push_back(std::floor(rng.normal() * 4.0) / 4.0 + 0.3);
    }
    for (std::size_t i = 0; i < ni; ++i) {
      imp.push_back(std::floor(rng.normal() * 4.0) / 4.0);
    }
    CHECK(verification_auc(gen, imp) ==
          doctest::Approx(auc_bruteforce(gen, imp)).epsilon(1e-12));
  }
}

TEST_CASE("auc: invariant under monotone score transforms") {
  RngStream rng(4, 0);
  std::vector<double> gen, imp;
  for (int i = 0; i < 25; ++i) gen.push_back(rng.normal() + 0.5);
  for (int i = 0; i < 25; ++i) imp.push_back(rng.normal());
  const double base = verification_auc(gen, imp);
  auto squash = [](std::vector<double> v) {
    for (double& x : v) x = std::tanh(0.7 * x) * 3.0 + 1.0;
    return v;
  };
  CHECK(verification_auc(squash(gen), squash(imp)) ==
        doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("cmc: hand case, tie-break by ascending column, monotone in k") {
  SimilarityMatrix sim;
  sim.values = Tensor({3, 3}, {0.9, 0.5, 0.1,   // truth 0: rank 1
                               0.4, 0.4, 0.4,   // truth 2: ties, cols 0,1 first
                               0.2, 0.8, 0.3});  // truth 0: rank 3
  sim.truth = {0, 2, 0};
  CHECK(cmc_rank_k(sim, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(cmc_rank_k(sim, 2) == doctest::Approx(1.0 / 3.0));
  CHECK(cmc_rank_k(sim, 3) == doctest::Approx(1.0));
  CHECK_THROWS_AS(cmc_rank_k(sim, 0), std::invalid_argument);
  CHECK_THROWS_AS(cmc_rank_k(sim, 10), std::invalid_argument);  // k > gallery

  double prev = 0.0;
  for (std::size_t k = 1; k <= 3; ++k) {
    const double v = cmc_rank_k(sim, k);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("cmc: matches a stable-sort reference on random matrices") {
  RngStream rng(5, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t rows = 4 + static_cast<std::size_t>(rng.uniform() * 6);
    const std::size_t cols = 4 + static_cast<std::size_t>(rng.uniform() * 6);
    SimilarityMatrix sim;
    sim.values = Tensor({rows, cols});
    for (std::size_t i = 0; i < sim.values.size(); ++i) {
      sim.values[i] = std::floor(rng.normal() * 3.0) / 3.0;  // force ties
    }
    for (std::size_t r = 0; r < rows; ++r) {
      sim.truth.push_back(static_cast<std::size_t>(rng.uniform() * cols) % cols);
    }
    for (std::size_t k = 1; k <= cols; ++k) {
      CHECK(cmc_rank_k(sim, k) == doctest::Approx(cmc_bruteforce(sim, k)));
    }
    sim.truth.clear();
  }
}

TEST_CASE("psnr: hand values and the identical-image sentinel") {
  const Tensor a = Tensor::full({4, 4}, 0.5);
  Tensor b = a;
  CHECK(psnr(a, b, 1.0) == std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < b.size(); ++i) b[i] += 0.1;
  // MSE = 0.01, peak 1 -> 20 dB
  CHECK(psnr(a, b, 1.0) == doctest::Approx(20.0).epsilon(1e-9));
  CHECK(psnr(a, b, 2.0) == doctest::Approx(20.0 + 20.0 * std::log10(2.0)));
  CHECK_THROWS_AS(psnr(a, Tensor({2, 2}), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(psnr(a, b, 0.0), std::invalid_argument);
}

TEST_CASE("build_similarity validates input and fills the matrix") {
  std::vector<FeatureVector> probes = {FeatureVector{Tensor({2}, {1.0, 0.0})},
                                       FeatureVector{Tensor({2}, {0.0, 1.0})}};
  std::vector<FeatureVector> gallery = {FeatureVector{Tensor({2}, {1.0, 0.0})},
                                        FeatureVector{Tensor({2}, {0.6, 0.8})}};
  const SimilarityMatrix sim = build_similarity(probes, gallery, {0, 1});
  CHECK(sim.values.at2(0, 0) == doctest::Approx(1.0));
  CHECK(sim.values.at2(0, 1) == doctest::Approx(0.6));
  CHECK(sim.values.at2(1, 0) == doctest::Approx(0.0));
  CHECK(sim.values.at2(1, 1) == doctest::Approx(0.8));
  CHECK_THROWS_AS(build_similarity(probes, gallery, {0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_similarity(probes, gallery, {0, 2}),
                  std::invalid_argument);
}

TEST_CASE("evaluate_run: probes equal to gallery give perfect metrics") {
  const FeatureExtractor fe(1234);
  RngStream rng(6, 0);
  std::vector<Tensor> gallery;
  for (int i = 0; i < 5; ++i) {
    std::vector<double> z(kLatentDim);
    for (double& v : z) v = rng.uniform();
    gallery.push_back(render(z, NuisanceParams{}, rng));
  }
  const EvalReport rep = evaluate_run(gallery, gallery, fe);
  CHECK(rep.auc == doctest::Approx(1.0));
  CHECK(rep.rank1 == doctest::Approx(1.0));
  CHECK(rep.rank5 == doctest::Approx(1.0));
  CHECK(rep.rank10 == doctest::Approx(1.0));
  CHECK(rep.mean_psnr == doctest::Approx(100.0));  // capped sentinel
}

TEST_CASE("evaluate_run: uninformative probes give chance-level AUC") {
  const FeatureExtractor fe(1234);
  RngStream rng(7, 0);
  std::vector<Tensor> gallery, probes;
  // every probe is the same image; scores per column are constant across rows
  std::vector<double> z0(kLatentDim, 0.5);
  const Tensor flat = render(z0, NuisanceParams{}, rng);
  for (int i = 0; i < 6; ++i) {
    std::vector<double> z(kLatentDim);
    for (double& v : z) v = rng.uniform();
    gallery.push_back(render(z, NuisanceParams{}, rng));
    probes.push_back(flat);
  }
  const EvalReport rep = evaluate_run(probes, gallery, fe);
  // the score sets are symmetric across rows, so the statistic is exactly 1/2
  CHECK(rep.auc == doctest::Approx(0.5).epsilon(1e-9));
}
