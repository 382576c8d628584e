#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fasr/io.hpp"
#include "fasr/ops.hpp"
#include "fasr/rng.hpp"

using namespace fasr;

namespace {

// naive triple-loop references
Tensor naive_matmul(const Tensor& a, const Tensor& b) {
  Tensor c({a.dim(0), b.dim(1)});
  for (std::size_t i = 0; i < a.dim(0); ++i) {
    for (std::size_t j = 0; j < b.dim(1); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.dim(1); ++k) s += a.at2(i, k) * b.at2(k, j);
      c.at2(i, j) = s;
    }
  }
  return c;
}

Tensor naive_conv2d(const Tensor& x, const Tensor& w, int stride, int pad) {
  const std::size_t co = w.dim(0), ci = w.dim(1), kh = w.dim(2), kw = w.dim(3);
  const std::size_t ho = (x.dim(1) + 2 * pad - kh) / stride + 1;
  const std::size_t wo = (x.dim(2) + 2 * pad - kw) / stride + 1;
  Tensor y({co, ho, wo});
  for (std::size_t o = 0; o < co; ++o) {
    for (std::size_t oy = 0; oy < ho; ++oy) {
      for (std::size_t ox = 0; ox < wo; ++ox) {
        double s = 0.0;
        for (std::size_t c = 0; c < ci; ++c) {
          for (std::size_t ky = 0; ky < kh; ++ky) {
            for (std::size_t kx = 0; kx < kw; ++kx) {
              const std::ptrdiff_t iy =
                  static_cast<std::ptrdiff_t>(oy * stride + ky) - pad;
              const std::ptrdiff_t ix =
                  static_cast<std::ptrdiff_t>(ox * stride + kx) - pad;
              if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(x.dim(1)) ||
                  ix < 0 || ix >= static_cast<std::ptrdiff_t>(x.dim(2))) {
                continue;
              }
              s += x.at3(c, iy, ix) *
                   w[((o * ci + c) * kh + ky) * kw + kx];
            }
          }
        }
        y.at3(o, oy, ox) = s;
      }
    }
  }
  return y;
}

double max_rel_diff(const Tensor& a, const Tensor& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::fabs(a[i] - b[i]);
    const double m = std::max({std::fabs(a[i]), std::fabs(b[i]), 1e-30});
    worst = std::max(worst, d / m);
  }
  return worst;
}

}  // namespace

TEST_CASE("rng: identical (seed, stream) re-creation is bit-identical") {
  RngStream a(1, 0), b(1, 0);
  Tensor ta = gaussian(a, {4});
  Tensor tb = gaussian(b, {4});
  for (std::size_t i = 0; i < 4; ++i) CHECK(ta[i] == tb[i]);
}

TEST_CASE("rng: distinct stream ids give different sequences") {
  RngStream a(1, 0), b(1, 1);
  Tensor ta = gaussian(a, {8});
  Tensor tb = gaussian(b, {8});
  bool any_diff = false;
  for (std::size_t i = 0; i < 8; ++i) any_diff |= ta[i] != tb[i];
  CHECK(any_diff);
}

TEST_CASE("rng: gaussian moments over 1e5 samples") {
  RngStream rng(42, 3);
  const std::size_t n = 100000;
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  CHECK(mean > -0.02);
  CHECK(mean < 0.02);
  CHECK(var > 0.97);
  CHECK(var < 1.03);
}

TEST_CASE("rng: zero-size shape rejected") {
  RngStream rng(1, 0);
  CHECK_THROWS_AS(gaussian(rng, {0}), std::invalid_argument);
  CHECK_THROWS_AS(gaussian(rng, {}), std::invalid_argument);
}

TEST_CASE("elementwise kernels") {
  const Tensor a({2}, {1, 2}), b({2}, {3, 4});
  const Tensor s = ops::add(a, b);
  CHECK(s[0] == 4);
  CHECK(s[1] == 6);
  CHECK(ops::sub(b, a)[0] == 2);
  CHECK(ops::scale(a, 2.0)[1] == 4);
  CHECK(ops::hadamard(a, b)[1] == 8);
  CHECK(ops::sum(b) == 7);
  CHECK(ops::mean(b) == doctest::Approx(3.5));
  CHECK(ops::l2_norm(Tensor({2}, {3, 4})) == doctest::Approx(5.0));
  CHECK_THROWS_AS(ops::add(a, Tensor({3})), std::invalid_argument);
}

TEST_CASE("matmul: identity and naive-oracle agreement") {
  RngStream rng(7, 0);
  Tensor a = gaussian(rng, {3, 3});
  Tensor eye({3, 3});
  for (std::size_t i = 0; i < 3; ++i) eye.at2(i, i) = 1.0;
  const Tensor ia = ops::matmul(eye, a);
  for (std::size_t i = 0; i < 9; ++i) CHECK(ia[i] == doctest::Approx(a[i]));

  for (int rep = 0; rep < 5; ++rep) {
    Tensor m = gaussian(rng, {17, 32});
    Tensor n = gaussian(rng, {32, 9});
    CHECK(max_rel_diff(ops::matmul(m, n), naive_matmul(m, n)) < 1e-12);
  }
}

TEST_CASE("conv2d: naive-oracle agreement up to size 32") {
  RngStream rng(11, 0);
  for (int rep = 0; rep < 4; ++rep) {
    Tensor x = gaussian(rng, {3, 32, 32});
    Tensor w = gaussian(rng, {5, 3, 3, 3});
    for (int stride : {1, 2}) {
      for (int pad : {0, 1}) {
        const Tensor y = ops::conv2d(x, w, Tensor(), stride, pad);
        const Tensor ref = naive_conv2d(x, w, stride, pad);
        CHECK(y.shape() == ref.shape());
        CHECK(max_rel_diff(y, ref) < 1e-12);
      }
    }
  }
}

TEST_CASE("conv2d: constant image with unit-sum kernel, replicate padding") {
  Tensor x = Tensor::full({1, 8, 8}, 0.73);
  Tensor w({1, 1, 3, 3});
  for (std::size_t i = 0; i < 9; ++i) w[i] = 1.0 / 9.0;
  const Tensor y = ops::conv2d(x, w, Tensor(), 1, 1, ops::PadMode::Replicate);
  CHECK(y.shape() == x.shape());
  for (std::size_t i = 0; i < y.size(); ++i) {
    CHECK(y[i] == doctest::Approx(0.73).epsilon(1e-14));
  }
}

TEST_CASE("conv2d: shape mismatch rejected") {
  Tensor x({2, 8, 8});
  Tensor w({4, 3, 3, 3});
  CHECK_THROWS_AS(ops::conv2d(x, w, Tensor(), 1, 1), std::invalid_argument);
}

TEST_CASE("conv2d_transpose is the adjoint of conv2d") {
  // <conv(x), y> == <x, conv_transpose(y)> for random x, y
  RngStream rng(13, 0);
  Tensor x = gaussian(rng, {3, 10, 10});
  Tensor w = gaussian(rng, {4, 3, 3, 3});
  for (int stride : {1, 2}) {
    const Tensor cx = ops::conv2d(x, w, Tensor(), stride, 1);
    Tensor y = gaussian(rng, cx.shape());
    const Tensor ty = ops::conv2d_transpose(y, w, Tensor(), stride, 1, 10, 10);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < cx.size(); ++i) lhs += cx[i] * y[i];
    for (std::size_t i = 0; i < x.size(); ++i) rhs += x[i] * ty[i];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("pipeline determinism: identical seeds give bit-identical results") {
  auto run = [] {
    RngStream rng(5, 9);
    Tensor x = gaussian(rng, {2, 16, 16});
    Tensor w = gaussian(rng, {3, 2, 3, 3});
    return ops::conv2d(x, w, Tensor(), 1, 1);
  };
  const Tensor a = run(), b = run();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("TNSR round trip preserves float32-quantized values") {
  RngStream rng(3, 0);
  Tensor t = gaussian(rng, {2, 3, 4});
  std::stringstream ss;
  io::write_tnsr(ss, t);
  const Tensor back = io::read_tnsr(ss);
  CHECK(back.shape() == t.shape());
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(back[i] == static_cast<double>(static_cast<float>(t[i])));
  }
}

TEST_CASE("TNSR: bad magic and truncation rejected") {
  std::stringstream ss("XXXX");
  CHECK_THROWS(io::read_tnsr(ss));
  Tensor t({4}, {1, 2, 3, 4});
  std::stringstream full;
  io::write_tnsr(full, t);
  std::string bytes = full.str();
  std::stringstream cut(bytes.substr(0, bytes.size() - 5));
  CHECK_THROWS(io::read_tnsr(cut));
}
