#include "fasr/ops.hpp"

#include <cblas.h>

#include <cmath>
#include <cstring>

namespace fasr::ops {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                a.shape_str() + " vs " + b.shape_str());
  }
}

std::size_t out_extent(std::size_t in, int pad, std::size_t k, int stride) {
  const std::ptrdiff_t num =
      static_cast<std::ptrdiff_t>(in) + 2 * pad - static_cast<std::ptrdiff_t>(k);
  if (num < 0 || stride < 1) {
    throw std::invalid_argument("conv2d: kernel larger than padded input");
  }
  return static_cast<std::size_t>(num / stride) + 1;
}

// Unfold [Ci,H,W] into [Ci*kh*kw, Ho*Wo].
Tensor im2col(const Tensor& x, std::size_t kh, std::size_t kw, int stride,
              int pad, PadMode mode, std::size_t ho, std::size_t wo) {
  const std::size_t ci = x.dim(0), h = x.dim(1), w = x.dim(2);
  Tensor cols({ci * kh * kw, ho * wo});
  double* out = cols.data();
  for (std::size_t c = 0; c < ci; ++c) {
    for (std::size_t ky = 0; ky < kh; ++ky) {
      for (std::size_t kx = 0; kx < kw; ++kx) {
        for (std::size_t oy = 0; oy < ho; ++oy) {
          const std::ptrdiff_t iy =
              static_cast<std::ptrdiff_t>(oy) * stride - pad + ky;
          for (std::size_t ox = 0; ox < wo; ++ox) {
            const std::ptrdiff_t ix =
                static_cast<std::ptrdiff_t>(ox) * stride - pad + kx;
            double v = 0.0;
            if (mode == PadMode::Replicate) {
              const std::size_t cy = static_cast<std::size_t>(
                  iy < 0 ? 0 : (iy >= static_cast<std::ptrdiff_t>(h) ? h - 1 : iy));
              const std::size_t cx = static_cast<std::size_t>(
                  ix < 0 ? 0 : (ix >= static_cast<std::ptrdiff_t>(w) ? w - 1 : ix));
              v = x.at3(c, cy, cx);
            } else if (iy >= 0 && iy < static_cast<std::ptrdiff_t>(h) &&
                       ix >= 0 && ix < static_cast<std::ptrdiff_t>(w)) {
              v = x.at3(c, static_cast<std::size_t>(iy),
                        static_cast<std::size_t>(ix));
            }
            *out++ = v;
          }
        }
      }
    }
  }
  return cols;
}

// Adjoint of im2col: scatter-add [Ci*kh*kw, Ho*Wo] back into [Ci,H,W].
Tensor col2im(const Tensor& cols, std::size_t ci, std::size_t h, std::size_t w,
              std::size_t kh, std::size_t kw, int stride, int pad,
              std::size_t ho, std::size_t wo) {
  Tensor x({ci, h, w});
  const double* in = cols.data();
  for (std::size_t c = 0; c < ci; ++c) {
    for (std::size_t ky = 0; ky < kh; ++ky) {
      for (std::size_t kx = 0; kx < kw; ++kx) {
        for (std::size_t oy = 0; oy < ho; ++oy) {
          const std::ptrdiff_t iy =
              static_cast<std::ptrdiff_t>(oy) * stride - pad + ky;
          for (std::size_t ox = 0; ox < wo; ++ox) {
            const std::ptrdiff_t ix =
                static_cast<std::ptrdiff_t>(ox) * stride - pad + kx;
            const double v = *in++;
            if (iy >= 0 && iy < static_cast<std::ptrdiff_t>(h) && ix >= 0 &&
                ix < static_cast<std::ptrdiff_t>(w)) {
              x.at3(c, static_cast<std::size_t>(iy),
                    static_cast<std::size_t>(ix)) += v;
            }
          }
        }
      }
    }
  }
  return x;
}

void gemm(bool ta, bool tb, std::size_t m, std::size_t n, std::size_t k,
          const double* a, const double* b, double* c) {
  cblas_dgemm(CblasRowMajor, ta ? CblasTrans : CblasNoTrans,
              tb ? CblasTrans : CblasNoTrans, static_cast<int>(m),
              static_cast<int>(n), static_cast<int>(k), 1.0, a,
              static_cast<int>(ta ? m : k), b, static_cast<int>(tb ? k : n),
              0.0, c, static_cast<int>(n));
}

void check_image(const Tensor& x, const char* op) {
  if (x.ndim() != 3) {
    throw std::invalid_argument(std::string(op) + ": expected [C,H,W] input, got " +
                                x.shape_str());
  }
}

void check_kernel(const Tensor& w, const char* op) {
  if (w.ndim() != 4) {
    throw std::invalid_argument(std::string(op) +
                                ": expected [Co,Ci,kh,kw] kernel, got " +
                                w.shape_str());
  }
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

Tensor scale(const Tensor& a, double s) {
  Tensor r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] *= s;
  return r;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "hadamard");
  Tensor r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] *= b[i];
  return r;
}

double sum(const Tensor& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i];
  return s;
}

double mean(const Tensor& a) { return sum(a) / static_cast<double>(a.size()); }

double l2_norm(const Tensor& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * a[i];
  return std::sqrt(s);
}

void axpy(Tensor& a, double s, const Tensor& b) {
  require_same_shape(a, b, "axpy");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += s * b[i];
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.ndim() != 2 || b.ndim() != 2 || a.dim(1) != b.dim(0)) {
    throw std::invalid_argument("matmul: incompatible shapes " + a.shape_str() +
                                " x " + b.shape_str());
  }
  Tensor c({a.dim(0), b.dim(1)});
  gemm(false, false, a.dim(0), b.dim(1), a.dim(1), a.data(), b.data(),
       c.data());
  return c;
}

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& bias, int stride,
              int pad, PadMode mode) {
  check_image(x, "conv2d");
  check_kernel(w, "conv2d");
  const std::size_t co = w.dim(0), ci = w.dim(1), kh = w.dim(2), kw = w.dim(3);
  if (x.dim(0) != ci) {
    throw std::invalid_argument("conv2d: channel mismatch " + x.shape_str() +
                                " vs kernel " + w.shape_str());
  }
  const std::size_t ho = out_extent(x.dim(1), pad, kh, stride);
  const std::size_t wo = out_extent(x.dim(2), pad, kw, stride);
  const Tensor cols = im2col(x, kh, kw, stride, pad, mode, ho, wo);
  Tensor y({co, ho, wo});
  gemm(false, false, co, ho * wo, ci * kh * kw, w.data(), cols.data(),
       y.data());
  if (bias.size() > 0) {
    if (bias.size() != co) {
      throw std::invalid_argument("conv2d: bias size mismatch");
    }
    for (std::size_t c = 0; c < co; ++c) {
      for (std::size_t i = 0; i < ho * wo; ++i) y[c * ho * wo + i] += bias[c];
    }
  }
  return y;
}

Tensor conv2d_transpose(const Tensor& x, const Tensor& w, const Tensor& bias,
                        int stride, int pad, std::size_t out_h,
                        std::size_t out_w) {
  check_image(x, "conv2d_transpose");
  check_kernel(w, "conv2d_transpose");
  const std::size_t co = w.dim(0), ci = w.dim(1), kh = w.dim(2), kw = w.dim(3);
  if (x.dim(0) != co) {
    throw std::invalid_argument("conv2d_transpose: channel mismatch");
  }
  const std::size_t ho = x.dim(1), wo = x.dim(2);
  if (out_extent(out_h, pad, kh, stride) != ho ||
      out_extent(out_w, pad, kw, stride) != wo) {
    throw std::invalid_argument(
        "conv2d_transpose: output size inconsistent with input geometry");
  }
  // cols = W^T * x_mat, then scatter back to image space.
  Tensor cols({ci * kh * kw, ho * wo});
  gemm(true, false, ci * kh * kw, ho * wo, co, w.data(), x.data(),
       cols.data());
  Tensor y = col2im(cols, ci, out_h, out_w, kh, kw, stride, pad, ho, wo);
  if (bias.size() > 0) {
    if (bias.size() != ci) {
      throw std::invalid_argument("conv2d_transpose: bias size mismatch");
    }
    for (std::size_t c = 0; c < ci; ++c) {
      for (std::size_t i = 0; i < out_h * out_w; ++i) {
        y[c * out_h * out_w + i] += bias[c];
      }
    }
  }
  return y;
}

Tensor conv2d_grad_input(const Tensor& dy, const Tensor& w, int stride,
                         int pad, std::size_t in_h, std::size_t in_w) {
  return conv2d_transpose(dy, w, Tensor(), stride, pad, in_h, in_w);
}

Tensor conv2d_grad_kernel(const Tensor& dy, const Tensor& x, int stride,
                          int pad, std::size_t kh, std::size_t kw) {
  check_image(dy, "conv2d_grad_kernel");
  check_image(x, "conv2d_grad_kernel");
  const std::size_t co = dy.dim(0), ho = dy.dim(1), wo = dy.dim(2);
  const std::size_t ci = x.dim(0);
  const Tensor cols = im2col(x, kh, kw, stride, pad, PadMode::Zero, ho, wo);
  Tensor dw({co, ci, kh, kw});
  gemm(false, true, co, ci * kh * kw, ho * wo, dy.data(), cols.data(),
       dw.data());
  return dw;
}

Tensor conv2d_grad_bias(const Tensor& dy) {
  check_image(dy, "conv2d_grad_bias");
  const std::size_t co = dy.dim(0), n = dy.dim(1) * dy.dim(2);
  Tensor db({co});
  for (std::size_t c = 0; c < co; ++c) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += dy[c * n + i];
    db[c] = s;
  }
  return db;
}

Tensor conv2d_transpose_grad_input(const Tensor& dy, const Tensor& w,
                                   int stride, int pad) {
  return conv2d(dy, w, Tensor(), stride, pad, PadMode::Zero);
}

Tensor conv2d_transpose_grad_kernel(const Tensor& dy, const Tensor& x,
                                    int stride, int pad, std::size_t kh,
                                    std::size_t kw) {
  check_image(dy, "conv2d_transpose_grad_kernel");
  check_image(x, "conv2d_transpose_grad_kernel");
  const std::size_t co = x.dim(0), ho = x.dim(1), wo = x.dim(2);
  const std::size_t ci = dy.dim(0);
  const Tensor dcols = im2col(dy, kh, kw, stride, pad, PadMode::Zero, ho, wo);
  // dW[Co, Ci*kh*kw] = x_mat[Co, N] * dcols^T[N, Ci*kh*kw]
  Tensor dw({co, ci, kh, kw});
  gemm(false, true, co, ci * kh * kw, ho * wo, x.data(), dcols.data(),
       dw.data());
  return dw;
}

}  // namespace fasr::ops
