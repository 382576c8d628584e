#pragma once

#include "fasr/tensor.hpp"

namespace fasr::ops {

enum class PadMode { Zero, Replicate };

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor hadamard(const Tensor& a, const Tensor& b);
double sum(const Tensor& a);
double mean(const Tensor& a);
double l2_norm(const Tensor& a);

// In-place accumulate: a += s * b.
void axpy(Tensor& a, double s, const Tensor& b);

// a: [m,k], b: [k,n] -> [m,n]
Tensor matmul(const Tensor& a, const Tensor& b);

// x: [Ci,H,W], w: [Co,Ci,kh,kw], bias: [Co] (may be empty tensor) -> [Co,Ho,Wo]
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& bias, int stride,
              int pad, PadMode mode = PadMode::Zero);

// Adjoint of conv2d in its input argument. x: [Co,Ho,Wo], w: [Co,Ci,kh,kw],
// bias: [Ci] -> [Ci,out_h,out_w]. Zero padding only.
Tensor conv2d_transpose(const Tensor& x, const Tensor& w, const Tensor& bias,
                        int stride, int pad, std::size_t out_h,
                        std::size_t out_w);

// Gradients of conv2d (zero padding). dy: [Co,Ho,Wo].
Tensor conv2d_grad_input(const Tensor& dy, const Tensor& w, int stride,
                         int pad, std::size_t in_h, std::size_t in_w);
Tensor conv2d_grad_kernel(const Tensor& dy, const Tensor& x, int stride,
                          int pad, std::size_t kh, std::size_t kw);
Tensor conv2d_grad_bias(const Tensor& dy);

// Gradients of conv2d_transpose. dy: [Ci,out_h,out_w], x: [Co,Ho,Wo].
Tensor conv2d_transpose_grad_input(const Tensor& dy, const Tensor& w,
                                   int stride, int pad);
Tensor conv2d_transpose_grad_kernel(const Tensor& dy, const Tensor& x,
                                    int stride, int pad, std::size_t kh,
                                    std::size_t kw);

}  // namespace fasr::ops
