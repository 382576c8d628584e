#pragma once

#include <iosfwd>
#include <string>

#include "fasr/tensor.hpp"

namespace fasr::io {

// "TNSR" binary format: magic, u32 LE ndim, ndim x u32 LE dims, float32 LE
// payload. Writing narrows to float32; reading widens back to float64.
void write_tnsr(std::ostream& os, const Tensor& t);
Tensor read_tnsr(std::istream& is);
void save_tnsr(const std::string& path, const Tensor& t);
Tensor load_tnsr(const std::string& path);

// 8-bit binary PGM (P5). Values are clipped to [0,1] and quantized on write.
void save_pgm(const std::string& path, const Tensor& img);
Tensor load_pgm(const std::string& path);

}  // namespace fasr::io
