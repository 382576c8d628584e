#include "fasr/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace fasr::io {

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("TNSR: truncated header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_tnsr(std::ostream& os, const Tensor& t) {
  os.write("TNSR", 4);
  put_u32(os, static_cast<std::uint32_t>(t.ndim()));
  for (std::size_t d : t.shape()) put_u32(os, static_cast<std::uint32_t>(d));
  std::vector<float> payload(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    payload[i] = static_cast<float>(t[i]);
  }
  static_assert(sizeof(float) == 4);
  os.write(reinterpret_cast<const char*>(payload.data()),
           static_cast<std::streamsize>(payload.size() * 4));
}

Tensor read_tnsr(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "TNSR", 4) != 0) {
    throw std::runtime_error("TNSR: bad magic");
  }
  const std::uint32_t ndim = get_u32(is);
  if (ndim == 0 || ndim > 8) throw std::runtime_error("TNSR: bad ndim");
  std::vector<std::size_t> shape(ndim);
  for (auto& d : shape) {
    d = get_u32(is);
    if (d == 0) throw std::runtime_error("TNSR: zero dimension");
  }
  const std::size_t n = Tensor::product(shape);
  std::vector<float> payload(n);
  is.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(n * 4));
  if (!is) throw std::runtime_error("TNSR: truncated payload");
  Tensor t(shape);
  for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(payload[i]);
  return t;
}

void save_tnsr(const std::string& path, const Tensor& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  write_tnsr(os, t);
  if (!os) throw std::runtime_error("write failed: " + path);
}

Tensor load_tnsr(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  return read_tnsr(is);
}

void save_pgm(const std::string& path, const Tensor& img) {
  if (img.ndim() != 2 && !(img.ndim() == 3 && img.dim(0) == 1)) {
    throw std::invalid_argument("save_pgm: expected a single-channel image");
  }
  const std::size_t h = img.ndim() == 2 ? img.dim(0) : img.dim(1);
  const std::size_t w = img.ndim() == 2 ? img.dim(1) : img.dim(2);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os << "P5\n" << w << " " << h << "\n255\n";
  for (std::size_t i = 0; i < h * w; ++i) {
    const double v = std::clamp(img[i], 0.0, 1.0);
    os.put(static_cast<char>(std::lround(v * 255.0)));
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

Tensor load_pgm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  std::string magic;
  is >> magic;
  if (magic != "P5") throw std::runtime_error("PGM: expected P5: " + path);
  std::size_t w = 0, h = 0, maxval = 0;
  is >> w >> h >> maxval;
  if (!is || w == 0 || h == 0 || maxval != 255) {
    throw std::runtime_error("PGM: unsupported header: " + path);
  }
  is.get();  // single whitespace after maxval
  std::vector<char> raw(w * h);
  is.read(raw.data(), static_cast<std::streamsize>(raw.size()));
  if (!is) throw std::runtime_error("PGM: truncated payload: " + path);
  Tensor img({h, w});
  for (std::size_t i = 0; i < h * w; ++i) {
    img[i] = static_cast<double>(static_cast<unsigned char>(raw[i])) / 255.0;
  }
  return img;
}

}  // namespace fasr::io
