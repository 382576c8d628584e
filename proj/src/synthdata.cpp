#include "fasr/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fasr/io.hpp"
#include "fasr/ops.hpp"

namespace fasr {

namespace {

namespace fs = std::filesystem;


double smoothfall(double edge_hi, double edge_lo, double x) {
  // 1 inside (x <= edge_lo), 0 outside (x >= edge_hi), smooth in between
  const double t = std::clamp((edge_hi - x) / (edge_hi - edge_lo), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

double lerp(double a, double b, double t) { return a + (b - a) * t; }

// Keys cubic, a = -0.5.
double keys(double s) {
  constexpr double a = -0.5;
  s = std::fabs(s);
  if (s <= 1.0) return ((a + 2.0) * s - (a + 3.0)) * s * s + 1.0;
  if (s < 2.0) return (((s - 5.0) * s + 8.0) * s - 4.0) * a;
  return 0.0;
}

// 1-D bicubic upsample by factor r with edge replication; weights are
// normalized so the taps always form a partition of unity.
std::vector<double> upsample_row(const double* src, std::size_t n,
                                 std::size_t r) {
  std::vector<double> out(n * r);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(r) - 0.5;
    const std::ptrdiff_t i0 = static_cast<std::ptrdiff_t>(std::floor(x));
    double num = 0.0, den = 0.0;
    for (std::ptrdiff_t j = i0 - 1; j <= i0 + 2; ++j) {
      const double w = keys(x - static_cast<double>(j));
      const std::ptrdiff_t cj =
          std::clamp<std::ptrdiff_t>(j, 0, static_cast<std::ptrdiff_t>(n) - 1);
      num += w * src[cj];
      den += w;
    }
    out[i] = num / den;
  }
  return out;
}

// Capture noise on the LR path. The render-level nuisance noise is mostly
// averaged away by block-average degradation, so the LR probe and feature
// images get an independent sensor-noise draw in LR space.
void add_capture_noise(Tensor& lr, RngStream& rng) {
  const double std = lerp(0.06, 0.12, rng.uniform());
  for (std::size_t i = 0; i < lr.size(); ++i) {
    lr[i] = std::clamp(lr[i] + std * rng.normal(), 0.0, 1.0);
  }
}

std::string id_stem(const std::string& dir, std::uint64_t id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "id_%05llu",
                static_cast<unsigned long long>(id));
  return dir + "/" + buf;
}

}  // namespace

NuisanceParams NuisanceParams::random(RngStream& rng) {
  NuisanceParams p;
  p.shift_x = static_cast<int>(rng.uniform() * 5.0) - 2;   // {-2..2}
  p.shift_y = static_cast<int>(rng.uniform() * 5.0) - 2;
  p.gain = lerp(0.8, 1.2, rng.uniform());
  p.noise_std = 0.05 * rng.uniform();
  p.shift_x = std::clamp(p.shift_x, -2, 2);
  p.shift_y = std::clamp(p.shift_y, -2, 2);
  return p;
}

Tensor render(const std::vector<double>& latent,
              const NuisanceParams& nuisance, RngStream& rng) {
  if (latent.size() != kLatentDim) {
    throw std::invalid_argument("render: latent must have 8 entries");
  }
  for (double v : latent) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("render: latent values must lie in [0,1]");
    }
  }
  const double face_a = lerp(6.0, 9.5, latent[0]);
  const double face_b = lerp(7.0, 10.5, latent[1]);
  const double eye_dx = lerp(2.5, 4.5, latent[2]);
  const double eye_dy = lerp(2.0, 4.0, latent[3]);
  const double eye_r = lerp(1.2, 2.2, latent[4]);
  const double mouth_curve = lerp(-0.3, 0.3, latent[5]);
  const double mouth_w = lerp(3.0, 6.0, latent[6]);
  const double skin = lerp(0.45, 0.95, latent[7]);
  // large-scale identity cues: framing offset and smooth shading anchored to
  // the face center. These dominate the image energy and keep the feature
  // extractor's similarity ordering stable under the small nuisance shifts.
  const double off_x = 7.0 * (latent[2] - 0.5);
  const double off_y = 7.0 * (latent[5] - 0.5);
  const double grad_x = 1.5 * (latent[6] - 0.5);
  const double grad_y = 1.5 * (latent[3] - 0.5);
  const double radial = 0.6 * (latent[4] - 0.5);
  constexpr double kBg = 0.28;
  const double eye_tone = skin - 0.22;
  const double mouth_tone = skin - 0.18;
  const double cx = 15.5 + off_x + nuisance.shift_x;
  const double cy = 15.5 + off_y + nuisance.shift_y;

  Tensor img({kImageSize, kImageSize});
  for (std::size_t yy = 0; yy < kImageSize; ++yy) {
    for (std::size_t xx = 0; xx < kImageSize; ++xx) {
      const double x = static_cast<double>(xx), y = static_cast<double>(yy);
      const double dx = x - cx, dy = y - cy;
      const double d2 = (dx / face_a) * (dx / face_a) + (dy / face_b) * (dy / face_b);
      // wide transition band (~3 px) keeps small shifts low-energy
      const double face = smoothfall(1.55, 0.55, d2);
      double v = lerp(kBg, skin, face);
      for (int side = -1; side <= 1; side += 2) {
        const double ex = cx + side * eye_dx, ey = cy - eye_dy;
        const double de = std::hypot(x - ex, y - ey);
        v = lerp(v, eye_tone, smoothfall(eye_r + 2.0, eye_r - 0.6, de) * face);
      }
      {
        const double ym = cy + 0.42 * face_b +
                          mouth_curve * (dx * dx) / std::max(mouth_w, 1.0);
        const double dm = std::fabs(y - ym);
        const double across = smoothfall(mouth_w + 2.0, mouth_w - 2.0, std::fabs(dx));
        v = lerp(v, mouth_tone, smoothfall(2.0, 0.4, dm) * across * face);
      }
      // scene-wide illumination field anchored to the face center: under a
      // pure shift a linear field changes only by a constant, which the
      // extractor's mean subtraction removes
      const double shade = 1.0 + grad_x * dx / 16.0 + grad_y * dy / 16.0 +
                           radial * (d2 - 1.0);
      v *= shade * nuisance.gain;
      if (nuisance.noise_std > 0.0) v += nuisance.noise_std * rng.normal();
      img.at2(yy, xx) = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

Tensor degrade(const Tensor& hr, std::size_t scale) {
  if (hr.ndim() != 2) throw std::invalid_argument("degrade: expected [H,W]");
  const std::size_t h = hr.dim(0), w = hr.dim(1);
  if (scale == 0 || h % scale != 0 || w % scale != 0) {
    throw std::invalid_argument("degrade: image side not divisible by scale");
  }
  if (scale == 1) return hr;

  const std::size_t dh = h / scale, dw = w / scale;
  Tensor down({dh, dw});
  const double inv = 1.0 / static_cast<double>(scale * scale);
  for (std::size_t by = 0; by < dh; ++by) {
    for (std::size_t bx = 0; bx < dw; ++bx) {
      double s = 0.0;
      for (std::size_t y = 0; y < scale; ++y) {
        for (std::size_t x = 0; x < scale; ++x) {
          s += hr.at2(by * scale + y, bx * scale + x);
        }
      }
      down.at2(by, bx) = s * inv;
    }
  }

  // separable upsample: rows first, then columns
  Tensor wide({dh, w});
  for (std::size_t y = 0; y < dh; ++y) {
    const auto row = upsample_row(down.data() + y * dw, dw, scale);
    std::copy(row.begin(), row.end(), wide.data() + y * w);
  }
  Tensor out({h, w});
  std::vector<double> col(dh);
  for (std::size_t x = 0; x < w; ++x) {
    for (std::size_t y = 0; y < dh; ++y) col[y] = wide.at2(y, x);
    const auto full = upsample_row(col.data(), dh, scale);
    for (std::size_t y = 0; y < h; ++y) out.at2(y, x) = full[y];
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::clamp(out[i], 0.0, 1.0);
  }
  return out;
}

FeatureExtractor::FeatureExtractor(std::uint64_t extractor_seed,
                                   std::size_t feature_dim,
                                   std::size_t image_size) {
  RngStream rng(extractor_seed, 0);
  projection_ = gaussian(rng, {feature_dim, image_size * image_size});
}

FeatureVector FeatureExtractor::extract(const Tensor& img) const {
  const std::size_t n = projection_.dim(1);
  if (img.size() != n) {
    throw std::invalid_argument("extract: image size does not match extractor");
  }
  const double m = ops::mean(img);
  const std::size_t f = projection_.dim(0);
  Tensor v({f});
  for (std::size_t i = 0; i < f; ++i) {
    double s = 0.0;
    const double* row = projection_.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) s += row[j] * (img[j] - m);
    v[i] = s;
  }
  const double norm = ops::l2_norm(v);
  if (!(norm > 0.0)) {
    throw std::runtime_error("extract: degenerate (zero) feature projection");
  }
  for (std::size_t i = 0; i < f; ++i) v[i] /= norm;
  return {std::move(v)};
}

FeatureVector merge_features(const std::vector<FeatureVector>& features,
                             bool renormalize) {
  if (features.empty()) {
    throw std::invalid_argument("merge_features: empty list");
  }
  const std::size_t f = features.front().values.size();
  Tensor m({f});
  for (const auto& fv : features) {
    if (fv.values.size() != f) {
      throw std::invalid_argument("merge_features: dimension mismatch");
    }
    for (std::size_t i = 0; i < f; ++i) m[i] += fv.values[i];
  }
  const double inv = 1.0 / static_cast<double>(features.size());
  for (std::size_t i = 0; i < f; ++i) m[i] *= inv;
  if (renormalize) {
    const double norm = ops::l2_norm(m);
    if (!(norm > 0.0)) {
      throw std::runtime_error("merge_features: degenerate (zero-norm) mean");
    }
    for (std::size_t i = 0; i < f; ++i) m[i] /= norm;
  }
  return {std::move(m)};
}

Dataset build_dataset(std::size_t n_identities,
                      std::size_t n_images_per_identity, std::uint64_t seed,
                      std::size_t scale) {
  if (n_identities == 0) {
    throw std::invalid_argument("build_dataset: need at least one identity");
  }
  if (n_images_per_identity < 3) {
    throw std::invalid_argument(
        "build_dataset: need >= 3 images per identity (gallery, probe, features)");
  }
  Dataset ds;
  ds.seed = seed;
  ds.scale = scale;
  ds.identities.resize(n_identities);
  for (std::size_t i = 0; i < n_identities; ++i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i));
    IdentityRecord& rec = ds.identities[i];
    rec.id = i;
    rec.latent.resize(kLatentDim);
    for (double& l : rec.latent) l = rng.uniform();
    std::vector<Tensor> renders(n_images_per_identity);
    for (auto& r : renders) {
      const NuisanceParams nu = NuisanceParams::random(rng);
      r = render(rec.latent, nu, rng);
    }
    rec.hr = std::move(renders[0]);
    rec.probe_lr = degrade(renders[1], scale);
    add_capture_noise(rec.probe_lr, rng);
    for (std::size_t j = 2; j < n_images_per_identity; ++j) {
      rec.feature_lr.push_back(degrade(renders[j], scale));
      add_capture_noise(rec.feature_lr.back(), rng);
    }
  }
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& dir,
                  const FeatureExtractor& extractor) {
  fs::create_directories(dir);
  std::ofstream meta(dir + "/meta.txt");
  meta << "seed = " << ds.seed << "\n"
       << "scale = " << ds.scale << "\n"
       << "n_identities = " << ds.identities.size() << "\n";
  std::ofstream csv(dir + "/identities.csv");
  csv << "id,n_feature_images";
  for (std::size_t k = 0; k < kLatentDim; ++k) csv << ",latent" << k;
  csv << "\n";
  csv.precision(17);
  for (const auto& rec : ds.identities) {
    csv << rec.id << "," << rec.feature_lr.size();
    for (double l : rec.latent) csv << "," << l;
    csv << "\n";
    const std::string stem = id_stem(dir, rec.id);
    io::save_pgm(stem + "_gallery.pgm", rec.hr);
    io::save_pgm(stem + "_probe.pgm", rec.probe_lr);
    std::vector<FeatureVector> feats;
    for (std::size_t j = 0; j < rec.feature_lr.size(); ++j) {
      io::save_pgm(stem + "_feat" + std::to_string(j) + ".pgm",
                   rec.feature_lr[j]);
      feats.push_back(extractor.extract(rec.feature_lr[j]));
      io::save_tnsr(stem + "_f" + std::to_string(j) + ".tnsr",
                    feats.back().values);
    }
    io::save_tnsr(stem + "_fm.tnsr", merge_features(feats).values);
  }
}

Dataset load_dataset(const std::string& dir) {
  std::ifstream meta(dir + "/meta.txt");
  if (!meta) throw std::runtime_error("dataset: missing meta.txt in " + dir);
  Dataset ds;
  std::string line;
  while (std::getline(meta, line)) {
    std::istringstream is(line);
    std::string key, eq;
    std::uint64_t value;
    if (is >> key >> eq >> value) {
      if (key == "seed") ds.seed = value;
      if (key == "scale") ds.scale = value;
    }
  }
  std::ifstream csv(dir + "/identities.csv");
  if (!csv) throw std::runtime_error("dataset: missing identities.csv in " + dir);
  std::getline(csv, line);  // header
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string cell;
    IdentityRecord rec;
    std::getline(is, cell, ',');
    rec.id = std::stoull(cell);
    std::getline(is, cell, ',');
    const std::size_t n_feat = std::stoul(cell);
    while (std::getline(is, cell, ',')) rec.latent.push_back(std::stod(cell));
    const std::string stem = id_stem(dir, rec.id);
    rec.hr = io::load_pgm(stem + "_gallery.pgm");
    rec.probe_lr = io::load_pgm(stem + "_probe.pgm");
    for (std::size_t j = 0; j < n_feat; ++j) {
      rec.feature_lr.push_back(
          io::load_pgm(stem + "_feat" + std::to_string(j) + ".pgm"));
    }
    ds.identities.push_back(std::move(rec));
  }
  return ds;
}

}  // namespace fasr
