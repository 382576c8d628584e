#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fasr/rng.hpp"
#include "fasr/tensor.hpp"

namespace fasr {

inline constexpr std::size_t kImageSize = 32;
inline constexpr std::size_t kLatentDim = 8;
inline constexpr std::size_t kFeatureDim = 32;

// Unit-norm identity embedding.
struct FeatureVector {
  Tensor values;  // [feature_dim]
};

struct NuisanceParams {
  int shift_x = 0;              // [-2, 2]
  int shift_y = 0;              // [-2, 2]
  double gain = 1.0;            // [0.8, 1.2]
  double noise_std = 0.0;       // [0, 0.05]

  static NuisanceParams random(RngStream& rng);
};

struct IdentityRecord {
  std::uint64_t id = 0;
  std::vector<double> latent;        // kLatentDim values in [0,1]
  Tensor hr;                         // gallery HR image
  Tensor probe_lr;                   // degraded probe (LR_0)
  std::vector<Tensor> feature_lr;    // degraded images feeding F_1..F_N
};

struct Dataset {
  std::vector<IdentityRecord> identities;
  std::uint64_t seed = 0;
  std::size_t scale = 4;
};

// Renders a 32x32 face-like image from 8 latent controls (ellipse axes, eye
// geometry, mouth curvature, brightness) plus nuisance shift/gain/noise.
Tensor render(const std::vector<double>& latent, const NuisanceParams& nuisance,
              RngStream& rng);

// Block-average downsample by `scale`, bicubic (Keys a=-0.5) upsample back to
// the original size with edge replication, clipped to [0,1].
Tensor degrade(const Tensor& hr, std::size_t scale);

// Fixed random-projection embedder: P * (flattened, mean-subtracted image),
// L2-normalized. Deterministic for a given extractor seed.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(std::uint64_t extractor_seed,
                            std::size_t feature_dim = kFeatureDim,
                            std::size_t image_size = kImageSize);
  FeatureVector extract(const Tensor& img) const;
  std::size_t feature_dim() const { return projection_.dim(0); }

 private:
  Tensor projection_;  // [feature_dim, image_size^2]
};

// Componentwise arithmetic mean, optionally L2-renormalized (default).
FeatureVector merge_features(const std::vector<FeatureVector>& features,
                             bool renormalize = true);

// Per identity: one HR gallery image, one degraded probe, and
// n_images_per_identity - 2 degraded feature images.
Dataset build_dataset(std::size_t n_identities,
                      std::size_t n_images_per_identity, std::uint64_t seed,
                      std::size_t scale = 4);

// Directory layout: identities.csv plus per-identity PGM images and TNSR
// feature dumps.
void save_dataset(const Dataset& ds, const std::string& dir,
                  const FeatureExtractor& extractor);
Dataset load_dataset(const std::string& dir);

}  // namespace fasr
