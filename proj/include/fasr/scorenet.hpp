#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "fasr/rng.hpp"
#include "fasr/sde.hpp"
#include "fasr/tensor.hpp"

namespace fasr {

struct ArchDescriptor {
  std::size_t image_channels = 1;
  std::size_t base_channels = 16;
  std::size_t levels = 3;
  std::size_t embed_dim = 64;
  std::size_t feature_dim = 32;

  std::size_t in_channels() const { return 2 * image_channels; }
  std::size_t channels_at(std::size_t level) const {
    return base_channels << level;
  }
  void validate() const;
  bool operator==(const ArchDescriptor&) const = default;
};

using ParamMap = std::map<std::string, Tensor>;

// Sinusoidal embedding of the normalized log noise level ln sigma(t) / ln sigma_max.
Tensor time_embedding(double t, std::size_t embed_dim,
                      const NoiseSchedule& sched);

namespace detail {

struct BlockCache {
  Tensor in;        // conv input
  Tensor conv_out;  // pre-injection
  Tensor injected;  // pre-activation
  Tensor gamma, beta;
};

struct LevelCache {
  Tensor e;  // combined time/feature embedding for the level
  std::array<BlockCache, 2> blocks;
};

}  // namespace detail

// Activation cache written by a training-mode forward pass.
struct ForwardCache {
  Tensor input;  // channel-concat(x_t, y)
  Tensor temb;
  Tensor feat;
  Tensor in_pre;
  std::vector<detail::LevelCache> enc;
  std::vector<Tensor> down_in, down_pre;
  std::vector<Tensor> up_in, up_pre;
  std::vector<detail::LevelCache> dec;
  std::vector<std::array<std::size_t, 2>> skip_hw;
  Tensor out_in;
  bool valid = false;
};

// Conditional score estimator: encoder-decoder with skip connections,
// LR conditioning by channel concatenation, and per-level injection of a
// learned combination of the time embedding and the identity feature vector
// as channel-wise scale and shift.
class ScoreNetwork {
 public:
  ScoreNetwork(ArchDescriptor arch, RngStream& rng);
  ScoreNetwork(ArchDescriptor arch, ParamMap params);

  const ArchDescriptor& arch() const { return arch_; }
  ParamMap& params() { return params_; }
  const ParamMap& params() const { return params_; }

  // Closed-form parameter count for an architecture (kept in sync with the
  // layer inventory; checked by tests against the realized parameters).
  static std::size_t param_count(const ArchDescriptor& arch);

  // Raw head output U with the same shape as x_t.
  Tensor forward_raw(const Tensor& x_t, const Tensor& y, const Tensor& feat,
                     double t, const NoiseSchedule& sched,
                     ForwardCache* cache = nullptr) const;

  // Score estimate s = U / marginal_std(t).
  Tensor forward(const Tensor& x_t, const Tensor& y, const Tensor& feat,
                 double t, const NoiseSchedule& sched) const;

  // Gradients of a scalar loss with respect to every parameter, given the
  // gradient with respect to the raw head output.
  ParamMap backward(const ForwardCache& cache, const Tensor& d_raw) const;

  void save(const std::string& path) const;
  static ScoreNetwork load(const std::string& path);

 private:
  ArchDescriptor arch_;
  ParamMap params_;

  const Tensor& p(const std::string& name) const;
};

// Checkpoint container: magic "FASRCKPT", u32 LE record count, then records
// of (u16 LE name length, name bytes, TNSR blob).
void write_checkpoint(const std::string& path, const ParamMap& records);
ParamMap read_checkpoint(const std::string& path);

// Zero-valued gradient accumulator shaped like the given parameters.
ParamMap zeros_like(const ParamMap& params);

}  // namespace fasr
