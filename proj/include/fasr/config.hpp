#pragma once

#include <cstdint>
#include <string>

#include "fasr/scorenet.hpp"
#include "fasr/sde.hpp"
#include "fasr/solver.hpp"
#include "fasr/training.hpp"

namespace fasr {

// Flat key = value run configuration. Unknown keys are rejected; any key can
// be overridden from the environment as FASR_<KEY-IN-UPPER-CASE>.
struct RunConfig {
  // schedule
  double sigma_min = 0.001;
  double sigma_max = 348.0;
  double time_horizon = 1.0;
  // sampler
  std::size_t sampler_steps = 2000;
  bool denoise_final = true;
  // architecture
  std::size_t base_channels = 16;
  std::size_t levels = 3;
  std::size_t embed_dim = 64;
  std::size_t feature_dim = 32;
  // training
  std::size_t train_steps = 2000;
  std::size_t batch_size = 4;
  double learning_rate = 2e-4;
  double ema_decay = 0.999;
  std::size_t log_interval = 50;
  std::size_t checkpoint_interval = 0;
  // dataset
  std::size_t n_identities = 200;
  std::size_t n_images_per_identity = 7;
  std::size_t scale = 4;
  bool merge_renorm = true;
  // run control
  std::uint64_t seed = 0;
  std::uint64_t extractor_seed = 1234;
  std::size_t threads = 1;

  static RunConfig load(const std::string& path);  // parse + env overrides
  static RunConfig defaults_with_env();
  void set(const std::string& key, const std::string& value);

  NoiseSchedule schedule() const {
    return NoiseSchedule(sigma_min, sigma_max, time_horizon);
  }
  ArchDescriptor arch() const;
  SamplerConfig sampler() const;
  TrainConfig train_config() const;

  std::string to_string() const;          // resolved key = value echo
  void save(const std::string& path) const;
};

}  // namespace fasr
