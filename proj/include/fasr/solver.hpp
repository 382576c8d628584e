#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "fasr/sde.hpp"

namespace fasr {

struct SamplerConfig {
  std::size_t steps = 2000;
  NoiseSchedule sched;
  bool denoise_final = true;
};

struct DivergedSample : std::runtime_error {
  DivergedSample(std::size_t step_index, double t)
      : std::runtime_error("sample diverged at step " +
                           std::to_string(step_index)),
        step(step_index),
        time(t) {}
  std::size_t step;
  double time;
};

struct TraceRow {
  std::size_t step;
  double t;
  double norm;
};

using ScoreFn = std::function<Tensor(const Tensor&, double)>;

// One reverse-time Euler-Maruyama update of dx = -g^2 * score dt + g dw.
Tensor em_reverse_step(const Tensor& x, double t, double dt,
                       const Tensor& score, const NoiseSchedule& sched,
                       RngStream& rng);

// Integrate the reverse SDE from t=T down to t_floor starting from
// sigma(T) * z. Throws DivergedSample if any state goes non-finite.
Tensor sample(const ScoreFn& score_fn, const std::vector<std::size_t>& shape,
              const SamplerConfig& cfg, RngStream& rng,
              std::vector<TraceRow>* trace = nullptr);

}  // namespace fasr
