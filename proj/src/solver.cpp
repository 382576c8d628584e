#include "fasr/solver.hpp"

#include <cmath>

#include "fasr/ops.hpp"

namespace fasr {

Tensor em_reverse_step(const Tensor& x, double t, double dt,
                       const Tensor& score, const NoiseSchedule& sched,
                       RngStream& rng) {
  if (!x.same_shape(score)) {
    throw std::invalid_argument("em_reverse_step: score shape mismatch");
  }
  const double g = sched.diffusion_coeff(t);
  const double drift = g * g * dt;
  const double noise = g * std::sqrt(dt);
  Tensor out = x;
  // Noise draw order is fixed regardless of dt so traces stay comparable.
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] += drift * score[i] + noise * rng.normal();
  }
  return out;
}

Tensor sample(const ScoreFn& score_fn, const std::vector<std::size_t>& shape,
              const SamplerConfig& cfg, RngStream& rng,
              std::vector<TraceRow>* trace) {
  if (cfg.steps < 1) throw std::invalid_argument("sample: steps must be >= 1");
  const NoiseSchedule& sched = cfg.sched;
  const double T = sched.horizon;
  const double t_floor = sched.t_floor();
  const double dt = (T - t_floor) / static_cast<double>(cfg.steps);

  Tensor x = gaussian(rng, shape);
  const double sT = sched.sigma(T);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] *= sT;

  for (std::size_t k = 0; k < cfg.steps; ++k) {
    const double t = T - static_cast<double>(k) * dt;
    if (trace) trace->push_back({k, t, ops::l2_norm(x)});
    const Tensor score = score_fn(x, t);
    x = em_reverse_step(x, t, dt, score, sched, rng);
    if (!x.all_finite()) throw DivergedSample(k, t);
  }
  if (trace) trace->push_back({cfg.steps, t_floor, ops::l2_norm(x)});

  if (cfg.denoise_final) {
    const Tensor score = score_fn(x, t_floor);
    const double s = sched.sigma(t_floor);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += s * s * score[i];
    if (!x.all_finite()) throw DivergedSample(cfg.steps, t_floor);
  }
  return x;
}

}  // namespace fasr
