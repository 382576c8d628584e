#pragma once

#include "fasr/rng.hpp"
#include "fasr/tensor.hpp"

namespace fasr {

// Variance-exploding schedule: sigma(t) = sigma_min * (sigma_max/sigma_min)^(t/T).
struct NoiseSchedule {
  double sigma_min = 0.001;
  double sigma_max = 348.0;
  double horizon = 1.0;  // terminal time T

  NoiseSchedule() = default;
  NoiseSchedule(double smin, double smax, double T);

  // Below t_floor the transition kernel variance is numerically singular;
  // training and sampling stay on [t_floor, T].
  double t_floor() const { return 1e-5 * horizon; }

  double sigma(double t) const;
  double diffusion_coeff(double t) const;       // g(t)
  double marginal_var(double t) const;          // sigma^2(t) - sigma^2(0)
  double marginal_std(double t) const;
};

// x_t = x0 + marginal_std(t) * z, z ~ N(0, I).
Tensor perturb(const Tensor& x0, double t, const NoiseSchedule& sched,
               RngStream& rng);

// Same, with the noise realization supplied by the caller.
Tensor perturb_with_noise(const Tensor& x0, double t,
                          const NoiseSchedule& sched, const Tensor& z);

// Exact score of the Gaussian transition kernel: -(x_t - x0) / marginal_var(t).
Tensor analytic_score(const Tensor& x_t, const Tensor& x0, double t,
                      const NoiseSchedule& sched);

}  // namespace fasr
