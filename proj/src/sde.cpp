#include "fasr/sde.hpp"

#include <cmath>
#include <stdexcept>

namespace fasr {

namespace {

void check_time(const NoiseSchedule& s, double t) {
  if (!(t >= 0.0 && t <= s.horizon)) {
    throw std::invalid_argument("NoiseSchedule: t outside [0, T]");
  }
}

}  // namespace

NoiseSchedule::NoiseSchedule(double smin, double smax, double T)
    : sigma_min(smin), sigma_max(smax), horizon(T) {
  if (!(sigma_min > 0.0 && sigma_min < sigma_max)) {
    throw std::invalid_argument("NoiseSchedule: need 0 < sigma_min < sigma_max");
  }
  if (!(horizon > 0.0)) {
    throw std::invalid_argument("NoiseSchedule: need T > 0");
  }
}

double NoiseSchedule::sigma(double t) const {
  check_time(*this, t);
  return sigma_min * std::pow(sigma_max / sigma_min, t / horizon);
}

double NoiseSchedule::diffusion_coeff(double t) const {
  // g(t) = sqrt(d sigma^2 / dt) = sigma(t) * sqrt(2 ln(smax/smin) / T)
  return sigma(t) * std::sqrt(2.0 * std::log(sigma_max / sigma_min) / horizon);
}

double NoiseSchedule::marginal_var(double t) const {
  const double s = sigma(t);
  return s * s - sigma_min * sigma_min;
}

double NoiseSchedule::marginal_std(double t) const {
  return std::sqrt(marginal_var(t));
}

Tensor perturb(const Tensor& x0, double t, const NoiseSchedule& sched,
               RngStream& rng) {
  Tensor z = gaussian(rng, x0.shape());
  return perturb_with_noise(x0, t, sched, z);
}

Tensor perturb_with_noise(const Tensor& x0, double t,
                          const NoiseSchedule& sched, const Tensor& z) {
  if (!x0.same_shape(z)) {
    throw std::invalid_argument("perturb: noise shape mismatch");
  }
  const double s = sched.marginal_std(t);
  Tensor x = x0;
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += s * z[i];
  return x;
}

Tensor analytic_score(const Tensor& x_t, const Tensor& x0, double t,
                      const NoiseSchedule& sched) {
  if (!x_t.same_shape(x0)) {
    throw std::invalid_argument("analytic_score: shape mismatch");
  }
  if (t <= sched.t_floor()) {
    throw std::invalid_argument(
        "analytic_score: t at or below t_floor, kernel numerically singular");
  }
  const double var = sched.marginal_var(t);
  Tensor s = x_t;
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = -(x_t[i] - x0[i]) / var;
  }
  return s;
}

}  // namespace fasr
