#include "fasr/checks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fasr/evalkit.hpp"
#include "fasr/ops.hpp"
#include "fasr/solver.hpp"

namespace fasr {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

CheckResult schedule_check(const RunConfig& cfg) {
  CheckResult r{"schedule-closed-forms", false, ""};
  NoiseSchedule sched;
  try {
    sched = cfg.schedule();
  } catch (const std::exception& e) {
    r.detail = std::string("schedule invariant violated: ") + e.what();
    return r;
  }
  const double T = sched.horizon;
  double worst = 0.0;
  auto rel = [](double a, double b) {
    return std::fabs(a - b) / std::max(std::fabs(b), 1e-300);
  };
  worst = std::max(worst, rel(sched.sigma(0.0), sched.sigma_min));
  worst = std::max(worst, rel(sched.sigma(T), sched.sigma_max));
  worst = std::max(worst, rel(sched.sigma(T / 2),
                              std::sqrt(sched.sigma_min * sched.sigma_max)));
  // g(t) against a central finite difference of sigma^2(t)
  for (double t : {0.1 * T, 0.5 * T, 0.9 * T}) {
    const double h = 1e-7 * T;
    const double s1 = sched.sigma(t + h), s0 = sched.sigma(t - h);
    const double fd = std::sqrt((s1 * s1 - s0 * s0) / (2.0 * h));
    worst = std::max(worst, rel(sched.diffusion_coeff(t), fd));
  }
  // log-linearity of sigma(t)
  const double slope = std::log(sched.sigma_max / sched.sigma_min) / T;
  for (int i = 0; i <= 20; ++i) {
    const double t = T * i / 20.0;
    const double expect = std::log(sched.sigma_min) + slope * t;
    worst = std::max(worst, rel(std::log(sched.sigma(t)), expect));
  }
  r.pass = worst < 1e-6;
  r.detail = "max rel err " + fmt(worst);
  return r;
}

CheckResult analytic_score_check(const RunConfig& cfg) {
  CheckResult r{"analytic-score-vs-fd", false, ""};
  const NoiseSchedule sched = cfg.schedule();
  RngStream rng(2024, 0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double t = sched.t_floor() +
                     rng.uniform() * (sched.horizon - sched.t_floor());
    const double x0v = 2.0 * rng.normal();
    const double var = sched.marginal_var(t);
    const double xtv = x0v + std::sqrt(var) * rng.normal();
    const Tensor score = analytic_score(Tensor::scalar(xtv),
                                        Tensor::scalar(x0v), t, sched);
    // central difference of log N(x; x0, var)
    const double h = 1e-5 * std::max(1.0, std::fabs(xtv)) * std::sqrt(var);
    auto logp = [&](double x) {
      return -0.5 * (x - x0v) * (x - x0v) / var;
    };
    const double fd = (logp(xtv + h) - logp(xtv - h)) / (2.0 * h);
    const double denom = std::max({std::fabs(fd), std::fabs(score[0]), 1e-12});
    worst = std::max(worst, std::fabs(score[0] - fd) / denom);
  }
  r.pass = worst < 1e-5;
  r.detail = "max rel err " + fmt(worst);
  return r;
}

CheckResult forward_sde_variance_check(const RunConfig& cfg) {
  CheckResult r{"forward-sde-variance", false, ""};
  const NoiseSchedule sched = cfg.schedule();
  const std::size_t steps = 500, trials = 4000;
  const double t_end = sched.horizon;
  const double dt = t_end / static_cast<double>(steps);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t k = 0; k < trials; ++k) {
    RngStream rng(99, k);
    double x = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
      const double t = s * dt;
      x += sched.diffusion_coeff(t) * std::sqrt(dt) * rng.normal();
    }
    sum += x;
    sum2 += x * x;
  }
  const double n = static_cast<double>(trials);
  const double var = sum2 / n - (sum / n) * (sum / n);
  const double expect = sched.marginal_var(t_end);
  const double rel = std::fabs(var - expect) / expect;
  r.pass = rel < 0.08;
  r.detail = "var rel diff " + fmt(rel);
  return r;
}

CheckResult gradient_check(const RunConfig&) {
  CheckResult r{"network-gradient-check", false, ""};
  ArchDescriptor arch;
  arch.base_channels = 4;
  arch.levels = 3;
  arch.embed_dim = 8;
  arch.feature_dim = 4;
  std::string worst;
  const double err = gradient_check_max_rel_error(arch, 8, 7, &worst);
  r.pass = err < 1e-4;
  r.detail = "max rel err " + fmt(err) + " (" + worst + ")";
  return r;
}

CheckResult metric_oracle_check(const RunConfig&) {
  CheckResult r{"metric-oracles", false, ""};
  RngStream rng(5, 0);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> genuine(8), impostor(13);
    for (auto& v : genuine) v = std::floor(rng.uniform() * 10.0) / 10.0;
    for (auto& v : impostor) v = std::floor(rng.uniform() * 10.0) / 10.0;
    // brute-force all-pairs oracle
    double wins = 0.0;
    for (double g : genuine) {
      for (double i : impostor) wins += g > i ? 1.0 : (g == i ? 0.5 : 0.0);
    }
    const double oracle = wins / (genuine.size() * impostor.size());
    if (verification_auc(genuine, impostor) != oracle) {
      r.detail = "AUC mismatch at rep " + std::to_string(rep);
      return r;
    }
    // CMC against a sort oracle
    SimilarityMatrix sim;
    sim.values = Tensor({10, 10});
    for (std::size_t i = 0; i < sim.values.size(); ++i) {
      sim.values[i] = std::floor(rng.uniform() * 8.0);
    }
    sim.truth.resize(10);
    for (auto& t : sim.truth) t = static_cast<std::size_t>(rng.uniform() * 10.0) % 10;
    for (std::size_t k : {std::size_t{1}, std::size_t{5}, std::size_t{10}}) {
      std::size_t hits = 0;
      for (std::size_t row = 0; row < 10; ++row) {
        std::vector<std::size_t> order(10);
        for (std::size_t c = 0; c < 10; ++c) order[c] = c;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) {
                           return sim.values.at2(row, a) > sim.values.at2(row, b);
                         });
        for (std::size_t pos = 0; pos < k; ++pos) {
          if (order[pos] == sim.truth[row]) {
            ++hits;
            break;
          }
        }
      }
      const double oracle_cmc = hits / 10.0;
      if (cmc_rank_k(sim, k) != oracle_cmc) {
        r.detail = "CMC mismatch at rep " + std::to_string(rep) +
                   " k=" + std::to_string(k);
        return r;
      }
    }
  }
  r.pass = true;
  r.detail = "exact match on all cases";
  return r;
}

}  // namespace

double gradient_check_max_rel_error(const ArchDescriptor& arch,
                                    std::size_t image_size, std::uint64_t seed,
                                    std::string* worst_param) {
  const NoiseSchedule sched;
  RngStream init(seed, 0);
  ScoreNetwork net(arch, init);
  // Random weights everywhere, including the normally zero-initialized head,
  // so every path carries signal.
  RngStream wiggle(seed, 1);
  for (auto& [name, t] : net.params()) {
    for (std::size_t i = 0; i < t.size(); ++i) t[i] += 0.05 * wiggle.normal();
  }

  RngStream data(seed, 2);
  const Tensor x_t = gaussian(data, {image_size, image_size});
  const Tensor y = gaussian(data, {image_size, image_size});
  const Tensor feat = gaussian(data, {arch.feature_dim});
  const double t = 0.37 * sched.horizon;
  const Tensor w = gaussian(data, {image_size, image_size});

  auto loss = [&]() {
    const Tensor u = net.forward_raw(x_t, y, feat, t, sched);
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += w[i] * u[i];
    return s;
  };

  ForwardCache cache;
  net.forward_raw(x_t, y, feat, t, sched, &cache);
  const ParamMap grads = net.backward(cache, w);

  const double h = 1e-5;
  double worst = 0.0;
  for (auto& [name, param] : net.params()) {
    const Tensor& g = grads.at(name);
    for (std::size_t i = 0; i < param.size(); ++i) {
      const double orig = param[i];
      param[i] = orig + h;
      const double lp = loss();
      param[i] = orig - h;
      const double lm = loss();
      param[i] = orig;
      const double fd = (lp - lm) / (2.0 * h);
      const double denom = std::max({std::fabs(fd), std::fabs(g[i]), 1e-6});
      const double rel = std::fabs(g[i] - fd) / denom;
      if (rel > worst) {
        worst = rel;
        if (worst_param) *worst_param = name;
      }
    }
  }
  return worst;
}

std::vector<CheckResult> run_diagnostics(const RunConfig& cfg) {
  using Check = CheckResult (*)(const RunConfig&);
  const Check checks[] = {schedule_check, analytic_score_check,
                          forward_sde_variance_check, gradient_check,
                          metric_oracle_check};
  const char* names[] = {"schedule-closed-forms", "analytic-score-vs-fd",
                         "forward-sde-variance", "network-gradient-check",
                         "metric-oracles"};
  std::vector<CheckResult> results;
  for (std::size_t i = 0; i < std::size(checks); ++i) {
    try {
      results.push_back(checks[i](cfg));
    } catch (const std::exception& e) {
      results.push_back({names[i], false, e.what()});
    }
  }
  return results;
}

}  // namespace fasr
