#include "fasr/training.hpp"

#include <cmath>
#include <fstream>
#include <thread>

#include "fasr/ops.hpp"

namespace fasr {

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEps = 1e-8;
constexpr double kLossSmoothing = 0.98;

// Stream ids: one per (step, example) pair so the thread count can never
// change a draw; the high slot is reserved for batch selection.
constexpr std::uint64_t kStreamsPerStep = 1u << 20;

std::uint64_t example_stream(std::uint64_t step, std::size_t j) {
  return step * kStreamsPerStep + 1 + static_cast<std::uint64_t>(j);
}

std::uint64_t selection_stream(std::uint64_t step) {
  return step * kStreamsPerStep;
}

struct ExampleResult {
  double loss = 0.0;
  ParamMap grads;
};

ExampleResult example_loss(const ScoreNetwork& net, const TrainExample& ex,
                           const NoiseSchedule& sched, std::uint64_t seed,
                           std::uint64_t stream, double inv_batch) {
  RngStream rng(seed, stream);
  const double t_floor = sched.t_floor();
  const double t = t_floor + rng.uniform() * (sched.horizon - t_floor);
  Tensor z = gaussian(rng, ex.x0.shape());
  const Tensor x_t = perturb_with_noise(ex.x0, t, sched, z);

  ForwardCache cache;
  Tensor u = net.forward_raw(x_t, ex.y, ex.feat, t, sched, &cache);

  ExampleResult r;
  Tensor d_u = u;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double resid = u[i] + z[i];
    r.loss += resid * resid;
    d_u[i] = 2.0 * resid * inv_batch;
  }
  r.grads = net.backward(cache, d_u);
  return r;
}

}  // namespace

void TrainConfig::validate() const {
  if (steps < 1 || batch_size < 1 || !(learning_rate > 0.0)) {
    throw std::invalid_argument(
        "TrainConfig: need steps >= 1, batch_size >= 1, learning_rate > 0");
  }
  if (!(ema_decay >= 0.0 && ema_decay < 1.0)) {
    throw std::invalid_argument("TrainConfig: ema_decay must be in [0, 1)");
  }
  if (threads < 1) throw std::invalid_argument("TrainConfig: threads >= 1");
}

std::pair<double, ParamMap> dsm_loss(
    const ScoreNetwork& net, const std::vector<const TrainExample*>& batch,
    const NoiseSchedule& sched, std::uint64_t seed, std::uint64_t step_index,
    std::size_t threads) {
  if (batch.empty()) throw std::invalid_argument("dsm_loss: empty batch");
  const std::size_t b = batch.size();
  const double inv_batch = 1.0 / static_cast<double>(b);
  std::vector<ExampleResult> results(b);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      results[j] = example_loss(net, *batch[j], sched, seed,
                                example_stream(step_index, j), inv_batch);
    }
  };
  if (threads <= 1 || b == 1) {
    work(0, b);
  } else {
    const std::size_t nt = std::min(threads, b);
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < nt; ++k) {
      const std::size_t begin = b * k / nt, end = b * (k + 1) / nt;
      pool.emplace_back(work, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  // Fixed-order reduction keeps results independent of the thread count.
  double loss = 0.0;
  ParamMap grads = std::move(results[0].grads);
  loss += results[0].loss;
  for (std::size_t j = 1; j < b; ++j) {
    loss += results[j].loss;
    for (auto& [name, gt] : grads) ops::axpy(gt, 1.0, results[j].grads.at(name));
  }
  return {loss * inv_batch, std::move(grads)};
}

Trainer::Trainer(ScoreNetwork net, NoiseSchedule sched, TrainConfig cfg)
    : net_(std::move(net)), sched_(sched), cfg_(cfg) {
  cfg_.validate();
  m_ = zeros_like(net_.params());
  v_ = zeros_like(net_.params());
  ema_ = net_.params();
  step_ = cfg_.start_step;
}

void Trainer::adam_update(const ParamMap& grads) {
  ++adam_t_;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(adam_t_));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(adam_t_));
  for (auto& [name, param] : net_.params()) {
    const Tensor& g = grads.at(name);
    Tensor& m = m_.at(name);
    Tensor& v = v_.at(name);
    Tensor& e = ema_.at(name);
    for (std::size_t i = 0; i < param.size(); ++i) {
      m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
      v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      param[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + kEps);
      e[i] = cfg_.ema_decay > 0.0
                 ? cfg_.ema_decay * e[i] + (1.0 - cfg_.ema_decay) * param[i]
                 : param[i];
    }
  }
}

void Trainer::run(const std::vector<TrainExample>& dataset) {
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
  const std::size_t end_step = cfg_.start_step + cfg_.steps;
  while (step_ < end_step) {
    RngStream sel(cfg_.seed, selection_stream(step_));
    std::vector<const TrainExample*> batch(cfg_.batch_size);
    for (auto& e : batch) {
      std::size_t idx = static_cast<std::size_t>(sel.uniform() *
                                                 static_cast<double>(dataset.size()));
      if (idx >= dataset.size()) idx = dataset.size() - 1;
      e = &dataset[idx];
    }
    auto [loss, grads] =
        dsm_loss(net_, batch, sched_, cfg_.seed, step_, cfg_.threads);
    if (!std::isfinite(loss)) throw TrainingDiverged(step_);
    adam_update(grads);
    ++step_;

    ema_loss_ = ema_loss_ < 0.0
                    ? loss
                    : kLossSmoothing * ema_loss_ + (1.0 - kLossSmoothing) * loss;
    if (cfg_.log_interval > 0 &&
        (step_ % cfg_.log_interval == 0 || step_ == end_step ||
         step_ == cfg_.start_step + 1)) {
      trace_.push_back({step_, loss, ema_loss_});
    }
    if (!cfg_.checkpoint_path.empty() && cfg_.checkpoint_interval > 0 &&
        step_ % cfg_.checkpoint_interval == 0) {
      save_checkpoint(cfg_.checkpoint_path);
    }
  }
  if (!cfg_.checkpoint_path.empty()) save_checkpoint(cfg_.checkpoint_path);
}

ScoreNetwork Trainer::ema_net() const {
  return ScoreNetwork(net_.arch(), ema_);
}

void Trainer::save_checkpoint(const std::string& path) const {
  ParamMap records = net_.params();
  const ArchDescriptor& a = net_.arch();
  records.emplace("__arch__",
                  Tensor({5}, {static_cast<double>(a.image_channels),
                               static_cast<double>(a.base_channels),
                               static_cast<double>(a.levels),
                               static_cast<double>(a.embed_dim),
                               static_cast<double>(a.feature_dim)}));
  records.emplace("__step__",
                  Tensor({2}, {static_cast<double>(step_),
                               static_cast<double>(adam_t_)}));
  for (const auto& [name, t] : m_) records.emplace("__m__." + name, t);
  for (const auto& [name, t] : v_) records.emplace("__v__." + name, t);
  for (const auto& [name, t] : ema_) records.emplace("__ema__." + name, t);
  write_checkpoint(path, records);
}

Trainer Trainer::resume(const std::string& path, NoiseSchedule sched,
                        TrainConfig cfg) {
  ScoreNetwork net = ScoreNetwork::load(path);
  ParamMap records = read_checkpoint(path);
  Trainer tr(std::move(net), sched, cfg);
  auto step_it = records.find("__step__");
  if (step_it != records.end() && step_it->second.size() == 2) {
    tr.step_ = static_cast<std::size_t>(step_it->second[0]);
    tr.adam_t_ = static_cast<std::size_t>(step_it->second[1]);
    tr.cfg_.start_step = tr.step_;
  }
  for (auto& [name, t] : tr.m_) {
    auto it = records.find("__m__." + name);
    if (it != records.end()) t = it->second;
  }
  for (auto& [name, t] : tr.v_) {
    auto it = records.find("__v__." + name);
    if (it != records.end()) t = it->second;
  }
  for (auto& [name, t] : tr.ema_) {
    auto it = records.find("__ema__." + name);
    if (it != records.end()) t = it->second;
  }
  return tr;
}

void Trainer::write_trace_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os << "step,loss,ema_loss\n";
  for (const auto& row : trace_) {
    os << row.step << "," << row.loss << "," << row.ema_loss << "\n";
  }
}

}  // namespace fasr
