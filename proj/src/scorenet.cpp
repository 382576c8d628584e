#include "fasr/scorenet.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "fasr/io.hpp"
#include "fasr/ops.hpp"

namespace fasr {

namespace {

Tensor as_chw(const Tensor& t, std::size_t channels, const char* what) {
  if (t.ndim() == 3 && t.dim(0) == channels) return t;
  if (t.ndim() == 2 && channels == 1) {
    Tensor r({1, t.dim(0), t.dim(1)});
    std::memcpy(r.data(), t.data(), t.size() * sizeof(double));
    return r;
  }
  throw std::invalid_argument(std::string(what) + ": expected " +
                              std::to_string(channels) + "-channel image, got " +
                              t.shape_str());
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  if (a.dim(1) != b.dim(1) || a.dim(2) != b.dim(2)) {
    throw std::invalid_argument("concat: spatial shape mismatch");
  }
  Tensor r({a.dim(0) + b.dim(0), a.dim(1), a.dim(2)});
  std::memcpy(r.data(), a.data(), a.size() * sizeof(double));
  std::memcpy(r.data() + a.size(), b.data(), b.size() * sizeof(double));
  return r;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Tensor silu(const Tensor& x) {
  Tensor r = x;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = x[i] * sigmoid(x[i]);
  return r;
}

// d ⊙ silu'(pre)
Tensor silu_grad_times(const Tensor& pre, const Tensor& d) {
  Tensor r = d;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double s = sigmoid(pre[i]);
    r[i] = d[i] * s * (1.0 + pre[i] * (1.0 - s));
  }
  return r;
}

Tensor matvec(const Tensor& w, const Tensor& v) {
  const std::size_t m = w.dim(0), n = w.dim(1);
  Tensor r({m});
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += w[i * n + j] * v[j];
    r[i] = s;
  }
  return r;
}

Tensor matvec_t(const Tensor& w, const Tensor& v) {
  const std::size_t m = w.dim(0), n = w.dim(1);
  Tensor r({n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) r[j] += w[i * n + j] * v[i];
  }
  return r;
}

void add_outer(Tensor& acc, const Tensor& u, const Tensor& v) {
  const std::size_t m = u.size(), n = v.size();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) acc[i * n + j] += u[i] * v[j];
  }
}

std::string enc_prefix(std::size_t l) { return "enc" + std::to_string(l); }
std::string dec_prefix(std::size_t l) { return "dec" + std::to_string(l); }

// Parameter shapes for one injection block (conv + scale/shift projections).
void block_shapes(ParamMap& m, const std::string& prefix, std::size_t cin,
                  std::size_t cout, std::size_t embed_dim) {
  m.emplace(prefix + ".w", Tensor({cout, cin, 3, 3}));
  m.emplace(prefix + ".b", Tensor({cout}));
  m.emplace(prefix + ".gw", Tensor({cout, embed_dim}));
  m.emplace(prefix + ".gb", Tensor({cout}));
  m.emplace(prefix + ".sw", Tensor({cout, embed_dim}));
  m.emplace(prefix + ".sb", Tensor({cout}));
}

ParamMap build_param_shapes(const ArchDescriptor& a) {
  ParamMap m;
  const std::size_t L = a.levels, E = a.embed_dim, F = a.feature_dim;
  m.emplace("in.w", Tensor({a.channels_at(0), a.in_channels(), 3, 3}));
  m.emplace("in.b", Tensor({a.channels_at(0)}));
  for (std::size_t l = 0; l < L; ++l) {
    const std::size_t c = a.channels_at(l);
    m.emplace(enc_prefix(l) + ".wt", Tensor({E, E}));
    m.emplace(enc_prefix(l) + ".wf", Tensor({E, F}));
    block_shapes(m, enc_prefix(l) + ".b0", c, c, E);
    block_shapes(m, enc_prefix(l) + ".b1", c, c, E);
  }
  for (std::size_t l = 0; l + 1 < L; ++l) {
    const std::size_t c = a.channels_at(l), cn = a.channels_at(l + 1);
    m.emplace("down" + std::to_string(l) + ".w", Tensor({cn, c, 3, 3}));
    m.emplace("down" + std::to_string(l) + ".b", Tensor({cn}));
    m.emplace("up" + std::to_string(l) + ".w", Tensor({cn, c, 3, 3}));
    m.emplace("up" + std::to_string(l) + ".b", Tensor({c}));
    m.emplace(dec_prefix(l) + ".wt", Tensor({E, E}));
    m.emplace(dec_prefix(l) + ".wf", Tensor({E, F}));
    block_shapes(m, dec_prefix(l) + ".b0", 2 * c, c, E);
    block_shapes(m, dec_prefix(l) + ".b1", c, c, E);
  }
  m.emplace("out.w", Tensor({a.image_channels, a.channels_at(0), 3, 3}));
  m.emplace("out.b", Tensor({a.image_channels}));
  return m;
}

void init_params(ParamMap& m, const ArchDescriptor& a, RngStream& rng) {
  for (auto& [name, t] : m) {
    const bool zero_init = name == "out.w" || name == "out.b" ||
                           name.ends_with(".gw") || name.ends_with(".gb") ||
                           name.ends_with(".sw") || name.ends_with(".sb") ||
                           name.ends_with(".b");
    if (zero_init) continue;
    double std = 0.0;
    if (name.ends_with(".wt")) {
      std = 1.0 / std::sqrt(static_cast<double>(a.embed_dim));
    } else if (name.ends_with(".wf")) {
      std = 1.0 / std::sqrt(static_cast<double>(a.feature_dim));
    } else {
      const std::size_t fan_in = t.dim(1) * t.dim(2) * t.dim(3);
      std = std::sqrt(2.0 / static_cast<double>(fan_in));
    }
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = std * rng.normal();
  }
}

}  // namespace

void ArchDescriptor::validate() const {
  if (image_channels == 0 || base_channels == 0 || levels < 2 ||
      feature_dim == 0) {
    throw std::invalid_argument("ArchDescriptor: degenerate architecture");
  }
  if (embed_dim == 0 || embed_dim % 2 != 0) {
    throw std::invalid_argument("ArchDescriptor: embed_dim must be even");
  }
}

Tensor time_embedding(double t, std::size_t embed_dim,
                      const NoiseSchedule& sched) {
  if (embed_dim == 0 || embed_dim % 2 != 0) {
    throw std::invalid_argument("time_embedding: embed_dim must be even");
  }
  // Condition on the operative variable: VE noise spans several decades, so
  // embed the normalized log noise level rather than raw t.
  const double u = std::log(sched.sigma(t)) / std::log(sched.sigma_max);
  const std::size_t half = embed_dim / 2;
  Tensor e({embed_dim});
  for (std::size_t i = 0; i < half; ++i) {
    const double freq =
        half > 1 ? std::pow(1e4, static_cast<double>(i) /
                                     static_cast<double>(half - 1))
                 : 1.0;
    e[i] = std::sin(freq * u);
    e[half + i] = std::cos(freq * u);
  }
  return e;
}

ScoreNetwork::ScoreNetwork(ArchDescriptor arch, RngStream& rng)
    : arch_(arch) {
  arch_.validate();
  params_ = build_param_shapes(arch_);
  init_params(params_, arch_, rng);
}

ScoreNetwork::ScoreNetwork(ArchDescriptor arch, ParamMap params)
    : arch_(arch), params_(std::move(params)) {
  arch_.validate();
  ParamMap expected = build_param_shapes(arch_);
  if (expected.size() != params_.size()) {
    throw std::invalid_argument("ScoreNetwork: parameter set size mismatch");
  }
  for (const auto& [name, t] : expected) {
    auto it = params_.find(name);
    if (it == params_.end() || it->second.shape() != t.shape()) {
      throw std::invalid_argument("ScoreNetwork: bad parameter " + name);
    }
  }
}

std::size_t ScoreNetwork::param_count(const ArchDescriptor& a) {
  // in conv + per-level [emb projections + 2 blocks] + down/up convs +
  // decoder blocks + out conv; a block is conv(cin->c) + gamma/beta
  // projections from the embed vector.
  const std::size_t E = a.embed_dim, F = a.feature_dim, L = a.levels;
  auto block = [E](std::size_t cin, std::size_t c) {
    return c * cin * 9 + c + 2 * (c * E + c);
  };
  std::size_t n = a.channels_at(0) * a.in_channels() * 9 + a.channels_at(0);
  for (std::size_t l = 0; l < L; ++l) {
    const std::size_t c = a.channels_at(l);
    n += E * E + E * F + 2 * block(c, c);
  }
  for (std::size_t l = 0; l + 1 < L; ++l) {
    const std::size_t c = a.channels_at(l), cn = a.channels_at(l + 1);
    n += cn * c * 9 + cn;              // down
    n += cn * c * 9 + c;               // up (transpose)
    n += E * E + E * F + block(2 * c, c) + block(c, c);
  }
  n += a.image_channels * a.channels_at(0) * 9 + a.image_channels;
  return n;
}

const Tensor& ScoreNetwork::p(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) {
    throw std::logic_error("ScoreNetwork: unknown parameter " + name);
  }
  return it->second;
}

namespace {

struct BlockParams {
  const Tensor *w, *b, *gw, *gb, *sw, *sb;
};

}  // namespace

Tensor ScoreNetwork::forward_raw(const Tensor& x_t, const Tensor& y,
                                 const Tensor& feat, double t,
                                 const NoiseSchedule& sched,
                                 ForwardCache* cache) const {
  const std::size_t L = arch_.levels;
  const Tensor xc = as_chw(x_t, arch_.image_channels, "forward: x_t");
  const Tensor yc = as_chw(y, arch_.image_channels, "forward: y");
  if (!xc.same_shape(yc)) {
    throw std::invalid_argument("forward: x_t and y shape mismatch");
  }
  if (feat.size() != arch_.feature_dim) {
    throw std::invalid_argument("forward: feature vector has wrong dimension");
  }
  const std::size_t H = xc.dim(1), W = xc.dim(2);
  const std::size_t div = std::size_t{1} << (L - 1);
  if (H % div != 0 || W % div != 0) {
    throw std::invalid_argument("forward: image side not divisible by 2^(levels-1)");
  }

  const Tensor temb = time_embedding(t, arch_.embed_dim, sched);
  Tensor input = concat_channels(xc, yc);

  if (cache) {
    *cache = ForwardCache{};
    cache->input = input;
    cache->temb = temb;
    cache->feat = feat;
    cache->enc.resize(L);
    cache->dec.resize(L - 1);
    cache->down_in.resize(L - 1);
    cache->down_pre.resize(L - 1);
    cache->up_in.resize(L - 1);
    cache->up_pre.resize(L - 1);
  }

  auto level_embed = [&](const std::string& prefix) {
    Tensor e = matvec(p(prefix + ".wt"), temb);
    const Tensor ef = matvec(p(prefix + ".wf"), feat);
    for (std::size_t i = 0; i < e.size(); ++i) e[i] += ef[i];
    return e;
  };

  auto block_fwd = [&](const Tensor& h, const std::string& prefix,
                       const Tensor& e, detail::BlockCache* bc) {
    Tensor conv_out = ops::conv2d(h, p(prefix + ".w"), p(prefix + ".b"), 1, 1);
    Tensor gamma = matvec(p(prefix + ".gw"), e);
    for (std::size_t i = 0; i < gamma.size(); ++i) gamma[i] += p(prefix + ".gb")[i];
    Tensor beta = matvec(p(prefix + ".sw"), e);
    for (std::size_t i = 0; i < beta.size(); ++i) beta[i] += p(prefix + ".sb")[i];
    Tensor injected = conv_out;
    const std::size_t C = injected.dim(0), n = injected.dim(1) * injected.dim(2);
    for (std::size_t c = 0; c < C; ++c) {
      const double g1 = 1.0 + gamma[c], bt = beta[c];
      for (std::size_t i = 0; i < n; ++i) {
        injected[c * n + i] = conv_out[c * n + i] * g1 + bt;
      }
    }
    Tensor out = silu(injected);
    if (bc) {
      bc->in = h;
      bc->conv_out = std::move(conv_out);
      bc->injected = std::move(injected);
      bc->gamma = std::move(gamma);
      bc->beta = std::move(beta);
    }
    return out;
  };

  // stem
  Tensor in_pre = ops::conv2d(input, p("in.w"), p("in.b"), 1, 1);
  Tensor h = silu(in_pre);
  if (cache) cache->in_pre = std::move(in_pre);

  // encoder
  std::vector<Tensor> skips(L - 1);
  for (std::size_t l = 0; l < L; ++l) {
    const std::string pre = enc_prefix(l);
    Tensor e = level_embed(pre);
    detail::LevelCache* lc = cache ? &cache->enc[l] : nullptr;
    h = block_fwd(h, pre + ".b0", e, lc ? &lc->blocks[0] : nullptr);
    h = block_fwd(h, pre + ".b1", e, lc ? &lc->blocks[1] : nullptr);
    if (lc) lc->e = std::move(e);
    if (l + 1 < L) {
      skips[l] = h;
      const std::string dn = "down" + std::to_string(l);
      Tensor pre_act = ops::conv2d(h, p(dn + ".w"), p(dn + ".b"), 2, 1);
      if (cache) {
        cache->down_in[l] = h;
        cache->down_pre[l] = pre_act;
      }
      h = silu(pre_act);
    }
  }

  // decoder
  if (cache) cache->skip_hw.resize(L - 1);
  for (std::size_t j = 0; j < L - 1; ++j) {
    const std::size_t l = L - 2 - j;
    const std::string up = "up" + std::to_string(l);
    const std::size_t oh = skips[l].dim(1), ow = skips[l].dim(2);
    Tensor pre_act =
        ops::conv2d_transpose(h, p(up + ".w"), p(up + ".b"), 2, 1, oh, ow);
    if (cache) {
      cache->up_in[j] = h;
      cache->up_pre[j] = pre_act;
      cache->skip_hw[j] = {oh, ow};
    }
    Tensor up_act = silu(pre_act);
    h = concat_channels(up_act, skips[l]);
    const std::string pre = dec_prefix(l);
    Tensor e = level_embed(pre);
    detail::LevelCache* lc = cache ? &cache->dec[j] : nullptr;
    h = block_fwd(h, pre + ".b0", e, lc ? &lc->blocks[0] : nullptr);
    h = block_fwd(h, pre + ".b1", e, lc ? &lc->blocks[1] : nullptr);
    if (lc) lc->e = std::move(e);
  }

  if (cache) {
    cache->out_in = h;
    cache->valid = true;
  }
  Tensor u = ops::conv2d(h, p("out.w"), p("out.b"), 1, 1);
  if (x_t.ndim() == 2) {
    return Tensor({x_t.dim(0), x_t.dim(1)},
                  std::vector<double>(u.data(), u.data() + u.size()));
  }
  return u;
}

Tensor ScoreNetwork::forward(const Tensor& x_t, const Tensor& y,
                             const Tensor& feat, double t,
                             const NoiseSchedule& sched) const {
  Tensor u = forward_raw(x_t, y, feat, t, sched);
  const double inv = 1.0 / sched.marginal_std(t);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] *= inv;
  return u;
}

ParamMap ScoreNetwork::backward(const ForwardCache& cache,
                                const Tensor& d_raw) const {
  if (!cache.valid) {
    throw std::logic_error("backward: no cached forward pass");
  }
  const std::size_t L = arch_.levels;
  ParamMap g = zeros_like(params_);

  auto block_bwd = [&](const detail::BlockCache& bc, const std::string& prefix,
                       const Tensor& e, Tensor& de, const Tensor& d_act) {
    Tensor d_inj = silu_grad_times(bc.injected, d_act);
    const std::size_t C = bc.conv_out.dim(0);
    const std::size_t n = bc.conv_out.dim(1) * bc.conv_out.dim(2);
    Tensor d_conv = d_inj;
    Tensor dgamma({C}), dbeta({C});
    for (std::size_t c = 0; c < C; ++c) {
      double sg = 0.0, sb = 0.0;
      const double g1 = 1.0 + bc.gamma[c];
      for (std::size_t i = 0; i < n; ++i) {
        const double dv = d_inj[c * n + i];
        sg += dv * bc.conv_out[c * n + i];
        sb += dv;
        d_conv[c * n + i] = dv * g1;
      }
      dgamma[c] = sg;
      dbeta[c] = sb;
    }
    add_outer(g.at(prefix + ".gw"), dgamma, e);
    ops::axpy(g.at(prefix + ".gb"), 1.0, dgamma);
    add_outer(g.at(prefix + ".sw"), dbeta, e);
    ops::axpy(g.at(prefix + ".sb"), 1.0, dbeta);
    Tensor de1 = matvec_t(p(prefix + ".gw"), dgamma);
    Tensor de2 = matvec_t(p(prefix + ".sw"), dbeta);
    for (std::size_t i = 0; i < de.size(); ++i) de[i] += de1[i] + de2[i];
    ops::axpy(g.at(prefix + ".w"),
              1.0, ops::conv2d_grad_kernel(d_conv, bc.in, 1, 1, 3, 3));
    ops::axpy(g.at(prefix + ".b"), 1.0, ops::conv2d_grad_bias(d_conv));
    return ops::conv2d_grad_input(d_conv, p(prefix + ".w"), 1, 1, bc.in.dim(1),
                                  bc.in.dim(2));
  };

  // head
  Tensor d = d_raw;
  if (d.ndim() == 2) {
    d = Tensor({1, d_raw.dim(0), d_raw.dim(1)},
               std::vector<double>(d_raw.data(), d_raw.data() + d_raw.size()));
  }
  ops::axpy(g.at("out.w"), 1.0,
            ops::conv2d_grad_kernel(d, cache.out_in, 1, 1, 3, 3));
  ops::axpy(g.at("out.b"), 1.0, ops::conv2d_grad_bias(d));
  Tensor dh = ops::conv2d_grad_input(d, p("out.w"), 1, 1, cache.out_in.dim(1),
                                     cache.out_in.dim(2));

  // decoder, in reverse forward order
  std::vector<Tensor> dskip(L - 1);
  for (std::size_t jj = L - 1; jj-- > 0;) {
    const std::size_t j = jj;          // forward decoder stage index
    const std::size_t l = L - 2 - j;   // resolution level
    const detail::LevelCache& lc = cache.dec[j];
    const std::string pre = dec_prefix(l);
    Tensor de({arch_.embed_dim});
    dh = block_bwd(lc.blocks[1], pre + ".b1", lc.e, de, dh);
    dh = block_bwd(lc.blocks[0], pre + ".b0", lc.e, de, dh);
    add_outer(g.at(pre + ".wt"), de, cache.temb);
    add_outer(g.at(pre + ".wf"), de, cache.feat);
    // split concat(up_act, skip)
    const std::size_t c = arch_.channels_at(l);
    const std::size_t hh = dh.dim(1), ww = dh.dim(2);
    Tensor d_up({c, hh, ww}), d_sk({c, hh, ww});
    std::memcpy(d_up.data(), dh.data(), d_up.size() * sizeof(double));
    std::memcpy(d_sk.data(), dh.data() + d_up.size(),
                d_sk.size() * sizeof(double));
    dskip[l] = std::move(d_sk);
    const std::string up = "up" + std::to_string(l);
    Tensor d_pre = silu_grad_times(cache.up_pre[j], d_up);
    ops::axpy(g.at(up + ".w"), 1.0,
              ops::conv2d_transpose_grad_kernel(d_pre, cache.up_in[j], 2, 1, 3, 3));
    ops::axpy(g.at(up + ".b"), 1.0, ops::conv2d_grad_bias(d_pre));
    dh = ops::conv2d_transpose_grad_input(d_pre, p(up + ".w"), 2, 1);
  }

  // encoder, bottom to top
  for (std::size_t l = L; l-- > 0;) {
    const detail::LevelCache& lc = cache.enc[l];
    const std::string pre = enc_prefix(l);
    Tensor de({arch_.embed_dim});
    dh = block_bwd(lc.blocks[1], pre + ".b1", lc.e, de, dh);
    dh = block_bwd(lc.blocks[0], pre + ".b0", lc.e, de, dh);
    add_outer(g.at(pre + ".wt"), de, cache.temb);
    add_outer(g.at(pre + ".wf"), de, cache.feat);
    if (l == 0) break;
    const std::string dn = "down" + std::to_string(l - 1);
    Tensor d_pre = silu_grad_times(cache.down_pre[l - 1], dh);
    ops::axpy(g.at(dn + ".w"), 1.0,
              ops::conv2d_grad_kernel(d_pre, cache.down_in[l - 1], 2, 1, 3, 3));
    ops::axpy(g.at(dn + ".b"), 1.0, ops::conv2d_grad_bias(d_pre));
    dh = ops::conv2d_grad_input(d_pre, p(dn + ".w"), 2, 1,
                                cache.down_in[l - 1].dim(1),
                                cache.down_in[l - 1].dim(2));
    ops::axpy(dh, 1.0, dskip[l - 1]);
  }

  // stem
  Tensor d_pre = silu_grad_times(cache.in_pre, dh);
  ops::axpy(g.at("in.w"), 1.0,
            ops::conv2d_grad_kernel(d_pre, cache.input, 1, 1, 3, 3));
  ops::axpy(g.at("in.b"), 1.0, ops::conv2d_grad_bias(d_pre));

  return g;
}

void ScoreNetwork::save(const std::string& path) const {
  ParamMap records = params_;
  records.emplace("__arch__",
                  Tensor({5}, {static_cast<double>(arch_.image_channels),
                               static_cast<double>(arch_.base_channels),
                               static_cast<double>(arch_.levels),
                               static_cast<double>(arch_.embed_dim),
                               static_cast<double>(arch_.feature_dim)}));
  write_checkpoint(path, records);
}

ScoreNetwork ScoreNetwork::load(const std::string& path) {
  ParamMap records = read_checkpoint(path);
  auto it = records.find("__arch__");
  if (it == records.end() || it->second.size() != 5) {
    throw std::runtime_error("checkpoint: missing __arch__ record in " + path);
  }
  const Tensor& a = it->second;
  ArchDescriptor arch;
  arch.image_channels = static_cast<std::size_t>(a[0]);
  arch.base_channels = static_cast<std::size_t>(a[1]);
  arch.levels = static_cast<std::size_t>(a[2]);
  arch.embed_dim = static_cast<std::size_t>(a[3]);
  arch.feature_dim = static_cast<std::size_t>(a[4]);
  ParamMap params;
  for (auto& [name, t] : records) {
    if (name == "__arch__" || name.starts_with("__")) continue;
    params.emplace(name, std::move(t));
  }
  return ScoreNetwork(arch, std::move(params));
}

void write_checkpoint(const std::string& path, const ParamMap& records) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os.write("FASRCKPT", 8);
  const std::uint32_t n = static_cast<std::uint32_t>(records.size());
  unsigned char nb[4] = {static_cast<unsigned char>(n),
                         static_cast<unsigned char>(n >> 8),
                         static_cast<unsigned char>(n >> 16),
                         static_cast<unsigned char>(n >> 24)};
  os.write(reinterpret_cast<const char*>(nb), 4);
  for (const auto& [name, t] : records) {
    const std::uint16_t len = static_cast<std::uint16_t>(name.size());
    unsigned char lb[2] = {static_cast<unsigned char>(len),
                           static_cast<unsigned char>(len >> 8)};
    os.write(reinterpret_cast<const char*>(lb), 2);
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    io::write_tnsr(os, t);
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

ParamMap read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, "FASRCKPT", 8) != 0) {
    throw std::runtime_error("checkpoint: bad magic in " + path);
  }
  unsigned char nb[4];
  is.read(reinterpret_cast<char*>(nb), 4);
  if (!is) throw std::runtime_error("checkpoint: truncated header in " + path);
  const std::uint32_t n = static_cast<std::uint32_t>(nb[0]) |
                          (static_cast<std::uint32_t>(nb[1]) << 8) |
                          (static_cast<std::uint32_t>(nb[2]) << 16) |
                          (static_cast<std::uint32_t>(nb[3]) << 24);
  ParamMap records;
  for (std::uint32_t i = 0; i < n; ++i) {
    unsigned char lb[2];
    is.read(reinterpret_cast<char*>(lb), 2);
    if (!is) {
      throw std::runtime_error("checkpoint: truncated at record " +
                               std::to_string(i) + " in " + path);
    }
    const std::uint16_t len = static_cast<std::uint16_t>(lb[0]) |
                              (static_cast<std::uint16_t>(lb[1]) << 8);
    std::string name(len, '\0');
    is.read(name.data(), len);
    if (!is) {
      throw std::runtime_error("checkpoint: truncated name at record " +
                               std::to_string(i) + " in " + path);
    }
    try {
      records.emplace(name, io::read_tnsr(is));
    } catch (const std::exception& e) {
      throw std::runtime_error("checkpoint: bad tensor '" + name + "' in " +
                               path + ": " + e.what());
    }
  }
  return records;
}

ParamMap zeros_like(const ParamMap& params) {
  ParamMap g;
  for (const auto& [name, t] : params) g.emplace(name, Tensor(t.shape()));
  return g;
}

}  // namespace fasr
