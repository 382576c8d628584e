#include "fasr/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fasr/ops.hpp"

namespace fasr {

double cosine_similarity(const FeatureVector& a, const FeatureVector& b) {
  if (a.values.size() != b.values.size()) {
    throw std::invalid_argument("cosine_similarity: dimension mismatch");
  }
  const double na = ops::l2_norm(a.values), nb = ops::l2_norm(b.values);
  if (!(na > 0.0) || !(nb > 0.0)) {
    throw std::invalid_argument("cosine_similarity: zero vector");
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    dot += a.values[i] * b.values[i];
  }
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

double verification_auc(const std::vector<double>& genuine,
                        const std::vector<double>& impostor) {
  if (genuine.empty() || impostor.empty()) {
    throw std::invalid_argument("verification_auc: empty score list");
  }
  // rank-sum over the pooled scores; tied groups contribute average ranks
  struct Entry {
    double score;
    bool genuine;
  };
  std::vector<Entry> pool;
  pool.reserve(genuine.size() + impostor.size());
  for (double s : genuine) pool.push_back({s, true});
  for (double s : impostor) pool.push_back({s, false});
  std::sort(pool.begin(), pool.end(),
            [](const Entry& a, const Entry& b) { return a.score < b.score; });
  double rank_sum = 0.0;  // sum of average ranks of the genuine scores
  std::size_t i = 0;
  while (i < pool.size()) {
    std::size_t j = i;
    while (j < pool.size() && pool[j].score == pool[i].score) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
    for (std::size_t k = i; k < j; ++k) {
      if (pool[k].genuine) rank_sum += avg_rank;
    }
    i = j;
  }
  const double ng = static_cast<double>(genuine.size());
  const double ni = static_cast<double>(impostor.size());
  const double u = rank_sum - ng * (ng + 1.0) / 2.0;
  return u / (ng * ni);
}

double cmc_rank_k(const SimilarityMatrix& sim, std::size_t k) {
  const std::size_t rows = sim.values.dim(0), cols = sim.values.dim(1);
  if (k == 0 || k > cols) {
    throw std::invalid_argument("cmc_rank_k: k out of range");
  }
  if (sim.truth.size() != rows) {
    throw std::invalid_argument("cmc_rank_k: truth size mismatch");
  }
  std::size_t hits = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t tc = sim.truth[r];
    if (tc >= cols) throw std::invalid_argument("cmc_rank_k: bad truth column");
    const double ts = sim.values.at2(r, tc);
    // position of the true column under (descending score, ascending index)
    std::size_t ahead = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      if (c == tc) continue;
      const double s = sim.values.at2(r, c);
      if (s > ts || (s == ts && c < tc)) ++ahead;
    }
    if (ahead < k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(rows);
}

double psnr(const Tensor& reference, const Tensor& candidate, double peak) {
  if (!reference.same_shape(candidate)) {
    throw std::invalid_argument("psnr: shape mismatch");
  }
  if (!(peak > 0.0)) throw std::invalid_argument("psnr: peak must be > 0");
  double mse = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = reference[i] - candidate[i];
    mse += d * d;
  }
  mse /= static_cast<double>(reference.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

SimilarityMatrix build_similarity(const std::vector<FeatureVector>& probes,
                                  const std::vector<FeatureVector>& gallery,
                                  const std::vector<std::size_t>& truth) {
  if (probes.empty() || gallery.empty() || truth.size() != probes.size()) {
    throw std::invalid_argument("build_similarity: label mismatch");
  }
  for (std::size_t t : truth) {
    if (t >= gallery.size()) {
      throw std::invalid_argument("build_similarity: truth column out of range");
    }
  }
  SimilarityMatrix sim;
  sim.values = Tensor({probes.size(), gallery.size()});
  sim.truth = truth;
  for (std::size_t r = 0; r < probes.size(); ++r) {
    for (std::size_t c = 0; c < gallery.size(); ++c) {
      sim.values.at2(r, c) = cosine_similarity(probes[r], gallery[c]);
    }
  }
  return sim;
}

EvalReport evaluate_run(const std::vector<Tensor>& sr_images,
                        const std::vector<Tensor>& gallery_images,
                        const FeatureExtractor& extractor) {
  if (sr_images.empty() || sr_images.size() != gallery_images.size()) {
    throw std::invalid_argument("evaluate_run: probe/gallery label mismatch");
  }
  std::vector<FeatureVector> probes, gallery;
  std::vector<std::size_t> truth(sr_images.size());
  for (std::size_t i = 0; i < sr_images.size(); ++i) {
    probes.push_back(extractor.extract(sr_images[i]));
    gallery.push_back(extractor.extract(gallery_images[i]));
    truth[i] = i;
  }
  const SimilarityMatrix sim = build_similarity(probes, gallery, truth);

  std::vector<double> genuine, impostor;
  for (std::size_t r = 0; r < sim.values.dim(0); ++r) {
    for (std::size_t c = 0; c < sim.values.dim(1); ++c) {
      (c == sim.truth[r] ? genuine : impostor).push_back(sim.values.at2(r, c));
    }
  }

  EvalReport rep;
  rep.auc = verification_auc(genuine, impostor);
  rep.rank1 = cmc_rank_k(sim, 1);
  rep.rank5 = cmc_rank_k(sim, std::min<std::size_t>(5, sim.values.dim(1)));
  rep.rank10 = cmc_rank_k(sim, std::min<std::size_t>(10, sim.values.dim(1)));
  double ps = 0.0;
  for (std::size_t i = 0; i < sr_images.size(); ++i) {
    const double p = psnr(gallery_images[i], sr_images[i], 1.0);
    ps += std::isfinite(p) ? p : 100.0;  // cap the identical-image sentinel
  }
  rep.mean_psnr = ps / static_cast<double>(sr_images.size());
  return rep;
}

}  // namespace fasr
