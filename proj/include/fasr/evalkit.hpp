#pragma once

#include <limits>
#include <string>
#include <vector>

#include "fasr/synthdata.hpp"
#include "fasr/tensor.hpp"

namespace fasr {

// Rows are probes, columns are gallery entries; truth[r] is the gallery
// column holding row r's true identity.
struct SimilarityMatrix {
  Tensor values;                    // [n_probes, n_gallery]
  std::vector<std::size_t> truth;   // one true-match column per row
};

double cosine_similarity(const FeatureVector& a, const FeatureVector& b);

// Mann-Whitney statistic: P(genuine > impostor) with ties counted 0.5.
// Computed by rank summation in O(n log n).
double verification_auc(const std::vector<double>& genuine,
                        const std::vector<double>& impostor);

// Fraction of probes whose true column lands in the top k; ties broken by
// ascending column index.
double cmc_rank_k(const SimilarityMatrix& sim, std::size_t k);

// 10*log10(peak^2 / MSE); +infinity when the images are identical.
double psnr(const Tensor& reference, const Tensor& candidate, double peak);

struct EvalReport {
  double auc = 0.0;
  double rank1 = 0.0;
  double rank5 = 0.0;
  double rank10 = 0.0;
  double mean_psnr = 0.0;
};

SimilarityMatrix build_similarity(const std::vector<FeatureVector>& probes,
                                  const std::vector<FeatureVector>& gallery,
                                  const std::vector<std::size_t>& truth);

// Extracts features from probe and gallery image sets (aligned by index:
// probe i's true identity is gallery i), builds the similarity matrix and
// computes all metrics. Genuine scores are the true-match entries; impostor
// scores are all off-match entries.
EvalReport evaluate_run(const std::vector<Tensor>& sr_images,
                        const std::vector<Tensor>& gallery_images,
                        const FeatureExtractor& extractor);

}  // namespace fasr
