#pragma once

#include <string>
#include <vector>

#include "fasr/config.hpp"
#include "fasr/evalkit.hpp"
#include "fasr/scorenet.hpp"
#include "fasr/solver.hpp"
#include "fasr/synthdata.hpp"
#include "fasr/training.hpp"

namespace fasr {

// Reverse-SDE sampling conditioned on an upsampled LR image and a merged
// feature vector. With features_only the LR conditioning channel is zeroed.
Tensor super_resolve(const ScoreNetwork& net, const Tensor& lr,
                     const FeatureVector& fm, const SamplerConfig& cfg,
                     RngStream& rng, bool features_only = false,
                     std::vector<TraceRow>* trace = nullptr);

// Evaluation weights: the EMA shadow parameters when the checkpoint carries
// them, the live parameters otherwise.
ScoreNetwork load_eval_network(const std::string& checkpoint_path);

// Per-identity training example: x0 = HR, y = degrade(HR), feat = merged
// features of the identity's degraded feature images.
std::vector<TrainExample> make_train_examples(const Dataset& ds,
                                              const FeatureExtractor& extractor,
                                              bool merge_renorm = true);

enum class EvalMode {
  LrBaseline,             // metrics on the raw LR probes, no sampling
  MergedFeatures,         // F_M from all feature images
  SingleFeature,          // F from the first feature image only
  UnconditionalFeatures,  // F zeroed
};

struct NamedReport {
  std::string name;
  EvalReport report;
};

NamedReport evaluate_dataset(const Dataset& ds, const ScoreNetwork& net,
                             const FeatureExtractor& extractor,
                             const RunConfig& cfg, EvalMode mode,
                             std::uint64_t sample_seed);

void write_report_csv(const std::string& path,
                      const std::vector<NamedReport>& rows);
std::string format_report_table(const std::vector<NamedReport>& rows);

}  // namespace fasr
