#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "fasr/checks.hpp"
#include "fasr/config.hpp"
#include "fasr/io.hpp"
#include "fasr/pipeline.hpp"

namespace fs = std::filesystem;
using namespace fasr;

namespace {

// exit codes: 0 success, 1 usage/config, 2 runtime divergence, 3 diagnostics
constexpr int kExitUsage = 1;
constexpr int kExitDiverged = 2;
constexpr int kExitDiagnostic = 3;

RunConfig load_config(const std::string& path) {
  return path.empty() ? RunConfig::defaults_with_env() : RunConfig::load(path);
}

void echo_resolved_config(const RunConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  cfg.save(out_dir + "/resolved_config.txt");
}

int cmd_synth(const std::string& config_path, const std::string& out_dir,
              bool force) {
  const RunConfig cfg = load_config(config_path);
  if (fs::exists(out_dir) && !fs::is_empty(out_dir) && !force) {
    std::cerr << "synth: output directory not empty (use --force): " << out_dir
              << "\n";
    return kExitUsage;
  }
  const Dataset ds = build_dataset(cfg.n_identities, cfg.n_images_per_identity,
                                   cfg.seed, cfg.scale);
  const FeatureExtractor extractor(cfg.extractor_seed, cfg.feature_dim);
  save_dataset(ds, out_dir, extractor);
  echo_resolved_config(cfg, out_dir);
  std::cerr << "synth: wrote " << ds.identities.size() << " identities to "
            << out_dir << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& dataset_dir,
              const std::string& out_dir, const std::string& resume_path) {
  const RunConfig cfg = load_config(config_path);
  const Dataset ds = load_dataset(dataset_dir);
  const FeatureExtractor extractor(cfg.extractor_seed, cfg.feature_dim);
  const auto examples = make_train_examples(ds, extractor, cfg.merge_renorm);

  fs::create_directories(out_dir);
  TrainConfig tcfg = cfg.train_config();
  tcfg.checkpoint_path = out_dir + "/model.ckpt";

  RngStream init(cfg.seed, 0xA11CE);
  Trainer trainer =
      resume_path.empty()
          ? Trainer(ScoreNetwork(cfg.arch(), init), cfg.schedule(), tcfg)
          : Trainer::resume(resume_path, cfg.schedule(), tcfg);
  try {
    trainer.run(examples);
  } catch (const TrainingDiverged& e) {
    trainer.write_trace_csv(out_dir + "/loss_trace.csv");
    std::cerr << "train: " << e.what() << "\n";
    return kExitDiverged;
  }
  trainer.write_trace_csv(out_dir + "/loss_trace.csv");
  echo_resolved_config(cfg, out_dir);
  std::cerr << "train: finished at step " << trainer.step() << ", checkpoint "
            << tcfg.checkpoint_path << "\n";
  return 0;
}

int cmd_sr(const std::string& config_path, const std::string& ckpt_path,
           const std::string& lr_path, const std::vector<std::string>& feature_paths,
           const std::string& out_path, bool features_only,
           std::uint64_t sample_seed, const std::string& trace_path) {
  const RunConfig cfg = load_config(config_path);
  const ScoreNetwork net = load_eval_network(ckpt_path);
  if (net.arch() != cfg.arch()) {
    std::cerr << "sr: checkpoint architecture does not match config\n";
    return kExitUsage;
  }
  const FeatureExtractor extractor(cfg.extractor_seed, cfg.feature_dim);
  const Tensor lr = io::load_pgm(lr_path);

  std::vector<FeatureVector> feats;
  if (feature_paths.empty()) {
    // documented fallback: extract features from the probe itself
    feats.push_back(extractor.extract(lr));
  } else {
    for (const auto& p : feature_paths) {
      feats.push_back(extractor.extract(io::load_pgm(p)));
    }
  }
  const FeatureVector fm = merge_features(feats, cfg.merge_renorm);

  RngStream rng(sample_seed, 0);
  std::vector<TraceRow> trace;
  try {
    const Tensor sr = super_resolve(net, lr, fm, cfg.sampler(), rng,
                                    features_only,
                                    trace_path.empty() ? nullptr : &trace);
    io::save_pgm(out_path, sr);
  } catch (const DivergedSample& e) {
    std::cerr << "sr: " << e.what() << "\n";
    return kExitDiverged;
  }
  if (!trace_path.empty()) {
    std::ofstream os(trace_path);
    os << "step,t,l2_norm\n";
    os.precision(12);
    for (const auto& row : trace) {
      os << row.step << "," << row.t << "," << row.norm << "\n";
    }
  }
  std::cerr << "sr: wrote " << out_path << "\n";
  return 0;
}

int cmd_eval(const std::string& config_path, const std::string& ckpt_path,
             const std::string& dataset_dir, const std::string& out_dir,
             bool single_feature, bool unconditional_features) {
  const RunConfig cfg = load_config(config_path);
  const ScoreNetwork net = load_eval_network(ckpt_path);
  if (net.arch() != cfg.arch()) {
    std::cerr << "eval: checkpoint architecture does not match config\n";
    return kExitUsage;
  }
  const Dataset ds = load_dataset(dataset_dir);
  const FeatureExtractor extractor(cfg.extractor_seed, cfg.feature_dim);

  std::vector<NamedReport> rows;
  try {
    rows.push_back(evaluate_dataset(ds, net, extractor, cfg,
                                    EvalMode::LrBaseline, cfg.seed));
    rows.push_back(evaluate_dataset(ds, net, extractor, cfg,
                                    EvalMode::MergedFeatures, cfg.seed));
    if (single_feature) {
      rows.push_back(evaluate_dataset(ds, net, extractor, cfg,
                                      EvalMode::SingleFeature, cfg.seed));
    }
    if (unconditional_features) {
      rows.push_back(evaluate_dataset(ds, net, extractor, cfg,
                                      EvalMode::UnconditionalFeatures,
                                      cfg.seed));
    }
  } catch (const DivergedSample& e) {
    std::cerr << "eval: " << e.what() << "\n";
    return kExitDiverged;
  }
  fs::create_directories(out_dir);
  write_report_csv(out_dir + "/report.csv", rows);
  echo_resolved_config(cfg, out_dir);
  std::cout << format_report_table(rows);
  return 0;
}

int cmd_check(const std::string& config_path) {
  const RunConfig cfg = load_config(config_path);
  const auto results = run_diagnostics(cfg);
  bool all_pass = true;
  for (const auto& r : results) {
    std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name << ": "
              << r.detail << "\n";
    all_pass = all_pass && r.pass;
  }
  return all_pass ? 0 : kExitDiagnostic;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"feature-assisted score-SDE super-resolution, desk scale"};
  app.require_subcommand(1);

  std::string config_path, out_dir, dataset_dir, ckpt_path, lr_path, out_path;
  std::string resume_path, trace_path;
  std::vector<std::string> feature_paths;
  bool force = false, features_only = false;
  bool single_feature = false, unconditional_features = false;
  std::uint64_t sample_seed = 0;

  auto* synth = app.add_subcommand("synth", "generate a synthetic identity dataset");
  synth->add_option("--config", config_path, "run config file");
  synth->add_option("--out", out_dir, "output dataset directory")->required();
  synth->add_flag("--force", force, "write into a non-empty directory");

  auto* train = app.add_subcommand("train", "train the conditional score network");
  train->add_option("--config", config_path, "run config file");
  train->add_option("--dataset", dataset_dir, "dataset directory")->required();
  train->add_option("--out", out_dir, "output directory")->required();
  train->add_option("--resume", resume_path, "resume from checkpoint");

  auto* sr = app.add_subcommand("sr", "super-resolve one LR probe image");
  sr->add_option("--config", config_path, "run config file");
  sr->add_option("--checkpoint", ckpt_path, "trained checkpoint")->required();
  sr->add_option("--lr", lr_path, "LR probe image (PGM)")->required();
  sr->add_option("--features", feature_paths, "feature images (PGM)");
  sr->add_option("--out", out_path, "output SR image (PGM)")->required();
  sr->add_option("--seed", sample_seed, "sampling seed");
  sr->add_flag("--features-only", features_only,
               "zero the LR channel; generate from features alone");
  sr->add_option("--trace", trace_path, "per-step trace CSV");

  auto* eval = app.add_subcommand("eval", "run the recognition benchmark");
  eval->add_option("--config", config_path, "run config file");
  eval->add_option("--checkpoint", ckpt_path, "trained checkpoint")->required();
  eval->add_option("--dataset", dataset_dir, "dataset directory")->required();
  eval->add_option("--out", out_dir, "report directory")->required();
  eval->add_flag("--single-feature", single_feature, "add the N=1 ablation row");
  eval->add_flag("--unconditional-features", unconditional_features,
                 "add the zeroed-features ablation row");

  auto* check = app.add_subcommand("check", "run the diagnostic suite");
  check->add_option("--config", config_path, "run config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(config_path, out_dir, force);
    if (train->parsed()) {
      return cmd_train(config_path, dataset_dir, out_dir, resume_path);
    }
    if (sr->parsed()) {
      return cmd_sr(config_path, ckpt_path, lr_path, feature_paths, out_path,
                    features_only, sample_seed, trace_path);
    }
    if (eval->parsed()) {
      return cmd_eval(config_path, ckpt_path, dataset_dir, out_dir,
                      single_feature, unconditional_features);
    }
    if (check->parsed()) return cmd_check(config_path);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDiverged;
  }
  return kExitUsage;
}
