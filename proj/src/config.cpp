#include "fasr/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace fasr {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  std::size_t e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    return std::stoull(v);
  } catch (...) {
    throw std::invalid_argument("config: bad integer for " + key + ": " + v);
  }
}

double parse_f64(const std::string& key, const std::string& v) {
  try {
    return std::stod(v);
  } catch (...) {
    throw std::invalid_argument("config: bad number for " + key + ": " + v);
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw std::invalid_argument("config: bad boolean for " + key + ": " + v);
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "sigma_min",      "sigma_max",     "time_horizon",
      "sampler_steps",  "denoise_final", "base_channels",
      "levels",         "embed_dim",     "feature_dim",
      "train_steps",    "batch_size",    "learning_rate",
      "ema_decay",      "log_interval",  "checkpoint_interval",
      "n_identities",   "n_images_per_identity", "scale",
      "merge_renorm",   "seed",          "extractor_seed",
      "threads"};
  return keys;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "sigma_min") sigma_min = parse_f64(key, value);
  else if (key == "sigma_max") sigma_max = parse_f64(key, value);
  else if (key == "time_horizon") time_horizon = parse_f64(key, value);
  else if (key == "sampler_steps") sampler_steps = parse_u64(key, value);
  else if (key == "denoise_final") denoise_final = parse_bool(key, value);
  else if (key == "base_channels") base_channels = parse_u64(key, value);
  else if (key == "levels") levels = parse_u64(key, value);
  else if (key == "embed_dim") embed_dim = parse_u64(key, value);
  else if (key == "feature_dim") feature_dim = parse_u64(key, value);
  else if (key == "train_steps") train_steps = parse_u64(key, value);
  else if (key == "batch_size") batch_size = parse_u64(key, value);
  else if (key == "learning_rate") learning_rate = parse_f64(key, value);
  else if (key == "ema_decay") ema_decay = parse_f64(key, value);
  else if (key == "log_interval") log_interval = parse_u64(key, value);
  else if (key == "checkpoint_interval") checkpoint_interval = parse_u64(key, value);
  else if (key == "n_identities") n_identities = parse_u64(key, value);
  else if (key == "n_images_per_identity") n_images_per_identity = parse_u64(key, value);
  else if (key == "scale") scale = parse_u64(key, value);
  else if (key == "merge_renorm") merge_renorm = parse_bool(key, value);
  else if (key == "seed") seed = parse_u64(key, value);
  else if (key == "extractor_seed") extractor_seed = parse_u64(key, value);
  else if (key == "threads") threads = parse_u64(key, value);
  else throw std::invalid_argument("config: unknown key: " + key);
}

RunConfig RunConfig::load(const std::string& path) {
  RunConfig cfg;
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("config: cannot open " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: expected key = value at " + path +
                                  ":" + std::to_string(lineno));
    }
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  // environment overrides
  for (const std::string& key : known_keys()) {
    std::string env_name = "FASR_" + key;
    std::transform(env_name.begin(), env_name.end(), env_name.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    if (const char* v = std::getenv(env_name.c_str())) cfg.set(key, v);
  }
  return cfg;
}

RunConfig RunConfig::defaults_with_env() {
  RunConfig cfg;
  for (const std::string& key : known_keys()) {
    std::string env_name = "FASR_" + key;
    std::transform(env_name.begin(), env_name.end(), env_name.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    if (const char* v = std::getenv(env_name.c_str())) cfg.set(key, v);
  }
  return cfg;
}

ArchDescriptor RunConfig::arch() const {
  ArchDescriptor a;
  a.image_channels = 1;
  a.base_channels = base_channels;
  a.levels = levels;
  a.embed_dim = embed_dim;
  a.feature_dim = feature_dim;
  a.validate();
  return a;
}

SamplerConfig RunConfig::sampler() const {
  SamplerConfig s;
  s.steps = sampler_steps;
  s.sched = schedule();
  s.denoise_final = denoise_final;
  return s;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.steps = train_steps;
  t.batch_size = batch_size;
  t.learning_rate = learning_rate;
  t.ema_decay = ema_decay;
  t.seed = seed;
  t.threads = threads;
  t.log_interval = log_interval;
  t.checkpoint_interval = checkpoint_interval;
  return t;
}

std::string RunConfig::to_string() const {
  std::ostringstream os;
  os.precision(17);
  os << "sigma_min = " << sigma_min << "\n"
     << "sigma_max = " << sigma_max << "\n"
     << "time_horizon = " << time_horizon << "\n"
     << "sampler_steps = " << sampler_steps << "\n"
     << "denoise_final = " << (denoise_final ? 1 : 0) << "\n"
     << "base_channels = " << base_channels << "\n"
     << "levels = " << levels << "\n"
     << "embed_dim = " << embed_dim << "\n"
     << "feature_dim = " << feature_dim << "\n"
     << "train_steps = " << train_steps << "\n"
     << "batch_size = " << batch_size << "\n"
     << "learning_rate = " << learning_rate << "\n"
     << "ema_decay = " << ema_decay << "\n"
     << "log_interval = " << log_interval << "\n"
     << "checkpoint_interval = " << checkpoint_interval << "\n"
     << "n_identities = " << n_identities << "\n"
     << "n_images_per_identity = " << n_images_per_identity << "\n"
     << "scale = " << scale << "\n"
     << "merge_renorm = " << (merge_renorm ? 1 : 0) << "\n"
     << "seed = " << seed << "\n"
     << "extractor_seed = " << extractor_seed << "\n"
     << "threads = " << threads << "\n";
  return os.str();
}

void RunConfig::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("config: cannot write " + path);
  os << to_string();
}

}  // namespace fasr
