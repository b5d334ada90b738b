#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "redress/sampler.hpp"

namespace redress {

struct TrainConfig {
  std::string model;        // "gcn" | "graphsage"
  std::string dataset;      // dataset directory
  std::string out_dir = ".";
  double lr = 0.001;
  double weight_decay = 0.0;
  double dropout = 0.0;
  int warmup_epochs = 30;
  int fairness_epochs = 60;
  double gamma = 1.0;
  double alpha = 1.0;
  int k = 10;
  int batch_size = 32;
  Fanout fanout;            // required iff model == "graphsage"
  int neg_ratio = 1;
  int pca_components = 200; // 0 = use raw features
  std::uint64_t seed = 1;

  bool is_sage() const { return model == "graphsage"; }
  nlohmann::json to_json() const;

  // Stable hex digest of everything except out_dir; used as the run id
  // together with the seed.
  std::string digest() const;
};

// Parses a flat JSON object. Unknown keys are rejected; invariants
// (lr > 0, counts >= 0, fanout presence) are enforced. Throws ConfigError.
TrainConfig parse_train_config(const nlohmann::json& j);
TrainConfig load_train_config(const std::string& path);

struct SweepSpec {
  TrainConfig base;
  std::vector<nlohmann::json> overrides;  // partial configs applied to base
  std::string csv_path;
};

SweepSpec load_sweep_spec(const std::string& path);

// Applies a partial override (same key set as a config) on top of a base.
TrainConfig apply_override(const TrainConfig& base, const nlohmann::json& over);

}  // namespace redress
