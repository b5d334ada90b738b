#include "redress/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "redress/errors.hpp"

namespace redress {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "model",       "dataset",        "out_dir",     "lr",        "weight_decay",
      "dropout",     "warmup_epochs",  "fairness_epochs", "gamma", "alpha",
      "k",           "batch_size",     "fanout1",     "fanout2",   "neg_ratio",
      "pca_components", "seed"};
  return keys;
}

void reject_unknown(const nlohmann::json& j, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known_keys().contains(key)) {
      throw ConfigError(std::string(what) + ": unknown key \"" + key + "\"");
    }
  }
}

void apply_keys(TrainConfig& c, const nlohmann::json& j) {
  try {
    if (j.contains("model")) c.model = j.at("model").get<std::string>();
    if (j.contains("dataset")) c.dataset = j.at("dataset").get<std::string>();
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("lr")) c.lr = j.at("lr").get<double>();
    if (j.contains("weight_decay")) c.weight_decay = j.at("weight_decay").get<double>();
    if (j.contains("dropout")) c.dropout = j.at("dropout").get<double>();
    if (j.contains("warmup_epochs")) c.warmup_epochs = j.at("warmup_epochs").get<int>();
    if (j.contains("fairness_epochs")) c.fairness_epochs = j.at("fairness_epochs").get<int>();
    if (j.contains("gamma")) c.gamma = j.at("gamma").get<double>();
    if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
    if (j.contains("k")) c.k = j.at("k").get<int>();
    if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<int>();
    if (j.contains("fanout1")) c.fanout.layer1 = j.at("fanout1").get<int>();
    if (j.contains("fanout2")) c.fanout.layer2 = j.at("fanout2").get<int>();
    if (j.contains("neg_ratio")) c.neg_ratio = j.at("neg_ratio").get<int>();
    if (j.contains("pca_components")) c.pca_components = j.at("pca_components").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

void validate(const TrainConfig& c) {
  if (c.model != "gcn" && c.model != "graphsage") {
    throw ConfigError("config: model must be \"gcn\" or \"graphsage\", got \"" + c.model + "\"");
  }
  if (c.dataset.empty()) throw ConfigError("config: dataset is required");
  if (c.lr <= 0.0) throw ConfigError("config: lr must be > 0");
  if (c.alpha <= 0.0) throw ConfigError("config: alpha must be > 0");
  if (c.gamma < 0.0) throw ConfigError("config: gamma must be >= 0");
  if (c.dropout < 0.0 || c.dropout >= 1.0) throw ConfigError("config: dropout must be in [0,1)");
  if (c.warmup_epochs < 0 || c.fairness_epochs < 0) {
    throw ConfigError("config: epoch counts must be >= 0");
  }
  if (c.k < 1) throw ConfigError("config: k must be >= 1");
  if (c.batch_size < 1) throw ConfigError("config: batch_size must be >= 1");
  if (c.neg_ratio < 1) throw ConfigError("config: neg_ratio must be >= 1");
  if (c.pca_components < 0) throw ConfigError("config: pca_components must be >= 0");
  const bool has_fanout = c.fanout.layer1 > 0 || c.fanout.layer2 > 0;
  if (c.model == "graphsage") {
    if (c.fanout.layer1 < 1 || c.fanout.layer2 < 1) {
      throw ConfigError("config: graphsage requires fanout1 and fanout2 >= 1");
    }
  } else if (has_fanout) {
    throw ConfigError("config: fanout applies to graphsage only");
  }
}

}  // namespace

nlohmann::json TrainConfig::to_json() const {
  nlohmann::json j = {
      {"model", model},
      {"dataset", dataset},
      {"out_dir", out_dir},
      {"lr", lr},
      {"weight_decay", weight_decay},
      {"dropout", dropout},
      {"warmup_epochs", warmup_epochs},
      {"fairness_epochs", fairness_epochs},
      {"gamma", gamma},
      {"alpha", alpha},
      {"k", k},
      {"batch_size", batch_size},
      {"neg_ratio", neg_ratio},
      {"pca_components", pca_components},
      {"seed", seed},
  };
  if (is_sage()) {
    j["fanout1"] = fanout.layer1;
    j["fanout2"] = fanout.layer2;
  }
  return j;
}

std::string TrainConfig::digest() const {
  nlohmann::json j = to_json();
  j.erase("out_dir");
  const std::string s = j.dump();
  std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

TrainConfig parse_train_config(const nlohmann::json& j) {
  reject_unknown(j, "config");
  TrainConfig c;
  apply_keys(c, j);
  validate(c);
  return c;
}

TrainConfig load_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_train_config(j);
}

TrainConfig apply_override(const TrainConfig& base, const nlohmann::json& over) {
  reject_unknown(over, "override");
  TrainConfig c = base;
  apply_keys(c, over);
  validate(c);
  return c;
}

SweepSpec load_sweep_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open sweep spec " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("base") || !j.contains("overrides")) {
    throw ConfigError(path + ": sweep spec needs \"base\" and \"overrides\"");
  }
  SweepSpec spec;
  spec.base = parse_train_config(j.at("base"));
  for (const auto& o : j.at("overrides")) {
    reject_unknown(o, "override");
    spec.overrides.push_back(o);
  }
  spec.csv_path = j.value("csv", "results.csv");
  return spec;
}

}  // namespace redress
