#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "redress/dataset.hpp"
#include "redress/errors.hpp"
#include "redress/fairness.hpp"
#include "redress/models.hpp"
#include "redress/synth.hpp"
#include "redress/trainer.hpp"

namespace {

using namespace redress;

int cmd_prep(const std::string& raw_dir, const std::string& out_dir, int pca_components) {
  Dataset d = load_dataset(raw_dir);
  std::filesystem::create_directories(out_dir);
  save_dataset(out_dir, d);
  if (pca_components > 0) {
    pca_reduced_cached(out_dir, d.features, pca_components);
  }
  std::cout << d.meta.name << ": " << d.meta.nodes << " nodes, " << d.meta.edges << " edges, "
            << d.meta.features << " features -> " << out_dir << "\n";
  return 0;
}

int cmd_train(const std::string& config_path) {
  const TrainConfig cfg = load_train_config(config_path);
  const std::string csv = (std::filesystem::path(cfg.out_dir) / "results.csv").string();
  std::filesystem::create_directories(cfg.out_dir);
  MetricsReport r;
  try {
    r = run_experiment(cfg, csv);
  } catch (...) {
    append_failed_row(csv, cfg);
    throw;
  }
  std::cout << "vanilla: auc " << r.vanilla.auc_pct << " fairness " << r.vanilla.fairness_pct
            << "\n";
  if (r.has_redress) {
    std::cout << "redress: auc " << r.redress.auc_pct << " fairness " << r.redress.fairness_pct
              << "\n";
  }
  return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& config_path) {
  const TrainConfig cfg = load_train_config(config_path);
  Trainer trainer(cfg);
  trainer.restore(load_checkpoint(ckpt_path));
  nlohmann::json out = {
      {"checkpoint", ckpt_path},
      {"test_auc", trainer.evaluate_auc(Trainer::Split::kTest)},
      {"fairness_ndcg", trainer.evaluate_fairness()},
  };
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_sweep(const std::string& spec_path) {
  run_sweep(load_sweep_spec(spec_path));
  return 0;
}

int cmd_audit(const std::string& ckpt_path, const std::string& dataset_dir, int pca_components,
              int k) {
  Dataset d = load_dataset(dataset_dir);
  DenseMatrix feats = pca_reduced_cached(dataset_dir, d.features, pca_components);
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  Embeddings emb;
  if (ckpt.model == "graphsage") {
    SageModel m = SageModel::init(feats.cols, ckpt.hidden, ckpt.seed);
    restore_sage(m, ckpt);
    emb = m.forward(full_blocks(d.graph), feats);
  } else {
    GcnModel m = GcnModel::init(feats.cols, ckpt.hidden, ckpt.seed);
    restore_gcn(m, ckpt);
    emb = m.forward(d.graph, gcn_norm(d.graph), feats);
  }
  std::vector<std::uint32_t> nodes(d.graph.node_count());
  for (std::uint32_t i = 0; i < nodes.size(); ++i) nodes[i] = i;
  CosineSim learned(emb);
  dump_ranked(std::cout, cosine_topk(learned, static_cast<std::size_t>(k), nodes));
  return 0;
}

int cmd_gen(const std::string& out_dir, const std::string& params_path) {
  SynthSpec spec;
  if (!params_path.empty()) {
    std::ifstream in(params_path);
    if (!in) throw ConfigError("cannot open " + params_path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(params_path + ": " + e.what());
    }
    spec.name = j.value("name", spec.name);
    spec.nodes = j.value("nodes", spec.nodes);
    spec.communities = j.value("communities", spec.communities);
    spec.interest_groups = j.value("interest_groups", spec.interest_groups);
    spec.taste_scale = j.value("taste_scale", spec.taste_scale);
    spec.hub_link_prob = j.value("hub_link_prob", spec.hub_link_prob);
    spec.hub_taste_scale = j.value("hub_taste_scale", spec.hub_taste_scale);
    spec.hub_extra_degree = j.value("hub_extra_degree", spec.hub_extra_degree);
    spec.feature_dim = j.value("feature_dim", spec.feature_dim);
    spec.intra_degree = j.value("intra_degree", spec.intra_degree);
    spec.inter_degree = j.value("inter_degree", spec.inter_degree);
    spec.taste_degree = j.value("taste_degree", spec.taste_degree);
    spec.proto_scale = j.value("proto_scale", spec.proto_scale);
    spec.grad_scale = j.value("grad_scale", spec.grad_scale);
    spec.noise_scale = j.value("noise_scale", spec.noise_scale);
    spec.hub_exponent = j.value("hub_exponent", spec.hub_exponent);
    spec.seed = j.value("seed", spec.seed);
  }
  Dataset d = make_synthetic(spec);
  std::filesystem::create_directories(out_dir);
  save_dataset(out_dir, d);
  std::cout << spec.name << ": " << d.meta.nodes << " nodes, " << d.meta.edges << " edges -> "
            << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"link-prediction GNN training with rank-based fairness"};
  app.require_subcommand(1);

  std::string raw_dir, out_dir, config_path, ckpt_path, spec_path, dataset_dir, params_path;
  int pca_components = 200;
  int k = 10;

  auto* prep = app.add_subcommand("prep", "validate a raw dataset and write the canonical copy");
  prep->add_option("raw-dir", raw_dir)->required();
  prep->add_option("out-dir", out_dir)->required();
  prep->add_option("--pca", pca_components, "components to precompute (0 skips)");

  auto* train = app.add_subcommand("train", "run one experiment from a config");
  train->add_option("config", config_path)->required();

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("checkpoint", ckpt_path)->required();
  eval->add_option("config", config_path)->required();

  auto* sweep = app.add_subcommand("sweep", "run a sweep spec");
  sweep->add_option("spec", spec_path)->required();

  auto* audit = app.add_subcommand("audit", "dump learned top-k ranked lists");
  audit->add_option("checkpoint", ckpt_path)->required();
  audit->add_option("--dataset", dataset_dir)->required();
  audit->add_option("--pca", pca_components);
  audit->add_option("--k", k);

  auto* gen = app.add_subcommand("gen", "write a synthetic benchmark dataset");
  gen->add_option("out-dir", out_dir)->required();
  gen->add_option("--params", params_path, "JSON generator parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (prep->parsed()) return cmd_prep(raw_dir, out_dir, pca_components);
    if (train->parsed()) return cmd_train(config_path);
    if (eval->parsed()) return cmd_eval(ckpt_path, config_path);
    if (sweep->parsed()) return cmd_sweep(spec_path);
    if (audit->parsed()) return cmd_audit(ckpt_path, dataset_dir, pca_components, k);
    if (gen->parsed()) return cmd_gen(out_dir, params_path);
  } catch (const redress::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const redress::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const redress::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
