#pragma once

#include <optional>
#include <string>
#include <vector>

#include "redress/adam.hpp"
#include "redress/config.hpp"
#include "redress/dataset.hpp"
#include "redress/fairness.hpp"
#include "redress/models.hpp"
#include "redress/split.hpp"

namespace redress {

struct EpochPoint {
  double utility_loss = 0.0;
  double fairness_loss = 0.0;
  double val_auc = 0.0;
  double fairness_ndcg = 0.0;
};

struct PhaseMetrics {
  double auc_pct = 0.0;           // test AUC
  double fairness_pct = 0.0;      // NDCG@k over all nodes
};

struct MetricsReport {
  TrainConfig cfg;
  PhaseMetrics vanilla;
  PhaseMetrics redress;
  bool has_redress = false;
  std::vector<EpochPoint> warmup_curve;
  std::vector<EpochPoint> fairness_curve;
  double warmup_seconds = 0.0;
  double fairness_seconds = 0.0;
};

// One training run: dataset prep (PCA-cached), 40/40/20 edge split, warm-up
// (utility only) with best-val-AUC checkpointing, then joint
// utility + gamma * fairness training, with evaluation on full
// neighborhoods throughout.
class Trainer {
 public:
  explicit Trainer(TrainConfig cfg);
  Trainer(TrainConfig cfg, Dataset ds);  // dataset already in memory

  // Utility-only epochs; finishes on the best validation-AUC checkpoint.
  // Records one EpochPoint per epoch in report().warmup_curve.
  void train_warmup();

  // Joint loss epochs, starting from the current parameters.
  void train_redress();

  enum class Split { kVal, kTest };
  double evaluate_auc(Split which);
  double evaluate_fairness();

  // warmup + vanilla eval + redress + redress eval.
  MetricsReport run();

  const MetricsReport& report() const { return report_; }
  const EdgeSplit& split() const { return split_; }

  Checkpoint checkpoint() const;
  void restore(const Checkpoint& c);

  // Full-neighborhood embeddings for the current parameters (no sampling,
  // no dropout).
  Embeddings infer_full();

 private:
  void prepare();
  void init_model();
  void warmup_epoch_gcn(int epoch);
  void warmup_epoch_sage(int epoch);
  void redress_epoch_gcn(int epoch, EpochPoint& pt);
  void redress_epoch_sage(int epoch, EpochPoint& pt);
  std::vector<ParamTensor*> params();

  TrainConfig cfg_;
  Dataset data_;
  DenseMatrix feats_;  // PCA-reduced (or raw) features used everywhere
  EdgeSplit split_;
  Graph train_graph_;
  GcnNormCoeffs norm_;
  LayeredSubgraph full_blocks_;
  std::optional<CosineSim> apriori_;
  RankedSimilarity sg_topk_;  // depth k+1 over all nodes

  std::optional<GcnModel> gcn_;
  std::optional<SageModel> sage_;
  std::optional<AdamOptimizer> adam_;

  MetricsReport report_;
};

// Returns PCA-reduced features, caching the result next to the dataset as
// pca_<k>.bin (atomic rename, so concurrent runs may share a cache).
DenseMatrix pca_reduced_cached(const std::string& dataset_dir, const DenseMatrix& raw,
                               int n_components);

// Runs one experiment and appends CSV rows + a JSON report under
// cfg.out_dir. include_vanilla controls whether the post-warmup row is
// emitted alongside the final row.
MetricsReport run_experiment(const TrainConfig& cfg, const std::string& csv_path,
                             bool include_vanilla = true);

void run_sweep(const SweepSpec& spec);

// results.csv columns, fixed order:
// run_id, dataset, model, redress, seed, fanout1, fanout2, auc,
// fairness_ndcg10, auc_delta_pct, fairness_delta_pct, warmup_epochs,
// fairness_epochs, wallclock_s
void append_csv_rows(const std::string& csv_path, const MetricsReport& r, bool include_vanilla);

void write_json_report(const std::string& path, const MetricsReport& r);

// Partial row for a run that died mid-pipeline: config columns filled, metric
// columns carry "failed".
void append_failed_row(const std::string& csv_path, const TrainConfig& cfg);

}  // namespace redress
