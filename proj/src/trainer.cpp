#include "redress/trainer.hpp"

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "redress/metrics.hpp"
#include "redress/pca.hpp"

namespace redress {

namespace {

constexpr std::size_t kHidden = 256;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<std::uint32_t> all_nodes(std::size_t n) {
  std::vector<std::uint32_t> v(n);
  for (std::uint32_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

DenseMatrix pca_reduced_cached(const std::string& dataset_dir, const DenseMatrix& raw,
                               int n_components) {
  namespace fs = std::filesystem;
  if (n_components <= 0) return raw;
  const auto k = static_cast<std::size_t>(n_components);
  const fs::path cache = fs::path(dataset_dir) / ("pca_" + std::to_string(k) + ".bin");
  if (fs::exists(cache)) {
    std::ifstream in(cache, std::ios::binary);
    std::uint64_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), 8);
    in.read(reinterpret_cast<char*>(&cols), 8);
    if (in && rows == raw.rows && cols == k) {
      DenseMatrix m(rows, cols);
      in.read(reinterpret_cast<char*>(m.values.data()),
              static_cast<std::streamsize>(m.values.size() * sizeof(double)));
      if (in) return m;
    }
    // Stale or truncated cache: fall through and rebuild.
  }
  DenseMatrix reduced = pca_reduce(raw, k);
  const fs::path tmp = cache.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary);
    const std::uint64_t rows = reduced.rows, cols = reduced.cols;
    out.write(reinterpret_cast<const char*>(&rows), 8);
    out.write(reinterpret_cast<const char*>(&cols), 8);
    out.write(reinterpret_cast<const char*>(reduced.values.data()),
              static_cast<std::streamsize>(reduced.values.size() * sizeof(double)));
  }
  std::error_code ec;
  fs::rename(tmp, cache, ec);  // atomic publish; losers of the race are fine
  if (ec) fs::remove(tmp, ec);
  return reduced;
}

Trainer::Trainer(TrainConfig cfg) : cfg_(std::move(cfg)), data_(load_dataset(cfg_.dataset)) {
  prepare();
}

Trainer::Trainer(TrainConfig cfg, Dataset ds) : cfg_(std::move(cfg)), data_(std::move(ds)) {
  prepare();
}

void Trainer::prepare() {
  report_.cfg = cfg_;
  feats_ = pca_reduced_cached(cfg_.dataset, data_.features, cfg_.pca_components);
  split_ = split_edges(data_.graph, {0.4, 0.4, 0.2}, cfg_.seed);
  // Message passing sees train edges only; val/test edges stay held out.
  train_graph_ = Graph::from_edges(data_.graph.node_count(), split_.train_pos);
  norm_ = gcn_norm(train_graph_);
  if (cfg_.is_sage()) full_blocks_ = full_blocks(train_graph_);
  apriori_.emplace(feats_);
  sg_topk_ = cosine_topk(*apriori_, static_cast<std::size_t>(cfg_.k) + 1,
                         all_nodes(data_.graph.node_count()));
  init_model();
}

void Trainer::init_model() {
  if (cfg_.is_sage()) {
    sage_ = SageModel::init(feats_.cols, kHidden, cfg_.seed);
    sage_->dropout = cfg_.dropout;
  } else {
    gcn_ = GcnModel::init(feats_.cols, kHidden, cfg_.seed);
    gcn_->dropout = cfg_.dropout;
  }
  adam_.emplace(cfg_.lr, cfg_.weight_decay);
}

std::vector<ParamTensor*> Trainer::params() {
  return cfg_.is_sage() ? sage_->params() : gcn_->params();
}

Embeddings Trainer::infer_full() {
  if (cfg_.is_sage()) return sage_->forward(full_blocks_, feats_);
  return gcn_->forward(train_graph_, norm_, feats_);
}

Checkpoint Trainer::checkpoint() const {
  if (cfg_.is_sage()) return snapshot_sage(*sage_, cfg_.seed);
  return snapshot_gcn(*gcn_, cfg_.seed);
}

void Trainer::restore(const Checkpoint& c) {
  if (cfg_.is_sage()) {
    restore_sage(*sage_, c);
  } else {
    restore_gcn(*gcn_, c);
  }
}

double Trainer::evaluate_auc(Split which) {
  const EdgeList& pos = which == Split::kVal ? split_.val_pos : split_.test_pos;
  const EdgeList& neg = which == Split::kVal ? split_.val_neg : split_.test_neg;
  if (pos.empty() || neg.empty()) throw ContractError("evaluate_auc: empty split");
  Embeddings emb = infer_full();
  return auc_percent(score_links(emb, pos), score_links(emb, neg));
}

double Trainer::evaluate_fairness() {
  Embeddings emb = infer_full();
  CosineSim learned(emb);
  RankedSimilarity sy = cosine_topk(learned, static_cast<std::size_t>(cfg_.k) + 1,
                                    all_nodes(data_.graph.node_count()));
  return fairness_ndcg_metric(sg_topk_, sy, static_cast<std::size_t>(cfg_.k), *apriori_).mean_pct;
}

void Trainer::warmup_epoch_gcn(int epoch) {
  RngStream neg_rng(cfg_.seed, RngPurpose::kTrainNegatives, static_cast<std::uint64_t>(epoch));
  EdgeList negs = attach_negatives(split_.train_pos, data_.graph, cfg_.neg_ratio, neg_rng);
  RngStream drop_rng(cfg_.seed, RngPurpose::kDropout, static_cast<std::uint64_t>(epoch));
  Embeddings emb = gcn_->forward(train_graph_, norm_, feats_, /*cache=*/true,
                                 cfg_.dropout > 0.0 ? &drop_rng : nullptr);
  DenseMatrix d_emb(emb.values.rows, emb.values.cols);
  const double loss = utility_loss_backward(emb, split_.train_pos, negs, d_emb);
  for (ParamTensor* p : params()) p->zero_grad();
  gcn_->backward(train_graph_, norm_, d_emb);
  adam_->step(params());
  report_.warmup_curve.push_back({loss, 0.0, 0.0, 0.0});
}

void Trainer::warmup_epoch_sage(int epoch) {
  RngStream epoch_key(cfg_.seed, RngPurpose::kBatchShuffle, static_cast<std::uint64_t>(epoch));
  auto batches = edge_minibatches(split_.train_pos, static_cast<std::size_t>(cfg_.batch_size),
                                  epoch_key.next());
  double loss_sum = 0.0;
  for (std::size_t b = 0; b < batches.size(); ++b) {
    RngStream neg_rng(cfg_.seed, RngPurpose::kTrainNegatives, static_cast<std::uint64_t>(epoch), b);
    RngStream samp_rng(cfg_.seed, RngPurpose::kNeighborSample, static_cast<std::uint64_t>(epoch),
                       b);
    EdgeList negs = attach_negatives(batches[b], data_.graph, cfg_.neg_ratio, neg_rng);
    std::vector<std::uint32_t> seeds;
    for (const Edge& e : batches[b]) {
      seeds.push_back(e.u);
      seeds.push_back(e.v);
    }
    for (const Edge& e : negs) {
      seeds.push_back(e.u);
      seeds.push_back(e.v);
    }
    LayeredSubgraph blocks = build_blocks(train_graph_, seeds, cfg_.fanout, samp_rng);
    RngStream drop_rng(cfg_.seed, RngPurpose::kDropout, static_cast<std::uint64_t>(epoch), b);
    Embeddings emb = sage_->forward(blocks, feats_, /*cache=*/true,
                                    cfg_.dropout > 0.0 ? &drop_rng : nullptr);
    DenseMatrix d_emb(emb.values.rows, emb.values.cols);
    loss_sum += utility_loss_backward(emb, batches[b], negs, d_emb);
    for (ParamTensor* p : params()) p->zero_grad();
    sage_->backward(blocks, d_emb);
    adam_->step(params());
  }
  report_.warmup_curve.push_back({loss_sum / static_cast<double>(batches.size()), 0.0, 0.0, 0.0});
}

void Trainer::train_warmup() {
  const auto t0 = std::chrono::steady_clock::now();
  double best_val = -1.0;
  std::optional<Checkpoint> best;
  for (int epoch = 0; epoch < cfg_.warmup_epochs; ++epoch) {
    if (cfg_.is_sage()) {
      warmup_epoch_sage(epoch);
    } else {
      warmup_epoch_gcn(epoch);
    }
    EpochPoint& pt = report_.warmup_curve.back();
    pt.val_auc = evaluate_auc(Split::kVal);
    pt.fairness_ndcg = evaluate_fairness();
    if (pt.val_auc > best_val) {
      best_val = pt.val_auc;
      best = checkpoint();
    }
  }
  if (best.has_value()) restore(*best);
  report_.warmup_seconds = seconds_since(t0);
}

void Trainer::redress_epoch_gcn(int epoch, EpochPoint& pt) {
  const int global_epoch = cfg_.warmup_epochs + epoch;
  RngStream neg_rng(cfg_.seed, RngPurpose::kTrainNegatives,
                    static_cast<std::uint64_t>(global_epoch));
  EdgeList negs = attach_negatives(split_.train_pos, data_.graph, cfg_.neg_ratio, neg_rng);
  RngStream drop_rng(cfg_.seed, RngPurpose::kDropout, static_cast<std::uint64_t>(global_epoch));
  Embeddings emb = gcn_->forward(train_graph_, norm_, feats_, /*cache=*/true,
                                 cfg_.dropout > 0.0 ? &drop_rng : nullptr);
  DenseMatrix d_emb(emb.values.rows, emb.values.cols);
  pt.utility_loss = utility_loss_backward(emb, split_.train_pos, negs, d_emb);

  // Learned top-k lists are refreshed once per epoch from this forward.
  CosineSim learned(emb);
  const auto nodes = all_nodes(data_.graph.node_count());
  RankedSimilarity sy = cosine_topk(learned, static_cast<std::size_t>(cfg_.k) + 1, nodes);

  FairnessConfig fcfg{cfg_.alpha, cfg_.gamma, static_cast<std::size_t>(cfg_.k)};
  DenseMatrix d_fair(emb.values.rows, emb.values.cols);
  FairnessResult fr = fairness_loss_and_grad(nodes, sg_topk_, sy, *apriori_, emb, fcfg, d_fair);
  pt.fairness_loss = fr.loss;
  for (std::size_t i = 0; i < d_emb.values.size(); ++i) {
    d_emb.values[i] += cfg_.gamma * d_fair.values[i];
  }

  for (ParamTensor* p : params()) p->zero_grad();
  gcn_->backward(train_graph_, norm_, d_emb);
  adam_->step(params());

  pt.fairness_ndcg =
      fairness_ndcg_metric(sg_topk_, sy, static_cast<std::size_t>(cfg_.k), *apriori_).mean_pct;
}

void Trainer::redress_epoch_sage(int epoch, EpochPoint& pt) {
  const int global_epoch = cfg_.warmup_epochs + epoch;
  RngStream epoch_key(cfg_.seed, RngPurpose::kBatchShuffle,
                      static_cast<std::uint64_t>(global_epoch));
  auto batches = edge_minibatches(split_.train_pos, static_cast<std::size_t>(cfg_.batch_size),
                                  epoch_key.next());
  const FairnessConfig fcfg{cfg_.alpha, cfg_.gamma, static_cast<std::size_t>(cfg_.k)};
  const auto k1 = static_cast<std::size_t>(cfg_.k) + 1;
  double util_sum = 0.0, fair_sum = 0.0;
  for (std::size_t b = 0; b < batches.size(); ++b) {
    RngStream neg_rng(cfg_.seed, RngPurpose::kTrainNegatives,
                      static_cast<std::uint64_t>(global_epoch), b);
    RngStream samp_rng(cfg_.seed, RngPurpose::kNeighborSample,
                       static_cast<std::uint64_t>(global_epoch), b);
    EdgeList negs = attach_negatives(batches[b], data_.graph, cfg_.neg_ratio, neg_rng);

    // Anchors are the positive endpoints; each anchor's apriori top-k
    // candidates ride along so their embeddings exist in-batch.
    std::vector<std::uint32_t> anchors;
    for (const Edge& e : batches[b]) {
      anchors.push_back(e.u);
      anchors.push_back(e.v);
    }
    std::sort(anchors.begin(), anchors.end());
    anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());
    std::vector<std::uint32_t> universe = anchors;
    for (std::uint32_t a : anchors) {
      const RankedRow& row = sg_topk_.row_for(a);
      for (std::size_t t = 0; t < std::min<std::size_t>(row.items.size(), cfg_.k); ++t) {
        universe.push_back(row.items[t].first);
      }
    }
    std::sort(universe.begin(), universe.end());
    universe.erase(std::unique(universe.begin(), universe.end()), universe.end());

    std::vector<std::uint32_t> seeds = universe;
    for (const Edge& e : batches[b]) {
      seeds.push_back(e.u);
      seeds.push_back(e.v);
    }
    for (const Edge& e : negs) {
      seeds.push_back(e.u);
      seeds.push_back(e.v);
    }
    LayeredSubgraph blocks = build_blocks(train_graph_, seeds, cfg_.fanout, samp_rng);
    RngStream drop_rng(cfg_.seed, RngPurpose::kDropout, static_cast<std::uint64_t>(global_epoch),
                       b);
    Embeddings emb = sage_->forward(blocks, feats_, /*cache=*/true,
                                    cfg_.dropout > 0.0 ? &drop_rng : nullptr);
    DenseMatrix d_emb(emb.values.rows, emb.values.cols);
    util_sum += utility_loss_backward(emb, batches[b], negs, d_emb);

    CosineSim learned(emb);
    RankedSimilarity sy = cosine_topk(learned, k1, anchors, universe);
    DenseMatrix d_fair(emb.values.rows, emb.values.cols);
    FairnessResult fr = fairness_loss_and_grad(anchors, sg_topk_, sy, *apriori_, emb, fcfg, d_fair);
    fair_sum += fr.loss;
    for (std::size_t i = 0; i < d_emb.values.size(); ++i) {
      d_emb.values[i] += cfg_.gamma * d_fair.values[i];
    }

    for (ParamTensor* p : params()) p->zero_grad();
    sage_->backward(blocks, d_emb);
    adam_->step(params());
  }
  pt.utility_loss = util_sum / static_cast<double>(batches.size());
  pt.fairness_loss = fair_sum / static_cast<double>(batches.size());
  pt.fairness_ndcg = evaluate_fairness();
}

void Trainer::train_redress() {
  const auto t0 = std::chrono::steady_clock::now();
  for (int epoch = 0; epoch < cfg_.fairness_epochs; ++epoch) {
    EpochPoint pt;
    if (cfg_.is_sage()) {
      redress_epoch_sage(epoch, pt);
    } else {
      redress_epoch_gcn(epoch, pt);
    }
    pt.val_auc = evaluate_auc(Split::kVal);
    report_.fairness_curve.push_back(pt);
  }
  report_.fairness_seconds = seconds_since(t0);
}

MetricsReport Trainer::run() {
  train_warmup();
  report_.vanilla.auc_pct = evaluate_auc(Split::kTest);
  report_.vanilla.fairness_pct = evaluate_fairness();
  if (cfg_.fairness_epochs > 0) {
    train_redress();
    report_.has_redress = true;
    report_.redress.auc_pct = evaluate_auc(Split::kTest);
    report_.redress.fairness_pct = evaluate_fairness();
  }
  return report_;
}

namespace {

void append_row(std::ofstream& out, const MetricsReport& r, bool redress_phase,
                const PhaseMetrics& phase, const PhaseMetrics& vanilla, double wallclock) {
  const TrainConfig& c = r.cfg;
  const double auc_delta =
      redress_phase && vanilla.auc_pct != 0.0
          ? 100.0 * (phase.auc_pct - vanilla.auc_pct) / vanilla.auc_pct
          : 0.0;
  const double fair_delta =
      redress_phase && vanilla.fairness_pct != 0.0
          ? 100.0 * (phase.fairness_pct - vanilla.fairness_pct) / vanilla.fairness_pct
          : 0.0;
  out << c.digest() << ',' << std::filesystem::path(c.dataset).filename().string() << ','
      << c.model << ',' << (redress_phase ? 1 : 0) << ',' << c.seed << ',' << c.fanout.layer1
      << ',' << c.fanout.layer2 << ',' << fmt_g(phase.auc_pct) << ','
      << fmt_g(phase.fairness_pct) << ',' << fmt_g(auc_delta) << ',' << fmt_g(fair_delta) << ','
      << c.warmup_epochs << ',' << (redress_phase ? c.fairness_epochs : 0) << ','
      << fmt_g(wallclock) << '\n';
}

}  // namespace

void append_csv_rows(const std::string& csv_path, const MetricsReport& r, bool include_vanilla) {
  const bool fresh = !std::filesystem::exists(csv_path);
  std::ofstream out(csv_path, std::ios::app);
  if (!out) throw DataError("cannot write " + csv_path);
  if (fresh) {
    out << "run_id,dataset,model,redress,seed,fanout1,fanout2,auc,fairness_ndcg10,"
           "auc_delta_pct,fairness_delta_pct,warmup_epochs,fairness_epochs,wallclock_s\n";
  }
  if (include_vanilla || !r.has_redress) {
    append_row(out, r, false, r.vanilla, r.vanilla, r.warmup_seconds);
  }
  if (r.has_redress) {
    append_row(out, r, true, r.redress, r.vanilla, r.warmup_seconds + r.fairness_seconds);
  }
}

void append_failed_row(const std::string& csv_path, const TrainConfig& cfg) {
  const bool fresh = !std::filesystem::exists(csv_path);
  std::ofstream out(csv_path, std::ios::app);
  if (!out) return;  // reporting a failure must not throw over the original error
  if (fresh) {
    out << "run_id,dataset,model,redress,seed,fanout1,fanout2,auc,fairness_ndcg10,"
           "auc_delta_pct,fairness_delta_pct,warmup_epochs,fairness_epochs,wallclock_s\n";
  }
  out << cfg.digest() << ',' << std::filesystem::path(cfg.dataset).filename().string() << ','
      << cfg.model << ',' << (cfg.fairness_epochs > 0 ? 1 : 0) << ',' << cfg.seed << ','
      << cfg.fanout.layer1 << ',' << cfg.fanout.layer2
      << ",failed,failed,failed,failed," << cfg.warmup_epochs << ',' << cfg.fairness_epochs
      << ",failed\n";
}

void write_json_report(const std::string& path, const MetricsReport& r) {
  nlohmann::json j;
  j["config"] = r.cfg.to_json();
  j["run_id"] = r.cfg.digest();
  j["vanilla"] = {{"auc", r.vanilla.auc_pct}, {"fairness_ndcg", r.vanilla.fairness_pct}};
  if (r.has_redress) {
    j["redress"] = {{"auc", r.redress.auc_pct}, {"fairness_ndcg", r.redress.fairness_pct}};
  }
  j["wallclock"] = {{"warmup_s", r.warmup_seconds}, {"fairness_s", r.fairness_seconds}};
  auto curve = [](const std::vector<EpochPoint>& pts) {
    nlohmann::json arr = nlohmann::json::array();
    for (const EpochPoint& p : pts) {
      arr.push_back({{"utility_loss", p.utility_loss},
                     {"fairness_loss", p.fairness_loss},
                     {"val_auc", p.val_auc},
                     {"fairness_ndcg", p.fairness_ndcg}});
    }
    return arr;
  };
  j["warmup_curve"] = curve(r.warmup_curve);
  j["fairness_curve"] = curve(r.fairness_curve);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(2) << '\n';
}

MetricsReport run_experiment(const TrainConfig& cfg, const std::string& csv_path,
                             bool include_vanilla) {
  Trainer trainer(cfg);
  MetricsReport r = trainer.run();
  std::filesystem::create_directories(cfg.out_dir);
  append_csv_rows(csv_path, r, include_vanilla);
  const std::string stem = cfg.digest() + "_s" + std::to_string(cfg.seed);
  write_json_report(
      (std::filesystem::path(cfg.out_dir) / ("report_" + stem + ".json")).string(), r);
  save_checkpoint((std::filesystem::path(cfg.out_dir) / ("checkpoint_" + stem + ".bin")).string(),
                  trainer.checkpoint());
  return r;
}

void run_sweep(const SweepSpec& spec) {
  for (const auto& over : spec.overrides) {
    const TrainConfig cfg = apply_override(spec.base, over);
    try {
      run_experiment(cfg, spec.csv_path, /*include_vanilla=*/false);
    } catch (...) {
      append_failed_row(spec.csv_path, cfg);
      throw;
    }
  }
}

}  // namespace redress
