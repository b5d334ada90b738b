#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "redress/adam.hpp"
#include "redress/config.hpp"
#include "redress/metrics.hpp"
#include "redress/rng.hpp"
#include "redress/synth.hpp"
#include "redress/trainer.hpp"

using namespace redress;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("redress_trainer_" + std::to_string(RngStream(::getpid()).next()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

double auc_oracle(const std::vector<double>& pos, const std::vector<double>& neg) {
  double wins = 0.0;
  for (double p : pos) {
    for (double n : neg) {
      if (p > n) wins += 1.0;
      else if (p == n) wins += 0.5;
    }
  }
  return 100.0 * wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

Dataset tiny_dataset(std::uint64_t seed = 5) {
  SynthSpec spec;
  spec.name = "tiny";
  spec.nodes = 60;
  spec.communities = 6;
  spec.feature_dim = 16;
  spec.intra_degree = 6;
  spec.inter_degree = 1;
  spec.noise_scale = 0.3;
  spec.seed = seed;
  return make_synthetic(spec);
}

TrainConfig tiny_config(const std::string& model, const std::string& out_dir) {
  TrainConfig cfg;
  cfg.model = model;
  cfg.dataset = out_dir;  // pca cache location (unused at pca_components = 0)
  cfg.out_dir = out_dir;
  cfg.lr = 0.01;
  cfg.warmup_epochs = 4;
  cfg.fairness_epochs = 3;
  cfg.alpha = 1.0;
  cfg.gamma = 1.0;
  cfg.k = 5;
  cfg.batch_size = 16;
  cfg.pca_components = 0;
  cfg.seed = 3;
  if (model == "graphsage") cfg.fanout = {3, 3};
  return cfg;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("auc hand values") {
  CHECK(auc_percent({2.0, 3.0}, {0.0, 1.0}) == 100.0);
  CHECK(auc_percent({1.0, 1.0}, {1.0, 1.0}) == 50.0);
  CHECK(auc_percent({0.0}, {1.0}) == 0.0);
  CHECK_THROWS_AS(auc_percent({}, {1.0}), ContractError);
  CHECK_THROWS_AS(auc_percent({1.0}, {}), ContractError);
}

TEST_CASE("auc matches the quadratic oracle with ties") {
  RngStream rng(101);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> pos(120), neg(80);
    // coarse grid forces plenty of exact ties
    for (double& v : pos) v = static_cast<double>(rng.below(20)) / 10.0;
    for (double& v : neg) v = static_cast<double>(rng.below(20)) / 10.0;
    CHECK(std::fabs(auc_percent(pos, neg) - auc_oracle(pos, neg)) <= 1e-10);
  }
}

TEST_CASE("auc of a random permutation sits near 50") {
  RngStream rng(102);
  std::vector<double> pos(4000), neg(4000);
  for (double& v : pos) v = rng.uniform();
  for (double& v : neg) v = rng.uniform();
  CHECK(auc_percent(pos, neg) == doctest::Approx(50.0).epsilon(0.04));
}

TEST_CASE("adam ignores zero gradients") {
  ParamTensor p(DenseMatrix::identity(3), "p");
  AdamOptimizer opt(0.1, 0.0);
  std::vector<double> before = p.value.values;
  opt.step({&p});
  CHECK(p.value.values == before);
}

TEST_CASE("adam drives a quadratic to zero") {
  DenseMatrix x0(1, 1);
  x0.values = {1.0};
  ParamTensor x(x0, "x");
  AdamOptimizer opt(0.05, 0.0);
  for (int i = 0; i < 600; ++i) {
    x.zero_grad();
    x.grad.values[0] = 2.0 * x.value.values[0];
    opt.step({&x});
  }
  CHECK(std::fabs(x.value.values[0]) <= 1e-3);
}

TEST_CASE("adam is deterministic") {
  RngStream rng(103);
  DenseMatrix init(2, 2);
  for (double& v : init.values) v = rng.uniform();
  ParamTensor a(init, "a"), b(init, "b");
  AdamOptimizer oa(0.01, 0.1), ob(0.01, 0.1);
  for (int i = 0; i < 50; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      a.grad.values[j] = std::sin(static_cast<double>(i + 1) * (1.0 + static_cast<double>(j)));
      b.grad.values[j] = a.grad.values[j];
    }
    oa.step({&a});
    ob.step({&b});
  }
  CHECK(a.value.values == b.value.values);
}

TEST_CASE("adam rejects non-finite gradients by name") {
  ParamTensor p(DenseMatrix(1, 1), "w_broken");
  p.grad.values[0] = std::numeric_limits<double>::quiet_NaN();
  AdamOptimizer opt(0.01, 0.0);
  CHECK_THROWS_WITH_AS(opt.step({&p}), doctest::Contains("w_broken"), NumericError);
}

TEST_CASE("config parsing accepts a full object and rejects junk") {
  nlohmann::json good = {
      {"model", "graphsage"}, {"dataset", "d"},      {"lr", 0.001},  {"warmup_epochs", 30},
      {"fairness_epochs", 60}, {"gamma", 1.0},        {"alpha", 0.5}, {"k", 10},
      {"batch_size", 32},      {"fanout1", 5},        {"fanout2", 5}, {"neg_ratio", 1},
      {"pca_components", 200}, {"seed", 7},
  };
  TrainConfig cfg = parse_train_config(good);
  CHECK(cfg.is_sage());
  CHECK(cfg.fanout.layer1 == 5);
  CHECK(cfg.seed == 7);

  nlohmann::json junk = good;
  junk["learning_rate"] = 0.1;  // unknown key
  CHECK_THROWS_AS(parse_train_config(junk), ConfigError);

  nlohmann::json no_fanout = good;
  no_fanout.erase("fanout1");
  no_fanout.erase("fanout2");
  CHECK_THROWS_AS(parse_train_config(no_fanout), ConfigError);

  nlohmann::json bad_lr = good;
  bad_lr["lr"] = -1.0;
  CHECK_THROWS_AS(parse_train_config(bad_lr), ConfigError);

  nlohmann::json bad_model = good;
  bad_model["model"] = "gat";
  CHECK_THROWS_AS(parse_train_config(bad_model), ConfigError);
}

TEST_CASE("config digest covers seed but not out_dir") {
  nlohmann::json j = {{"model", "gcn"}, {"dataset", "d"}, {"seed", 1}};
  TrainConfig a = parse_train_config(j);
  TrainConfig b = a;
  b.out_dir = "elsewhere";
  CHECK(a.digest() == b.digest());
  TrainConfig c = a;
  c.seed = 2;
  CHECK(a.digest() != c.digest());
}

TEST_CASE("apply_override changes only the named keys") {
  nlohmann::json j = {{"model", "graphsage"}, {"dataset", "d"}, {"fanout1", 5}, {"fanout2", 5}};
  TrainConfig base = parse_train_config(j);
  TrainConfig over = apply_override(base, {{"fanout1", 30}, {"seed", 9}});
  CHECK(over.fanout.layer1 == 30);
  CHECK(over.fanout.layer2 == 5);
  CHECK(over.seed == 9);
  CHECK(over.model == base.model);
  CHECK(base.fanout.layer1 == 5);
}

TEST_CASE("tiny gcn run produces sane curves and restorable checkpoints") {
  TempDir dir;
  TrainConfig cfg = tiny_config("gcn", dir.path.string());
  Dataset ds = tiny_dataset();
  Trainer t(cfg, ds);
  MetricsReport r = t.run();
  CHECK(r.warmup_curve.size() == 4);
  CHECK(r.fairness_curve.size() == 3);
  CHECK(r.vanilla.auc_pct >= 0.0);
  CHECK(r.vanilla.auc_pct <= 100.0);
  CHECK(r.redress.fairness_pct >= 0.0);
  CHECK(std::isfinite(r.redress.auc_pct));
  CHECK(r.has_redress);

  Checkpoint ck = t.checkpoint();
  Trainer fresh(cfg, ds);
  fresh.restore(ck);
  CHECK(fresh.evaluate_auc(Trainer::Split::kTest) == r.redress.auc_pct);
  CHECK(fresh.evaluate_fairness() == r.redress.fairness_pct);
}

TEST_CASE("tiny sage run exercises the sampled pipeline") {
  TempDir dir;
  TrainConfig cfg = tiny_config("graphsage", dir.path.string());
  cfg.warmup_epochs = 2;
  cfg.fairness_epochs = 2;
  cfg.lr = 0.005;
  Dataset ds = tiny_dataset(6);
  Trainer t(cfg, ds);
  MetricsReport r = t.run();
  CHECK(r.warmup_curve.size() == 2);
  CHECK(r.fairness_curve.size() == 2);
  CHECK(std::isfinite(r.redress.auc_pct));
  CHECK(std::isfinite(r.redress.fairness_pct));
}

TEST_CASE("identical config and seed give bitwise identical csv metrics") {
  TempDir d1, d2;
  Dataset ds = tiny_dataset();
  TrainConfig c1 = tiny_config("gcn", d1.path.string());
  TrainConfig c2 = tiny_config("gcn", d2.path.string());
  const std::string csv1 = (d1.path / "r.csv").string();
  const std::string csv2 = (d2.path / "r.csv").string();
  {
    Trainer t(c1, ds);
    append_csv_rows(csv1, t.run(), true);
  }
  {
    Trainer t(c2, ds);
    append_csv_rows(csv2, t.run(), true);
  }
  auto rows1 = read_csv(csv1), rows2 = read_csv(csv2);
  REQUIRE(rows1.size() == rows2.size());
  REQUIRE(rows1.size() >= 3);  // header + vanilla + redress
  for (std::size_t i = 0; i < rows1.size(); ++i) {
    REQUIRE(rows1[i].size() == 14);
    for (std::size_t col = 0; col < 13; ++col) {  // all but wallclock_s
      CHECK(rows1[i][col] == rows2[i][col]);
    }
  }
}

TEST_CASE("fairness_epochs zero emits a vanilla-only report") {
  TempDir dir;
  Dataset ds = tiny_dataset();
  TrainConfig cfg = tiny_config("gcn", dir.path.string());
  cfg.fairness_epochs = 0;
  Trainer t(cfg, ds);
  MetricsReport r = t.run();
  CHECK(!r.has_redress);
  CHECK(r.fairness_curve.empty());
  const std::string csv = (dir.path / "r.csv").string();
  append_csv_rows(csv, r, true);
  auto rows = read_csv(csv);
  REQUIRE(rows.size() == 2);  // header + vanilla row only
  CHECK(rows[1][3] == "0");   // redress column
}

TEST_CASE("failed runs leave a marked csv row") {
  TempDir dir;
  TrainConfig cfg = tiny_config("gcn", dir.path.string());
  const std::string csv = (dir.path / "r.csv").string();
  append_failed_row(csv, cfg);
  auto rows = read_csv(csv);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1][1] == fs::path(cfg.dataset).filename().string());
  bool has_failed = false;
  for (const std::string& cell : rows[1]) has_failed |= cell == "failed";
  CHECK(has_failed);
}

TEST_CASE("gamma zero keeps fairness out of the update") {
  // With gamma = 0 the fairness term contributes nothing, so two runs that
  // differ only in alpha (which scales the fairness gradient) must coincide.
  TempDir d1, d2;
  Dataset ds = tiny_dataset();
  TrainConfig c1 = tiny_config("gcn", d1.path.string());
  c1.gamma = 0.0;
  c1.alpha = 0.5;
  TrainConfig c2 = tiny_config("gcn", d2.path.string());
  c2.gamma = 0.0;
  c2.alpha = 5.0;
  Trainer t1(c1, ds), t2(c2, ds);
  MetricsReport r1 = t1.run(), r2 = t2.run();
  CHECK(r1.redress.auc_pct == r2.redress.auc_pct);
  CHECK(r1.redress.fairness_pct == r2.redress.fairness_pct);
}
