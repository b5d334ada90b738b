#include "redress/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "redress/errors.hpp"

namespace redress {

namespace {

DenseMatrix glorot(std::size_t fan_in, std::size_t fan_out, RngStream& rng) {
  DenseMatrix w(fan_in, fan_out);
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : w.values) v = (2.0 * rng.uniform() - 1.0) * limit;
  return w;
}

void add_bias(DenseMatrix& m, const DenseMatrix& b) {
  for (std::size_t i = 0; i < m.rows; ++i) {
    double* r = m.row(i);
    for (std::size_t j = 0; j < m.cols; ++j) r[j] += b.values[j];
  }
}

void acc_col_sums(const DenseMatrix& d, DenseMatrix& bias_grad) {
  for (std::size_t i = 0; i < d.rows; ++i) {
    const double* r = d.row(i);
    for (std::size_t j = 0; j < d.cols; ++j) bias_grad.values[j] += r[j];
  }
}

// Inverted dropout; the same mask is replayed in backward.
void apply_dropout(DenseMatrix& h, std::vector<double>& mask, double p, RngStream* rng) {
  mask.assign(h.values.size(), 1.0);
  if (p <= 0.0 || rng == nullptr) return;
  const double keep = 1.0 - p;
  for (std::size_t i = 0; i < h.values.size(); ++i) {
    mask[i] = rng->uniform() < keep ? 1.0 / keep : 0.0;
    h.values[i] *= mask[i];
  }
}

}  // namespace

Embeddings Embeddings::full(DenseMatrix v) {
  Embeddings e;
  e.nodes.resize(v.rows);
  e.node_slot.reserve(v.rows);
  for (std::uint32_t i = 0; i < v.rows; ++i) {
    e.nodes[i] = i;
    e.node_slot.emplace(i, i);
  }
  e.values = std::move(v);
  return e;
}

Embeddings Embeddings::mapped(DenseMatrix v, std::vector<std::uint32_t> node_ids) {
  if (v.rows != node_ids.size()) {
    throw DimensionError("embeddings: " + std::to_string(node_ids.size()) + " ids for " +
                         v.shape_str());
  }
  Embeddings e;
  e.values = std::move(v);
  e.nodes = std::move(node_ids);
  e.node_slot.reserve(e.nodes.size());
  for (std::uint32_t i = 0; i < e.nodes.size(); ++i) e.node_slot.emplace(e.nodes[i], i);
  return e;
}

std::uint32_t Embeddings::slot_of(std::uint32_t node) const {
  auto it = node_slot.find(node);
  if (it == node_slot.end()) {
    throw ContractError("embeddings: node " + std::to_string(node) + " not in batch");
  }
  return it->second;
}

DenseMatrix gcn_aggregate(const Graph& g, const GcnNormCoeffs& norm, const DenseMatrix& h) {
  if (h.rows != g.node_count()) {
    throw DimensionError("gcn_aggregate: " + h.shape_str() + " vs " +
                         std::to_string(g.node_count()) + " nodes");
  }
  DenseMatrix out(h.rows, h.cols);
  std::size_t slot = 0;
  for (std::uint32_t u = 0; u < g.node_count(); ++u) {
    double* ou = out.row(u);
    const double cs = norm.self[u];
    const double* hu = h.row(u);
    for (std::size_t j = 0; j < h.cols; ++j) ou[j] = cs * hu[j];
    for (std::uint32_t v : g.neighbors(u)) {
      const double c = norm.cross[slot++];
      const double* hv = h.row(v);
      for (std::size_t j = 0; j < h.cols; ++j) ou[j] += c * hv[j];
    }
  }
  return out;
}

GcnModel GcnModel::init(std::size_t in_dim, std::size_t hidden, std::uint64_t seed,
                        bool use_bias) {
  RngStream rng(seed, RngPurpose::kParamInit);
  GcnModel m{ParamTensor(glorot(in_dim, hidden, rng), "gcn.w1"),
             ParamTensor(glorot(hidden, hidden, rng), "gcn.w2"),
             ParamTensor(DenseMatrix(1, hidden), "gcn.b1"),
             ParamTensor(DenseMatrix(1, hidden), "gcn.b2")};
  m.use_bias = use_bias;
  return m;
}

Embeddings GcnModel::forward(const Graph& g, const GcnNormCoeffs& norm, const DenseMatrix& x,
                             bool cache, RngStream* dropout_rng) {
  if (x.cols != w1.value.rows) {
    throw DimensionError("gcn_forward: feature dim " + x.shape_str() + " vs W1 " +
                         w1.value.shape_str());
  }
  DenseMatrix ax = gcn_aggregate(g, norm, x);
  DenseMatrix pre1 = matmul(ax, w1.value);
  if (use_bias) add_bias(pre1, b1.value);
  DenseMatrix h1 = relu(pre1);
  std::vector<double> mask;
  apply_dropout(h1, mask, dropout_rng != nullptr ? dropout : 0.0, dropout_rng);
  DenseMatrix ah1 = gcn_aggregate(g, norm, h1);
  DenseMatrix out = matmul(ah1, w2.value);
  if (use_bias) add_bias(out, b2.value);
  if (cache) {
    ax_ = std::move(ax);
    pre1_ = std::move(pre1);
    h1_ = std::move(h1);
    ah1_ = std::move(ah1);
    drop_mask_ = std::move(mask);
    cached_ = true;
  }
  return Embeddings::full(std::move(out));
}

void GcnModel::backward(const Graph& g, const GcnNormCoeffs& norm, const DenseMatrix& d_out) {
  if (!cached_) throw ContractError("gcn backward: no cached forward");
  matmul_acc(transpose(ah1_), d_out, w2.grad);
  if (use_bias) acc_col_sums(d_out, b2.grad);
  DenseMatrix d_ah1 = matmul_a_bt(d_out, w2.value);
  DenseMatrix d_h1 = gcn_aggregate(g, norm, d_ah1);  // Â is symmetric
  if (!drop_mask_.empty()) {
    for (std::size_t i = 0; i < d_h1.values.size(); ++i) d_h1.values[i] *= drop_mask_[i];
  }
  DenseMatrix d_pre1 = relu_backward(pre1_, d_h1);
  matmul_acc(transpose(ax_), d_pre1, w1.grad);
  if (use_bias) acc_col_sums(d_pre1, b1.grad);
}

std::vector<ParamTensor*> GcnModel::params() {
  if (use_bias) return {&w1, &b1, &w2, &b2};
  return {&w1, &w2};
}

SageModel SageModel::init(std::size_t in_dim, std::size_t hidden, std::uint64_t seed,
                          bool use_bias) {
  RngStream rng(seed, RngPurpose::kParamInit);
  SageModel m{ParamTensor(glorot(in_dim, hidden, rng), "sage.w1"),
              ParamTensor(glorot(hidden, hidden, rng), "sage.w2"),
              ParamTensor(DenseMatrix(1, hidden), "sage.b1"),
              ParamTensor(DenseMatrix(1, hidden), "sage.b2")};
  m.use_bias = use_bias;
  return m;
}

namespace {

// MEAN({h_self} u {h_v sampled}); self contributes exactly once, first.
DenseMatrix block_mean(const DenseMatrix& h, const std::vector<std::uint32_t>& self_slots,
                       const std::vector<std::vector<std::uint32_t>>& sampled) {
  DenseMatrix out(self_slots.size(), h.cols);
  for (std::size_t i = 0; i < self_slots.size(); ++i) {
    double* o = out.row(i);
    const double* hs = h.row(self_slots[i]);
    for (std::size_t j = 0; j < h.cols; ++j) o[j] = hs[j];
    for (std::uint32_t s : sampled[i]) {
      const double* hv = h.row(s);
      for (std::size_t j = 0; j < h.cols; ++j) o[j] += hv[j];
    }
    const double inv = 1.0 / static_cast<double>(1 + sampled[i].size());
    for (std::size_t j = 0; j < h.cols; ++j) o[j] *= inv;
  }
  return out;
}

void block_mean_backward(const DenseMatrix& d_mean, const std::vector<std::uint32_t>& self_slots,
                         const std::vector<std::vector<std::uint32_t>>& sampled,
                         DenseMatrix& d_h) {
  for (std::size_t i = 0; i < self_slots.size(); ++i) {
    const double w = 1.0 / static_cast<double>(1 + sampled[i].size());
    const double* dm = d_mean.row(i);
    double* ds = d_h.row(self_slots[i]);
    for (std::size_t j = 0; j < d_mean.cols; ++j) ds[j] += w * dm[j];
    for (std::uint32_t s : sampled[i]) {
      double* dv = d_h.row(s);
      for (std::size_t j = 0; j < d_mean.cols; ++j) dv[j] += w * dm[j];
    }
  }
}

}  // namespace

Embeddings SageModel::forward(const LayeredSubgraph& blocks, const DenseMatrix& x, bool cache,
                              RngStream* dropout_rng) {
  if (x.cols != w1.value.rows) {
    throw DimensionError("sage_forward: feature dim " + x.shape_str() + " vs W1 " +
                         w1.value.shape_str());
  }
  // Gather level-0 features.
  DenseMatrix x0(blocks.level_nodes[0].size(), x.cols);
  for (std::size_t i = 0; i < blocks.level_nodes[0].size(); ++i) {
    const std::uint32_t u = blocks.level_nodes[0][i];
    if (u >= x.rows) throw ContractError("sage_forward: block node out of feature range");
    std::memcpy(x0.row(i), x.row(u), x.cols * sizeof(double));
  }
  DenseMatrix m1 = block_mean(x0, blocks.self_in_prev[0], blocks.sampled[0]);
  DenseMatrix pre1 = matmul(m1, w1.value);
  if (use_bias) add_bias(pre1, b1.value);
  DenseMatrix h1 = relu(pre1);
  std::vector<double> mask;
  apply_dropout(h1, mask, dropout_rng != nullptr ? dropout : 0.0, dropout_rng);
  DenseMatrix m2 = block_mean(h1, blocks.self_in_prev[1], blocks.sampled[1]);
  DenseMatrix out = matmul(m2, w2.value);
  if (use_bias) add_bias(out, b2.value);
  if (cache) {
    m1_ = std::move(m1);
    pre1_ = std::move(pre1);
    h1_ = std::move(h1);
    m2_ = std::move(m2);
    drop_mask_ = std::move(mask);
    cached_ = true;
  }
  return Embeddings::mapped(std::move(out), blocks.level_nodes[2]);
}

void SageModel::backward(const LayeredSubgraph& blocks, const DenseMatrix& d_out) {
  if (!cached_) throw ContractError("sage backward: no cached forward");
  matmul_acc(transpose(m2_), d_out, w2.grad);
  if (use_bias) acc_col_sums(d_out, b2.grad);
  DenseMatrix d_m2 = matmul_a_bt(d_out, w2.value);
  DenseMatrix d_h1(h1_.rows, h1_.cols);
  block_mean_backward(d_m2, blocks.self_in_prev[1], blocks.sampled[1], d_h1);
  if (!drop_mask_.empty()) {
    for (std::size_t i = 0; i < d_h1.values.size(); ++i) d_h1.values[i] *= drop_mask_[i];
  }
  DenseMatrix d_pre1 = relu_backward(pre1_, d_h1);
  matmul_acc(transpose(m1_), d_pre1, w1.grad);
  if (use_bias) acc_col_sums(d_pre1, b1.grad);
}

std::vector<ParamTensor*> SageModel::params() {
  if (use_bias) return {&w1, &b1, &w2, &b2};
  return {&w1, &w2};
}

std::vector<double> link_logits(const Embeddings& emb, const EdgeList& pairs) {
  std::vector<double> z;
  z.reserve(pairs.size());
  for (const Edge& e : pairs) z.push_back(dot(emb.of(e.u), emb.of(e.v)));
  return z;
}

std::vector<double> score_links(const Embeddings& emb, const EdgeList& pairs) {
  std::vector<double> s = link_logits(emb, pairs);
  for (double& v : s) v = sigmoid(v);
  return s;
}

UtilityLoss utility_loss(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw DimensionError("utility_loss: scores/labels length mismatch");
  }
  constexpr double kEps = 1e-12;
  UtilityLoss out;
  out.grad_scores.resize(scores.size());
  const double inv_n = 1.0 / static_cast<double>(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double p = std::clamp(scores[i], kEps, 1.0 - kEps);
    const double y = static_cast<double>(labels[i]);
    out.loss += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p)) * inv_n;
    out.grad_scores[i] = (-y / p + (1.0 - y) / (1.0 - p)) * inv_n;
  }
  return out;
}

double utility_loss_backward(const Embeddings& emb, const EdgeList& pos, const EdgeList& neg,
                             DenseMatrix& d_emb) {
  if (!d_emb.same_shape(emb.values)) {
    throw DimensionError("utility_loss_backward: gradient shape mismatch");
  }
  const std::size_t n = pos.size() + neg.size();
  if (n == 0) throw ContractError("utility_loss_backward: no pairs");
  const double inv_n = 1.0 / static_cast<double>(n);
  double loss = 0.0;
  auto handle = [&](const Edge& e, double y) {
    const std::uint32_t su = emb.slot_of(e.u), sv = emb.slot_of(e.v);
    const double z = dot(emb.values.row_span(su), emb.values.row_span(sv));
    // ln(1+e^z) - y z, evaluated without overflow.
    const double softplus = z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    loss += (softplus - y * z) * inv_n;
    const double gz = (sigmoid(z) - y) * inv_n;
    const double* eu = emb.values.row(su);
    const double* ev = emb.values.row(sv);
    double* du = d_emb.row(su);
    double* dv = d_emb.row(sv);
    for (std::size_t j = 0; j < emb.values.cols; ++j) {
      du[j] += gz * ev[j];
      dv[j] += gz * eu[j];
    }
  };
  for (const Edge& e : pos) handle(e, 1.0);
  for (const Edge& e : neg) handle(e, 0.0);
  return loss;
}

void save_checkpoint(const std::string& path, const Checkpoint& c) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path);
  const char magic[4] = {'R', 'D', 'R', 'S'};
  out.write(magic, 4);
  auto write_u64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); };
  write_u64(1);  // version
  write_u64(c.model.size());
  out.write(c.model.data(), static_cast<std::streamsize>(c.model.size()));
  write_u64(c.seed);
  write_u64(c.use_bias ? 1 : 0);
  write_u64(c.in_dim);
  write_u64(c.hidden);
  write_u64(c.tensors.size());
  for (const DenseMatrix& t : c.tensors) {
    write_u64(t.rows);
    write_u64(t.cols);
    out.write(reinterpret_cast<const char*>(t.values.data()),
              static_cast<std::streamsize>(t.values.size() * sizeof(double)));
  }
  if (!out) throw DataError("short write for checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "RDRS", 4) != 0) {
    throw DataError(path + ": not a checkpoint file");
  }
  auto read_u64 = [&]() {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
  };
  Checkpoint c;
  const std::uint64_t version = read_u64();
  if (version != 1) throw DataError(path + ": unsupported checkpoint version");
  c.model.resize(read_u64());
  in.read(c.model.data(), static_cast<std::streamsize>(c.model.size()));
  c.seed = read_u64();
  c.use_bias = read_u64() != 0;
  c.in_dim = read_u64();
  c.hidden = read_u64();
  const std::uint64_t count = read_u64();
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t r = read_u64(), cl = read_u64();
    DenseMatrix t(r, cl);
    in.read(reinterpret_cast<char*>(t.values.data()),
            static_cast<std::streamsize>(t.values.size() * sizeof(double)));
    c.tensors.push_back(std::move(t));
  }
  if (!in) throw DataError(path + ": truncated checkpoint");
  return c;
}

Checkpoint snapshot_gcn(const GcnModel& m, std::uint64_t seed) {
  return {"gcn", seed, m.use_bias, m.w1.value.rows, m.w1.value.cols,
          {m.w1.value, m.b1.value, m.w2.value, m.b2.value}};
}

Checkpoint snapshot_sage(const SageModel& m, std::uint64_t seed) {
  return {"graphsage", seed, m.use_bias, m.w1.value.rows, m.w1.value.cols,
          {m.w1.value, m.b1.value, m.w2.value, m.b2.value}};
}

namespace {
void restore_tensors(const Checkpoint& c, ParamTensor& w1, ParamTensor& b1, ParamTensor& w2,
                     ParamTensor& b2) {
  if (c.tensors.size() != 4) throw DataError("checkpoint: expected 4 tensors");
  w1.value = c.tensors[0];
  b1.value = c.tensors[1];
  w2.value = c.tensors[2];
  b2.value = c.tensors[3];
}
}  // namespace

void restore_gcn(GcnModel& m, const Checkpoint& c) {
  if (c.model != "gcn") throw DataError("checkpoint: model kind is " + c.model + ", want gcn");
  m.use_bias = c.use_bias;
  restore_tensors(c, m.w1, m.b1, m.w2, m.b2);
}

void restore_sage(SageModel& m, const Checkpoint& c) {
  if (c.model != "graphsage") {
    throw DataError("checkpoint: model kind is " + c.model + ", want graphsage");
  }
  m.use_bias = c.use_bias;
  restore_tensors(c, m.w1, m.b1, m.w2, m.b2);
}

}  // namespace redress
