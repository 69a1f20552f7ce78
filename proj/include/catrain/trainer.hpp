#pragma once
// The two training loops. Vanilla adversarial training samples uniform
// batches and attacks everything; the case-aware loop plans class-balanced
// weighted batches from the EMA gain table, attacks only those, and feeds the
// crafted predictions straight back into the table (no extra forward pass).
// Crafting cost is tracked as a hardware-independent budget: one unit per
// adversarial example generated during training.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "catrain/attack.hpp"
#include "catrain/data.hpp"
#include "catrain/nn.hpp"
#include "catrain/rng.hpp"
#include "catrain/sampler.hpp"
#include "catrain/tensor.hpp"

namespace catrain {

enum class Scheme { vanilla_at, cat };

struct TrainConfig {
  Scheme scheme = Scheme::vanilla_at;
  long long iterations = 0;
  std::size_t batch_size = 128;
  std::size_t sampling_number = 128;  // per-iteration crafting count for CAT
  double alpha = 0.5;
  double temperature = 1.0;
  double lr = 0.1;
  long long eval_every = 10;
  std::size_t eval_subset = 1000;  // held-out examples used per evaluation
  AttackConfig attack;             // training attack
  AttackConfig eval_attack;        // robustness evaluation attack
  std::uint64_t seed = 0;
  bool vanilla_balanced = false;  // class-balanced uniform batches in vanilla AT

  void validate() const {
    if (iterations < 0) throw std::invalid_argument("train: negative iteration count");
    if (batch_size == 0) throw std::invalid_argument("train: batch_size must be > 0");
    if (sampling_number == 0) throw std::invalid_argument("train: sampling_number must be > 0");
    if (eval_every < 1) throw std::invalid_argument("train: eval_every must be >= 1");
    if (!(lr >= 0.0)) throw std::invalid_argument("train: negative learning rate");
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
      throw std::invalid_argument("train: alpha must be in [0,1], got " +
                                  std::to_string(alpha));
    }
    if (!(temperature > 0.0)) throw std::invalid_argument("train: temperature must be > 0");
    attack.validate();
    eval_attack.validate();
  }
};

struct MetricsRecord {
  long long iteration = 0;
  double natural_acc = 0.0;
  double robust_acc = 0.0;
  long long cumulative_crafted = 0;
  double wall_seconds = 0.0;
};

struct TrainResult {
  Network net;
  std::vector<MetricsRecord> metrics;
  WeightTable table;  // meaningful for the cat scheme
};

// Called after each completed iteration; used for checkpoint capture.
using IterationHook = std::function<void(long long iteration, const Network& net)>;

// Checked after each appended metrics record; returning true ends the run
// early (budget-to-threshold experiments).
using StopCondition = std::function<bool(const MetricsRecord&)>;

namespace detail {

struct BatchView {
  Tensor x;
  std::vector<int> y;
};

inline BatchView gather_batch(const Dataset& ds, const std::vector<std::size_t>& idx) {
  BatchView out;
  out.x = Tensor({idx.size(), ds.dim()});
  out.y.resize(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = 0; j < ds.dim(); ++j) out.x(i, j) = ds.x(idx[i], j);
    out.y[i] = ds.y[idx[i]];
  }
  return out;
}

// Fixed held-out slice plus a fixed evaluation attack seed, so robustness
// numbers are comparable across checkpoints and paired runs.
struct Evaluator {
  BatchView subset;
  AttackConfig attack;

  Evaluator(const Dataset& eval, const TrainConfig& cfg) {
    std::size_t n = std::min(cfg.eval_subset, eval.size());
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    subset = gather_batch(eval, idx);
    attack = cfg.eval_attack;
    attack.seed = rng::derive(cfg.seed, "attack-eval");
  }

  MetricsRecord measure(const Network& net, long long iter, long long crafted,
                        std::chrono::steady_clock::time_point start) const {
    MetricsRecord rec;
    rec.iteration = iter;
    rec.natural_acc = accuracy(net, subset.x, subset.y);
    rec.robust_acc = robust_accuracy(net, subset.x, subset.y, attack);
    rec.cumulative_crafted = crafted;
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
  }
};

}  // namespace detail

inline TrainResult train_vanilla_at(const Network& net0, const Dataset& train,
                                    const Dataset& eval, const TrainConfig& cfg,
                                    const IterationHook& hook = {},
                                    const StopCondition& stop_when = {}) {
  cfg.validate();
  validate_dataset(train);
  if (cfg.batch_size > train.size()) {
    throw std::invalid_argument("train: batch size exceeds training set size");
  }
  auto start = std::chrono::steady_clock::now();
  detail::Evaluator evaluator(eval, cfg);

  TrainResult result;
  result.net = net0;
  result.table = WeightTable::init(train.size(), cfg.alpha);
  const std::vector<double> uniform(train.size(), 1.0 / static_cast<double>(train.size()));
  const WeightTable ones = WeightTable::init(train.size(), cfg.alpha);
  long long crafted = 0;

  for (long long t = 1; t <= cfg.iterations; ++t) {
    std::uint64_t batch_seed = rng::derive(cfg.seed, "sampling", t);
    std::vector<std::size_t> idx =
        cfg.vanilla_balanced
            ? plan_balanced_batch(ones, train.y, cfg.batch_size, train.num_classes, 1.0,
                                  batch_seed)
                  .indices
            : sample_without_replacement(uniform, cfg.batch_size, batch_seed);
    detail::BatchView batch = detail::gather_batch(train, idx);

    AttackConfig atk = cfg.attack;
    atk.seed = rng::derive(cfg.seed, "attack", t);
    AttackResult res = craft(result.net, batch.x, batch.y, atk);
    crafted += res.crafted_count;

    auto [report, grads] =
        loss_and_grads(result.net, add(batch.x, res.delta), batch.y, false, true);
    result.net = sgd_step(result.net, grads, cfg.lr);

    if (t % cfg.eval_every == 0) {
      result.metrics.push_back(evaluator.measure(result.net, t, crafted, start));
      if (stop_when && stop_when(result.metrics.back())) break;
    }
    if (hook) hook(t, result.net);
  }
  return result;
}

inline TrainResult train_cat(const Network& net0, const Dataset& train, const Dataset& eval,
                             const TrainConfig& cfg, const IterationHook& hook = {},
                             const StopCondition& stop_when = {}) {
  cfg.validate();
  validate_dataset(train);
  if (cfg.sampling_number > train.size()) {
    throw std::invalid_argument("train: sampling number exceeds training set size");
  }
  auto start = std::chrono::steady_clock::now();
  detail::Evaluator evaluator(eval, cfg);

  TrainResult result;
  result.net = net0;
  result.table = WeightTable::init(train.size(), cfg.alpha);
  long long crafted = 0;

  for (long long t = 1; t <= cfg.iterations; ++t) {
    BatchPlan plan =
        plan_balanced_batch(result.table, train.y, cfg.sampling_number, train.num_classes,
                            cfg.temperature, rng::derive(cfg.seed, "sampling", t));
    detail::BatchView batch = detail::gather_batch(train, plan.indices);

    AttackConfig atk = cfg.attack;
    atk.seed = rng::derive(cfg.seed, "attack", t);
    AttackResult res = craft(result.net, batch.x, batch.y, atk);
    crafted += res.crafted_count;

    auto [report, grads] =
        loss_and_grads(result.net, add(batch.x, res.delta), batch.y, false, true);
    result.net = sgd_step(result.net, grads, cfg.lr);

    // weights update from the crafted predictions themselves (pre-step
    // network), never a fresh forward pass
    ema_update(result.table, plan.indices, information_gain(res.adv_log_probs, batch.y), t);

    if (t % cfg.eval_every == 0) {
      result.metrics.push_back(evaluator.measure(result.net, t, crafted, start));
      if (stop_when && stop_when(result.metrics.back())) break;
    }
    if (hook) hook(t, result.net);
  }
  return result;
}

// Mean cosine similarity between the two networks' probability vectors on
// adversarial examples crafted per network from the same inputs.
inline double neighbor_cosine_similarity(const Network& net_a, const Network& net_b,
                                         const Tensor& x, const std::vector<int>& y,
                                         const AttackConfig& cfg) {
  AttackResult ra = craft(net_a, x, y, cfg);
  AttackResult rb = craft(net_b, x, y, cfg);
  const std::size_t b = x.rows(), k = ra.adv_log_probs.cols();
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      double pa = std::exp(ra.adv_log_probs(i, j));
      double pb = std::exp(rb.adv_log_probs(i, j));
      dot += pa * pb;
      na += pa * pa;
      nb += pb * pb;
    }
    total += dot / std::sqrt(na * nb);
  }
  return total / static_cast<double>(b);
}

// ---- metrics stream ----

inline void write_metrics_csv(const std::vector<MetricsRecord>& records,
                              const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("metrics: cannot open " + path + " for writing");
  os << "iteration,natural_acc,robust_acc,cumulative_crafted,wall_seconds\n";
  char buf[160];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%lld,%.6f,%.6f,%lld,%.3f\n", r.iteration, r.natural_acc,
                  r.robust_acc, r.cumulative_crafted, r.wall_seconds);
    os << buf;
  }
  if (!os) throw std::runtime_error("metrics: write failed for " + path);
}

inline std::vector<MetricsRecord> read_metrics_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("metrics: cannot open " + path);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("metrics: empty file " + path);
  if (line != "iteration,natural_acc,robust_acc,cumulative_crafted,wall_seconds") {
    throw std::runtime_error("metrics: unexpected header in " + path + ": " + line);
  }
  std::vector<MetricsRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    MetricsRecord r;
    if (std::sscanf(line.c_str(), "%lld,%lf,%lf,%lld,%lf", &r.iteration, &r.natural_acc,
                    &r.robust_acc, &r.cumulative_crafted, &r.wall_seconds) != 5) {
      throw std::runtime_error("metrics: malformed row in " + path + ": " + line);
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace catrain
