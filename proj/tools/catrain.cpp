// catrain: experiment runner for case-aware adversarial training.
//
//   catrain train  ...   run one seeded AT or CAT training run
//   catrain sweep  ...   CAT runs over a list of sampling numbers + summary
//   catrain fig1   ...   neighboring-checkpoint prediction-similarity probe
//   catrain eval   ...   natural/robust accuracy of a saved checkpoint
//
// Every option can come from a JSON config (--config); explicit flags win.
// All randomness flows from one --seed through named substreams, so paired
// runs stay aligned.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "catrain/attack.hpp"
#include "catrain/data.hpp"
#include "catrain/nn.hpp"
#include "catrain/rng.hpp"
#include "catrain/sampler.hpp"
#include "catrain/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct DatasetSpec {
  std::string kind = "blobs";  // blobs | mnist
  std::string images, labels;
  std::string eval_images, eval_labels;  // optional explicit eval files
  std::size_t n = 2000;
  int k = 2;
  std::size_t d = 2;
  double spread = 0.05;
  double eval_fraction = 0.2;
};

struct ModelSpec {
  std::string arch = "mlp";  // mlp | conv
  std::vector<std::size_t> hidden;  // empty = auto (mnist 256,128; blobs 32)
};

struct AttackSpec {
  double epsilon = 0.3;
  double step_size = -1.0;  // auto: epsilon / 4
  int steps = 20;
  int restarts = 10;
  double clip_lo = 0.0;
  double clip_hi = 1.0;
  std::string variant = "sign_step";
};

struct TrainSpec {
  std::string scheme = "cat";  // vanilla_at | cat
  long long iterations = 100;
  std::size_t batch_size = 128;
  std::size_t sampling_number = 128;
  double alpha = 0.5;
  double temperature = 1.0;
  double lr = -1.0;  // auto: mnist 0.1, blobs 0.01
  long long eval_every = 10;
  std::size_t eval_subset = 1000;
  std::uint64_t seed = 0;
  AttackSpec attack;
  AttackSpec eval_attack{-1.0, -1.0, 20, 10, 0.0, 1.0, "sign_step"};
};

struct SweepSpec {
  std::vector<std::size_t> sampling_numbers{128, 256, 512, 1024};
  std::vector<double> thresholds{0.6, 0.7, 0.8, 0.9};
  bool parallel = false;
};

struct Fig1Spec {
  int checkpoints = 12;
  std::size_t probe_n = 256;
};

struct EvalSpec {
  std::string checkpoint;
};

struct RunSpec {
  std::string command = "train";
  std::string output_dir = "out";
  DatasetSpec dataset;
  ModelSpec model;
  TrainSpec train;
  SweepSpec sweep;
  Fig1Spec fig1;
  EvalSpec eval;
};

// ---- JSON (manifest + config) ----

json attack_to_json(const AttackSpec& a) {
  return json{{"epsilon", a.epsilon},   {"step_size", a.step_size},
              {"steps", a.steps},       {"restarts", a.restarts},
              {"clip_lo", a.clip_lo},   {"clip_hi", a.clip_hi},
              {"variant", a.variant}};
}

void attack_from_json(const json& j, AttackSpec& a) {
  a.epsilon = j.value("epsilon", a.epsilon);
  a.step_size = j.value("step_size", a.step_size);
  a.steps = j.value("steps", a.steps);
  a.restarts = j.value("restarts", a.restarts);
  a.clip_lo = j.value("clip_lo", a.clip_lo);
  a.clip_hi = j.value("clip_hi", a.clip_hi);
  a.variant = j.value("variant", a.variant);
}

json spec_to_json(const RunSpec& s) {
  json j;
  j["command"] = s.command;
  j["output_dir"] = s.output_dir;
  j["dataset"] = {{"kind", s.dataset.kind},
                  {"images", s.dataset.images},
                  {"labels", s.dataset.labels},
                  {"eval_images", s.dataset.eval_images},
                  {"eval_labels", s.dataset.eval_labels},
                  {"n", s.dataset.n},
                  {"k", s.dataset.k},
                  {"d", s.dataset.d},
                  {"spread", s.dataset.spread},
                  {"eval_fraction", s.dataset.eval_fraction}};
  j["model"] = {{"arch", s.model.arch}, {"hidden", s.model.hidden}};
  j["train"] = {{"scheme", s.train.scheme},
                {"iterations", s.train.iterations},
                {"batch_size", s.train.batch_size},
                {"sampling_number", s.train.sampling_number},
                {"alpha", s.train.alpha},
                {"temperature", s.train.temperature},
                {"lr", s.train.lr},
                {"eval_every", s.train.eval_every},
                {"eval_subset", s.train.eval_subset},
                {"seed", s.train.seed},
                {"attack", attack_to_json(s.train.attack)},
                {"eval_attack", attack_to_json(s.train.eval_attack)}};
  j["sweep"] = {{"sampling_numbers", s.sweep.sampling_numbers},
                {"thresholds", s.sweep.thresholds},
                {"parallel", s.sweep.parallel}};
  j["fig1"] = {{"checkpoints", s.fig1.checkpoints}, {"probe_n", s.fig1.probe_n}};
  j["eval"] = {{"checkpoint", s.eval.checkpoint}};
  return j;
}

void spec_from_json(const json& j, RunSpec& s) {
  s.command = j.value("command", s.command);
  s.output_dir = j.value("output_dir", s.output_dir);
  if (j.contains("dataset")) {
    const json& d = j["dataset"];
    s.dataset.kind = d.value("kind", s.dataset.kind);
    s.dataset.images = d.value("images", s.dataset.images);
    s.dataset.labels = d.value("labels", s.dataset.labels);
    s.dataset.eval_images = d.value("eval_images", s.dataset.eval_images);
    s.dataset.eval_labels = d.value("eval_labels", s.dataset.eval_labels);
    s.dataset.n = d.value("n", s.dataset.n);
    s.dataset.k = d.value("k", s.dataset.k);
    s.dataset.d = d.value("d", s.dataset.d);
    s.dataset.spread = d.value("spread", s.dataset.spread);
    s.dataset.eval_fraction = d.value("eval_fraction", s.dataset.eval_fraction);
  }
  if (j.contains("model")) {
    s.model.arch = j["model"].value("arch", s.model.arch);
    s.model.hidden = j["model"].value("hidden", s.model.hidden);
  }
  if (j.contains("train")) {
    const json& t = j["train"];
    s.train.scheme = t.value("scheme", s.train.scheme);
    s.train.iterations = t.value("iterations", s.train.iterations);
    s.train.batch_size = t.value("batch_size", s.train.batch_size);
    s.train.sampling_number = t.value("sampling_number", s.train.sampling_number);
    s.train.alpha = t.value("alpha", s.train.alpha);
    s.train.temperature = t.value("temperature", s.train.temperature);
    s.train.lr = t.value("lr", s.train.lr);
    s.train.eval_every = t.value("eval_every", s.train.eval_every);
    s.train.eval_subset = t.value("eval_subset", s.train.eval_subset);
    s.train.seed = t.value("seed", s.train.seed);
    if (t.contains("attack")) attack_from_json(t["attack"], s.train.attack);
    if (t.contains("eval_attack")) attack_from_json(t["eval_attack"], s.train.eval_attack);
  }
  if (j.contains("sweep")) {
    const json& w = j["sweep"];
    s.sweep.sampling_numbers = w.value("sampling_numbers", s.sweep.sampling_numbers);
    s.sweep.thresholds = w.value("thresholds", s.sweep.thresholds);
    s.sweep.parallel = w.value("parallel", s.sweep.parallel);
  }
  if (j.contains("fig1")) {
    s.fig1.checkpoints = j["fig1"].value("checkpoints", s.fig1.checkpoints);
    s.fig1.probe_n = j["fig1"].value("probe_n", s.fig1.probe_n);
  }
  if (j.contains("eval")) {
    s.eval.checkpoint = j["eval"].value("checkpoint", s.eval.checkpoint);
  }
}

std::string run_id_of(const json& manifest) {
  std::string dump = manifest.dump();
  std::uint64_t h = catrain::rng::hash_tag(dump);
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---- resolution ----

void resolve(RunSpec& s) {
  if (s.dataset.kind != "blobs" && s.dataset.kind != "mnist") {
    throw std::runtime_error("unknown dataset kind: " + s.dataset.kind);
  }
  if (s.train.scheme != "vanilla_at" && s.train.scheme != "cat") {
    throw std::runtime_error("unknown scheme: " + s.train.scheme);
  }
  if (s.model.arch != "mlp" && s.model.arch != "conv") {
    throw std::runtime_error("unknown arch: " + s.model.arch);
  }
  if (s.train.lr < 0) s.train.lr = s.dataset.kind == "mnist" ? 0.1 : 0.01;
  if (s.model.hidden.empty()) {
    s.model.hidden = s.dataset.kind == "mnist" ? std::vector<std::size_t>{256, 128}
                                               : std::vector<std::size_t>{32};
  }
  if (s.train.attack.step_size < 0) s.train.attack.step_size = s.train.attack.epsilon / 4.0;
  if (s.train.eval_attack.epsilon < 0) s.train.eval_attack.epsilon = s.train.attack.epsilon;
  if (s.train.eval_attack.step_size < 0) {
    s.train.eval_attack.step_size = s.train.eval_attack.epsilon / 4.0;
  }
}

catrain::AttackConfig build_attack(const AttackSpec& a, std::uint64_t seed) {
  catrain::AttackConfig cfg;
  cfg.epsilon = a.epsilon;
  cfg.step_size = a.step_size;
  cfg.num_steps = a.steps;
  cfg.num_restarts = a.restarts;
  cfg.clip_lo = a.clip_lo;
  cfg.clip_hi = a.clip_hi;
  if (a.variant == "sign_step") {
    cfg.variant = catrain::AttackConfig::Variant::sign_step;
  } else if (a.variant == "raw_gradient") {
    cfg.variant = catrain::AttackConfig::Variant::raw_gradient;
  } else {
    throw std::runtime_error("unknown attack variant: " + a.variant);
  }
  cfg.seed = seed;
  cfg.validate();
  return cfg;
}

catrain::TrainConfig build_train_config(const RunSpec& s) {
  catrain::TrainConfig cfg;
  cfg.scheme = s.train.scheme == "cat" ? catrain::Scheme::cat : catrain::Scheme::vanilla_at;
  cfg.iterations = s.train.iterations;
  cfg.batch_size = s.train.batch_size;
  cfg.sampling_number = s.train.sampling_number;
  cfg.alpha = s.train.alpha;
  cfg.temperature = s.train.temperature;
  cfg.lr = s.train.lr;
  cfg.eval_every = s.train.eval_every;
  cfg.eval_subset = s.train.eval_subset;
  cfg.seed = s.train.seed;
  cfg.attack = build_attack(s.train.attack, 0);
  cfg.eval_attack = build_attack(s.train.eval_attack, 0);
  cfg.validate();
  return cfg;
}

void require_file(const std::string& path) {
  if (!fs::exists(path)) throw std::runtime_error("missing file: " + path);
}

std::pair<catrain::Dataset, catrain::Dataset> build_train_eval(const RunSpec& s) {
  using namespace catrain;
  if (s.dataset.kind == "mnist") {
    require_file(s.dataset.images);
    require_file(s.dataset.labels);
    Dataset train = load_mnist_idx(s.dataset.images, s.dataset.labels);
    if (!s.dataset.eval_images.empty()) {
      require_file(s.dataset.eval_images);
      require_file(s.dataset.eval_labels);
      Dataset eval = load_mnist_idx(s.dataset.eval_images, s.dataset.eval_labels);
      eval.split_tag = "eval";
      return {std::move(train), std::move(eval)};
    }
    return split(train, s.dataset.eval_fraction, rng::derive(s.train.seed, "split"));
  }
  Dataset all = make_blobs(s.dataset.n, s.dataset.k, s.dataset.d, s.dataset.spread,
                           rng::derive(s.train.seed, "data"));
  return split(all, s.dataset.eval_fraction, rng::derive(s.train.seed, "split"));
}

catrain::Network build_network(const RunSpec& s, std::size_t input_dim, int num_classes) {
  using namespace catrain;
  std::vector<LayerSpec> specs;
  const std::size_t k = static_cast<std::size_t>(num_classes);
  if (s.model.arch == "mlp") {
    std::size_t prev = input_dim;
    for (std::size_t h : s.model.hidden) {
      specs.push_back(DenseSpec{prev, h});
      specs.push_back(ReluSpec{});
      prev = h;
    }
    specs.push_back(DenseSpec{prev, k});
  } else {
    auto side = static_cast<std::size_t>(std::lround(std::sqrt(double(input_dim))));
    if (side * side != input_dim || side < 12) {
      throw std::runtime_error("conv arch needs square images with side >= 12, got width " +
                               std::to_string(input_dim));
    }
    std::size_t s1 = (side - 2) / 2;      // conv3 then pool2
    std::size_t s2 = (s1 - 2) / 2;        // conv3 then pool2
    specs = {Conv2dSpec{1, 16, 3, 1},  ReluSpec{}, MaxPool2dSpec{2},
             Conv2dSpec{16, 32, 3, 1}, ReluSpec{}, MaxPool2dSpec{2},
             FlattenSpec{},            DenseSpec{32 * s2 * s2, k}};
  }
  return init_network(specs, rng::derive(s.train.seed, "init"));
}

void write_manifest(const RunSpec& s, const fs::path& path) {
  json j = spec_to_json(s);
  j["run_id"] = run_id_of(j);
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

// ---- commands ----

int run_train(RunSpec spec) {
  using namespace catrain;
  resolve(spec);
  fs::create_directories(spec.output_dir);
  auto [train, eval] = build_train_eval(spec);
  Network net = build_network(spec, train.dim(), train.num_classes);
  TrainConfig cfg = build_train_config(spec);

  TrainResult result = cfg.scheme == Scheme::cat ? train_cat(net, train, eval, cfg)
                                                 : train_vanilla_at(net, train, eval, cfg);

  fs::path out(spec.output_dir);
  write_metrics_csv(result.metrics, (out / "metrics.csv").string());
  write_manifest(spec, out / "manifest.json");
  save_network(result.net, (out / "checkpoint.catn").string());
  if (cfg.scheme == Scheme::cat) {
    dump_weights_csv(result.table, (out / "weights.csv").string());
  }
  if (!result.metrics.empty()) {
    const auto& last = result.metrics.back();
    std::printf("iteration=%lld natural_acc=%.4f robust_acc=%.4f crafted=%lld\n",
                last.iteration, last.natural_acc, last.robust_acc, last.cumulative_crafted);
  }
  return 0;
}

int run_sweep(RunSpec spec) {
  using namespace catrain;
  resolve(spec);
  if (spec.sweep.sampling_numbers.empty()) {
    throw std::runtime_error("sweep: empty sampling-number list");
  }
  fs::create_directories(spec.output_dir);
  fs::path out(spec.output_dir);

  std::vector<fs::path> run_dirs;
  for (std::size_t s : spec.sweep.sampling_numbers) {
    run_dirs.push_back(out / ("s" + std::to_string(s)));
  }

  if (!spec.sweep.parallel) {
    for (std::size_t i = 0; i < run_dirs.size(); ++i) {
      RunSpec sub = spec;
      sub.command = "train";
      sub.train.scheme = "cat";
      sub.train.sampling_number = spec.sweep.sampling_numbers[i];
      sub.output_dir = run_dirs[i].string();
      run_train(sub);
    }
  } else {
    // independent processes over disjoint output dirs
    std::string self = fs::canonical("/proc/self/exe").string();
    std::vector<std::future<int>> futures;
    for (std::size_t i = 0; i < run_dirs.size(); ++i) {
      RunSpec sub = spec;
      sub.command = "train";
      sub.train.scheme = "cat";
      sub.train.sampling_number = spec.sweep.sampling_numbers[i];
      sub.output_dir = run_dirs[i].string();
      fs::create_directories(run_dirs[i]);
      fs::path cfg_path = run_dirs[i] / "config.json";
      {
        std::ofstream os(cfg_path);
        os << spec_to_json(sub).dump(2) << '\n';
      }
      std::string cmd = "'" + self + "' train --config '" + cfg_path.string() + "'";
      futures.push_back(
          std::async(std::launch::async, [cmd] { return std::system(cmd.c_str()); }));
    }
    for (auto& f : futures) {
      if (f.get() != 0) throw std::runtime_error("sweep: child run failed");
    }
  }

  // summary: crafting budget to reach each robust-accuracy threshold
  std::ofstream os((out / "summary.csv").string());
  if (!os) throw std::runtime_error("cannot write summary.csv");
  os << "sampling_number,threshold,crafted_budget\n";
  char buf[96];
  for (std::size_t i = 0; i < run_dirs.size(); ++i) {
    auto metrics = read_metrics_csv((run_dirs[i] / "metrics.csv").string());
    for (double threshold : spec.sweep.thresholds) {
      long long budget = -1;
      for (const auto& rec : metrics) {
        if (rec.robust_acc >= threshold) {
          budget = rec.cumulative_crafted;
          break;
        }
      }
      if (budget >= 0) {
        std::snprintf(buf, sizeof buf, "%zu,%.6f,%lld\n", spec.sweep.sampling_numbers[i],
                      threshold, budget);
      } else {
        std::snprintf(buf, sizeof buf, "%zu,%.6f,NA\n", spec.sweep.sampling_numbers[i],
                      threshold);
      }
      os << buf;
    }
  }
  write_manifest(spec, out / "manifest.json");
  return 0;
}

int run_fig1(RunSpec spec) {
  using namespace catrain;
  resolve(spec);
  if (spec.fig1.checkpoints < 2) throw std::runtime_error("fig1: need >= 2 checkpoints");
  fs::create_directories(spec.output_dir);
  auto [train, eval] = build_train_eval(spec);
  Network net = build_network(spec, train.dim(), train.num_classes);
  TrainConfig cfg = build_train_config(spec);

  long long interval =
      std::max<long long>(1, cfg.iterations / spec.fig1.checkpoints);
  std::vector<std::pair<long long, Network>> snaps;
  auto hook = [&](long long t, const Network& n) {
    if (t % interval == 0 &&
        snaps.size() < static_cast<std::size_t>(spec.fig1.checkpoints)) {
      snaps.emplace_back(t, n);
    }
  };
  if (cfg.scheme == Scheme::cat) {
    train_cat(net, train, eval, cfg, hook);
  } else {
    train_vanilla_at(net, train, eval, cfg, hook);
  }
  if (snaps.size() < 2) throw std::runtime_error("fig1: run too short for 2 checkpoints");

  std::size_t probe = std::min(spec.fig1.probe_n, eval.size());
  std::vector<std::size_t> idx(probe);
  for (std::size_t i = 0; i < probe; ++i) idx[i] = i;
  auto probe_batch = detail::gather_batch(eval, idx);
  AttackConfig atk = cfg.attack;
  atk.seed = rng::derive(cfg.seed, "fig1-attack");

  auto pair_stream = rng::stream(cfg.seed, "fig1-pairs");
  std::ofstream os((fs::path(spec.output_dir) / "fig1.csv").string());
  if (!os) throw std::runtime_error("cannot write fig1.csv");
  os << "iter_a,iter_b,neighbor_cosine,rand_iter_a,rand_iter_b,random_pair_cosine\n";
  char buf[160];
  const std::size_t m = snaps.size();
  for (std::size_t i = 0; i + 1 < m; ++i) {
    double neighbor = neighbor_cosine_similarity(snaps[i].second, snaps[i + 1].second,
                                                 probe_batch.x, probe_batch.y, atk);
    if (m >= 3) {
      std::size_t a = 0, b = 0;
      do {
        a = static_cast<std::size_t>(pair_stream.below(m));
        b = static_cast<std::size_t>(pair_stream.below(m));
      } while (a == b || (a > b ? a - b : b - a) < 2);
      double baseline = neighbor_cosine_similarity(snaps[a].second, snaps[b].second,
                                                   probe_batch.x, probe_batch.y, atk);
      std::snprintf(buf, sizeof buf, "%lld,%lld,%.6f,%lld,%lld,%.6f\n", snaps[i].first,
                    snaps[i + 1].first, neighbor, snaps[a].first, snaps[b].first, baseline);
    } else {
      std::snprintf(buf, sizeof buf, "%lld,%lld,%.6f,NA,NA,NA\n", snaps[i].first,
                    snaps[i + 1].first, neighbor);
    }
    os << buf;
  }
  write_manifest(spec, fs::path(spec.output_dir) / "manifest.json");
  return 0;
}

int run_eval(RunSpec spec) {
  using namespace catrain;
  resolve(spec);
  require_file(spec.eval.checkpoint);
  fs::create_directories(spec.output_dir);
  Network net = load_network(spec.eval.checkpoint);

  Dataset data;
  if (spec.dataset.kind == "mnist") {
    require_file(spec.dataset.images);
    require_file(spec.dataset.labels);
    data = load_mnist_idx(spec.dataset.images, spec.dataset.labels);
  } else {
    data = make_blobs(spec.dataset.n, spec.dataset.k, spec.dataset.d, spec.dataset.spread,
                      rng::derive(spec.train.seed, "data"));
  }
  std::size_t n = std::min(spec.train.eval_subset, data.size());
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  auto batch = detail::gather_batch(data, idx);

  AttackConfig atk =
      build_attack(spec.train.eval_attack, rng::derive(spec.train.seed, "attack-eval"));
  double nat = accuracy(net, batch.x, batch.y);
  double rob = robust_accuracy(net, batch.x, batch.y, atk);
  std::printf("natural_acc=%.6f robust_acc=%.6f examples=%zu\n", nat, rob, n);

  json j{{"natural_acc", nat},
         {"robust_acc", rob},
         {"examples", n},
         {"checkpoint", spec.eval.checkpoint},
         {"attack", attack_to_json(spec.train.eval_attack)}};
  std::ofstream os((fs::path(spec.output_dir) / "eval.json").string());
  os << j.dump(2) << '\n';
  return 0;
}

std::vector<std::size_t> parse_size_list(const std::string& csv) {
  std::vector<std::size_t> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoull(item));
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

void add_common_options(CLI::App* cmd, RunSpec& spec, std::string& hidden_csv) {
  cmd->add_option("--out", spec.output_dir, "output directory");
  cmd->add_option("--dataset", spec.dataset.kind, "blobs | mnist");
  cmd->add_option("--mnist-images", spec.dataset.images, "IDX image file (training)");
  cmd->add_option("--mnist-labels", spec.dataset.labels, "IDX label file (training)");
  cmd->add_option("--mnist-eval-images", spec.dataset.eval_images,
                  "IDX image file (held-out; default: stratified split)");
  cmd->add_option("--mnist-eval-labels", spec.dataset.eval_labels,
                  "IDX label file (held-out)");
  cmd->add_option("--n", spec.dataset.n, "blobs: sample count");
  cmd->add_option("--k", spec.dataset.k, "blobs: class count");
  cmd->add_option("--d", spec.dataset.d, "blobs: dimensions");
  cmd->add_option("--spread", spec.dataset.spread, "blobs: cluster stddev");
  cmd->add_option("--eval-fraction", spec.dataset.eval_fraction, "held-out fraction");
  cmd->add_option("--arch", spec.model.arch, "mlp | conv");
  cmd->add_option("--hidden", hidden_csv, "mlp hidden widths, e.g. 256,128");
  cmd->add_option("--scheme", spec.train.scheme, "vanilla_at | cat");
  cmd->add_option("--iters", spec.train.iterations, "training iterations");
  cmd->add_option("--batch-size", spec.train.batch_size, "vanilla AT batch size");
  cmd->add_option("--sampling-number", spec.train.sampling_number,
                  "CAT per-iteration sample count");
  cmd->add_option("--alpha", spec.train.alpha, "EMA weight on past gains");
  cmd->add_option("--temperature", spec.train.temperature, "weight softmax temperature");
  cmd->add_option("--lr", spec.train.lr, "SGD learning rate");
  cmd->add_option("--eval-every", spec.train.eval_every, "iterations between evaluations");
  cmd->add_option("--eval-subset", spec.train.eval_subset, "held-out examples per eval");
  cmd->add_option("--seed", spec.train.seed, "master run seed");
  cmd->add_option("--epsilon", spec.train.attack.epsilon, "l-inf radius");
  cmd->add_option("--step-size", spec.train.attack.step_size, "PGD step (default eps/4)");
  cmd->add_option("--steps", spec.train.attack.steps, "PGD steps");
  cmd->add_option("--restarts", spec.train.attack.restarts, "PGD restarts");
  cmd->add_option("--clip-lo", spec.train.attack.clip_lo, "input domain lower bound");
  cmd->add_option("--clip-hi", spec.train.attack.clip_hi, "input domain upper bound");
  cmd->add_option("--variant", spec.train.attack.variant, "sign_step | raw_gradient");
  cmd->add_option("--eval-epsilon", spec.train.eval_attack.epsilon,
                  "eval attack radius (default: training epsilon)");
  cmd->add_option("--eval-step-size", spec.train.eval_attack.step_size,
                  "eval attack step (default eps/4)");
  cmd->add_option("--eval-steps", spec.train.eval_attack.steps, "eval attack steps");
  cmd->add_option("--eval-restarts", spec.train.eval_attack.restarts, "eval attack restarts");
}

}  // namespace

int main(int argc, char** argv) {
  RunSpec spec;

  // config file first, flags override
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      std::ifstream is(argv[i + 1]);
      if (!is) {
        std::cerr << "missing file: " << argv[i + 1] << "\n";
        return 2;
      }
      try {
        json j;
        is >> j;
        spec_from_json(j, spec);
      } catch (const std::exception& e) {
        std::cerr << "bad config " << argv[i + 1] << ": " << e.what() << "\n";
        return 2;
      }
    }
  }

  CLI::App app{"case-aware adversarial training runner"};
  app.require_subcommand(1);
  std::string config_path, hidden_csv, sampling_csv, thresholds_csv;

  CLI::App* train_cmd = app.add_subcommand("train", "one seeded AT/CAT run");
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "CAT runs over sampling numbers");
  CLI::App* fig1_cmd = app.add_subcommand("fig1", "checkpoint prediction-similarity probe");
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  for (CLI::App* cmd : {train_cmd, sweep_cmd, fig1_cmd, eval_cmd}) {
    cmd->add_option("--config", config_path, "JSON config; flags override");
    add_common_options(cmd, spec, hidden_csv);
  }
  sweep_cmd->add_option("--sampling-numbers", sampling_csv, "e.g. 128,256,512,1024");
  sweep_cmd->add_option("--thresholds", thresholds_csv, "robust-acc thresholds");
  sweep_cmd->add_flag("--parallel", spec.sweep.parallel, "one process per run");
  fig1_cmd->add_option("--checkpoints", spec.fig1.checkpoints, "snapshots to compare");
  fig1_cmd->add_option("--probe-n", spec.fig1.probe_n, "examples crafted per comparison");
  eval_cmd->add_option("--checkpoint", spec.eval.checkpoint, "checkpoint file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp") {
      return app.exit(e);
    }
    std::cerr << e.what() << "\n";
    return 1;
  }

  try {
    if (!hidden_csv.empty()) spec.model.hidden = parse_size_list(hidden_csv);
    if (!sampling_csv.empty()) spec.sweep.sampling_numbers = parse_size_list(sampling_csv);
    if (!thresholds_csv.empty()) spec.sweep.thresholds = parse_double_list(thresholds_csv);
    if (train_cmd->parsed()) {
      spec.command = "train";
      return run_train(spec);
    }
    if (sweep_cmd->parsed()) {
      spec.command = "sweep";
      return run_sweep(spec);
    }
    if (fig1_cmd->parsed()) {
      spec.command = "fig1";
      return run_fig1(spec);
    }
    spec.command = "eval";
    return run_eval(spec);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
