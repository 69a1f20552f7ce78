#pragma once
// Case-aware batch construction: per-example information gain (the margin
// between the strongest wrong class and the true class in log-probability),
// cross-iteration EMA weights, and class-balanced weighted sampling without
// replacement.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "catrain/rng.hpp"
#include "catrain/tensor.hpp"

namespace catrain {

struct WeightTable {
  std::vector<double> weights;
  double alpha = 0.5;
  std::vector<long long> last_selected_iter;  // -1 = never selected

  // Every example starts at weight 1.
  static WeightTable init(std::size_t n, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
      throw std::invalid_argument("WeightTable: alpha must be in [0,1], got " +
                                  std::to_string(alpha));
    }
    WeightTable t;
    t.weights.assign(n, 1.0);
    t.alpha = alpha;
    t.last_selected_iter.assign(n, -1);
    return t;
  }

  std::size_t size() const { return weights.size(); }
};

// w[i] = max_{k != y_i} log_probs[i][k] - log_probs[i][y_i].
// Positive means the adversarial example is misclassified, negative means the
// model is still confidently correct.
inline std::vector<double> information_gain(const Tensor& log_probs,
                                            const std::vector<int>& y) {
  detail::require_matrix(log_probs, "information_gain");
  const std::size_t b = log_probs.rows(), k = log_probs.cols();
  if (k < 2) {
    throw std::invalid_argument("information_gain: need at least 2 classes, got " +
                                log_probs.shape_str());
  }
  if (y.size() != b) {
    throw std::invalid_argument("information_gain: " + std::to_string(y.size()) +
                                " labels for " + std::to_string(b) + " rows");
  }
  std::vector<double> gains(b);
  for (std::size_t i = 0; i < b; ++i) {
    if (y[i] < 0 || static_cast<std::size_t>(y[i]) >= k) {
      throw std::invalid_argument("information_gain: label " + std::to_string(y[i]) +
                                  " out of range [0," + std::to_string(k) + ")");
    }
    double best_other = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j) {
      if (j == static_cast<std::size_t>(y[i])) continue;
      best_other = std::max(best_other, log_probs(i, j));
    }
    gains[i] = best_other - log_probs(i, static_cast<std::size_t>(y[i]));
  }
  return gains;
}

// w_i <- alpha * w_i + (1 - alpha) * gain for selected i; everything else is
// untouched (an unselected example keeps its weight bit-identically).
inline void ema_update(WeightTable& table, const std::vector<std::size_t>& selected,
                       const std::vector<double>& gains, long long t) {
  if (selected.size() != gains.size()) {
    throw std::invalid_argument("ema_update: " + std::to_string(selected.size()) +
                                " indices vs " + std::to_string(gains.size()) + " gains");
  }
  std::vector<std::size_t> sorted = selected;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("ema_update: duplicate index in selection");
  }
  if (!sorted.empty() && sorted.back() >= table.size()) {
    throw std::invalid_argument("ema_update: index " + std::to_string(sorted.back()) +
                                " out of range for table of size " +
                                std::to_string(table.size()));
  }
  for (std::size_t j = 0; j < selected.size(); ++j) {
    if (!std::isfinite(gains[j])) {
      throw std::invalid_argument("ema_update: non-finite gain at position " +
                                  std::to_string(j));
    }
    std::size_t i = selected[j];
    table.weights[i] = table.alpha * table.weights[i] + (1.0 - table.alpha) * gains[j];
    table.last_selected_iter[i] = t;
  }
}

// Softmax with temperature; shift-invariant via max subtraction. Raw EMA
// weights are signed log-ratios, so this is how they become a distribution.
inline std::vector<double> weights_to_probs(const std::vector<double>& weights,
                                            double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw std::invalid_argument("weights_to_probs: temperature must be > 0, got " +
                                std::to_string(temperature));
  }
  if (weights.empty()) throw std::invalid_argument("weights_to_probs: empty weights");
  double m = -std::numeric_limits<double>::infinity();
  for (double w : weights) {
    if (!std::isfinite(w))
      throw std::invalid_argument("weights_to_probs: non-finite weight");
    m = std::max(m, w);
  }
  std::vector<double> probs(weights.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    probs[i] = std::exp((weights[i] - m) / temperature);
    sum += probs[i];
  }
  for (auto& p : probs) p /= sum;
  return probs;
}

// Weighted sampling without replacement via exponential keys: draw
// key_i = -ln(u_i) / p_i and keep the k smallest. The induced ordered
// distribution equals successive draws proportional to remaining mass.
inline std::vector<std::size_t> sample_without_replacement(const std::vector<double>& probs,
                                                           std::size_t k,
                                                           std::uint64_t seed) {
  const std::size_t n = probs.size();
  if (k > n) {
    throw std::invalid_argument("sample_without_replacement: k = " + std::to_string(k) +
                                " exceeds population " + std::to_string(n));
  }
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument("sample_without_replacement: invalid probability");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw std::invalid_argument("sample_without_replacement: probabilities sum to " +
                                std::to_string(sum));
  }
  if (k == 0) return {};

  struct Key {
    double key;
    std::size_t index;
  };
  std::vector<Key> keys(n);
  auto st = rng::Stream(seed);
  for (std::size_t i = 0; i < n; ++i) {
    double u = st.uniform01_pos();
    keys[i].key = probs[i] > 0.0 ? -std::log(u) / probs[i]
                                 : std::numeric_limits<double>::infinity();
    keys[i].index = i;
  }
  auto less = [](const Key& a, const Key& b) {
    return a.key < b.key || (a.key == b.key && a.index < b.index);
  };
  std::nth_element(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(k - 1),
                   keys.end(), less);
  std::sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(k), less);
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = keys[i].index;
  return out;
}

struct BatchPlan {
  std::vector<std::size_t> indices;          // distinct dataset indices
  std::vector<std::size_t> per_class_quota;  // class -> count, sums to batch size
};

// floor(B/K) per class; the remainder goes to the classes with the largest
// total weight mass (ties to the lower class index). Classes smaller than
// their quota contribute everything and the shortfall is redistributed by the
// same rule. Within a class, weighted sampling without replacement.
inline BatchPlan plan_balanced_batch(const WeightTable& table, const std::vector<int>& labels,
                                     std::size_t batch_size, int num_classes,
                                     double temperature, std::uint64_t seed) {
  if (num_classes < 1) throw std::invalid_argument("plan_balanced_batch: bad class count");
  const std::size_t n = labels.size();
  const std::size_t k = static_cast<std::size_t>(num_classes);
  if (table.size() != n) {
    throw std::invalid_argument("plan_balanced_batch: table size " +
                                std::to_string(table.size()) + " vs " + std::to_string(n) +
                                " labels");
  }
  if (batch_size > n) {
    throw std::invalid_argument("plan_balanced_batch: batch size " +
                                std::to_string(batch_size) + " exceeds dataset size " +
                                std::to_string(n));
  }

  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) {
      throw std::invalid_argument("plan_balanced_batch: label " + std::to_string(labels[i]) +
                                  " out of range [0," + std::to_string(num_classes) + ")");
    }
    members[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (members[c].empty()) {
      throw std::invalid_argument("plan_balanced_batch: class " + std::to_string(c) +
                                  " has no examples");
    }
  }

  std::vector<double> mass(k, 0.0);
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t i : members[c]) mass[c] += table.weights[i];

  // floor(B/K) each (capped by class size), then hand out the rest one slot
  // at a time: smallest take first so counts stay within 1 of each other
  // wherever populations permit, largest mass breaking ties.
  std::vector<std::size_t> take(k);
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < k; ++c) {
    take[c] = std::min(batch_size / k, members[c].size());
    assigned += take[c];
  }
  while (assigned < batch_size) {
    std::size_t pick = k;
    for (std::size_t c = 0; c < k; ++c) {
      if (take[c] >= members[c].size()) continue;
      if (pick == k || take[c] < take[pick] ||
          (take[c] == take[pick] && mass[c] > mass[pick])) {
        pick = c;
      }
    }
    ++take[pick];
    ++assigned;
  }

  BatchPlan plan;
  plan.per_class_quota = take;
  plan.indices.reserve(batch_size);
  for (std::size_t c = 0; c < k; ++c) {
    if (take[c] == 0) continue;
    std::vector<double> w(members[c].size());
    for (std::size_t j = 0; j < members[c].size(); ++j) w[j] = table.weights[members[c][j]];
    auto picks = sample_without_replacement(weights_to_probs(w, temperature), take[c],
                                            rng::derive(seed, "class", c));
    for (std::size_t p : picks) plan.indices.push_back(members[c][p]);
  }
  return plan;
}

// CSV dump for offline analysis of the sampling dynamics.
inline void dump_weights_csv(const WeightTable& table, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("dump_weights_csv: cannot open " + path);
  os << "index,weight,last_selected_iter\n";
  char buf[64];
  for (std::size_t i = 0; i < table.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", table.weights[i]);
    os << i << ',' << buf << ',' << table.last_selected_iter[i] << '\n';
  }
  if (!os) throw std::runtime_error("dump_weights_csv: write failed for " + path);
}

}  // namespace catrain
