#pragma once
// L-inf PGD crafting. Iterative loss ascent inside the epsilon ball with
// input-domain clipping after every step. Restart 0 starts at delta = 0,
// further restarts start uniform in [-eps, eps]. The returned delta is, per
// example, the best iterate (maximum loss) seen across all steps and all
// restarts; ties keep the earliest iterate, so results are deterministic and
// the adversarial loss can never fall below the clean loss.

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "catrain/nn.hpp"
#include "catrain/rng.hpp"
#include "catrain/tensor.hpp"

namespace catrain {

struct AttackConfig {
  double epsilon = 0.3;
  double step_size = 0.075;
  int num_steps = 20;
  int num_restarts = 10;
  double clip_lo = 0.0;
  double clip_hi = 1.0;
  enum class Variant { sign_step, raw_gradient };
  Variant variant = Variant::sign_step;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
      throw std::invalid_argument("attack: epsilon must be >= 0, got " +
                                  std::to_string(epsilon));
    }
    if (!(step_size > 0.0) || !std::isfinite(step_size)) {
      throw std::invalid_argument("attack: step_size must be > 0, got " +
                                  std::to_string(step_size));
    }
    // epsilon 0 degenerates to the clean forward pass; the cap only binds
    // for a real ball
    if (epsilon > 0.0 && step_size > 2.0 * epsilon) {
      throw std::invalid_argument("attack: step_size " + std::to_string(step_size) +
                                  " exceeds 2*epsilon = " + std::to_string(2.0 * epsilon));
    }
    if (num_steps < 1) throw std::invalid_argument("attack: num_steps must be >= 1");
    if (num_restarts < 1) throw std::invalid_argument("attack: num_restarts must be >= 1");
    if (!(clip_lo < clip_hi)) {
      throw std::invalid_argument("attack: clip_lo " + std::to_string(clip_lo) +
                                  " must be below clip_hi " + std::to_string(clip_hi));
    }
  }
};

struct AttackResult {
  Tensor delta;          // same shape as x
  Tensor adv_log_probs;  // [B x K] at the returned delta
  Tensor adv_loss;       // [B]
  long long crafted_count = 0;  // examples crafted, for cost accounting
};

// Proj_eps: elementwise clamp into the l-inf ball.
inline Tensor project_linf(const Tensor& delta, double epsilon) {
  if (!(epsilon >= 0.0)) {
    throw std::invalid_argument("project_linf: epsilon must be >= 0, got " +
                                std::to_string(epsilon));
  }
  return clamp(delta, -epsilon, epsilon);
}

inline AttackResult craft(const Network& net, const Tensor& x, const std::vector<int>& y,
                          const AttackConfig& cfg) {
  cfg.validate();
  detail::require_matrix(x, "craft");
  const std::size_t b = x.rows(), d = x.cols();
  for (double v : x.data) {
    if (!(v >= cfg.clip_lo && v <= cfg.clip_hi)) {
      throw std::invalid_argument("craft: input outside clip bounds [" +
                                  std::to_string(cfg.clip_lo) + "," +
                                  std::to_string(cfg.clip_hi) + "]");
    }
  }

  AttackResult best;
  best.delta = Tensor({b, d});
  best.crafted_count = static_cast<long long>(b);
  std::vector<double> best_loss(b, -std::numeric_limits<double>::infinity());
  bool best_init = false;

  auto consider = [&](const Tensor& delta, const LossReport& rep) {
    if (!best_init) {
      best.adv_log_probs = Tensor({b, rep.log_probs.cols()});
      best_init = true;
    }
    for (std::size_t i = 0; i < b; ++i) {
      if (rep.per_example_loss.data[i] > best_loss[i]) {
        best_loss[i] = rep.per_example_loss.data[i];
        for (std::size_t j = 0; j < d; ++j) best.delta(i, j) = delta(i, j);
        for (std::size_t j = 0; j < rep.log_probs.cols(); ++j)
          best.adv_log_probs(i, j) = rep.log_probs(i, j);
      }
    }
  };

  for (int r = 0; r < cfg.num_restarts; ++r) {
    Tensor delta({b, d});
    if (r > 0) {
      for (std::size_t i = 0; i < b; ++i) {
        auto st = rng::stream(cfg.seed, "pgd-restart", i, static_cast<std::uint64_t>(r));
        for (std::size_t j = 0; j < d; ++j)
          delta(i, j) = st.uniform(-cfg.epsilon, cfg.epsilon);
      }
      // keep the starting point inside the input domain
      delta = sub(clamp(add(x, delta), cfg.clip_lo, cfg.clip_hi), x);
    }
    for (int j = 0; j < cfg.num_steps; ++j) {
      auto [rep, grads] = loss_and_grads(net, add(x, delta), y, true, false);
      if (!grads.by_input->all_finite()) {
        throw std::runtime_error("craft: non-finite input gradient at restart " +
                                 std::to_string(r) + " step " + std::to_string(j));
      }
      consider(delta, rep);
      Tensor g = cfg.variant == AttackConfig::Variant::sign_step ? sign(*grads.by_input)
                                                                 : *grads.by_input;
      delta = project_linf(add(delta, scale(g, cfg.step_size)), cfg.epsilon);
      delta = sub(clamp(add(x, delta), cfg.clip_lo, cfg.clip_hi), x);
    }
    consider(delta, loss_and_grads(net, add(x, delta), y, false, false).first);
  }

  best.adv_loss = Tensor({b}, std::move(best_loss));
  return best;
}

inline double robust_accuracy(const Network& net, const Tensor& x, const std::vector<int>& y,
                              const AttackConfig& cfg) {
  AttackResult res = craft(net, x, y, cfg);
  return accuracy(net, add(x, res.delta), y);
}

}  // namespace catrain
