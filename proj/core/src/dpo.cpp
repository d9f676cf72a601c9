#include "recut/dpo.hpp"

#include <algorithm>
#include <cmath>

#include "recut/errors.hpp"
#include "recut/rng.hpp"

namespace recut {

namespace {

double softplus(double x) {  // log(1 + e^x), stable
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) {
    double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

DpoBatchResult dpo_loss(const PolicyModel& policy, const PolicyModel& reference,
                        const FlatPair& pair, double beta, DpoGrad* grad) {
  if (policy.vocab_size() != reference.vocab_size())
    throw ModelShapeError("policy and reference vocab sizes differ");
  if (beta <= 0.0) throw ModelShapeError("beta must be positive");

  double pi_pos = policy.conditional_log_likelihood(pair.prompt, pair.chosen);
  double pi_neg = policy.conditional_log_likelihood(pair.prompt, pair.rejected);
  double ref_pos = reference.conditional_log_likelihood(pair.prompt, pair.chosen);
  double ref_neg = reference.conditional_log_likelihood(pair.prompt, pair.rejected);

  double margin = (pi_pos - ref_pos) - (pi_neg - ref_neg);
  double x = beta * margin;

  DpoBatchResult out;
  out.loss = softplus(-x);
  out.chosen_margin = margin;

  if (grad) {
    int v = policy.vocab_size();
    grad->start.assign(v, 0.0);
    grad->trans.assign(static_cast<size_t>(v) * v, 0.0);
    // d/dtheta -log sigmoid(x) = -sigmoid(-x) * beta * (dll+ - dll-)
    double w = -sigmoid(-x) * beta;
    policy.accumulate_conditional_grad(pair.prompt, pair.chosen, w, grad->start, grad->trans);
    policy.accumulate_conditional_grad(pair.prompt, pair.rejected, -w, grad->start, grad->trans);
    double sq = 0.0;
    for (double g : grad->start) sq += g * g;
    for (double g : grad->trans) sq += g * g;
    out.grad_norm = std::sqrt(sq);
  }
  return out;
}

TrainResult train_dpo(const PolicyModel& base, const std::vector<FlatPair>& pairs,
                      const DpoConfig& cfg) {
  if (pairs.empty()) throw TrainError("cannot train on an empty preference dataset");
  if (cfg.epochs < 1) throw TrainError("epochs must be >= 1");
  if (cfg.batch_size < 1) throw TrainError("batch_size must be >= 1");

  PolicyModel reference = base;  // frozen
  TrainResult result{base, {}};
  PolicyModel& policy = result.model;
  const int v = policy.vocab_size();

  // The reference likelihoods never change; score each side once.
  std::vector<double> ref_pos(pairs.size()), ref_neg(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    ref_pos[i] = reference.conditional_log_likelihood(pairs[i].prompt, pairs[i].chosen);
    ref_neg[i] = reference.conditional_log_likelihood(pairs[i].prompt, pairs[i].rejected);
  }

  std::vector<size_t> order(pairs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(cfg.seed, "dpo-shuffle"));

  std::vector<double> start_grad(v, 0.0);
  std::vector<double> trans_grad(static_cast<size_t>(v) * v, 0.0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with the project RNG keeps the order platform-stable.
    for (size_t i = order.size(); i > 1; --i) {
      size_t j = rng.uniform(i);
      std::swap(order[i - 1], order[j]);
    }
    for (size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      size_t end = std::min(begin + static_cast<size_t>(cfg.batch_size), order.size());
      std::fill(start_grad.begin(), start_grad.end(), 0.0);
      std::fill(trans_grad.begin(), trans_grad.end(), 0.0);
      double batch_loss = 0.0;
      for (size_t k = begin; k < end; ++k) {
        const FlatPair& pair = pairs[order[k]];
        double pi_pos = policy.conditional_log_likelihood(pair.prompt, pair.chosen);
        double pi_neg = policy.conditional_log_likelihood(pair.prompt, pair.rejected);
        double x = cfg.beta * ((pi_pos - ref_pos[order[k]]) - (pi_neg - ref_neg[order[k]]));
        batch_loss += softplus(-x);
        double w = -sigmoid(-x) * cfg.beta;
        policy.accumulate_conditional_grad(pair.prompt, pair.chosen, w, start_grad, trans_grad);
        policy.accumulate_conditional_grad(pair.prompt, pair.rejected, -w, start_grad, trans_grad);
      }
      double inv = 1.0 / static_cast<double>(end - begin);
      if (cfg.learning_rate != 0.0) {
        auto& start = policy.start_logits();
        auto& trans = policy.transition_logits();
        for (int i = 0; i < v; ++i) start[i] -= cfg.learning_rate * inv * start_grad[i];
        for (size_t i = 0; i < trans.size(); ++i) trans[i] -= cfg.learning_rate * inv * trans_grad[i];
        policy.invalidate_cache();
      }
      result.batch_losses.push_back(batch_loss * inv);
    }
  }
  return result;
}

std::size_t export_pairs(const std::vector<PreferencePair>& pairs, const std::string& path) {
  write_pairs(pairs, path);
  return pairs.size();
}

}  // namespace recut
