#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "recut/policy.hpp"
#include "recut/preference.hpp"

namespace recut {

struct DpoConfig {
  double beta = 0.1;
  double learning_rate = 0.1;
  int epochs = 1;
  int batch_size = 8;
  std::uint64_t seed = 0;
};

struct DpoBatchResult {
  double loss = 0.0;          // -log sigmoid(beta * margin), always >= 0
  double chosen_margin = 0.0; // mean of the inner (policy-vs-reference) logit
  double grad_norm = 0.0;     // L2 norm over all parameter gradients
};

struct DpoGrad {
  std::vector<double> start;  // V
  std::vector<double> trans;  // V*V
};

// Loss and analytic gradient (over the policy parameters) for one pair.
// loss = -log sigmoid(beta * [(log pi(Y+|q) - log ref(Y+|q))
//                             - (log pi(Y-|q) - log ref(Y-|q))]).
DpoBatchResult dpo_loss(const PolicyModel& policy, const PolicyModel& reference,
                        const FlatPair& pair, double beta, DpoGrad* grad = nullptr);

struct TrainResult {
  PolicyModel model;
  std::vector<double> batch_losses;  // one entry per optimizer step
};

// Plain SGD over shuffled pairs; the reference model is a frozen copy of
// base. Deterministic for fixed (base, pairs, config): identical runs give
// byte-identical checkpoints.
TrainResult train_dpo(const PolicyModel& base, const std::vector<FlatPair>& pairs,
                      const DpoConfig& cfg);

// Writes the preference JSONL consumed by both this trainer and external
// full-scale trainers; returns the row count.
std::size_t export_pairs(const std::vector<PreferencePair>& pairs, const std::string& path);

}  // namespace recut
