#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "recut/tensor_map.hpp"

namespace recut {

// Tabular byte-bigram sequence scorer: a V-entry start-logit vector plus a
// V x V transition-logit table over hashed byte tokens. Bytes map to token
// ids by b mod (V-1); id V-1 is a reserved end-of-sequence token whose
// transition closes every scored sequence, so a length-L text contributes
// exactly L+1 log-softmax terms. Parameters are held as doubles; the f32
// TensorMap conversion is the checkpoint boundary.
class PolicyModel {
 public:
  explicit PolicyModel(int vocab_size = 128);

  static PolicyModel from_tensor_map(const TensorMap& map);
  TensorMap to_tensor_map() const;

  // Maximum-likelihood fit on a corpus, with add-delta smoothing: logits are
  // ln(count + smoothing). Small smoothing makes out-of-register transitions
  // expensive, which is what lets the scorer tell text styles apart.
  static PolicyModel fit(const std::vector<std::string>& docs, int vocab_size, double smoothing);

  int vocab_size() const { return vocab_; }
  int eos_token() const { return vocab_ - 1; }
  std::vector<int> tokenize(std::string_view text) const;  // byte tokens, no EOS

  // Exact log-probability of text: start term, transitions, EOS term.
  double log_likelihood(std::string_view text) const;

  // log P(completion | prompt): transitions from the prompt's last token
  // through the completion, ending in EOS. An empty prompt degenerates to
  // the unconditional likelihood.
  double conditional_log_likelihood(std::string_view prompt, std::string_view completion) const;

  // Gradient of conditional_log_likelihood with respect to all parameters,
  // accumulated into caller-provided dense buffers (start: V, trans: V*V).
  void accumulate_conditional_grad(std::string_view prompt, std::string_view completion,
                                   double weight, std::vector<double>& start_grad,
                                   std::vector<double>& trans_grad) const;

  std::vector<double>& start_logits() { return start_; }
  const std::vector<double>& start_logits() const { return start_; }
  std::vector<double>& transition_logits() { return trans_; }
  const std::vector<double>& transition_logits() const { return trans_; }

  // Row log-sum-exp values; invalidate after editing logits directly.
  void invalidate_cache() const;

 private:
  int vocab_;
  std::vector<double> start_;  // V
  std::vector<double> trans_;  // V*V, row-major by previous token

  mutable std::vector<double> row_lse_;  // V rows + 1 slot for the start vector
  mutable std::vector<char> row_lse_valid_;

  double row_lse(int row) const;    // row in [0, V): transition rows
  double start_lse() const;
};

}  // namespace recut
