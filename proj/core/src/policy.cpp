#include "recut/policy.hpp"

#include <algorithm>
#include <cmath>

#include "recut/errors.hpp"

namespace recut {

namespace {

double logsumexp(const double* v, int n) {
  double m = v[0];
  for (int i = 1; i < n; ++i) m = std::max(m, v[i]);
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

}  // namespace

PolicyModel::PolicyModel(int vocab_size) : vocab_(vocab_size) {
  if (vocab_ < 2 || vocab_ > 256) throw ModelShapeError("vocab_size must be in [2, 256]");
  start_.assign(vocab_, 0.0);
  trans_.assign(static_cast<size_t>(vocab_) * vocab_, 0.0);
  invalidate_cache();
}

void PolicyModel::invalidate_cache() const {
  row_lse_.assign(static_cast<size_t>(vocab_) + 1, 0.0);
  row_lse_valid_.assign(static_cast<size_t>(vocab_) + 1, 0);
}

double PolicyModel::row_lse(int row) const {
  if (!row_lse_valid_[row]) {
    row_lse_[row] = logsumexp(trans_.data() + static_cast<size_t>(row) * vocab_, vocab_);
    row_lse_valid_[row] = 1;
  }
  return row_lse_[row];
}

double PolicyModel::start_lse() const {
  if (!row_lse_valid_[vocab_]) {
    row_lse_[vocab_] = logsumexp(start_.data(), vocab_);
    row_lse_valid_[vocab_] = 1;
  }
  return row_lse_[vocab_];
}

std::vector<int> PolicyModel::tokenize(std::string_view text) const {
  std::vector<int> tokens;
  tokens.reserve(text.size());
  for (unsigned char c : text) tokens.push_back(static_cast<int>(c % (vocab_ - 1)));
  return tokens;
}

double PolicyModel::log_likelihood(std::string_view text) const {
  if (text.empty()) throw ModelShapeError("log_likelihood requires non-empty text");
  std::vector<int> tokens = tokenize(text);
  double ll = start_[tokens[0]] - start_lse();
  int prev = tokens[0];
  for (size_t i = 1; i < tokens.size(); ++i) {
    ll += trans_[static_cast<size_t>(prev) * vocab_ + tokens[i]] - row_lse(prev);
    prev = tokens[i];
  }
  ll += trans_[static_cast<size_t>(prev) * vocab_ + eos_token()] - row_lse(prev);
  return ll;
}

double PolicyModel::conditional_log_likelihood(std::string_view prompt,
                                               std::string_view completion) const {
  if (completion.empty()) throw ModelShapeError("conditional likelihood requires completion text");
  if (prompt.empty()) return log_likelihood(completion);
  std::vector<int> p = tokenize(prompt);
  std::vector<int> c = tokenize(completion);
  double ll = 0.0;
  int prev = p.back();
  for (int tok : c) {
    ll += trans_[static_cast<size_t>(prev) * vocab_ + tok] - row_lse(prev);
    prev = tok;
  }
  ll += trans_[static_cast<size_t>(prev) * vocab_ + eos_token()] - row_lse(prev);
  return ll;
}

void PolicyModel::accumulate_conditional_grad(std::string_view prompt, std::string_view completion,
                                              double weight, std::vector<double>& start_grad,
                                              std::vector<double>& trans_grad) const {
  if (completion.empty()) throw ModelShapeError("gradient requires completion text");
  std::vector<int> c = tokenize(completion);
  std::vector<int> seq;
  seq.reserve(c.size() + 2);
  if (prompt.empty()) {
    // Unconditional: the first token is scored by the start vector.
    double lse = start_lse();
    for (int v = 0; v < vocab_; ++v)
      start_grad[v] += weight * ((v == c[0] ? 1.0 : 0.0) - std::exp(start_[v] - lse));
    seq = c;
  } else {
    std::vector<int> p = tokenize(prompt);
    seq.push_back(p.back());
    seq.insert(seq.end(), c.begin(), c.end());
  }
  seq.push_back(eos_token());

  for (size_t i = 1; i < seq.size(); ++i) {
    int prev = seq[i - 1];
    int next = seq[i];
    double lse = row_lse(prev);
    const double* row = trans_.data() + static_cast<size_t>(prev) * vocab_;
    double* grow = trans_grad.data() + static_cast<size_t>(prev) * vocab_;
    for (int v = 0; v < vocab_; ++v)
      grow[v] += weight * ((v == next ? 1.0 : 0.0) - std::exp(row[v] - lse));
  }
}

PolicyModel PolicyModel::from_tensor_map(const TensorMap& map) {
  auto s = map.entries.find("start_logits");
  auto t = map.entries.find("transition_logits");
  if (s == map.entries.end() || t == map.entries.end())
    throw ModelShapeError("checkpoint lacks start_logits/transition_logits");
  int vocab = static_cast<int>(s->second.values.size());
  if (t->second.values.size() != static_cast<size_t>(vocab) * vocab)
    throw ModelShapeError("transition table is not vocab x vocab");
  PolicyModel m(vocab);
  for (int i = 0; i < vocab; ++i) m.start_[i] = s->second.values[i];
  for (size_t i = 0; i < t->second.values.size(); ++i) m.trans_[i] = t->second.values[i];
  m.invalidate_cache();
  return m;
}

TensorMap PolicyModel::to_tensor_map() const {
  TensorMap map;
  Tensor start;
  start.shape = {static_cast<std::uint32_t>(vocab_)};
  start.values.assign(start_.begin(), start_.end());
  Tensor trans;
  trans.shape = {static_cast<std::uint32_t>(vocab_), static_cast<std::uint32_t>(vocab_)};
  trans.values.assign(trans_.begin(), trans_.end());
  map.entries.emplace("start_logits", std::move(start));
  map.entries.emplace("transition_logits", std::move(trans));
  map.metadata["format"] = "recut-policy";
  map.metadata["tokenizer"] = "byte-mod-vminus1-eos";
  map.metadata["vocab_size"] = std::to_string(vocab_);
  return map;
}

PolicyModel PolicyModel::fit(const std::vector<std::string>& docs, int vocab_size,
                             double smoothing) {
  if (smoothing <= 0.0) throw ModelShapeError("fit smoothing must be positive");
  PolicyModel m(vocab_size);
  std::vector<double> start_counts(vocab_size, 0.0);
  std::vector<double> trans_counts(static_cast<size_t>(vocab_size) * vocab_size, 0.0);
  for (const auto& doc : docs) {
    if (doc.empty()) continue;
    std::vector<int> tokens = m.tokenize(doc);
    start_counts[tokens[0]] += 1.0;
    int prev = tokens[0];
    for (size_t i = 1; i < tokens.size(); ++i) {
      trans_counts[static_cast<size_t>(prev) * vocab_size + tokens[i]] += 1.0;
      prev = tokens[i];
    }
    trans_counts[static_cast<size_t>(prev) * vocab_size + m.eos_token()] += 1.0;
  }
  for (int v = 0; v < vocab_size; ++v) m.start_[v] = std::log(start_counts[v] + smoothing);
  for (size_t i = 0; i < trans_counts.size(); ++i) m.trans_[i] = std::log(trans_counts[i] + smoothing);
  m.invalidate_cache();
  return m;
}

}  // namespace recut
