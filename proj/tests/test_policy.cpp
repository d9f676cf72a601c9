#include <doctest.h>

#include <cmath>

#include "recut/errors.hpp"
#include "recut/policy.hpp"
#include "recut/rng.hpp"
#include "recut/tensor_map.hpp"

using namespace recut;

namespace {

// Independent likelihood evaluator: no caching, explicit softmax loops.
double reference_loglik(const PolicyModel& m, const std::string& text) {
  int v = m.vocab_size();
  std::vector<int> toks;
  for (unsigned char c : text) toks.push_back(c % (v - 1));
  toks.push_back(v - 1);

  auto log_softmax_at = [&](const std::vector<double>& logits, int offset, int idx) {
    double denom = 0.0;
    double mx = logits[offset];
    for (int j = 1; j < v; ++j) mx = std::max(mx, logits[offset + j]);
    for (int j = 0; j < v; ++j) denom += std::exp(logits[offset + j] - mx);
    return logits[offset + idx] - mx - std::log(denom);
  };

  double ll = log_softmax_at(m.start_logits(), 0, toks[0]);
  for (size_t i = 1; i < toks.size(); ++i)
    ll += log_softmax_at(m.transition_logits(), toks[i - 1] * v, toks[i]);
  return ll;
}

PolicyModel random_model(int vocab, Rng& rng) {
  PolicyModel m(vocab);
  for (auto& x : m.start_logits()) x = rng.uniform_real() * 4.0 - 2.0;
  for (auto& x : m.transition_logits()) x = rng.uniform_real() * 4.0 - 2.0;
  m.invalidate_cache();
  return m;
}

std::string random_text(Rng& rng, int max_len = 60) {
  int n = 1 + static_cast<int>(rng.uniform(max_len));
  std::string s;
  for (int i = 0; i < n; ++i) s += static_cast<char>(32 + rng.uniform(95));
  return s;
}

}  // namespace

TEST_CASE("uniform model scores -(L+1) ln V") {
  PolicyModel m(32);
  std::string text = "hello world";
  double expected = -static_cast<double>(text.size() + 1) * std::log(32.0);
  CHECK(m.log_likelihood(text) == doctest::Approx(expected).epsilon(1e-12));

  CHECK_THROWS_AS(m.log_likelihood(""), ModelShapeError);
}

TEST_CASE("likelihood matches an independent reference evaluator") {
  Rng rng(8675309);
  for (int i = 0; i < 60; ++i) {
    int vocab = 8 + static_cast<int>(rng.uniform(120));
    PolicyModel m = random_model(vocab, rng);
    std::string text = random_text(rng);
    double mine = m.log_likelihood(text);
    double ref = reference_loglik(m, text);
    CHECK(mine == doctest::Approx(ref).epsilon(1e-10));
  }
}

TEST_CASE("conditional likelihood chains from the prompt's last byte") {
  Rng rng(11);
  PolicyModel m = random_model(24, rng);
  std::string prompt = "what is 2+2?";
  std::string completion = "Answer: 4";
  // ll(prompt+completion) = ll(prompt without EOS terms...) decomposition:
  // conditional = ll(prompt ++ completion) - ll(prompt) + (EOS term of prompt)
  double joint = m.log_likelihood(prompt + completion);
  double prompt_ll = m.log_likelihood(prompt);
  int v = m.vocab_size();
  int last = static_cast<unsigned char>(prompt.back()) % (v - 1);
  // remove the prompt's EOS transition, which the joint text does not take
  double lse = 0.0, mx = m.transition_logits()[last * v];
  for (int j = 1; j < v; ++j) mx = std::max(mx, m.transition_logits()[last * v + j]);
  for (int j = 0; j < v; ++j) lse += std::exp(m.transition_logits()[last * v + j] - mx);
  double eos_term = m.transition_logits()[last * v + (v - 1)] - mx - std::log(lse);
  double expected = joint - (prompt_ll - eos_term);
  CHECK(m.conditional_log_likelihood(prompt, completion) ==
        doctest::Approx(expected).epsilon(1e-10));

  // Empty prompt degenerates to the unconditional likelihood.
  CHECK(m.conditional_log_likelihood("", completion) ==
        doctest::Approx(m.log_likelihood(completion)).epsilon(1e-12));
}

TEST_CASE("fit recovers bigram frequencies") {
  // Corpus of "ab" repeated: after 'a' (97), 'b' (98) is the only successor.
  std::vector<std::string> docs(50, "ababab");
  PolicyModel m = PolicyModel::fit(docs, 128, 1e-4);
  int v = m.vocab_size();
  int a = 97 % (v - 1), b = 98 % (v - 1);
  double ll_ab = m.transition_logits()[a * v + b];
  double ll_ac = m.transition_logits()[a * v + (99 % (v - 1))];
  CHECK(ll_ab > ll_ac + 10.0);  // seen vs unseen gap ~ ln(count/smoothing)

  CHECK_THROWS_AS(PolicyModel::fit(docs, 128, 0.0), ModelShapeError);
}

TEST_CASE("checkpoint round trip preserves behaviour") {
  Rng rng(5150);
  PolicyModel m = random_model(64, rng);
  TensorMap tm = m.to_tensor_map();
  CHECK(tm.metadata.at("format") == "recut-policy");
  PolicyModel back = PolicyModel::from_tensor_map(tm);
  for (int i = 0; i < 20; ++i) {
    std::string text = random_text(rng);
    // f32 storage rounds the logits, so scores match only approximately.
    CHECK(back.log_likelihood(text) ==
          doctest::Approx(m.log_likelihood(text)).epsilon(1e-5));
  }

  TensorMap missing;
  CHECK_THROWS_AS(PolicyModel::from_tensor_map(missing), ModelShapeError);
  TensorMap bad = m.to_tensor_map();
  bad.entries.at("transition_logits").values.pop_back();
  bad.entries.at("transition_logits").shape = {63, 64};
  CHECK_THROWS_AS(PolicyModel::from_tensor_map(bad), ModelShapeError);
}

TEST_CASE("vocab bounds are enforced") {
  CHECK_THROWS_AS(PolicyModel(1), ModelShapeError);
  CHECK_THROWS_AS(PolicyModel(257), ModelShapeError);
  PolicyModel ok(256);
  CHECK(ok.vocab_size() == 256);
}
