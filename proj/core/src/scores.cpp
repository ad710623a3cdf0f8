#include "dki/signals/scores.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "dki/error.hpp"

namespace dki::signals {

namespace {

void require_candidate(const ActivationTrace& trace, std::size_t t) {
  if (t >= trace.candidates())
    throw Error(ErrorCode::invalid_config, fmt::format("candidate {} out of range (T={})", t, trace.candidates()));
}

const TokenSpan& nonempty_span(const ActivationTrace& trace, std::size_t t) {
  require_candidate(trace, t);
  const auto& span = trace.spans[t];
  if (span.size() == 0) throw Error(ErrorCode::empty_span, fmt::format("{}: candidate {} has an empty span", trace.sample_id, t));
  return span;
}

const std::vector<std::int32_t>& vocab_set(const ActivationTrace& trace, std::size_t t) {
  require_candidate(trace, t);
  if (t >= trace.candidate_vocab.size() || trace.candidate_vocab[t].empty())
    throw Error(ErrorCode::missing_logit, fmt::format("{}: candidate {} has no vocabulary ids", trace.sample_id, t));
  return trace.candidate_vocab[t];
}

const LogitEntry& logit_of(const ActivationTrace& trace, std::int32_t id) {
  const auto it = trace.answer_logits.find(id);
  if (it == trace.answer_logits.end())
    throw Error(ErrorCode::missing_logit, fmt::format("{}: no logit stored for vocab id {}", trace.sample_id, id));
  return it->second;
}

}  // namespace

double attention_span_score(const ActivationTrace& trace, std::size_t layer, std::size_t head, std::size_t t) {
  const auto& span = nonempty_span(trace, t);
  const auto row = trace.attention_row(layer, head);
  if (span.end > row.size())
    throw Error(ErrorCode::shape_mismatch, fmt::format("{}: span {} exceeds sequence length", trace.sample_id, t));
  double sum = 0.0;
  for (std::size_t v = span.begin; v < span.end; ++v) sum += row[v];
  return sum / static_cast<double>(span.size());
}

Matrix layer_attention_scores(const ActivationTrace& trace) {
  const auto L = trace.meta.layers, H = trace.meta.heads, T = trace.candidates();
  Matrix out(L, T);
  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t t = 0; t < T; ++t) {
      double sum = 0.0;
      for (std::size_t h = 0; h < H; ++h) sum += attention_span_score(trace, l, h, t);
      out(l, t) = sum / static_cast<double>(H);
    }
  return out;
}

Matrix head_attention_scores(const ActivationTrace& trace) {
  const auto L = trace.meta.layers, H = trace.meta.heads, T = trace.candidates();
  Matrix out(H, T);
  for (std::size_t h = 0; h < H; ++h)
    for (std::size_t t = 0; t < T; ++t) {
      double sum = 0.0;
      for (std::size_t l = 0; l < L; ++l) sum += attention_span_score(trace, l, h, t);
      out(h, t) = sum / static_cast<double>(L);
    }
  return out;
}

std::vector<double> candidate_embedding(const ActivationTrace& trace, std::size_t layer, std::size_t t) {
  const auto& span = nonempty_span(trace, t);
  std::vector<double> mean(trace.meta.hidden, 0.0);
  for (std::size_t k = 0; k < span.size(); ++k) {
    const auto state = trace.candidate_token_state(layer, t, k);
    for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += state[d];
  }
  for (auto& x : mean) x /= static_cast<double>(span.size());
  return mean;
}

double hidden_similarity(const ActivationTrace& trace, std::size_t layer, std::size_t t) {
  const auto cand = candidate_embedding(trace, layer, t);
  const auto ans = trace.answer_state(layer);
  double dot = 0.0, nc = 0.0, na = 0.0;
  for (std::size_t d = 0; d < cand.size(); ++d) {
    const double a = ans[d];
    dot += cand[d] * a;
    nc += cand[d] * cand[d];
    na += a * a;
  }
  if (nc == 0.0 || na == 0.0)
    throw Error(ErrorCode::zero_vector, fmt::format("{}: zero {} vector at layer {} candidate {}", trace.sample_id,
                                                    nc == 0.0 ? "candidate" : "answer", layer, t));
  // sqrt(x * x) == x exactly, so identical operands give exactly 1. The clamp
  // absorbs rounding excursions elsewhere.
  return std::clamp(dot / std::sqrt(nc * na), -1.0, 1.0);
}

double avg_hidden_similarity(const ActivationTrace& trace, std::size_t t) {
  double sum = 0.0;
  for (std::size_t l = 0; l < trace.meta.layers; ++l) sum += hidden_similarity(trace, l, t);
  return sum / static_cast<double>(trace.meta.layers);
}

double logit_score(const ActivationTrace& trace, std::size_t t) {
  const auto& ids = vocab_set(trace, t);
  double sum = 0.0;
  for (auto id : ids) sum += logit_of(trace, id).logit;
  return sum / static_cast<double>(ids.size());
}

double confidence_score(const ActivationTrace& trace, std::size_t t) {
  const auto& ids = vocab_set(trace, t);
  double sum = 0.0;
  for (auto id : ids) sum += logit_of(trace, id).prob;
  return sum / static_cast<double>(ids.size());
}

SignalSummary summarize(const ActivationTrace& trace) {
  const auto L = trace.meta.layers, T = trace.candidates();
  SignalSummary s;
  s.sample_id = trace.sample_id;
  s.layer_attention = layer_attention_scores(trace);
  s.head_attention = head_attention_scores(trace);
  s.hidden_similarity_by_layer = Matrix(L, T);
  s.hidden_similarity_avg.assign(T, 0.0);
  s.logit_scores.assign(T, 0.0);
  s.confidence_scores.assign(T, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    double sum = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
      const double sim = hidden_similarity(trace, l, t);
      s.hidden_similarity_by_layer(l, t) = sim;
      sum += sim;
    }
    s.hidden_similarity_avg[t] = sum / static_cast<double>(L);
    s.logit_scores[t] = logit_score(trace, t);
    s.confidence_scores[t] = confidence_score(trace, t);
  }
  return s;
}

}  // namespace dki::signals
