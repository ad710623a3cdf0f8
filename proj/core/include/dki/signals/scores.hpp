#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dki/signals/trace.hpp"

namespace dki::signals {

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  bool operator==(const Matrix&) const = default;
};

// Mean post-softmax attention from p_ans over the tokens of candidate t.
double attention_span_score(const ActivationTrace& trace, std::size_t layer, std::size_t head, std::size_t t);
// [L x T], head-averaged.
Matrix layer_attention_scores(const ActivationTrace& trace);
// [H x T], layer-averaged.
Matrix head_attention_scores(const ActivationTrace& trace);

// Mean hidden state over the candidate's tokens at `layer`.
std::vector<double> candidate_embedding(const ActivationTrace& trace, std::size_t layer, std::size_t t);
// Cosine of candidate_embedding and the answer-position state. Throws
// zero_vector for an all-zero operand.
double hidden_similarity(const ActivationTrace& trace, std::size_t layer, std::size_t t);
double avg_hidden_similarity(const ActivationTrace& trace, std::size_t t);

// Mean raw logit / probability over the candidate's vocabulary ids.
double logit_score(const ActivationTrace& trace, std::size_t t);
double confidence_score(const ActivationTrace& trace, std::size_t t);

struct SignalSummary {
  std::string sample_id;
  Matrix layer_attention;             // [L x T]
  Matrix head_attention;              // [H x T]
  Matrix hidden_similarity_by_layer;  // [L x T]
  std::vector<double> hidden_similarity_avg;  // [T]
  std::vector<double> logit_scores;           // [T]
  std::vector<double> confidence_scores;      // [T]

  bool operator==(const SignalSummary&) const = default;
};

SignalSummary summarize(const ActivationTrace& trace);

}  // namespace dki::signals
