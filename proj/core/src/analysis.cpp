#include "dki/signals/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "dki/error.hpp"

namespace dki::signals {

namespace {

void check_pairing(std::size_t n, std::size_t m, auto&& id_at, std::span<const eval::ProbeJudgement> judgements) {
  if (n != m) throw Error(ErrorCode::pairing_mismatch, fmt::format("{} traces paired with {} judgements", n, m));
  for (std::size_t i = 0; i < n; ++i)
    if (id_at(i) != judgements[i].sample_id)
      throw Error(ErrorCode::pairing_mismatch,
                  fmt::format("item {}: trace '{}' paired with judgement '{}'", i, id_at(i), judgements[i].sample_id));
}

void check_same_shape(const Matrix& a, const Matrix& b, const char* field, const std::string& id) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw Error(ErrorCode::shape_mismatch, fmt::format("{}: {} is {}x{}, group uses {}x{}", id, field, b.rows, b.cols,
                                                       a.rows, a.cols));
}

void check_same_shape(const std::vector<double>& a, const std::vector<double>& b, const char* field,
                      const std::string& id) {
  if (a.size() != b.size())
    throw Error(ErrorCode::shape_mismatch, fmt::format("{}: {} has {} entries, group uses {}", id, field, b.size(), a.size()));
}

void add_into(std::vector<double>& acc, const std::vector<double>& v) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
}

class GroupMean {
 public:
  void add(const SignalSummary& s) {
    if (count_ == 0) {
      sum_ = s;
      sum_.sample_id.clear();
    } else {
      check_same_shape(sum_.layer_attention, s.layer_attention, "layer_attention", s.sample_id);
      check_same_shape(sum_.head_attention, s.head_attention, "head_attention", s.sample_id);
      check_same_shape(sum_.hidden_similarity_by_layer, s.hidden_similarity_by_layer, "hidden_similarity_by_layer",
                       s.sample_id);
      check_same_shape(sum_.hidden_similarity_avg, s.hidden_similarity_avg, "hidden_similarity_avg", s.sample_id);
      check_same_shape(sum_.logit_scores, s.logit_scores, "logit_scores", s.sample_id);
      check_same_shape(sum_.confidence_scores, s.confidence_scores, "confidence_scores", s.sample_id);
      add_into(sum_.layer_attention.data, s.layer_attention.data);
      add_into(sum_.head_attention.data, s.head_attention.data);
      add_into(sum_.hidden_similarity_by_layer.data, s.hidden_similarity_by_layer.data);
      add_into(sum_.hidden_similarity_avg, s.hidden_similarity_avg);
      add_into(sum_.logit_scores, s.logit_scores);
      add_into(sum_.confidence_scores, s.confidence_scores);
    }
    ++count_;
  }

  std::size_t count() const noexcept { return count_; }

  std::optional<SignalSummary> mean() const {
    if (count_ == 0) return std::nullopt;
    SignalSummary m = sum_;
    const double n = static_cast<double>(count_);
    for (auto* v : {&m.layer_attention.data, &m.head_attention.data, &m.hidden_similarity_by_layer.data,
                    &m.hidden_similarity_avg, &m.logit_scores, &m.confidence_scores})
      for (auto& x : *v) x /= n;
    return m;
  }

 private:
  SignalSummary sum_;
  std::size_t count_ = 0;
};

}  // namespace

MatchRate layer_match_rate(std::span<const ActivationTrace> traces, std::span<const eval::ProbeJudgement> judgements) {
  check_pairing(traces.size(), judgements.size(), [&](std::size_t i) -> const std::string& { return traces[i].sample_id; },
                judgements);

  std::size_t layers = 0;
  for (const auto& t : traces) layers = std::max(layers, t.meta.layers);
  MatchRate out;
  std::vector<std::size_t> hits(layers, 0);
  out.ties.assign(layers, 0);

  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto& trace = traces[i];
    const auto& pos = judgements[i].latest_pos;
    if (pos.kind == eval::PositionKind::parse_fail) {
      ++out.excluded_parse_fail;
      continue;
    }
    if (pos.kind == eval::PositionKind::oof) {
      ++out.excluded_oof;
      continue;
    }
    if (trace.meta.layers != layers)
      throw Error(ErrorCode::shape_mismatch, fmt::format("{}: {} layers, batch uses {}", trace.sample_id,
                                                         trace.meta.layers, layers));
    const std::size_t predicted = pos.attributed();  // 1-based
    if (predicted == 0 || predicted > trace.candidates())
      throw Error(ErrorCode::pairing_mismatch, fmt::format("{}: predicted candidate {} outside T={}", trace.sample_id,
                                                           predicted, trace.candidates()));
    ++out.included;
    const auto scores = layer_attention_scores(trace);
    for (std::size_t l = 0; l < layers; ++l) {
      std::size_t best = 0;
      double best_score = -std::numeric_limits<double>::infinity();
      std::size_t ties = 0;
      for (std::size_t t = 0; t < scores.cols; ++t) {
        const double s = scores(l, t);
        if (s > best_score) {
          best_score = s;
          best = t;
          ties = 1;
        } else if (s == best_score) {
          best = t;  // later candidate wins ties
          ++ties;
        }
      }
      if (ties > 1) ++out.ties[l];
      if (best + 1 == predicted) ++hits[l];
    }
  }

  out.rate.assign(layers, std::numeric_limits<double>::quiet_NaN());
  if (out.included > 0)
    for (std::size_t l = 0; l < layers; ++l) out.rate[l] = static_cast<double>(hits[l]) / static_cast<double>(out.included);
  return out;
}

GroupAggregate group_aggregate(std::span<const SignalSummary> summaries, std::span<const eval::ProbeJudgement> judgements) {
  check_pairing(summaries.size(), judgements.size(),
                [&](std::size_t i) -> const std::string& { return summaries[i].sample_id; }, judgements);
  GroupMean correct, wrong;
  GroupAggregate out;
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    if (judgements[i].parse_failed()) {
      ++out.excluded;
      continue;
    }
    (judgements[i].latest_correct ? correct : wrong).add(summaries[i]);
  }
  out.correct = correct.mean();
  out.wrong = wrong.mean();
  out.correct_count = correct.count();
  out.wrong_count = wrong.count();
  return out;
}

bool ValidationReport::ok() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const ValidationCheck* ValidationReport::find(std::string_view name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

namespace {

constexpr std::size_t kMaxDetails = 20;

class CheckBuilder {
 public:
  explicit CheckBuilder(std::string name) { check_.name = std::move(name); }

  template <typename... Args>
  void fail(fmt::format_string<Args...> f, Args&&... args) {
    check_.passed = false;
    if (check_.details.size() < kMaxDetails) check_.details.push_back(fmt::format(f, std::forward<Args>(args)...));
    else ++suppressed_;
  }

  ValidationCheck finish() {
    if (suppressed_ > 0) check_.details.push_back(fmt::format("... {} more", suppressed_));
    return std::move(check_);
  }

 private:
  ValidationCheck check_;
  std::size_t suppressed_ = 0;
};

}  // namespace

ValidationReport validate_trace(const ActivationTrace& trace) {
  ValidationReport report;
  report.sample_id = trace.sample_id;
  const auto& m = trace.meta;

  {
    CheckBuilder c("schema_version");
    if (trace.schema_version != kTraceSchemaVersion)
      c.fail("schema version {} (expected {})", trace.schema_version, kTraceSchemaVersion);
    report.checks.push_back(c.finish());
  }

  bool shapes_ok = true;
  {
    CheckBuilder c("shapes");
    if (m.layers == 0 || m.heads == 0 || m.seq_len == 0 || m.hidden == 0 || m.vocab == 0)
      c.fail("model_meta has a zero dimension (L={}, H={}, M={}, D={}, V={})", m.layers, m.heads, m.seq_len, m.hidden,
             m.vocab);
    if (trace.attention.size() != m.layers * m.heads * m.seq_len)
      c.fail("attention has {} values, expected L*H*M = {}", trace.attention.size(), m.layers * m.heads * m.seq_len);
    if (trace.hidden_answer.size() != m.layers * m.hidden)
      c.fail("hidden_answer has {} values, expected L*D = {}", trace.hidden_answer.size(), m.layers * m.hidden);
    const auto s = trace.span_tokens();
    if (trace.hidden_candidates.size() != m.layers * s * m.hidden)
      c.fail("hidden_candidates has {} values, expected L*S*D = {}", trace.hidden_candidates.size(), m.layers * s * m.hidden);
    if (trace.candidate_vocab.size() != trace.candidates())
      c.fail("{} vocabulary sets for {} candidates", trace.candidate_vocab.size(), trace.candidates());
    if (trace.candidates() == 0) c.fail("no candidate spans");
    auto r = c.finish();
    shapes_ok = r.passed;
    report.checks.push_back(std::move(r));
  }

  {
    CheckBuilder nonneg("attention_nonnegative");
    CheckBuilder sums("attention_row_sums");
    if (shapes_ok) {
      for (std::size_t l = 0; l < m.layers; ++l)
        for (std::size_t h = 0; h < m.heads; ++h) {
          const auto row = trace.attention_row(l, h);
          double sum = 0.0;
          for (std::size_t v = 0; v < row.size(); ++v) {
            if (!(row[v] >= 0.0f)) nonneg.fail("layer {} head {} position {}: {}", l, h, v, row[v]);
            sum += row[v];
          }
          if (!(std::abs(sum - 1.0) <= kRowSumTolerance)) sums.fail("layer {} head {}: row sums to {:.6f}", l, h, sum);
        }
    } else {
      nonneg.fail("skipped: shapes invalid");
      sums.fail("skipped: shapes invalid");
    }
    report.checks.push_back(nonneg.finish());
    report.checks.push_back(sums.finish());
  }

  {
    CheckBuilder nonempty("spans_nonempty");
    CheckBuilder order("spans_ordered_disjoint");
    CheckBuilder precede("spans_precede_answer");
    for (std::size_t t = 0; t < trace.spans.size(); ++t) {
      const auto& s = trace.spans[t];
      if (s.end <= s.begin) nonempty.fail("candidate {}: span [{}, {}) is empty", t, s.begin, s.end);
      if (t > 0 && s.begin < trace.spans[t - 1].end)
        order.fail("candidate {}: span [{}, {}) overlaps or precedes candidate {} [{}, {})", t, s.begin, s.end, t - 1,
                   trace.spans[t - 1].begin, trace.spans[t - 1].end);
      if (s.end > trace.answer_pos) precede.fail("candidate {}: span ends at {} after answer position {}", t, s.end, trace.answer_pos);
    }
    report.checks.push_back(nonempty.finish());
    report.checks.push_back(order.finish());
    report.checks.push_back(precede.finish());
  }

  {
    CheckBuilder c("answer_position");
    if (trace.answer_pos >= m.seq_len) c.fail("answer position {} outside sequence length {}", trace.answer_pos, m.seq_len);
    report.checks.push_back(c.finish());
  }

  {
    CheckBuilder bounds("probability_bounds");
    CheckBuilder mass("probability_mass");
    double total = 0.0;
    for (const auto& [id, e] : trace.answer_logits) {
      if (!(e.prob >= 0.0f && e.prob <= 1.0f)) bounds.fail("vocab id {}: probability {}", id, e.prob);
      if (!std::isfinite(e.logit)) bounds.fail("vocab id {}: non-finite logit", id);
      if (id < 0 || static_cast<std::size_t>(id) >= m.vocab) bounds.fail("vocab id {} outside vocabulary size {}", id, m.vocab);
      total += e.prob;
    }
    if (total > 1.0 + kProbabilityMassTolerance) mass.fail("stored probabilities sum to {:.9f}", total);
    report.checks.push_back(bounds.finish());
    report.checks.push_back(mass.finish());
  }

  {
    CheckBuilder c("vocab_coverage");
    for (std::size_t t = 0; t < trace.candidate_vocab.size(); ++t) {
      if (trace.candidate_vocab[t].empty()) c.fail("candidate {}: empty vocabulary set", t);
      for (auto id : trace.candidate_vocab[t])
        if (!trace.answer_logits.contains(id)) c.fail("candidate {}: vocab id {} has no stored logit", t, id);
    }
    report.checks.push_back(c.finish());
  }

  return report;
}

}  // namespace dki::signals
