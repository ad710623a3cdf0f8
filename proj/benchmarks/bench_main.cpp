#include <benchmark/benchmark.h>

#include <random>

#include "dki/corpus/generator.hpp"
#include "dki/eval/judge.hpp"
#include "dki/prompting/answer.hpp"
#include "dki/prompting/prompt.hpp"
#include "dki/signals/scores.hpp"
#include "dki/signals/trace.hpp"

namespace {

using namespace dki;

GenerationConfig config_for(std::size_t updates, std::size_t count) {
  GenerationConfig c;
  c.updates = updates;
  c.corpus_size = count;
  c.seed = 0;
  return c;
}

// Model-sized trace: T candidates of 3 tokens each, normalised attention rows.
signals::ActivationTrace synthetic_trace(std::size_t layers, std::size_t heads, std::size_t seq_len,
                                         std::size_t candidates, std::size_t hidden) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  signals::ActivationTrace t;
  t.sample_id = "bench|baseline";
  t.meta = {layers, heads, seq_len, hidden, 32000, "bench"};
  for (std::size_t i = 0; i < candidates; ++i) t.spans.push_back({10 + 8 * i, 13 + 8 * i});
  t.answer_pos = seq_len - 1;
  t.attention.resize(layers * heads * seq_len);
  for (std::size_t r = 0; r < layers * heads; ++r) {
    double total = 0;
    for (std::size_t v = 0; v < seq_len; ++v) total += t.attention[r * seq_len + v] = unit(rng);
    for (std::size_t v = 0; v < seq_len; ++v) t.attention[r * seq_len + v] = static_cast<float>(t.attention[r * seq_len + v] / total);
  }
  t.hidden_answer.resize(layers * hidden);
  for (auto& x : t.hidden_answer) x = unit(rng) - 0.5f;
  t.hidden_candidates.resize(layers * t.span_tokens() * hidden);
  for (auto& x : t.hidden_candidates) x = unit(rng) - 0.5f;
  for (std::size_t i = 0; i < candidates; ++i) {
    const auto id = static_cast<std::int32_t>(100 + i);
    t.candidate_vocab.push_back({id});
    t.answer_logits[id] = {unit(rng), 0.5f / static_cast<float>(candidates)};
  }
  return t;
}

void BM_GenerateCorpus(benchmark::State& state) {
  const auto c = config_for(static_cast<std::size_t>(state.range(0)), 200);
  for (auto _ : state) benchmark::DoNotOptimize(generate_corpus(c));
  state.SetItemsProcessed(state.iterations() * 200);
}
BENCHMARK(BM_GenerateCorpus)->Arg(8)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_RenderProbePrompt(benchmark::State& state) {
  const auto t = generate_synthetic_dki(config_for(static_cast<std::size_t>(state.range(0)), 1), 0);
  for (auto _ : state) benchmark::DoNotOptimize(prompt::render_probe_prompt(t, {prompt::VariantKind::index}));
}
BENCHMARK(BM_RenderProbePrompt)->Arg(8)->Arg(64)->Arg(512);

void BM_ExtractRecords(benchmark::State& state) {
  const auto t = generate_synthetic_dki(config_for(static_cast<std::size_t>(state.range(0)), 1), 0);
  const auto p = prompt::render_probe_prompt(t, {prompt::VariantKind::baseline});
  for (auto _ : state) benchmark::DoNotOptimize(prompt::extract_records(p.text));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(p.text.size()));
}
BENCHMARK(BM_ExtractRecords)->Arg(8)->Arg(64)->Arg(512);

void BM_ParseAndJudge(benchmark::State& state) {
  const auto t = generate_synthetic_dki(config_for(static_cast<std::size_t>(state.range(0)), 1), 0);
  const auto raw = "Sure.\n```json\n" + prompt::format_answer(t.cue, t.values.front(), t.values[t.values.size() / 2]) +
                   "\n```";
  for (auto _ : state) benchmark::DoNotOptimize(eval::judge_answer(prompt::parse_answer(raw), t));
}
BENCHMARK(BM_ParseAndJudge)->Arg(8)->Arg(512);

void BM_Summarize(benchmark::State& state) {
  const auto t = synthetic_trace(28, 28, static_cast<std::size_t>(state.range(0)), 32, 512);
  for (auto _ : state) benchmark::DoNotOptimize(signals::summarize(t));
}
BENCHMARK(BM_Summarize)->Arg(512)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_TraceEncodeBinary(benchmark::State& state) {
  const auto t = synthetic_trace(28, 28, 2048, 32, 512);
  for (auto _ : state) benchmark::DoNotOptimize(signals::encode_trace_binary(t));
}
BENCHMARK(BM_TraceEncodeBinary)->Unit(benchmark::kMillisecond);

void BM_TraceDecodeBinary(benchmark::State& state) {
  const auto bytes = signals::encode_trace_binary(synthetic_trace(28, 28, 2048, 32, 512));
  for (auto _ : state) benchmark::DoNotOptimize(signals::decode_trace(bytes));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(bytes.size()));
}
BENCHMARK(BM_TraceDecodeBinary)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
