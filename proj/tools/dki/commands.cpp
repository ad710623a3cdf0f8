#include "commands.hpp"

#include <fstream>
#include <map>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "dki/client/cache.hpp"
#include "dki/client/client.hpp"
#include "dki/corpus/corpus_io.hpp"
#include "dki/corpus/generator.hpp"
#include "dki/corpus/word_pool.hpp"
#include "dki/error.hpp"
#include "dki/eval/sweep.hpp"
#include "dki/log.hpp"
#include "dki/prompting/prompt.hpp"
#include "dki/report/report.hpp"
#include "dki/signals/analysis.hpp"

namespace dki::cli {

using nlohmann::ordered_json;

namespace {

std::vector<prompt::PromptVariant> parse_variants(const std::vector<std::string>& names) {
  std::vector<prompt::PromptVariant> out;
  for (const auto& n : names) {
    if (n == "all") {
      const auto& s = prompt::standard_variants();
      out.insert(out.end(), s.begin(), s.end());
      continue;
    }
    auto v = prompt::parse_variant(n);
    if (!v) throw Error(ErrorCode::invalid_config, "unknown prompt variant '" + n + "'");
    out.push_back(*v);
  }
  if (out.empty()) throw Error(ErrorCode::invalid_config, "no prompt variants selected");
  return out;
}

std::vector<std::string> word_pool(const RunConfig& c) {
  return c.word_list ? read_word_list(*c.word_list) : std::vector<std::string>{};
}

GenerationConfig generation_config(const RunConfig& c, std::size_t length, std::uint64_t seed,
                                   const std::vector<std::string>& pool) {
  GenerationConfig g;
  g.updates = length;
  g.corpus_size = c.count;
  g.seed = seed;
  g.word_pool = pool;
  g.word_length = c.word_length;
  return g;
}

std::filesystem::path corpus_file(const std::filesystem::path& dir, std::size_t length, std::uint64_t seed) {
  return dir / fmt::format("synthetic_T{}_s{}.jsonl", length, seed);
}

}  // namespace

int cmd_generate(const RunConfig& c, std::ostream& out) {
  if (c.lengths.empty() || c.seeds.empty()) throw Error(ErrorCode::invalid_config, "generate needs lengths and seeds");
  std::filesystem::create_directories(c.out);
  const auto pool = word_pool(c);
  for (auto length : c.lengths)
    for (auto seed : c.seeds) {
      const auto corpus = generate_corpus(generation_config(c, length, seed, pool));
      const auto path = corpus_file(c.out, length, seed);
      write_corpus_file(path, corpus);
      if (corpus.empty()) {
        fmt::print(out, "{}: 0 trajectories\n", path.string());
      } else {
        const auto s = corpus_stats(corpus);
        fmt::print(out, "{}: {} trajectories, length mean {:.2f} min {} max {}\n", path.string(), s.count,
                   s.mean_length, s.min_length, s.max_length);
      }
    }
  return kOk;
}

int cmd_probe(const RunConfig& c, std::ostream& out) {
  check_template_pin(c);
  eval::SweepPlan plan;
  plan.lengths = c.lengths;
  plan.corpus_size = c.count;
  plan.word_pool = word_pool(c);
  plan.word_length = c.word_length;
  plan.corpus_path = c.corpus;
  plan.variants = parse_variants(c.variants);
  plan.seeds = c.seeds;
  plan.match.mode = c.match;
  plan.include_flagged_narratives = c.include_flagged_narratives;
  plan.store_dir = c.out / "cells";
  if (c.request_budget) plan.request_budget = *c.request_budget;

  auto cache = std::make_shared<client::ResponseCache>(c.cache_dir.value_or(c.out / "cache"));
  client::ChatClient chat(c.endpoint, cache);
  const auto report = eval::run_sweep(plan, chat);
  eval::write_report(c.out, report);

  fmt::print(out, "model {} | {} fresh requests | output {}\n\n", report.model_id, report.fresh_requests, c.out.string());
  fmt::print(out, "{}", report::render_endpoint_table(report.aggregates));

  std::size_t failures = 0;
  for (const auto& cell : report.cells) failures += cell.errors.size();
  if (failures > 0) {
    fmt::print(out, "\n{} samples failed:\n{:<48} {}\n", failures, "sample", "error");
    std::ofstream errors(c.out / "errors.csv", std::ios::trunc);
    errors << "seed,sample_id,message\n";
    for (const auto& cell : report.cells)
      for (const auto& e : cell.errors) {
        fmt::print(out, "{:<48} {}\n", e.sample_id, e.message);
        errors << fmt::format("{},\"{}\",\"{}\"\n", cell.seed, e.sample_id, e.message);
      }
  }
  if (!report.complete) {
    fmt::print(out, "\nrequest budget exhausted; rerun the same command to resume\n");
    return kEndpoint;
  }
  return failures > 0 ? kEndpoint : kOk;
}

int cmd_report(const RunConfig& c, const std::filesystem::path& input, std::ostream& out) {
  if (input.empty()) throw Error(ErrorCode::invalid_config, "report needs an input");
  auto path = input;
  if (std::filesystem::is_directory(path)) path /= "report.json";
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::io, "missing report input " + path.string());
  const auto report = path.extension() == ".jsonl" ? eval::rebuild_report(eval::read_judgements(path))
                                                   : eval::read_report(path);
  if (report.cells.empty()) throw Error(ErrorCode::empty_input, path.string() + " holds no judgements");
  const auto files = report::write_sweep_report(c.out, report);
  fmt::print(out, "{}\n", report::render_endpoint_table(report.aggregates));
  for (const auto& n : files.notes) fmt::print(out, "note: {}\n", n);
  fmt::print(out, "{} files written to {}\n", files.written.size(), c.out.string());
  return kOk;
}

namespace {

struct LoadedTraces {
  std::vector<signals::ActivationTrace> traces;
  std::vector<signals::ValidationReport> invalid;
  std::size_t total = 0;
};

std::vector<signals::ManifestEntry> trace_entries(const RunConfig& c) {
  std::vector<signals::ManifestEntry> entries;
  if (c.manifest) entries = signals::read_manifest(*c.manifest);
  for (const auto& p : c.traces) entries.push_back({"", p});
  return entries;
}

LoadedTraces load_traces(const RunConfig& c) {
  LoadedTraces loaded;
  for (const auto& e : trace_entries(c)) {
    ++loaded.total;
    signals::ActivationTrace trace;
    try {
      trace = signals::read_trace(e.path);
    } catch (const Error& err) {
      signals::ValidationReport r;
      r.sample_id = e.sample_id.empty() ? e.path.string() : e.sample_id;
      r.checks.push_back({"readable", false, {err.what()}});
      loaded.invalid.push_back(std::move(r));
      continue;
    }
    auto report = signals::validate_trace(trace);
    if (!e.sample_id.empty() && e.sample_id != trace.sample_id)
      report.checks.push_back({"manifest_sample_id", false,
                               {fmt::format("manifest says '{}', trace says '{}'", e.sample_id, trace.sample_id)}});
    if (report.ok()) loaded.traces.push_back(std::move(trace));
    else loaded.invalid.push_back(std::move(report));
  }
  return loaded;
}

void print_invalid(const std::vector<signals::ValidationReport>& invalid, std::ostream& out) {
  for (const auto& r : invalid)
    for (const auto& check : r.checks)
      if (!check.passed)
        for (const auto& d : check.details.empty() ? std::vector<std::string>{""} : check.details)
          fmt::print(out, "INVALID {} [{}] {}\n", r.sample_id, check.name, d);
}

}  // namespace

int cmd_analyze(const RunConfig& c, std::ostream& out) {
  if (!c.manifest && c.traces.empty()) throw Error(ErrorCode::invalid_config, "analyze needs a manifest or trace files");
  if (!c.judgements) throw Error(ErrorCode::invalid_config, "analyze needs a judgements file");
  auto loaded = load_traces(c);
  print_invalid(loaded.invalid, out);

  std::map<std::string, eval::ProbeJudgement> by_id;
  for (auto& j : eval::read_judgements(*c.judgements)) by_id.emplace(j.sample_id, std::move(j));

  report::AnalysisInput input;
  input.invalid = loaded.invalid;
  std::vector<signals::ActivationTrace> paired;
  std::vector<eval::ProbeJudgement> judgements;
  for (auto& trace : loaded.traces) {
    const auto it = by_id.find(trace.sample_id);
    if (it == by_id.end()) {
      log::warn("trace {} has no judgement; skipped", trace.sample_id);
      fmt::print(out, "SKIPPED {}: no judgement\n", trace.sample_id);
      continue;
    }
    try {
      input.summaries.push_back(signals::summarize(trace));
    } catch (const Error& e) {
      signals::ValidationReport r;
      r.sample_id = trace.sample_id;
      r.checks.push_back({"scorable", false, {e.what()}});
      print_invalid({r}, out);
      input.invalid.push_back(std::move(r));
      continue;
    }
    judgements.push_back(it->second);
    paired.push_back(std::move(trace));
  }

  if (paired.empty()) log::warn("no analysable traces ({} listed)", loaded.total);
  input.match_rate = signals::layer_match_rate(paired, judgements);
  input.groups = signals::group_aggregate(input.summaries, judgements);
  const auto dir = c.out / "analysis";
  const auto files = report::write_analysis_report(dir, input);

  fmt::print(out, "{} traces listed, {} analysed, {} invalid | correct {} wrong {} parse-fail {}\n", loaded.total,
             paired.size(), input.invalid.size(), input.groups.correct_count, input.groups.wrong_count,
             input.groups.excluded);
  if (input.match_rate.defined()) {
    fmt::print(out, "match rate by layer ({} samples):", input.match_rate.included);
    for (double r : input.match_rate.rate) fmt::print(out, " {:.3f}", r);
    fmt::print(out, "\n");
  }
  for (const auto& n : files.notes) fmt::print(out, "note: {}\n", n);
  fmt::print(out, "output {}\n", dir.string());
  return kOk;
}

int cmd_export_prompts(const RunConfig& c, const std::filesystem::path& bundle, std::ostream& out) {
  check_template_pin(c);
  const auto variants = parse_variants(c.variants);
  std::vector<std::vector<DkiTrajectory>> corpora;
  if (c.corpus) {
    corpora.push_back(load_real_world(*c.corpus));
  } else {
    const auto pool = word_pool(c);
    for (auto length : c.lengths)
      for (auto seed : c.seeds) corpora.push_back(generate_corpus(generation_config(c, length, seed, pool)));
  }

  const auto path = bundle.empty() ? c.out / "prompts.jsonl" : bundle;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw Error(ErrorCode::io, "cannot write " + path.string());
  std::size_t written = 0;
  for (const auto& corpus : corpora)
    for (const auto& t : corpus)
      for (const auto& v : variants) {
        const auto p = v.kind == prompt::VariantKind::narrative ? prompt::render_narrative_probe(t)
                                                                : prompt::render_probe_prompt(t, v);
        ordered_json j;
        j["sample_id"] = eval::sample_id(t.id, v);
        j["template_version"] = prompt::kTemplateVersion;
        j["variant"] = prompt::variant_name(v);
        j["trajectory"] = ordered_json::parse(serialize_record(t));
        j["text"] = p.text;
        j["record_block"] = {p.record_block.begin, p.record_block.end};
        file << j.dump() << "\n";
        ++written;
      }
  if (!file) throw Error(ErrorCode::io, "write failed for " + path.string());
  fmt::print(out, "{} prompts written to {}\n", written, path.string());
  return kOk;
}

int cmd_validate_traces(const RunConfig& c, bool as_json, std::ostream& out) {
  if (!c.manifest && c.traces.empty()) throw Error(ErrorCode::invalid_config, "validate-traces needs a manifest or trace files");
  const auto loaded = load_traces(c);
  if (as_json) {
    ordered_json j;
    j["total"] = loaded.total;
    j["valid"] = loaded.traces.size();
    auto reports = ordered_json::array();
    for (const auto& t : loaded.traces) reports.push_back({{"sample_id", t.sample_id}, {"ok", true}});
    for (const auto& r : loaded.invalid) {
      auto checks = ordered_json::array();
      for (const auto& check : r.checks)
        checks.push_back({{"name", check.name}, {"passed", check.passed}, {"details", check.details}});
      reports.push_back({{"sample_id", r.sample_id}, {"ok", false}, {"checks", checks}});
    }
    j["traces"] = std::move(reports);
    out << j.dump(2) << "\n";
  } else {
    print_invalid(loaded.invalid, out);
    for (const auto& t : loaded.traces) fmt::print(out, "OK {}\n", t.sample_id);
    fmt::print(out, "{} of {} traces valid\n", loaded.traces.size(), loaded.total);
  }
  return loaded.invalid.empty() ? kOk : kValidation;
}

}  // namespace dki::cli
