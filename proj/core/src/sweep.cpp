#include "dki/eval/sweep.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "dki/corpus/corpus_io.hpp"
#include "dki/corpus/generator.hpp"
#include "dki/error.hpp"
#include "dki/log.hpp"

namespace dki::eval {

using ordered_json = nlohmann::ordered_json;

namespace {

struct CorpusJob {
  std::string label;
  std::size_t cell_length = 0;
  std::uint64_t seed = 0;
  std::vector<DkiTrajectory> trajectories;
};

std::size_t shared_length(const std::vector<DkiTrajectory>& corpus) {
  if (corpus.empty()) return 0;
  for (const auto& t : corpus) {
    if (t.length() != corpus.front().length()) return 0;
  }
  return corpus.front().length();
}

std::string safe_name(std::string text) {
  for (char& c : text) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  }
  return text;
}

std::filesystem::path cell_path(const std::filesystem::path& dir, const CellKey& key, std::uint64_t seed) {
  return dir / safe_name(fmt::format("{}_T{}_{}_s{}.jsonl", key.corpus, key.length, key.variant, seed));
}

bool counted(const ProbeJudgement& j, bool include_flagged) { return include_flagged || !j.narrative_flagged; }

SweepCell build_cell(CellKey key, std::uint64_t seed, std::vector<ProbeJudgement> judgements, bool include_flagged) {
  SweepCell cell;
  cell.key = key;
  cell.seed = seed;
  std::vector<ProbeJudgement> scored;
  for (const auto& j : judgements) {
    if (counted(j, include_flagged)) {
      scored.push_back(j);
    } else {
      ++cell.narrative_excluded;
    }
  }
  if (!scored.empty()) {
    cell.strict = metric_cell(scored, key, MatchMode::strict);
    cell.lenient = metric_cell(scored, key, MatchMode::lenient);
  } else {
    cell.strict.key = key;
    cell.lenient.key = key;
  }
  std::set<std::size_t> lengths;
  for (const auto& j : scored) lengths.insert(j.length);
  for (std::size_t t : lengths) {
    std::vector<ProbeJudgement> subset;
    std::copy_if(scored.begin(), scored.end(), std::back_inserter(subset),
                 [t](const ProbeJudgement& j) { return j.length == t; });
    cell.latest_histograms.push_back(position_histogram(subset, t, Endpoint::latest));
    cell.earliest_histograms.push_back(position_histogram(subset, t, Endpoint::earliest));
  }
  for (const auto& j : scored) {
    cell.swaps += j.swapped ? 1 : 0;
    cell.parse_failures += j.parse_failed() ? 1 : 0;
    cell.duplicate_value_samples += j.duplicate_values ? 1 : 0;
  }
  cell.judgements = std::move(judgements);
  return cell;
}

void aggregate_into(SweepReport& report) {
  std::map<CellKey, std::vector<MetricCell>> strict, lenient;
  std::vector<CellKey> order;
  for (const auto& c : report.cells) {
    if (c.strict.n == 0) continue;
    if (!strict.count(c.key)) order.push_back(c.key);
    strict[c.key].push_back(c.strict);
    lenient[c.key].push_back(c.lenient);
  }
  report.aggregates.clear();
  report.lenient_aggregates.clear();
  for (const auto& k : order) {
    report.aggregates.push_back(aggregate_seeds(strict[k]));
    report.lenient_aggregates.push_back(aggregate_seeds(lenient[k]));
  }
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write " + tmp.string());
    out << text;
    if (!out) throw Error(ErrorCode::io, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<CorpusJob> plan_jobs(const SweepPlan& plan) {
  std::vector<CorpusJob> jobs;
  if (plan.seeds.empty()) throw Error(ErrorCode::invalid_config, "sweep needs at least one seed");
  if (plan.variants.empty()) throw Error(ErrorCode::invalid_config, "sweep needs at least one variant");
  if (plan.corpus_path) {
    auto corpus = load_real_world(*plan.corpus_path);
    const auto label = plan.corpus_path->stem().string();
    const auto length = shared_length(corpus);
    for (auto seed : plan.seeds) jobs.push_back({label, length, seed, corpus});
    return jobs;
  }
  if (plan.lengths.empty()) throw Error(ErrorCode::invalid_config, "sweep needs at least one T");
  for (auto t : plan.lengths) {
    for (auto seed : plan.seeds) {
      GenerationConfig config;
      config.updates = t;
      config.corpus_size = plan.corpus_size;
      config.seed = seed;
      config.word_pool = plan.word_pool;
      config.word_length = plan.word_length;
      jobs.push_back({"synthetic", t, seed, generate_corpus(config)});
    }
  }
  return jobs;
}

}  // namespace

SweepReport run_sweep(const SweepPlan& plan, client::ChatClient& client) {
  SweepReport report;
  report.template_version = std::string(prompt::kTemplateVersion);
  report.model_id = client.endpoint().model_id;
  report.match_mode = plan.match.mode;

  auto jobs = plan_jobs(plan);
  std::size_t budget = plan.request_budget;

  for (const auto& job : jobs) {
    client.register_trajectories(job.trajectories);
    for (const auto& variant : plan.variants) {
      CellKey key{job.label, job.cell_length, prompt::variant_name(variant)};

      if (plan.store_dir) {
        const auto stored = cell_path(*plan.store_dir, key, job.seed);
        if (std::filesystem::exists(stored)) {
          report.cells.push_back(
              build_cell(key, job.seed, read_judgements(stored), plan.include_flagged_narratives));
          continue;
        }
      }

      std::vector<client::ChatRequest> requests;
      std::vector<const DkiTrajectory*> targets;
      std::vector<SampleError> errors;
      for (const auto& t : job.trajectories) {
        try {
          auto p = variant.kind == prompt::VariantKind::narrative ? prompt::render_narrative_probe(t)
                                                                  : prompt::render_probe_prompt(t, variant);
          requests.push_back(client.make_request(std::move(p), job.seed));
          targets.push_back(&t);
        } catch (const Error& e) {
          errors.push_back({sample_id(t.id, variant), e.what()});
        }
      }

      const std::size_t before = client.network_calls();
      std::vector<client::BatchItem> items;
      bool interrupted = false;
      if (budget == std::numeric_limits<std::size_t>::max()) {
        items = client.complete_batch(requests);
      } else {
        items.resize(requests.size());
        // Sequential so the budget cut is deterministic.
        for (std::size_t i = 0; i < requests.size(); ++i) {
          const std::size_t spent = client.network_calls() - before;
          if (spent >= budget) {
            interrupted = true;
            break;
          }
          try {
            items[i].key = client::cache_key(requests[i]);
            items[i].response = client.complete(requests[i]);
          } catch (const Error& e) {
            items[i].error = e.code();
            items[i].error_message = e.what();
          }
        }
      }
      const std::size_t spent = client.network_calls() - before;
      report.fresh_requests += spent;
      if (budget != std::numeric_limits<std::size_t>::max()) budget -= std::min(budget, spent);
      if (interrupted) {
        report.complete = false;
        log::warn("request budget exhausted in cell {}/T{}/{}/s{}; sweep stopped", key.corpus, key.length,
                  key.variant, job.seed);
        aggregate_into(report);
        return report;
      }

      std::vector<ProbeJudgement> judgements;
      std::vector<ResponseRecord> responses;
      for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& t = *targets[i];
        const auto sid = sample_id(t.id, variant);
        if (!items[i].ok()) {
          errors.push_back({sid, items[i].error_message});
          continue;
        }
        const auto& response = *items[i].response;
        auto judgement = judge_answer(prompt::parse_answer(response.raw_text), t, plan.match);
        judgement.sample_id = sid;
        judgement.corpus = job.label;
        judgement.cell_length = job.cell_length;
        judgement.variant = variant;
        judgement.seed = job.seed;
        if (variant.kind == prompt::VariantKind::narrative && t.document) {
          judgement.narrative_flagged = !prompt::check_narrative(*t.document, t).ok;
        }
        judgements.push_back(std::move(judgement));
        responses.push_back({sid, job.seed, items[i].key, response.raw_text, response.cache_hit});
      }

      auto cell = build_cell(key, job.seed, std::move(judgements), plan.include_flagged_narratives);
      cell.errors = std::move(errors);
      cell.responses = std::move(responses);
      if (plan.store_dir && cell.errors.empty()) {
        std::string text;
        for (const auto& j : cell.judgements) text += judgement_to_json(j) + "\n";
        write_text_atomic(cell_path(*plan.store_dir, key, job.seed), text);
      }
      if (!cell.errors.empty()) {
        log::warn("cell {}/T{}/{}/s{}: {} sample errors", key.corpus, key.length, key.variant, job.seed,
                  cell.errors.size());
      }
      report.cells.push_back(std::move(cell));
    }
  }
  aggregate_into(report);
  return report;
}

SweepReport rebuild_report(std::vector<ProbeJudgement> judgements, std::string model_id, std::string template_version) {
  SweepReport report;
  report.model_id = std::move(model_id);
  report.template_version = std::move(template_version);
  using GroupKey = std::pair<CellKey, std::uint64_t>;
  std::vector<GroupKey> order;
  std::map<GroupKey, std::vector<ProbeJudgement>> groups;
  for (auto& j : judgements) {
    GroupKey k{CellKey{j.corpus, j.cell_length, prompt::variant_name(j.variant)}, j.seed};
    auto [it, inserted] = groups.try_emplace(k);
    if (inserted) order.push_back(k);
    it->second.push_back(std::move(j));
  }
  for (const auto& k : order) report.cells.push_back(build_cell(k.first, k.second, std::move(groups[k]), false));
  aggregate_into(report);
  return report;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

ordered_json position_json(const PredictedPosition& p) {
  static constexpr const char* kKinds[] = {"candidate", "oof", "parse_fail"};
  ordered_json j;
  j["kind"] = kKinds[static_cast<int>(p.kind)];
  j["matches"] = p.matches;
  return j;
}

PredictedPosition position_from(const nlohmann::json& j) {
  PredictedPosition p;
  const auto kind = j.at("kind").get<std::string>();
  p.kind = kind == "candidate" ? PositionKind::candidate : kind == "oof" ? PositionKind::oof : PositionKind::parse_fail;
  p.matches = j.at("matches").get<std::vector<std::size_t>>();
  return p;
}

prompt::AnswerStatus status_from(std::string_view s) {
  using prompt::AnswerStatus;
  for (auto st : {AnswerStatus::ok, AnswerStatus::no_json_found, AnswerStatus::multiple_json_objects,
                  AnswerStatus::invalid_json, AnswerStatus::missing_key, AnswerStatus::extra_key,
                  AnswerStatus::non_string_value}) {
    if (prompt::to_string(st) == s) return st;
  }
  throw Error(ErrorCode::schema, "unknown answer status '" + std::string(s) + "'");
}

ordered_json judgement_json(const ProbeJudgement& j) {
  ordered_json o;
  o["sample_id"] = j.sample_id;
  o["trajectory_id"] = j.trajectory_id;
  o["corpus"] = j.corpus;
  o["T"] = j.length;
  o["cell_T"] = j.cell_length;
  o["variant"] = prompt::variant_name(j.variant);
  o["seed"] = j.seed;
  o["answer_status"] = std::string(prompt::to_string(j.answer_status));
  o["predicted_earliest"] = j.predicted_earliest;
  o["predicted_latest"] = j.predicted_latest;
  o["earliest_correct"] = j.earliest_correct;
  o["latest_correct"] = j.latest_correct;
  o["earliest_correct_lenient"] = j.earliest_correct_lenient;
  o["latest_correct_lenient"] = j.latest_correct_lenient;
  o["earliest_pos"] = position_json(j.earliest_pos);
  o["latest_pos"] = position_json(j.latest_pos);
  o["swapped"] = j.swapped;
  o["duplicate_values"] = j.duplicate_values;
  o["narrative_flagged"] = j.narrative_flagged;
  return o;
}

ProbeJudgement judgement_from(const nlohmann::json& o) {
  ProbeJudgement j;
  j.sample_id = o.at("sample_id").get<std::string>();
  j.trajectory_id = o.at("trajectory_id").get<std::string>();
  j.corpus = o.at("corpus").get<std::string>();
  j.length = o.at("T").get<std::size_t>();
  j.cell_length = o.at("cell_T").get<std::size_t>();
  auto v = prompt::parse_variant(o.at("variant").get<std::string>());
  if (!v) throw Error(ErrorCode::schema, "unknown variant in judgement " + j.sample_id);
  j.variant = *v;
  j.seed = o.at("seed").get<std::uint64_t>();
  j.answer_status = status_from(o.at("answer_status").get<std::string>());
  j.predicted_earliest = o.at("predicted_earliest").get<std::string>();
  j.predicted_latest = o.at("predicted_latest").get<std::string>();
  j.earliest_correct = o.at("earliest_correct").get<bool>();
  j.latest_correct = o.at("latest_correct").get<bool>();
  j.earliest_correct_lenient = o.at("earliest_correct_lenient").get<bool>();
  j.latest_correct_lenient = o.at("latest_correct_lenient").get<bool>();
  j.earliest_pos = position_from(o.at("earliest_pos"));
  j.latest_pos = position_from(o.at("latest_pos"));
  j.swapped = o.at("swapped").get<bool>();
  j.duplicate_values = o.at("duplicate_values").get<bool>();
  j.narrative_flagged = o.value("narrative_flagged", false);
  return j;
}

ordered_json metric_json(const MetricCell& c) {
  ordered_json o;
  o["corpus"] = c.key.corpus;
  o["T"] = c.key.length;
  o["variant"] = c.key.variant;
  o["n"] = c.n;
  o["seeds"] = c.seeds;
  o["correct_earliest"] = c.correct_earliest;
  o["correct_latest"] = c.correct_latest;
  o["acc_earliest"] = c.acc_earliest;
  o["acc_latest"] = c.acc_latest;
  o["elag"] = c.elag;
  o["acc_earliest_std"] = c.earliest_stats.std;
  o["acc_latest_std"] = c.latest_stats.std;
  o["elag_std"] = c.elag_stats.std;
  return o;
}

ordered_json histogram_json(const PositionHistogram& h) {
  ordered_json o;
  o["T"] = h.length;
  o["counts"] = h.counts;
  o["oof"] = h.oof;
  o["parse_fail"] = h.parse_fail;
  return o;
}

}  // namespace

std::string judgement_to_json(const ProbeJudgement& judgement) { return judgement_json(judgement).dump(); }

ProbeJudgement judgement_from_json(std::string_view line) {
  auto o = nlohmann::json::parse(line, nullptr, false);
  if (o.is_discarded() || !o.is_object()) throw Error(ErrorCode::schema, "judgement line is not a JSON object");
  try {
    return judgement_from(o);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::schema, std::string("malformed judgement: ") + e.what());
  }
}

void write_judgements(const std::filesystem::path& path, std::span<const ProbeJudgement> judgements) {
  std::string text;
  for (const auto& j : judgements) text += judgement_to_json(j) + "\n";
  write_text_atomic(path, text);
}

std::vector<ProbeJudgement> read_judgements(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open judgements " + path.string());
  std::vector<ProbeJudgement> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(judgement_from_json(line));
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("{}:{}: {}", path.string(), n, e.what()));
    }
  }
  return out;
}

void write_metrics_csv(const std::filesystem::path& path, const SweepReport& report) {
  std::string text = "corpus,T,variant,metric,mean_pct,std_pct,seeds,n,mean\n";
  auto row = [&](const MetricCell& c, std::string_view metric, const SeedStat& s) {
    text += fmt::format("{},{},{},{},{},{},{},{},{:.17g}\n", c.key.corpus, c.key.length, c.key.variant, metric,
                        percent(s.mean), percent(s.std), c.seeds, c.n, s.mean);
  };
  for (std::size_t i = 0; i < report.aggregates.size(); ++i) {
    const auto& c = report.aggregates[i];
    const auto& l = report.lenient_aggregates[i];
    row(c, "acc_earliest", c.earliest_stats);
    row(c, "acc_latest", c.latest_stats);
    row(c, "elag", SeedStat{c.elag, c.elag_stats.std});
    row(l, "acc_earliest_lenient", l.earliest_stats);
    row(l, "acc_latest_lenient", l.latest_stats);
  }
  write_text_atomic(path, text);
}

void write_report(const std::filesystem::path& dir, const SweepReport& report) {
  ordered_json o;
  o["schema"] = "dki-sweep-report/1";
  o["template_version"] = report.template_version;
  o["model_id"] = report.model_id;
  o["match_mode"] = std::string(to_string(report.match_mode));
  o["complete"] = report.complete;
  o["fresh_requests"] = report.fresh_requests;
  o["cells"] = ordered_json::array();
  std::vector<ProbeJudgement> all;
  std::string responses;
  for (const auto& c : report.cells) {
    ordered_json cj;
    cj["corpus"] = c.key.corpus;
    cj["T"] = c.key.length;
    cj["variant"] = c.key.variant;
    cj["seed"] = c.seed;
    cj["strict"] = metric_json(c.strict);
    cj["lenient"] = metric_json(c.lenient);
    cj["latest_histograms"] = ordered_json::array();
    for (const auto& h : c.latest_histograms) cj["latest_histograms"].push_back(histogram_json(h));
    cj["earliest_histograms"] = ordered_json::array();
    for (const auto& h : c.earliest_histograms) cj["earliest_histograms"].push_back(histogram_json(h));
    cj["swaps"] = c.swaps;
    cj["parse_failures"] = c.parse_failures;
    cj["duplicate_value_samples"] = c.duplicate_value_samples;
    cj["narrative_excluded"] = c.narrative_excluded;
    cj["errors"] = ordered_json::array();
    for (const auto& e : c.errors) cj["errors"].push_back({{"sample_id", e.sample_id}, {"message", e.message}});
    cj["judgements"] = ordered_json::array();
    for (const auto& j : c.judgements) cj["judgements"].push_back(judgement_json(j));
    o["cells"].push_back(std::move(cj));
    all.insert(all.end(), c.judgements.begin(), c.judgements.end());
    for (const auto& r : c.responses) {
      ordered_json rj;
      rj["sample_id"] = r.sample_id;
      rj["seed"] = r.seed;
      rj["key"] = r.key;
      rj["cache_hit"] = r.cache_hit;
      rj["raw_text"] = r.raw_text;
      responses += rj.dump() + "\n";
    }
  }
  o["aggregates"] = ordered_json::array();
  for (const auto& a : report.aggregates) o["aggregates"].push_back(metric_json(a));
  o["lenient_aggregates"] = ordered_json::array();
  for (const auto& a : report.lenient_aggregates) o["lenient_aggregates"].push_back(metric_json(a));

  std::filesystem::create_directories(dir);
  write_text_atomic(dir / "report.json", o.dump(1) + "\n");
  write_judgements(dir / "judgements.jsonl", all);
  write_metrics_csv(dir / "metrics.csv", report);
  if (!responses.empty()) {
    std::ofstream out(dir / "responses.jsonl", std::ios::binary | std::ios::app);
    out << responses;
  }
}

SweepReport read_report(const std::filesystem::path& report_json) {
  std::ifstream in(report_json, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open report " + report_json.string());
  auto o = nlohmann::json::parse(in, nullptr, false);
  if (o.is_discarded() || !o.is_object() || !o.contains("cells")) {
    throw Error(ErrorCode::schema, report_json.string() + " is not a sweep report");
  }
  std::vector<ProbeJudgement> judgements;
  try {
    for (const auto& c : o["cells"]) {
      for (const auto& j : c.at("judgements")) judgements.push_back(judgement_from(j));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::schema, std::string("malformed report: ") + e.what());
  }
  auto report = rebuild_report(std::move(judgements), o.value("model_id", std::string{}),
                               o.value("template_version", std::string{}));
  report.complete = o.value("complete", true);
  report.fresh_requests = o.value("fresh_requests", std::size_t{0});
  const auto mode = o.value("match_mode", std::string("strict"));
  report.match_mode = mode == "lenient" ? MatchMode::lenient : MatchMode::strict;
  return report;
}

}  // namespace dki::eval
