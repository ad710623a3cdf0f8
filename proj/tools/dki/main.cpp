#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "commands.hpp"
#include "dki/client/mock.hpp"
#include "dki/error.hpp"
#include "dki/log.hpp"

namespace {

using dki::cli::RunConfig;

// Flag values land here first and override the config file afterwards.
struct Overrides {
  std::string config_file;
  std::vector<std::size_t> lengths;
  std::optional<std::size_t> count;
  std::vector<std::uint64_t> seeds;
  std::string word_list;
  std::optional<std::size_t> word_length;
  std::string corpus;
  std::vector<std::string> variants;
  std::string endpoint_file;
  std::string mock;
  std::optional<std::uint64_t> mock_seed;
  std::string match;
  bool include_flagged = false;
  std::optional<std::size_t> budget;
  std::string cache;
  std::string template_version;
  std::string out;
  std::string judgements;
  std::string manifest;
  std::vector<std::string> traces;
  bool verbose = false;
};

RunConfig resolve(const Overrides& o) {
  RunConfig c;
  if (!o.config_file.empty()) dki::cli::apply_config_file(c, o.config_file);
  if (!o.lengths.empty()) c.lengths = o.lengths;
  if (o.count) c.count = *o.count;
  if (!o.seeds.empty()) c.seeds = o.seeds;
  if (!o.word_list.empty()) c.word_list = o.word_list;
  if (o.word_length) c.word_length = *o.word_length;
  if (!o.corpus.empty()) c.corpus = o.corpus;
  if (!o.variants.empty()) c.variants = o.variants;
  if (!o.endpoint_file.empty()) c.endpoint = dki::client::load_endpoint_config(o.endpoint_file);
  if (!o.mock.empty()) c.endpoint = dki::client::mock_endpoint(o.mock, o.mock_seed.value_or(0));
  else if (o.mock_seed) c.endpoint.mock_seed = *o.mock_seed;
  if (o.match == "lenient") c.match = dki::eval::MatchMode::lenient;
  else if (o.match == "strict") c.match = dki::eval::MatchMode::strict;
  if (o.include_flagged) c.include_flagged_narratives = true;
  if (o.budget) c.request_budget = *o.budget;
  if (!o.cache.empty()) c.cache_dir = o.cache;
  if (!o.template_version.empty()) c.template_version = o.template_version;
  if (!o.out.empty()) c.out = o.out;
  if (!o.judgements.empty()) c.judgements = o.judgements;
  if (!o.manifest.empty()) c.manifest = o.manifest;
  for (const auto& t : o.traces) c.traces.emplace_back(t);
  return c;
}

void corpus_options(CLI::App* app, Overrides& o) {
  app->add_option("-T,--lengths", o.lengths, "update counts T")->delimiter(',');
  app->add_option("-n,--count", o.count, "trajectories per corpus");
  app->add_option("-s,--seeds", o.seeds, "seeds")->delimiter(',');
  app->add_option("--word-list", o.word_list, "word pool file, one word per line");
  app->add_option("--word-length", o.word_length, "word length filter");
  app->add_option("--corpus", o.corpus, "real-world or narrative JSONL corpus instead of synthetic");
  app->add_option("--variants", o.variants, "prompt variants, e.g. baseline,cot,rehearsal:5 or all")->delimiter(',');
  app->add_option("--template-version", o.template_version, "fail unless templates match this version");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic knowledge instance probing toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;
  std::string input;
  std::string bundle;
  bool as_json = false;
  app.add_option("-c,--config", o.config_file, "JSON run configuration");
  app.add_option("-o,--out", o.out, "output directory");
  app.add_flag("-v,--verbose", o.verbose, "debug logging");

  auto* generate = app.add_subcommand("generate", "write synthetic corpora, one file per T and seed");
  corpus_options(generate, o);

  auto* probe = app.add_subcommand("probe", "render prompts, query the endpoint, judge answers");
  corpus_options(probe, o);
  probe->add_option("--endpoint", o.endpoint_file, "endpoint config JSON");
  probe->add_option("--mock", o.mock, "mock responder: perfect, primacy_biased, recency_window(w), oof_prone(r), unknown_always");
  probe->add_option("--mock-seed", o.mock_seed, "mock responder seed");
  probe->add_option("--match", o.match, "strict or lenient")->check(CLI::IsMember({"strict", "lenient"}));
  probe->add_flag("--include-flagged-narratives", o.include_flagged, "score narratives failing the verbatim check");
  probe->add_option("--request-budget", o.budget, "stop after this many uncached requests");
  probe->add_option("--cache", o.cache, "response cache directory (default <out>/cache)");

  auto* report = app.add_subcommand("report", "tables, series and plots from judgements");
  report->add_option("input", input, "probe output dir, report.json or judgements .jsonl")->required();

  auto* analyze = app.add_subcommand("analyze", "signal summaries and group heatmaps from traces");
  analyze->add_option("--manifest", o.manifest, "trace manifest");
  analyze->add_option("--trace", o.traces, "trace file (repeatable)");
  analyze->add_option("--judgements", o.judgements, "judgements .jsonl");

  auto* export_prompts = app.add_subcommand("export-prompts", "write the prompt bundle read by the extractor");
  corpus_options(export_prompts, o);
  export_prompts->add_option("--bundle", bundle, "bundle path (default <out>/prompts.jsonl)");

  auto* validate = app.add_subcommand("validate-traces", "check trace files against the format invariants");
  validate->add_option("--manifest", o.manifest, "trace manifest");
  validate->add_option("--trace", o.traces, "trace file (repeatable)");
  validate->add_flag("--json", as_json, "machine-readable report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : dki::cli::kConfig;
  }
  if (o.verbose) dki::log::set_level(dki::log::Level::debug);

  try {
    const auto config = resolve(o);
    if (generate->parsed()) return dki::cli::cmd_generate(config, std::cout);
    if (probe->parsed()) return dki::cli::cmd_probe(config, std::cout);
    if (report->parsed()) return dki::cli::cmd_report(config, input, std::cout);
    if (analyze->parsed()) return dki::cli::cmd_analyze(config, std::cout);
    if (export_prompts->parsed()) return dki::cli::cmd_export_prompts(config, bundle, std::cout);
    if (validate->parsed()) return dki::cli::cmd_validate_traces(config, as_json, std::cout);
  } catch (const dki::Error& e) {
    std::cerr << "error (" << dki::to_string(e.code()) << "): " << e.what() << "\n";
    return dki::cli::exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error (io): " << e.what() << "\n";
    return dki::cli::kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return dki::cli::kInternal;
  }
  return dki::cli::kInternal;
}
