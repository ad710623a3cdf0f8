#include "dki/report/report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>

#include <fmt/format.h>
#include <json.hpp>

#include "dki/error.hpp"
#include "dki/prompting/prompt.hpp"
#include "dki/report/svg.hpp"

namespace dki::report {

using nlohmann::ordered_json;

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  return out;
}

void write_text(const std::filesystem::path& path, std::string_view text, ReportFiles* files = nullptr) {
  auto out = open_out(path);
  out << text;
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
  if (files) files->written.push_back(path);
}

std::string safe_name(std::string_view s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out;
}

std::size_t variant_rank(std::string_view name) {
  const auto& standard = prompt::standard_variants();
  for (std::size_t i = 0; i < standard.size(); ++i)
    if (prompt::variant_name(standard[i]) == name) return i;
  return standard.size();
}

bool variant_less(const std::string& a, const std::string& b) {
  const auto ra = variant_rank(a), rb = variant_rank(b);
  return ra != rb ? ra < rb : a < b;
}

struct GroupKey {
  std::string corpus;
  std::size_t length = 0;
  auto operator<=>(const GroupKey&) const = default;
};

std::string group_title(const GroupKey& g) {
  return g.length ? fmt::format("{} T={}", g.corpus, g.length) : g.corpus;
}

struct Grid {
  std::vector<GroupKey> groups;
  std::vector<std::string> variants;
  std::map<std::pair<GroupKey, std::string>, const eval::MetricCell*> cells;
};

Grid make_grid(std::span<const eval::MetricCell> aggregates) {
  Grid g;
  for (const auto& c : aggregates) {
    GroupKey k{c.key.corpus, c.key.length};
    if (std::find(g.groups.begin(), g.groups.end(), k) == g.groups.end()) g.groups.push_back(k);
    if (std::find(g.variants.begin(), g.variants.end(), c.key.variant) == g.variants.end())
      g.variants.push_back(c.key.variant);
    g.cells[{k, c.key.variant}] = &c;
  }
  std::sort(g.groups.begin(), g.groups.end());
  std::stable_sort(g.variants.begin(), g.variants.end(), variant_less);
  return g;
}

enum class Metric { earliest, latest, elag };

std::string cell_text(const eval::MetricCell& c, Metric m) {
  if (c.seeds > 1) {
    const auto& s = m == Metric::earliest ? c.earliest_stats : m == Metric::latest ? c.latest_stats : c.elag_stats;
    return fmt::format("{}±{}", eval::percent(s.mean), eval::percent(s.std));
  }
  if (c.n > 0 && m == Metric::earliest) return eval::percent(c.correct_earliest, c.n);
  if (c.n > 0 && m == Metric::latest) return eval::percent(c.correct_latest, c.n);
  return eval::percent(m == Metric::earliest ? c.acc_earliest : m == Metric::latest ? c.acc_latest : c.elag);
}

std::string render_rows(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  // Width in code points so "±" does not skew the columns.
  auto width = [](const std::string& s) {
    return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
  };
  std::vector<std::size_t> w(header.size(), 0);
  for (std::size_t i = 0; i < header.size(); ++i) w[i] = width(header[i]);
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size() && i < w.size(); ++i) w[i] = std::max(w[i], width(r[i]));
  auto line = [&](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto pad = std::string(w[i] - width(cells[i]), ' ');
      if (i == 0) out += cells[i] + pad;
      else out += "  " + pad + cells[i];
    }
    return out + "\n";
  };
  std::string out = line(header);
  for (const auto& r : rows) out += line(r);
  return out;
}

void write_summary_matrices(const std::filesystem::path& dir, const std::string& group, const signals::SignalSummary& s,
                            ReportFiles& files) {
  const std::pair<const char*, const signals::Matrix*> matrices[] = {
      {"layer_attention", &s.layer_attention},
      {"head_attention", &s.head_attention},
      {"hidden_similarity_by_layer", &s.hidden_similarity_by_layer},
  };
  for (const auto& [name, m] : matrices) {
    const std::string row = std::string_view(name) == "head_attention" ? "head" : "layer";
    const auto csv = dir / fmt::format("{}_{}.csv", group, name);
    write_matrix_csv(csv, *m, row, "t");
    files.written.push_back(csv);
    write_text(dir / fmt::format("{}_{}.svg", group, name),
               svg_heatmap(fmt::format("{} group: {}", group, name), row, "candidate t", *m), &files);
  }
  const auto vec = dir / fmt::format("{}_candidate_scores.csv", group);
  auto out = open_out(vec);
  out << "t,hidden_similarity_avg,logit_score,confidence_score\n";
  for (std::size_t t = 0; t < s.hidden_similarity_avg.size(); ++t)
    out << fmt::format("{},{:.17g},{:.17g},{:.17g}\n", t + 1, s.hidden_similarity_avg[t], s.logit_scores[t],
                       s.confidence_scores[t]);
  files.written.push_back(vec);
}

ordered_json matrix_json(const signals::Matrix& m) {
  auto rows = ordered_json::array();
  for (std::size_t r = 0; r < m.rows; ++r) {
    auto row = ordered_json::array();
    for (std::size_t c = 0; c < m.cols; ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string variant_label(std::string_view name) {
  static const std::map<std::string, std::string, std::less<>> labels = {
      {"baseline", "WO"},          {"cot", "CoT"},
      {"two_shot", "2-Shot"},      {"index", "Index"},
      {"rehearsal", "Rehearsal"},  {"semantic", "Semantic"},
      {"integration", "Integration"}, {"forgetting", "Forgetting"},
      {"narrative", "Narrative"},
  };
  if (const auto it = labels.find(name); it != labels.end()) return it->second;
  if (name.starts_with("rehearsal:")) return "Rehearsal(K=" + std::string(name.substr(10)) + ")";
  return std::string(name);
}

std::string render_endpoint_table(std::span<const eval::MetricCell> aggregates) {
  const auto grid = make_grid(aggregates);
  std::string out;
  for (const auto& g : grid.groups) {
    std::vector<std::string> header{group_title(g)};
    for (const auto& v : grid.variants) header.push_back(variant_label(v));
    std::vector<std::vector<std::string>> rows;
    for (auto [label, metric] : {std::pair{"Earliest", Metric::earliest}, std::pair{"Latest", Metric::latest},
                                 std::pair{"ELAG", Metric::elag}}) {
      std::vector<std::string> row{std::string("  ") + label};
      for (const auto& v : grid.variants) {
        const auto it = grid.cells.find({g, v});
        row.push_back(it == grid.cells.end() ? "-" : cell_text(*it->second, metric));
      }
      rows.push_back(std::move(row));
    }
    if (!out.empty()) out += "\n";
    out += render_rows(header, rows);
  }
  return out;
}

std::string render_seed_table(std::span<const eval::MetricCell> aggregates, eval::Endpoint endpoint) {
  const auto grid = make_grid(aggregates);
  const auto metric = endpoint == eval::Endpoint::earliest ? Metric::earliest : Metric::latest;
  std::vector<std::string> header{endpoint == eval::Endpoint::earliest ? "Earliest" : "Latest"};
  for (const auto& v : grid.variants) header.push_back(variant_label(v));
  std::vector<std::vector<std::string>> rows;
  for (const auto& g : grid.groups) {
    std::vector<std::string> row{group_title(g)};
    for (const auto& v : grid.variants) {
      const auto it = grid.cells.find({g, v});
      row.push_back(it == grid.cells.end() ? "-" : cell_text(*it->second, metric));
    }
    rows.push_back(std::move(row));
  }
  return render_rows(header, rows);
}

void write_elag_series_csv(const std::filesystem::path& path, std::span<const eval::MetricCell> aggregates) {
  std::vector<const eval::MetricCell*> sorted;
  for (const auto& c : aggregates) sorted.push_back(&c);
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
    if (a->key.variant != b->key.variant) return variant_less(a->key.variant, b->key.variant);
    if (a->key.corpus != b->key.corpus) return a->key.corpus < b->key.corpus;
    return a->key.length < b->key.length;
  });
  auto out = open_out(path);
  out << "variant,corpus,T,seeds,acc_earliest,acc_latest,elag\n";
  for (const auto* c : sorted) {
    const bool multi = c->seeds > 1;
    out << fmt::format("{},{},{},{},{:.17g},{:.17g},{:.17g}\n", c->key.variant, c->key.corpus, c->key.length, c->seeds,
                       multi ? c->earliest_stats.mean : c->acc_earliest, multi ? c->latest_stats.mean : c->acc_latest,
                       multi ? c->elag_stats.mean : c->elag);
  }
}

void write_histogram_csv(const std::filesystem::path& path, std::span<const eval::SweepCell> cells) {
  auto out = open_out(path);
  out << "corpus,T,variant,seed,endpoint,position,count\n";
  for (const auto& cell : cells) {
    for (auto [name, hists] : {std::pair{"earliest", &cell.earliest_histograms}, std::pair{"latest", &cell.latest_histograms}})
      for (const auto& h : *hists) {
        const auto prefix = fmt::format("{},{},{},{},{}", cell.key.corpus, h.length, cell.key.variant, cell.seed, name);
        for (std::size_t t = 0; t < h.counts.size(); ++t) out << fmt::format("{},{},{}\n", prefix, t + 1, h.counts[t]);
        out << fmt::format("{},OOF,{}\n", prefix, h.oof);
        out << fmt::format("{},PARSE_FAIL,{}\n", prefix, h.parse_fail);
      }
  }
}

void write_matrix_csv(const std::filesystem::path& path, const signals::Matrix& matrix, std::string_view row_prefix,
                      std::string_view col_prefix) {
  auto out = open_out(path);
  out << row_prefix;
  for (std::size_t c = 0; c < matrix.cols; ++c) out << fmt::format(",{}{}", col_prefix, c + 1);
  out << "\n";
  for (std::size_t r = 0; r < matrix.rows; ++r) {
    out << r + 1;
    for (std::size_t c = 0; c < matrix.cols; ++c) out << fmt::format(",{:.17g}", matrix(r, c));
    out << "\n";
  }
}

ReportFiles write_sweep_report(const std::filesystem::path& dir, const eval::SweepReport& report) {
  std::filesystem::create_directories(dir);
  ReportFiles files;

  std::string tables = fmt::format("model: {}\ntemplates: {}\nmatch: {}\n\n", report.model_id, report.template_version,
                                   report.match_mode == eval::MatchMode::strict ? "strict" : "lenient");
  tables += render_endpoint_table(report.aggregates);
  tables += "\n";
  tables += render_seed_table(report.aggregates, eval::Endpoint::latest);
  if (!report.complete) tables += "\nINCOMPLETE: the run stopped at its request budget.\n";
  write_text(dir / "tables.txt", tables, &files);

  write_elag_series_csv(dir / "elag_series.csv", report.aggregates);
  files.written.push_back(dir / "elag_series.csv");
  write_histogram_csv(dir / "histograms.csv", report.cells);
  files.written.push_back(dir / "histograms.csv");

  // Accuracy and ELAG against T, one series per (corpus, variant).
  std::map<std::pair<std::string, std::string>, std::vector<const eval::MetricCell*>> by_series;
  for (const auto& c : report.aggregates)
    if (c.key.length > 0) by_series[{c.key.corpus, c.key.variant}].push_back(&c);
  if (by_series.empty()) {
    files.notes.push_back("no per-T cells; accuracy and ELAG plots omitted");
  } else {
    std::vector<std::pair<std::pair<std::string, std::string>, std::vector<const eval::MetricCell*>>> ordered(
        by_series.begin(), by_series.end());
    std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
      return a.first.first != b.first.first ? a.first.first < b.first.first : variant_less(a.first.second, b.first.second);
    });
    const bool many_corpora = ordered.front().first.first != ordered.back().first.first;
    std::vector<Series> acc, gap;
    for (auto& [key, cells] : ordered) {
      std::sort(cells.begin(), cells.end(), [](const auto* a, const auto* b) { return a->key.length < b->key.length; });
      const auto name = many_corpora ? key.first + " " + variant_label(key.second) : variant_label(key.second);
      Series e{name + " earliest", {}, {}}, l{name + " latest", {}, {}}, d{name, {}, {}};
      for (const auto* c : cells) {
        const double x = static_cast<double>(c->key.length);
        const bool multi = c->seeds > 1;
        e.x.push_back(x), l.x.push_back(x), d.x.push_back(x);
        e.y.push_back(multi ? c->earliest_stats.mean : c->acc_earliest);
        l.y.push_back(multi ? c->latest_stats.mean : c->acc_latest);
        d.y.push_back(multi ? c->elag_stats.mean : c->elag);
      }
      acc.push_back(std::move(e));
      acc.push_back(std::move(l));
      gap.push_back(std::move(d));
    }
    write_text(dir / "accuracy.svg", svg_line_plot("Endpoint accuracy", "updates T", "accuracy", acc, true), &files);
    write_text(dir / "elag.svg", svg_line_plot("ELAG vs updates", "updates T", "ELAG", gap, true), &files);
  }

  // Latest-position histograms summed over seeds.
  std::map<std::tuple<std::string, std::size_t, std::string>, eval::PositionHistogram> summed;
  for (const auto& cell : report.cells)
    for (const auto& h : cell.latest_histograms) {
      auto& s = summed[{cell.key.corpus, h.length, cell.key.variant}];
      if (s.counts.empty()) s.length = h.length, s.counts.assign(h.counts.size(), 0);
      for (std::size_t t = 0; t < h.counts.size() && t < s.counts.size(); ++t) s.counts[t] += h.counts[t];
      s.oof += h.oof;
      s.parse_fail += h.parse_fail;
    }
  for (const auto& [key, h] : summed) {
    const auto& [corpus, length, variant] = key;
    std::vector<std::string> labels;
    std::vector<double> values;
    for (std::size_t t = 0; t < h.counts.size(); ++t) {
      labels.push_back(std::to_string(t + 1));
      values.push_back(static_cast<double>(h.counts[t]));
    }
    labels.push_back("OOF");
    values.push_back(static_cast<double>(h.oof));
    labels.push_back("PARSE_FAIL");
    values.push_back(static_cast<double>(h.parse_fail));
    write_text(dir / fmt::format("histogram_{}_T{}_{}.svg", safe_name(corpus), length, safe_name(variant)),
               svg_bar_chart(fmt::format("Latest-answer positions: {} T={} {}", corpus, length, variant_label(variant)),
                             "candidate position", labels, values),
               &files);
  }

  if (!files.notes.empty()) {
    std::string notes;
    for (const auto& n : files.notes) notes += n + "\n";
    write_text(dir / "notes.txt", notes, &files);
  }
  return files;
}

std::string summary_to_json(const signals::SignalSummary& s) {
  ordered_json j;
  j["sample_id"] = s.sample_id;
  j["layer_attention"] = matrix_json(s.layer_attention);
  j["head_attention"] = matrix_json(s.head_attention);
  j["hidden_similarity_by_layer"] = matrix_json(s.hidden_similarity_by_layer);
  j["hidden_similarity_avg"] = s.hidden_similarity_avg;
  j["logit_scores"] = s.logit_scores;
  j["confidence_scores"] = s.confidence_scores;
  return j.dump();
}

ReportFiles write_analysis_report(const std::filesystem::path& dir, const AnalysisInput& input) {
  std::filesystem::create_directories(dir);
  ReportFiles files;

  {
    auto out = open_out(dir / "summaries.jsonl");
    for (const auto& s : input.summaries) out << summary_to_json(s) << "\n";
    files.written.push_back(dir / "summaries.jsonl");
  }

  {
    auto out = open_out(dir / "match_rate.csv");
    out << "layer,rate,ties\n";
    const auto& mr = input.match_rate;
    for (std::size_t l = 0; l < mr.rate.size(); ++l)
      out << fmt::format("{},{},{}\n", l + 1, std::isnan(mr.rate[l]) ? std::string("undefined") : fmt::format("{:.17g}", mr.rate[l]),
                         mr.ties[l]);
    files.written.push_back(dir / "match_rate.csv");
  }

  const std::pair<const char*, const std::optional<signals::SignalSummary>*> groups[] = {
      {"correct", &input.groups.correct}, {"wrong", &input.groups.wrong}};
  for (const auto& [name, summary] : groups) {
    if (*summary) write_summary_matrices(dir, name, **summary, files);
    else files.notes.push_back(fmt::format("{} group has no samples; its heatmaps are omitted", name));
  }
  if (!input.match_rate.defined())
    files.notes.push_back(fmt::format("match rate undefined: no sample has an in-trajectory prediction "
                                      "({} OOF, {} parse failures)",
                                      input.match_rate.excluded_oof, input.match_rate.excluded_parse_fail));

  ordered_json g;
  g["samples"] = input.summaries.size();
  g["correct_count"] = input.groups.correct_count;
  g["wrong_count"] = input.groups.wrong_count;
  g["excluded_parse_fail"] = input.groups.excluded;
  auto rates = ordered_json::array();
  for (double r : input.match_rate.rate) rates.push_back(std::isnan(r) ? ordered_json(nullptr) : ordered_json(r));
  g["match_rate"] = {{"rate", rates},
                     {"ties", input.match_rate.ties},
                     {"included", input.match_rate.included},
                     {"excluded_oof", input.match_rate.excluded_oof},
                     {"excluded_parse_fail", input.match_rate.excluded_parse_fail}};
  auto invalid = ordered_json::array();
  for (const auto& r : input.invalid) {
    auto failed = ordered_json::array();
    for (const auto& c : r.checks)
      if (!c.passed) failed.push_back({{"check", c.name}, {"details", c.details}});
    invalid.push_back({{"sample_id", r.sample_id}, {"failed", failed}});
  }
  g["invalid_traces"] = std::move(invalid);
  g["notes"] = files.notes;
  write_text(dir / "groups.json", g.dump(2) + "\n", &files);

  if (!files.notes.empty()) {
    std::string notes;
    for (const auto& n : files.notes) notes += n + "\n";
    write_text(dir / "notes.txt", notes, &files);
  }
  return files;
}

}  // namespace dki::report
