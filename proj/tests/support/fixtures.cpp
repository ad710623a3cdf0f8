#include "fixtures.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace dki::testing {

DkiTrajectory italy() {
  DkiTrajectory t;
  t.id = "rw-italy";
  t.cue = "President of Italy";
  t.values = {"Alcide De Gasperi", "Enrico de Nicola",     "Luigi Einaudi",       "Giovanni Gronchi",
              "Antonio Segni",     "Giuseppe Saragat",     "Giovanni Leone",      "Sandro Pertini",
              "Francesco Cossiga", "Oscar Luigi Scalfaro", "Carlo Azeglio Ciampi", "Giorgio Napolitano",
              "Sergio Mattarella"};
  t.source = Source::real_world;
  return t;
}

std::vector<eval::ProbeJudgement> endpoint_judgements(std::size_t n, std::size_t earliest, std::size_t latest,
                                                      const std::string& variant, std::uint64_t seed) {
  std::vector<eval::ProbeJudgement> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& j = out[i];
    j.trajectory_id = fmt::format("rw-{:04d}", i);
    j.variant = *prompt::parse_variant(variant);
    j.sample_id = eval::sample_id(j.trajectory_id, j.variant);
    j.corpus = "real_world";
    j.length = 2;
    j.seed = seed;
    j.answer_status = prompt::AnswerStatus::ok;
    j.earliest_correct = j.earliest_correct_lenient = i < earliest;
    j.latest_correct = j.latest_correct_lenient = i < latest;
    j.earliest_pos = {eval::PositionKind::candidate, {j.earliest_correct ? 1u : 2u}};
    j.latest_pos = {eval::PositionKind::candidate, {j.latest_correct ? 2u : 1u}};
  }
  return out;
}

std::vector<DkiTrajectory> real_world_length_fixture() {
  std::vector<std::size_t> lengths{70, 2};
  lengths.insert(lengths.end(), 70, 9);
  lengths.insert(lengths.end(), 92, 8);
  std::vector<DkiTrajectory> out;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    DkiTrajectory t;
    t.id = fmt::format("rw-{:04d}", i);
    t.cue = fmt::format("cue {}", i);
    for (std::size_t k = 0; k < lengths[i]; ++k) t.values.push_back(fmt::format("value {}.{}", i, k));
    t.source = Source::real_world;
    out.push_back(std::move(t));
  }
  return out;
}

std::string data_path(const std::string& name) { return std::string(DKI_TEST_DATA_DIR) + "/" + name; }

::testing::AssertionResult matches_snapshot(const std::string& name, const std::string& text) {
  const std::string path = std::string(DKI_TEST_SNAPSHOT_DIR) + "/" + name;
  if (std::getenv("DKI_UPDATE_SNAPSHOTS") != nullptr) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) return ::testing::AssertionFailure() << "cannot write snapshot " << path;
    return ::testing::AssertionSuccess();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) return ::testing::AssertionFailure() << "snapshot " << path << " missing; rerun with DKI_UPDATE_SNAPSHOTS=1";
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string expected = buf.str();
  if (expected == text) return ::testing::AssertionSuccess();
  std::size_t at = 0;
  while (at < expected.size() && at < text.size() && expected[at] == text[at]) ++at;
  return ::testing::AssertionFailure() << "snapshot " << name << " differs at byte " << at << "\nexpected: "
                                       << expected.substr(at, 80) << "\nactual:   " << text.substr(at, 80);
}

}  // namespace dki::testing
