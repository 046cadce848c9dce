// One line per acceptance criterion; exit status 1 if any fails.

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "aggregation_oracle.hpp"
#include "clinkg/config.hpp"
#include "clinkg/evaluation.hpp"
#include "clinkg/extraction.hpp"
#include "clinkg/fixture_backend.hpp"
#include "clinkg/pipeline.hpp"
#include "clinkg/postprocess.hpp"
#include "dedup_property.hpp"
#include "eval_fixture.hpp"
#include "postprocess_trace.hpp"
#include "support.hpp"
#include "transcripts.hpp"

using namespace clinkg;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

/// Empty string on success, otherwise why the criterion failed.
using Check = std::function<std::string()>;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string postprocess_trace() {
  const auto start = Clock::now();
  const auto out = testsupport::sorted_by_text(
      postprocess_predictions(testsupport::worked_example_raw(), testsupport::worked_example_provider()));
  const double elapsed = seconds_since(start);
  const auto want = testsupport::worked_example_expected();
  if (out.size() != want.size()) return "got " + std::to_string(out.size()) + " values, want 4";
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].text != want[i].text) return "unexpected value \"" + out[i].text + "\"";
    if (std::abs(out[i].score - want[i].score) > 1e-9) return "score of \"" + out[i].text + "\" off";
  }
  if (elapsed >= 1.0) return "took " + std::to_string(elapsed) + " s";
  return {};
}

std::string transcripts() {
  std::size_t total = 0;
  std::ostringstream bad;
  for (const auto& r : testsupport::replay_all_transcripts()) {
    ++total;
    if (!r.ok()) bad << " " << r.id << "=" << to_string(r.outcome);
  }
  if (total == 0) return "no transcripts";
  if (!bad.str().empty()) return "disagreements:" + bad.str();
  return {};
}

std::string aggregation_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1000);
  std::size_t boundary_hits = 0;
  for (int round = 0; round < 1000; ++round) {
    const auto preds = testsupport::random_predictions(rng, 200);
    const auto got = testsupport::as_oracle_edges(aggregate_relations(preds));
    const auto want = testsupport::naive_aggregate(preds, 10, 0.1);
    if (got != want) return "fixture " + std::to_string(round) + " differs from the oracle";
    for (const auto& e : want) boundary_hits += (e.count == 10 || e.avg == 0.1);
  }
  const double elapsed = seconds_since(start);
  if (boundary_hits == 0) return "no fixture reached the count or average boundary";
  if (elapsed >= 10.0) return "took " + std::to_string(elapsed) + " s";
  return {};
}

std::string query_loop() {
  for (std::size_t n : {0u, 1u, 2u, 7u}) {
    std::vector<ClinicalNote> notes;
    for (std::size_t i = 0; i < n; ++i) notes.emplace_back("n" + std::to_string(i), "Dry ARMD OU note " + std::to_string(i));
    FixtureBackend backend(json{{"default", {{"text", "treat: AREDS vitamins"}}}});
    const auto run = run_queries({"armd"}, {{"armd", notes}}, backend);
    if (run.records.size() != n * 15) {
      return "N=" + std::to_string(n) + " gave " + std::to_string(run.records.size()) + " records";
    }
  }
  return {};
}

std::string dedup_property() {
  std::mt19937_64 rng(635);
  const TrigramProvider sim;
  for (int round = 0; round < 50; ++round) {
    const auto corpus = testsupport::random_corpus(rng, 100);
    if (auto why = testsupport::check_dedup_properties(corpus, sim); !why.empty()) {
      return "corpus " + std::to_string(round) + ": " + why;
    }
  }
  return {};
}

std::string config_defaults() {
  auto check = [](const PipelineConfig& cfg) -> std::string {
    if (cfg.threshold_preprocessing != 0.8) return "threshold_preprocessing";
    if (cfg.threshold_notes_identification != 0.8) return "threshold_notes_identification";
    if (cfg.relation_occurrence_number != 10) return "relation_occurrence_number";
    if (cfg.relation_probability != 0.1) return "relation_probability";
    if (cfg.postprocess_min_score != 0.08) return "postprocess_min_score";
    if (cfg.grouping_similarity != 0.8) return "grouping_similarity";
    return {};
  };
  if (auto why = check(PipelineConfig{}); !why.empty()) return why;
  if (auto why = check(parse_config("{}")); !why.empty()) return "parsed " + why;
  if (AggregationOptions{}.min_count != 10 || AggregationOptions{}.min_avg_score != 0.1) return "aggregation defaults";
  if (PostprocessOptions{}.min_score != 0.08 || PostprocessOptions{}.grouping_threshold != 0.8) {
    return "postprocess defaults";
  }
  if (PreprocessOptions{}.threshold != 0.8) return "preprocess default";
  return {};
}

std::string guided_goldens() {
  const auto cases = json::parse(testsupport::slurp(testsupport::data_path("golden/guided_cases.json")));
  if (cases.size() != 3) return "expected three golden cases";
  for (const auto& c : cases) {
    const auto category = category_from_question_type(c.at("question_type").get<std::string>());
    if (!category) return "bad question_type";
    const auto prompt = build_prompt(PromptOptions{}, c.at("question").get<std::string>(),
                                     c.at("context").get<std::string>(), *category);
    const auto golden = testsupport::slurp(testsupport::data_path("golden/" + c.at("golden").get<std::string>()));
    if (prompt.text != golden) return c.at("golden").get<std::string>() + " differs";
    if (!prompt.text.starts_with("You are a helpful medical knowledge extractor assistant.")) return "preamble missing";
  }
  return {};
}

std::string end_to_end() {
  testsupport::TempDir dir;
  Runtime rt(load_config(testsupport::data_path("e2e/config.json")));
  rt.set_sleep([](std::chrono::milliseconds) {});
  StageRequest req;
  req.in = testsupport::data_path("e2e/notes.jsonl");
  req.out = dir.path().string();
  req.gold = testsupport::data_path("e2e/gold.json");
  const auto m = run_pipeline(rt, req);
  if (m.status != StageManifest::Status::Ok) return "pipeline status " + std::string(to_string(m.status));
  if (testsupport::slurp(dir / "kg.json") != testsupport::slurp(testsupport::data_path("e2e/expected_kg.json"))) {
    return "kg.json differs from the traced graph";
  }
  const auto report = json::parse(testsupport::slurp(dir / "report.json"));
  std::size_t rows = 0;
  for (const auto& row : report.at("metrics").at("rows")) {
    ++rows;
    if (row.at("precision") != 1.0 || row.at("recall") != 1.0) {
      return "P/R below 1 for " + row.at("category").get<std::string>();
    }
  }
  if (rows != 3) return "expected three category rows";
  return {};
}

std::string evaluation_arithmetic() {
  const auto report =
      precision_recall(testsupport::three_entity_graph(), testsupport::three_entity_gold(), TrigramProvider{});
  const auto& row = report.rows.at(0);
  if (row.precision != 2.0 / 3.0 || row.recall != 2.0 / 3.0) return "P/R not 2/3";
  const auto safety = safety_metrics(testsupport::ten_records());
  const auto& s = safety.backends.at(0);
  if (s.total_queries != 10 || s.answers != 6 || s.dont_know != 3 || s.unstructured != 1) return "safety counts";
  if (s.dontknow_rate != 0.3 || s.unstructured_rate != 0.1) return "safety rates";
  return {};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, Check>> criteria = {
      {"postprocess worked example", postprocess_trace},
      {"transcript classification", transcripts},
      {"aggregation oracle", aggregation_oracle},
      {"query loop arithmetic", query_loop},
      {"dedup property", dedup_property},
      {"config defaults", config_defaults},
      {"guided prompt goldens", guided_goldens},
      {"end-to-end fixture pipeline", end_to_end},
      {"evaluation arithmetic", evaluation_arithmetic},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    std::string why;
    try {
      why = check();
    } catch (const std::exception& e) {
      why = std::string("exception: ") + e.what();
    }
    if (why.empty()) {
      std::cout << "PASS " << name << "\n";
    } else {
      ++failed;
      std::cout << "FAIL " << name << ": " << why << "\n";
    }
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
