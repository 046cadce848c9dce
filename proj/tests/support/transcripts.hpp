#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "clinkg/fixture_backend.hpp"
#include "clinkg/gateway.hpp"
#include "support.hpp"

namespace testsupport {

struct TranscriptResult {
  std::string id;
  clinkg::ParseOutcome expected_outcome;
  std::vector<std::string> expected_entities;
  clinkg::ParseOutcome outcome;
  std::vector<std::string> entities;

  bool ok() const { return outcome == expected_outcome && entities == expected_entities; }
};

/// Replays one recorded transcript through a fixture backend and the normal
/// query path.
inline TranscriptResult replay_transcript(const nlohmann::json& c) {
  using namespace clinkg;
  const auto kind = parse_backend_kind(c.at("backend").get<std::string>()).value();
  nlohmann::json response;
  if (kind == BackendKind::ExtractiveQa) response["answers"] = c.at("spans");
  else response["text"] = c.at("raw");
  FixtureBackend backend(nlohmann::json{{"name", "transcript"},
                                        {"kind", c.at("backend")},
                                        {"default", response}});

  PromptOptions options;
  options.style = parse_prompt_style(c.at("style").get<std::string>()).value();
  options.exemplars = {{"What treats x?", "x is treated with y.", "y"}};
  const auto category = parse_category(c.at("category").get<std::string>()).value();
  const std::string question = c.value("question", std::string("What treats armd?"));
  const std::string context = c.value("context", std::string("Dry ARMD OU."));
  auto prompt = build_prompt(options, question, context, category);

  const auto record = query(backend, prompt);
  TranscriptResult r;
  r.id = c.at("id").get<std::string>();
  r.expected_outcome = parse_outcome(c.at("expect").at("outcome").get<std::string>()).value();
  r.expected_entities = c.at("expect").at("entities").get<std::vector<std::string>>();
  r.outcome = record.parsed.outcome;
  for (const auto& a : record.parsed.answers) r.entities.push_back(a.text);
  return r;
}

inline std::vector<TranscriptResult> replay_all_transcripts() {
  const auto cases = nlohmann::json::parse(slurp(data_path("transcripts/cases.json")));
  std::vector<TranscriptResult> out;
  for (const auto& c : cases) out.push_back(replay_transcript(c));
  return out;
}

}  // namespace testsupport
