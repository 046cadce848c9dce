#pragma once

#include <json.hpp>

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "clinkg/gateway.hpp"

namespace clinkg {

/// Scripted backend driven by a JSON document:
///
///   {"name": "fixture", "kind": "generative" | "extractive_qa",
///    "by_hash":    {"<prompt id>": RESPONSE, ...},
///    "by_ordinal": [RESPONSE, ...],
///    "rules":      [{"match": {"note_id", "category", "question_id",
///                              "disease", "style", "contains"}, "response": RESPONSE}],
///    "default":    RESPONSE}
///
///   RESPONSE = {"text": str, "token_logprobs": [num], "answers": [{"text", "score"}],
///               "fail": "timeout" | "fatal", "fail_times": int}
///
/// Lookup order is by_hash, by_ordinal (call count), the first matching rule,
/// then default. With "fail" set the call throws; "fail_times" limits that to
/// the first N calls per prompt, after which the response is served.
class FixtureBackend final : public ModelBackend {
 public:
  explicit FixtureBackend(const nlohmann::json& script);
  static FixtureBackend from_file(const std::string& path);

  std::string name() const override { return name_; }
  BackendKind kind() const override { return kind_; }
  BackendReply call(const Prompt& prompt) override;

  std::size_t calls() const;

 private:
  struct Response {
    std::string text;
    std::optional<std::vector<double>> token_logprobs;
    std::vector<Answer> answers;
    std::string fail;
    std::optional<int> fail_times;
  };
  struct Rule {
    std::map<std::string, std::string> match;
    std::size_t response;
  };

  std::size_t add_response(const nlohmann::json& spec);
  std::optional<std::size_t> resolve(const Prompt& prompt, std::size_t ordinal) const;

  std::string name_;
  BackendKind kind_ = BackendKind::Generative;
  std::vector<Response> responses_;
  std::map<std::string, std::size_t> by_hash_;
  std::vector<std::size_t> by_ordinal_;
  std::vector<Rule> rules_;
  std::optional<std::size_t> default_;

  mutable std::mutex mutex_;
  std::size_t calls_ = 0;
  std::map<std::pair<std::size_t, std::string>, int> failures_served_;
};

}  // namespace clinkg
