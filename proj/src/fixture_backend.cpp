#include "clinkg/fixture_backend.hpp"

#include "clinkg/errors.hpp"
#include "clinkg/text.hpp"

namespace clinkg {

using nlohmann::json;

FixtureBackend::FixtureBackend(const json& script) {
  if (!script.is_object()) throw InputError("<fixture>", 0, "fixture script must be a JSON object");
  name_ = script.value("name", std::string("fixture"));
  const auto kind = parse_backend_kind(script.value("kind", std::string("generative")));
  if (!kind) throw InputError("<fixture>", 0, "unknown backend kind " + script.value("kind", std::string()));
  kind_ = *kind;

  if (script.contains("by_hash")) {
    for (const auto& [hash, spec] : script.at("by_hash").items()) by_hash_[hash] = add_response(spec);
  }
  if (script.contains("by_ordinal")) {
    for (const auto& spec : script.at("by_ordinal")) by_ordinal_.push_back(add_response(spec));
  }
  if (script.contains("rules")) {
    for (const auto& rule : script.at("rules")) {
      Rule r;
      for (const auto& [key, value] : rule.at("match").items()) r.match[key] = value.get<std::string>();
      r.response = add_response(rule.at("response"));
      rules_.push_back(std::move(r));
    }
  }
  if (script.contains("default")) default_ = add_response(script.at("default"));
}

FixtureBackend FixtureBackend::from_file(const std::string& path) {
  try {
    return FixtureBackend(json::parse(text::read_file(path)));
  } catch (const json::exception& e) {
    throw InputError(path, 0, std::string("malformed fixture script: ") + e.what());
  }
}

std::size_t FixtureBackend::add_response(const json& spec) {
  Response r;
  r.text = spec.value("text", std::string());
  if (spec.contains("token_logprobs")) r.token_logprobs = spec.at("token_logprobs").get<std::vector<double>>();
  if (spec.contains("answers")) {
    for (const auto& a : spec.at("answers")) {
      r.answers.push_back({a.at("text").get<std::string>(), a.at("score").get<double>()});
    }
  }
  r.fail = spec.value("fail", std::string());
  if (!r.fail.empty() && r.fail != "timeout" && r.fail != "fatal") {
    throw InputError("<fixture>", 0, "fail must be \"timeout\" or \"fatal\"");
  }
  if (spec.contains("fail_times")) r.fail_times = spec.at("fail_times").get<int>();
  responses_.push_back(std::move(r));
  return responses_.size() - 1;
}

std::optional<std::size_t> FixtureBackend::resolve(const Prompt& prompt, std::size_t ordinal) const {
  if (const auto it = by_hash_.find(prompt.id()); it != by_hash_.end()) return it->second;
  if (ordinal < by_ordinal_.size()) return by_ordinal_[ordinal];
  for (const auto& rule : rules_) {
    bool ok = true;
    for (const auto& [key, want] : rule.match) {
      if (key == "note_id") ok = prompt.note_id == want;
      else if (key == "disease") ok = prompt.disease == want;
      else if (key == "question_id") ok = prompt.question_id == want;
      else if (key == "category") ok = parse_category(want) == prompt.category;
      else if (key == "style") ok = parse_prompt_style(want) == prompt.style;
      else if (key == "contains") ok = prompt.text.find(want) != std::string::npos;
      else ok = false;
      if (!ok) break;
    }
    if (ok) return rule.response;
  }
  return default_;
}

BackendReply FixtureBackend::call(const Prompt& prompt) {
  std::unique_lock lock(mutex_);
  const std::size_t ordinal = calls_++;
  const auto index = resolve(prompt, ordinal);
  if (!index) throw BackendError(name_, prompt.id(), "no scripted response for prompt");
  const Response& r = responses_[*index];

  if (!r.fail.empty()) {
    int& served = failures_served_[{*index, prompt.id()}];
    if (!r.fail_times || served < *r.fail_times) {
      ++served;
      if (r.fail == "fatal") throw BackendError(name_, prompt.id(), "scripted fatal failure");
      throw TransportError(name_ + ": scripted timeout");
    }
  }

  BackendReply reply;
  if (kind_ == BackendKind::ExtractiveQa) {
    json answers = json::array();
    for (const auto& a : r.answers) answers.push_back({{"text", a.text}, {"score", a.score}});
    reply.raw = json{{"answers", answers}}.dump();
    reply.spans = r.answers;
  } else {
    reply.raw = r.text;
    reply.token_logprobs = r.token_logprobs;
  }
  return reply;
}

std::size_t FixtureBackend::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

}  // namespace clinkg
