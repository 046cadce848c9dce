#include "clinkg/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "clinkg/errors.hpp"
#include "clinkg/text.hpp"

namespace clinkg {

std::string_view to_string(BackendKind kind) {
  return kind == BackendKind::ExtractiveQa ? "extractive_qa" : "generative";
}

std::optional<BackendKind> parse_backend_kind(std::string_view name) {
  const auto n = text::to_lower(text::trim(name));
  if (n == "extractive_qa" || n == "qa" || n == "extractive") return BackendKind::ExtractiveQa;
  if (n == "generative" || n == "generate") return BackendKind::Generative;
  return std::nullopt;
}

std::string_view to_string(ParseOutcome outcome) {
  switch (outcome) {
    case ParseOutcome::Answers: return "answers";
    case ParseOutcome::DontKnow: return "dont_know";
    case ParseOutcome::Unstructured: return "unstructured";
  }
  return "?";
}

std::optional<ParseOutcome> parse_outcome(std::string_view name) {
  for (auto o : {ParseOutcome::Answers, ParseOutcome::DontKnow, ParseOutcome::Unstructured}) {
    if (to_string(o) == name) return o;
  }
  return std::nullopt;
}

double score_from_logprobs(const std::optional<std::vector<double>>& logprobs, double fallback) {
  if (!logprobs || logprobs->empty()) return fallback;
  const double mean = std::accumulate(logprobs->begin(), logprobs->end(), 0.0) /
                      static_cast<double>(logprobs->size());
  const double p = std::exp(mean);
  if (!std::isfinite(p)) return fallback;
  return std::clamp(p, 0.0, 1.0);
}

namespace {

std::vector<std::string_view> content_lines(std::string_view raw) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= raw.size()) {
    std::size_t end = raw.find('\n', start);
    if (end == std::string_view::npos) end = raw.size();
    const auto line = text::trim(raw.substr(start, end - start));
    if (!line.empty()) lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

bool is_response_header(std::string_view line) {
  return text::to_lower(line) == "### response" || text::to_lower(line) == "### response:";
}

const std::vector<std::string_view>& label_synonyms(EntityCategory category) {
  static const std::vector<std::string_view> treat = {"treat", "treats", "treatment", "treatments"};
  static const std::vector<std::string_view> factor = {"factor", "factors"};
  static const std::vector<std::string_view> coexists = {"coexists_with", "coexists with", "coexists-with",
                                                         "coexist_with", "effect", "effects"};
  switch (category) {
    case EntityCategory::Treatment: return treat;
    case EntityCategory::Factor: return factor;
    case EntityCategory::CoexistsWith: return coexists;
  }
  return treat;
}

bool is_label(std::string_view candidate, EntityCategory category) {
  auto c = text::trim(candidate);
  if (c.size() >= 2 && c.front() == '[' && c.back() == ']') c = text::trim(c.substr(1, c.size() - 2));
  const auto lower = text::to_lower(c);
  const auto& syn = label_synonyms(category);
  return std::find(syn.begin(), syn.end(), lower) != syn.end();
}

bool is_placeholder(std::string_view entity) {
  const auto upper_pos = entity.find("ENTITY_");
  return upper_pos != std::string_view::npos || (entity.front() == '[' && entity.find(']') != std::string_view::npos);
}

// Entities of a "<label>: a, b" line, or nullopt when the line is not a
// well-formed answer for `category`.
std::optional<std::vector<std::string>> answer_line(std::string_view line, EntityCategory category) {
  const auto colon = line.find(':');
  if (colon == std::string_view::npos || !is_label(line.substr(0, colon), category)) return std::nullopt;
  auto rest = text::trim(line.substr(colon + 1));
  // "factor: factor: ..." repeats the label
  for (auto next = rest.find(':'); next != std::string_view::npos && is_label(rest.substr(0, next), category);
       next = rest.find(':')) {
    rest = text::trim(rest.substr(next + 1));
  }
  std::vector<std::string> entities;
  std::size_t start = 0;
  while (start <= rest.size()) {
    std::size_t end = rest.find(',', start);
    if (end == std::string_view::npos) end = rest.size();
    const auto entity = text::trim(rest.substr(start, end - start));
    if (!entity.empty()) {
      if (is_placeholder(entity)) return std::nullopt;
      entities.emplace_back(entity);
    }
    start = end + 1;
  }
  if (entities.empty()) return std::nullopt;
  return entities;
}

std::vector<Answer> to_answers(const std::vector<std::string>& texts, double score) {
  std::vector<Answer> out;
  for (const auto& t : texts) {
    const bool seen = std::any_of(out.begin(), out.end(), [&](const Answer& a) { return a.text == t; });
    if (!seen) out.push_back({t, score});
  }
  return out;
}

}  // namespace

ParsedResponse parse_guided_response(std::string_view raw, EntityCategory expected, double score,
                                     const WordList& refusals) {
  if (refusals.contains(raw)) return ParsedResponse::dont_know();

  std::vector<std::string> entities;
  bool saw_refusal = false;
  for (auto line : content_lines(raw)) {
    if (is_response_header(line)) continue;
    if (refusals.contains(line)) {
      saw_refusal = true;
      continue;
    }
    auto found = answer_line(line, expected);
    if (!found) return ParsedResponse::unstructured();
    entities.insert(entities.end(), found->begin(), found->end());
  }
  if (!entities.empty()) return {ParseOutcome::Answers, to_answers(entities, score)};
  if (saw_refusal) return ParsedResponse::dont_know();
  return ParsedResponse::unstructured();
}

ParsedResponse parse_free_text_response(std::string_view raw, double score, std::size_t max_words,
                                        const WordList& refusals) {
  if (refusals.contains(raw)) return ParsedResponse::dont_know();
  const auto lines = content_lines(raw);
  if (lines.empty()) return ParsedResponse::unstructured();
  if (refusals.contains(lines.front())) return ParsedResponse::dont_know();

  auto bullet_body = [](std::string_view line) -> std::optional<std::string_view> {
    for (std::string_view marker : {"- ", "* ", "\xE2\x80\xA2 "}) {
      if (line.starts_with(marker)) return text::trim(line.substr(marker.size()));
    }
    return std::nullopt;
  };
  if (std::all_of(lines.begin(), lines.end(), [&](auto l) { return bullet_body(l).has_value(); })) {
    std::vector<std::string> items;
    for (auto l : lines) {
      const auto body = *bullet_body(l);
      if (!body.empty()) items.emplace_back(body);
    }
    if (items.empty()) return ParsedResponse::unstructured();
    return {ParseOutcome::Answers, to_answers(items, score)};
  }
  if (lines.size() == 1 && text::word_count(lines.front()) <= max_words) {
    return {ParseOutcome::Answers, {{std::string(lines.front()), score}}};
  }
  return ParsedResponse::unstructured();
}

namespace {

ParsedResponse read_extractive(const BackendReply& reply, const Prompt& prompt) {
  std::vector<Answer> answers;
  for (const auto& span : reply.spans) {
    const auto t = text::trim(span.text);
    if (t.empty()) continue;
    if (!std::isfinite(span.score) || span.score < 0.0 || span.score > 1.0) return ParsedResponse::unstructured();
    if (prompt.context.find(t) == std::string::npos) return ParsedResponse::unstructured();
    answers.push_back({std::string(t), span.score});
  }
  if (answers.empty()) return ParsedResponse::dont_know();
  return {ParseOutcome::Answers, std::move(answers)};
}

}  // namespace

QueryRecord query(ModelBackend& backend, const Prompt& prompt, const RetryPolicy& retry,
                  const ResponseOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  const int budget = std::max(1, retry.max_attempts);
  auto delay = retry.base_delay;

  std::optional<BackendReply> reply;
  int attempt = 1;
  for (;; ++attempt) {
    try {
      reply = backend.call(prompt);
      break;
    } catch (const TransportError& e) {
      if (attempt >= budget) {
        throw BackendError(backend.name(), prompt.id(),
                           "gave up after " + std::to_string(attempt) + " attempts: " + e.what());
      }
    } catch (const BackendError&) {
      throw;
    } catch (const std::exception& e) {
      throw BackendError(backend.name(), prompt.id(), e.what());
    }
    if (delay.count() > 0) {
      if (retry.sleep) retry.sleep(delay);
      else std::this_thread::sleep_for(delay);
    }
    const auto next = std::chrono::duration<double, std::milli>(delay) * retry.multiplier;
    delay = std::min(retry.max_delay, std::chrono::duration_cast<std::chrono::milliseconds>(next));
  }

  QueryRecord record;
  record.prompt = prompt;
  record.backend = backend.name();
  record.raw_response = reply->raw;
  record.token_logprobs = reply->token_logprobs;
  record.attempts = attempt;

  const WordList& refusals = options.refusals ? *options.refusals : WordList::builtin_refusals();
  if (backend.kind() == BackendKind::ExtractiveQa) {
    record.parsed = read_extractive(*reply, prompt);
  } else {
    const double score = score_from_logprobs(reply->token_logprobs, options.default_score);
    record.parsed = prompt.style == PromptStyle::Guided
                        ? parse_guided_response(reply->raw, prompt.category, score, refusals)
                        : parse_free_text_response(reply->raw, score, options.max_free_text_words, refusals);
  }
  record.latency_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return record;
}

}  // namespace clinkg
