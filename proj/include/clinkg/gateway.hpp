#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "clinkg/prompting.hpp"
#include "clinkg/word_list.hpp"

namespace clinkg {

/// ExtractiveQa backends return spans of the context; Generative ones return
/// free text.
enum class BackendKind { ExtractiveQa, Generative };

std::string_view to_string(BackendKind kind);
std::optional<BackendKind> parse_backend_kind(std::string_view name);

struct Answer {
  std::string text;
  /// In [0, 1].
  double score = 0.0;

  friend bool operator==(const Answer&, const Answer&) = default;
};

enum class ParseOutcome { Answers, DontKnow, Unstructured };

std::string_view to_string(ParseOutcome outcome);
std::optional<ParseOutcome> parse_outcome(std::string_view name);

/// Outcome of reading one backend response. `answers` is non-empty exactly
/// when outcome == Answers.
struct ParsedResponse {
  ParseOutcome outcome = ParseOutcome::Unstructured;
  std::vector<Answer> answers;

  static ParsedResponse dont_know() { return {ParseOutcome::DontKnow, {}}; }
  static ParsedResponse unstructured() { return {ParseOutcome::Unstructured, {}}; }
};

/// What one backend call produced.
struct BackendReply {
  /// Response exactly as received: generated text, or the QA answer list.
  std::string raw;
  /// Generative only, when the runtime exposes them.
  std::optional<std::vector<double>> token_logprobs;
  /// ExtractiveQa only.
  std::vector<Answer> spans;
};

/// A model behind query access. call() makes exactly one attempt: retryable
/// failures are thrown as TransportError, permanent ones as BackendError.
/// Implementations must tolerate concurrent calls.
class ModelBackend {
 public:
  virtual ~ModelBackend() = default;
  virtual std::string name() const = 0;
  virtual BackendKind kind() const = 0;
  virtual BackendReply call(const Prompt& prompt) = 0;
};

struct RetryPolicy {
  /// Total attempts per query, including the first.
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{200};
  double multiplier = 2.0;
  std::chrono::milliseconds max_delay{10000};
  /// Replaceable for tests; defaults to std::this_thread::sleep_for.
  std::function<void(std::chrono::milliseconds)> sleep;
};

struct ResponseOptions {
  /// Score for generative answers when no token log-probabilities are given.
  double default_score = 0.5;
  /// Non-guided generative output longer than this (or spanning several
  /// non-bullet lines) is treated as unstructured.
  std::size_t max_free_text_words = 32;
  const WordList* refusals = nullptr;  // null = built-in list
};

struct QueryRecord {
  Prompt prompt;
  std::string backend;
  std::string raw_response;
  std::optional<std::vector<double>> token_logprobs;
  ParsedResponse parsed;
  double latency_ms = 0.0;
  int attempts = 1;
};

/// One query with bounded retries on TransportError. Throws BackendError
/// (carrying backend name and prompt id) once the budget is exhausted or on a
/// permanent failure. A successful call always yields a record, even when the
/// content is unusable.
QueryRecord query(ModelBackend& backend, const Prompt& prompt, const RetryPolicy& retry = {},
                  const ResponseOptions& options = {});

/// Reads a response to a guided prompt. Accepted shape: an optional
/// "### Response" header, then "<label>: e1, e2, ..." where the label names
/// the expected category (treat/treatment, factor, coexists_with/effect).
/// Refusal lines may accompany an answer line. A response made only of
/// refusals is DontKnow; anything else is Unstructured. Never throws.
ParsedResponse parse_guided_response(std::string_view raw, EntityCategory expected, double score = 0.5,
                                     const WordList& refusals = WordList::builtin_refusals());

/// Reads a response to a zero-shot, few-shot or instruct prompt: a leading
/// refusal is DontKnow, a bullet list gives one answer per bullet, a single
/// short line is one answer, anything else is Unstructured. Never throws.
ParsedResponse parse_free_text_response(std::string_view raw, double score = 0.5,
                                        std::size_t max_words = 32,
                                        const WordList& refusals = WordList::builtin_refusals());

/// exp(mean log-prob) clamped to [0, 1], or `fallback` when none are given.
double score_from_logprobs(const std::optional<std::vector<double>>& logprobs, double fallback);

}  // namespace clinkg
