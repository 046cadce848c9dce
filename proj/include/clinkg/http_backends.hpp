#pragma once

#include <chrono>
#include <string>

#include "clinkg/gateway.hpp"
#include "clinkg/similarity.hpp"
#include "clinkg/terminology.hpp"

// JSON-over-HTTP clients for the model sidecar endpoints:
//   POST /generate {"prompt", "max_tokens", "temperature"} -> {"text", "token_logprobs"?}
//   POST /qa       {"question", "context", "top_k"}       -> {"answers": [{"text", "score"}]}
//   POST /embed    {"text"}                                -> {"vector": [...]}
//   POST /ner      {"text"}                                -> {"spans": [{"text", "start", "end"}]}
namespace clinkg {

struct HttpEndpoint {
  /// e.g. "http://127.0.0.1:8080"
  std::string base_url;
  /// Sent as "Authorization: Bearer <token>" when non-empty.
  std::string bearer_token;
  std::chrono::milliseconds timeout{30000};
};

class HttpGenerativeBackend final : public ModelBackend {
 public:
  HttpGenerativeBackend(std::string name, HttpEndpoint endpoint, int max_tokens = 256, double temperature = 0.0);

  std::string name() const override { return name_; }
  BackendKind kind() const override { return BackendKind::Generative; }
  BackendReply call(const Prompt& prompt) override;

 private:
  std::string name_;
  HttpEndpoint endpoint_;
  int max_tokens_;
  double temperature_;
};

class HttpQaBackend final : public ModelBackend {
 public:
  HttpQaBackend(std::string name, HttpEndpoint endpoint, int top_k = 5);

  std::string name() const override { return name_; }
  BackendKind kind() const override { return BackendKind::ExtractiveQa; }
  BackendReply call(const Prompt& prompt) override;

 private:
  std::string name_;
  HttpEndpoint endpoint_;
  int top_k_;
};

class RemoteEmbeddingProvider final : public SimilarityProvider {
 public:
  explicit RemoteEmbeddingProvider(HttpEndpoint endpoint);

  std::string name() const override { return "remote-embed"; }
  EmbeddingVector embed(std::string_view text) const override;

 private:
  HttpEndpoint endpoint_;
};

class RemoteNerProvider final : public NerProvider {
 public:
  explicit RemoteNerProvider(HttpEndpoint endpoint);

  std::string name() const override { return "remote-ner"; }
  std::vector<NerSpan> extract(std::string_view text) const override;

 private:
  HttpEndpoint endpoint_;
};

}  // namespace clinkg
