#include "clinkg/http_backends.hpp"

#include <httplib.h>
#include <json.hpp>

#include "clinkg/errors.hpp"

namespace clinkg {

using nlohmann::json;

namespace {

struct HttpResult {
  int status = 0;
  std::string body;
};

// Transport-level problems (no response, 408, 429, 5xx) become
// TransportError; any other non-200 status is returned to the caller.
HttpResult post_json(const HttpEndpoint& endpoint, const std::string& path, const json& payload) {
  httplib::Client client(endpoint.base_url);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!endpoint.bearer_token.empty()) headers.emplace("Authorization", "Bearer " + endpoint.bearer_token);

  auto res = client.Post(path, headers, payload.dump(), "application/json");
  if (!res) {
    throw TransportError(endpoint.base_url + path + ": " + httplib::to_string(res.error()));
  }
  if (res->status == 408 || res->status == 429 || res->status >= 500) {
    throw TransportError(endpoint.base_url + path + ": HTTP " + std::to_string(res->status));
  }
  return {res->status, res->body};
}

json parse_body(const std::string& body, const std::string& who) {
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw ProviderError(who, std::string("malformed response body: ") + e.what());
  }
}

}  // namespace

HttpGenerativeBackend::HttpGenerativeBackend(std::string name, HttpEndpoint endpoint, int max_tokens,
                                             double temperature)
    : name_(std::move(name)), endpoint_(std::move(endpoint)), max_tokens_(max_tokens), temperature_(temperature) {}

BackendReply HttpGenerativeBackend::call(const Prompt& prompt) {
  const json payload = {{"prompt", prompt.text}, {"max_tokens", max_tokens_}, {"temperature", temperature_}};
  const auto res = post_json(endpoint_, "/generate", payload);
  if (res.status != 200) throw BackendError(name_, prompt.id(), "HTTP " + std::to_string(res.status));
  try {
    const json body = json::parse(res.body);
    BackendReply reply;
    reply.raw = body.at("text").get<std::string>();
    if (body.contains("token_logprobs") && !body.at("token_logprobs").is_null()) {
      reply.token_logprobs = body.at("token_logprobs").get<std::vector<double>>();
    }
    return reply;
  } catch (const json::exception& e) {
    throw BackendError(name_, prompt.id(), std::string("bad /generate response: ") + e.what());
  }
}

HttpQaBackend::HttpQaBackend(std::string name, HttpEndpoint endpoint, int top_k)
    : name_(std::move(name)), endpoint_(std::move(endpoint)), top_k_(top_k) {}

BackendReply HttpQaBackend::call(const Prompt& prompt) {
  const json payload = {{"question", prompt.question}, {"context", prompt.context}, {"top_k", top_k_}};
  const auto res = post_json(endpoint_, "/qa", payload);
  if (res.status != 200) throw BackendError(name_, prompt.id(), "HTTP " + std::to_string(res.status));
  try {
    const json body = json::parse(res.body);
    BackendReply reply;
    reply.raw = res.body;
    for (const auto& a : body.at("answers")) {
      reply.spans.push_back({a.at("text").get<std::string>(), a.at("score").get<double>()});
    }
    return reply;
  } catch (const json::exception& e) {
    throw BackendError(name_, prompt.id(), std::string("bad /qa response: ") + e.what());
  }
}

RemoteEmbeddingProvider::RemoteEmbeddingProvider(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

EmbeddingVector RemoteEmbeddingProvider::embed(std::string_view text) const {
  HttpResult res;
  try {
    res = post_json(endpoint_, "/embed", {{"text", std::string(text)}});
  } catch (const TransportError& e) {
    throw ProviderError(name(), e.what());
  }
  if (res.status != 200) throw ProviderError(name(), "HTTP " + std::to_string(res.status));
  const json body = parse_body(res.body, name());
  try {
    return EmbeddingVector(body.at("vector").get<std::vector<double>>());
  } catch (const std::exception& e) {
    throw ProviderError(name(), std::string("bad /embed response: ") + e.what());
  }
}

RemoteNerProvider::RemoteNerProvider(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

std::vector<NerSpan> RemoteNerProvider::extract(std::string_view text) const {
  HttpResult res;
  try {
    res = post_json(endpoint_, "/ner", {{"text", std::string(text)}});
  } catch (const TransportError& e) {
    throw ProviderError(name(), e.what());
  }
  if (res.status != 200) throw ProviderError(name(), "HTTP " + std::to_string(res.status));
  const json body = parse_body(res.body, name());
  std::vector<NerSpan> spans;
  try {
    for (const auto& s : body.at("spans")) {
      spans.push_back({s.at("text").get<std::string>(), s.at("start").get<std::size_t>(), s.at("end").get<std::size_t>()});
    }
  } catch (const json::exception& e) {
    throw ProviderError(name(), std::string("bad /ner response: ") + e.what());
  }
  validate_spans(text, spans, name());
  return spans;
}

}  // namespace clinkg
