#include "clinkg/config.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include "clinkg/errors.hpp"
#include "clinkg/text.hpp"

namespace clinkg {

using nlohmann::json;

namespace {

std::string resolve_path(const std::string& base_dir, const std::string& path) {
  if (path.empty()) return path;
  const std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

class Reader {
 public:
  Reader(const json& object, std::string prefix) : object_(object), prefix_(std::move(prefix)) {
    if (!object_.is_object()) throw ValidationError(prefix_.empty() ? "<root>" : prefix_, "expected an object");
  }

  std::string field(std::string_view key) const { return prefix_.empty() ? std::string(key) : prefix_ + "." + std::string(key); }

  const json* get(std::string_view key) {
    seen_.insert(std::string(key));
    const auto it = object_.find(std::string(key));
    return it == object_.end() || it->is_null() ? nullptr : &*it;
  }

  void number(std::string_view key, double& out) {
    if (const auto* v = get(key)) {
      if (!v->is_number()) throw ValidationError(field(key), "expected a number");
      out = v->get<double>();
    }
  }
  void count(std::string_view key, std::size_t& out) {
    if (const auto* v = get(key)) {
      if (!v->is_number_integer()) throw ValidationError(field(key), "expected an integer");
      if (v->get<long long>() < 0) throw ValidationError(field(key), "must be >= 0");
      out = v->get<std::size_t>();
    }
  }
  void integer(std::string_view key, int& out) {
    if (const auto* v = get(key)) {
      if (!v->is_number_integer()) throw ValidationError(field(key), "expected an integer");
      out = v->get<int>();
    }
  }
  void string(std::string_view key, std::string& out) {
    if (const auto* v = get(key)) {
      if (!v->is_string()) throw ValidationError(field(key), "expected a string");
      out = v->get<std::string>();
    }
  }
  void strings(std::string_view key, std::vector<std::string>& out) {
    if (const auto* v = get(key)) {
      if (!v->is_array() || !std::all_of(v->begin(), v->end(), [](const json& e) { return e.is_string(); })) {
        throw ValidationError(field(key), "expected a list of strings");
      }
      out = v->get<std::vector<std::string>>();
    }
  }

  void reject_unknown() const {
    for (const auto& [key, value] : object_.items()) {
      if (!seen_.contains(key)) throw ValidationError(field(key), "unknown setting");
    }
  }

 private:
  const json& object_;
  std::string prefix_;
  std::set<std::string> seen_;
};

ProviderConfig read_provider(const json& j, const std::string& prefix, ProviderConfig out) {
  Reader r(j, prefix);
  r.string("provider", out.provider);
  r.string("url", out.url);
  r.string("token_env", out.token_env);
  r.integer("timeout_ms", out.timeout_ms);
  r.strings("terms", out.terms);
  r.reject_unknown();
  return out;
}

void check_score(const std::string& field, double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(field, "must be within [0, 1], got " + json(v).dump());
}

}  // namespace

void validate(const PipelineConfig& c) {
  check_score("threshold_preprocessing", c.threshold_preprocessing);
  check_score("threshold_notes_identification", c.threshold_notes_identification);
  check_score("relation_probability", c.relation_probability);
  check_score("postprocess_min_score", c.postprocess_min_score);
  check_score("grouping_similarity", c.grouping_similarity);
  check_score("match_threshold", c.match_threshold);
  check_score("default_answer_score", c.default_answer_score);
  if (c.retry_budget < 1) throw ValidationError("retry_budget", "must be at least 1");
  if (c.max_in_flight < 1) throw ValidationError("max_in_flight", "must be at least 1");
  if (c.top_k < 1) throw ValidationError("top_k", "must be at least 1");
  if (c.prompt_style == PromptStyle::FewShot && c.exemplars.empty()) {
    throw ValidationError("exemplars", "few-shot prompting needs at least one exemplar");
  }
  if (c.similarity.provider != "trigram" && c.similarity.provider != "remote") {
    throw ValidationError("similarity.provider", "expected \"trigram\" or \"remote\"");
  }
  if (c.similarity.provider == "remote" && c.similarity.url.empty()) throw ValidationError("similarity.url", "required for the remote provider");
  if (c.ner.provider != "none" && c.ner.provider != "lexicon" && c.ner.provider != "remote") {
    throw ValidationError("ner.provider", "expected \"none\", \"lexicon\" or \"remote\"");
  }
  if (c.ner.provider == "remote" && c.ner.url.empty()) throw ValidationError("ner.url", "required for the remote provider");
  if (c.ner.provider == "lexicon" && c.ner.terms.empty()) throw ValidationError("ner.terms", "required for the lexicon provider");

  std::set<std::string> names;
  for (std::size_t i = 0; i < c.backends.size(); ++i) {
    const auto& b = c.backends[i];
    const std::string field = "backends[" + std::to_string(i) + "]";
    if (b.name.empty()) throw ValidationError(field + ".name", "must be non-empty");
    if (!names.insert(b.name).second) throw ValidationError(field + ".name", "duplicate backend \"" + b.name + "\"");
    if (b.type == "fixture") {
      if (b.script.empty()) throw ValidationError(field + ".script", "required for fixture backends");
    } else if (b.type == "http_generative" || b.type == "http_qa") {
      if (b.url.empty()) throw ValidationError(field + ".url", "required for HTTP backends");
    } else {
      throw ValidationError(field + ".type", "expected \"fixture\", \"http_generative\" or \"http_qa\"");
    }
    if (b.timeout_ms <= 0) throw ValidationError(field + ".timeout_ms", "must be positive");
    if (b.max_tokens <= 0) throw ValidationError(field + ".max_tokens", "must be positive");
  }
  if (!c.backend.empty() && !names.contains(c.backend)) {
    throw ValidationError("backend", "no backend named \"" + c.backend + "\"");
  }
}

PipelineConfig parse_config(std::string_view content, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(content);
  } catch (const json::exception& e) {
    throw ValidationError("<root>", std::string("invalid JSON: ") + e.what());
  }
  PipelineConfig c;
  Reader r(doc, "");
  r.number("threshold_preprocessing", c.threshold_preprocessing);
  r.number("threshold_notes_identification", c.threshold_notes_identification);
  r.count("relation_occurrence_number", c.relation_occurrence_number);
  r.number("relation_probability", c.relation_probability);
  r.number("postprocess_min_score", c.postprocess_min_score);
  r.number("grouping_similarity", c.grouping_similarity);
  r.number("match_threshold", c.match_threshold);
  r.count("min_words", c.min_words);
  r.count("top_k", c.top_k);
  r.count("retry_budget", c.retry_budget);
  r.count("retry_base_delay_ms", c.retry_base_delay_ms);
  r.count("max_in_flight", c.max_in_flight);
  r.number("default_answer_score", c.default_answer_score);
  r.count("max_free_text_words", c.max_free_text_words);

  std::string linkage = "single";
  r.string("grouping_linkage", linkage);
  if (linkage == "single") c.grouping_linkage = Linkage::Single;
  else if (linkage == "complete") c.grouping_linkage = Linkage::Complete;
  else throw ValidationError("grouping_linkage", "expected \"single\" or \"complete\"");

  std::string style = "guided";
  r.string("prompt_style", style);
  const auto parsed_style = parse_prompt_style(style);
  if (!parsed_style) throw ValidationError("prompt_style", "expected zero, few, instruct or guided");
  c.prompt_style = *parsed_style;

  if (const auto* ex = r.get("exemplars")) {
    if (!ex->is_array()) throw ValidationError("exemplars", "expected a list");
    for (std::size_t i = 0; i < ex->size(); ++i) {
      Reader er((*ex)[i], "exemplars[" + std::to_string(i) + "]");
      Exemplar e;
      er.string("question", e.question);
      er.string("context", e.context);
      er.string("answer", e.answer);
      er.reject_unknown();
      if (e.question.empty() || e.context.empty()) throw ValidationError(er.field("question"), "question and context are required");
      c.exemplars.push_back(std::move(e));
    }
  }

  r.string("guided_template", c.guided_template);
  r.string("templates", c.templates);
  r.string("stopwords", c.stopwords);
  r.string("refusals", c.refusals);
  r.strings("diseases", c.diseases);
  r.string("alias_table", c.alias_table);
  if (const auto* s = r.get("similarity")) c.similarity = read_provider(*s, "similarity", c.similarity);
  if (const auto* n = r.get("ner")) c.ner = read_provider(*n, "ner", c.ner);

  if (const auto* bs = r.get("backends")) {
    if (!bs->is_array()) throw ValidationError("backends", "expected a list");
    for (std::size_t i = 0; i < bs->size(); ++i) {
      Reader br((*bs)[i], "backends[" + std::to_string(i) + "]");
      BackendConfig b;
      br.string("name", b.name);
      br.string("type", b.type);
      br.string("script", b.script);
      br.string("url", b.url);
      br.string("token_env", b.token_env);
      br.integer("timeout_ms", b.timeout_ms);
      br.integer("max_tokens", b.max_tokens);
      br.number("temperature", b.temperature);
      br.reject_unknown();
      b.script = resolve_path(base_dir, b.script);
      c.backends.push_back(std::move(b));
    }
  }
  r.string("backend", c.backend);
  r.reject_unknown();

  for (auto* path : {&c.guided_template, &c.templates, &c.stopwords, &c.refusals, &c.alias_table}) {
    *path = resolve_path(base_dir, *path);
  }
  validate(c);
  return c;
}

PipelineConfig load_config(const std::string& path) {
  std::string content;
  try {
    content = text::read_file(path);
  } catch (const InputError& e) {
    throw ValidationError("--config", e.what());
  }
  auto dir = std::filesystem::path(path).parent_path().string();
  return parse_config(content, dir.empty() ? "." : dir);
}

json to_json(const PipelineConfig& c) {
  json exemplars = json::array();
  for (const auto& e : c.exemplars) exemplars.push_back({{"question", e.question}, {"context", e.context}, {"answer", e.answer}});
  auto provider = [](const ProviderConfig& p) {
    return json{{"provider", p.provider}, {"url", p.url}, {"token_env", p.token_env}, {"timeout_ms", p.timeout_ms}, {"terms", p.terms}};
  };
  json backends = json::array();
  for (const auto& b : c.backends) {
    backends.push_back({{"name", b.name},
                        {"type", b.type},
                        {"script", b.script},
                        {"url", b.url},
                        {"token_env", b.token_env},
                        {"timeout_ms", b.timeout_ms},
                        {"max_tokens", b.max_tokens},
                        {"temperature", b.temperature}});
  }
  return {{"threshold_preprocessing", c.threshold_preprocessing},
          {"threshold_notes_identification", c.threshold_notes_identification},
          {"relation_occurrence_number", c.relation_occurrence_number},
          {"relation_probability", c.relation_probability},
          {"postprocess_min_score", c.postprocess_min_score},
          {"grouping_similarity", c.grouping_similarity},
          {"grouping_linkage", c.grouping_linkage == Linkage::Single ? "single" : "complete"},
          {"match_threshold", c.match_threshold},
          {"min_words", c.min_words},
          {"top_k", c.top_k},
          {"retry_budget", c.retry_budget},
          {"retry_base_delay_ms", c.retry_base_delay_ms},
          {"max_in_flight", c.max_in_flight},
          {"default_answer_score", c.default_answer_score},
          {"max_free_text_words", c.max_free_text_words},
          {"prompt_style", to_string(c.prompt_style)},
          {"exemplars", exemplars},
          {"guided_template", c.guided_template},
          {"templates", c.templates},
          {"stopwords", c.stopwords},
          {"refusals", c.refusals},
          {"diseases", c.diseases},
          {"alias_table", c.alias_table},
          {"similarity", provider(c.similarity)},
          {"ner", provider(c.ner)},
          {"backends", backends},
          {"backend", c.backend}};
}

std::string config_hash(const PipelineConfig& config) { return text::hex64(text::fnv1a64(to_json(config).dump())); }

const BackendConfig& select_backend(const PipelineConfig& config, std::string_view name) {
  const std::string wanted(name.empty() ? std::string_view(config.backend) : name);
  if (config.backends.empty()) throw ValidationError("backends", "no backend configured");
  if (wanted.empty()) return config.backends.front();
  for (const auto& b : config.backends) {
    if (b.name == wanted) return b;
  }
  throw ValidationError("--backend", "no backend named \"" + wanted + "\"");
}

}  // namespace clinkg
