#include "clinkg/prompting.hpp"

#include <json.hpp>

#include <set>
#include <stdexcept>

#include "clinkg/assets.hpp"
#include "clinkg/errors.hpp"
#include "clinkg/text.hpp"

namespace clinkg {

using nlohmann::json;

std::string_view to_string(EntityCategory category) {
  switch (category) {
    case EntityCategory::Treatment: return "Treatment";
    case EntityCategory::Factor: return "Factor";
    case EntityCategory::CoexistsWith: return "CoexistsWith";
  }
  return "?";
}

std::string_view question_type(EntityCategory category) {
  switch (category) {
    case EntityCategory::Treatment: return "treat";
    case EntityCategory::Factor: return "factor";
    case EntityCategory::CoexistsWith: return "coexists_with";
  }
  return "?";
}

std::optional<EntityCategory> category_from_question_type(std::string_view label) {
  for (auto c : kCategories) {
    if (question_type(c) == label) return c;
  }
  return std::nullopt;
}

std::optional<EntityCategory> parse_category(std::string_view name) {
  const std::string n = text::to_lower(text::trim(name));
  if (n == "treatment" || n == "treat") return EntityCategory::Treatment;
  if (n == "factor") return EntityCategory::Factor;
  if (n == "coexistswith" || n == "coexists_with" || n == "effect") return EntityCategory::CoexistsWith;
  return std::nullopt;
}

namespace {

std::size_t count_placeholders(std::string_view pattern) {
  std::size_t n = 0;
  for (auto pos = pattern.find("%s"); pos != std::string_view::npos; pos = pattern.find("%s", pos + 2)) ++n;
  return n;
}

}  // namespace

TemplateSet::TemplateSet(std::vector<QuestionTemplate> templates) : templates_(std::move(templates)) {
  std::set<std::string> ids;
  for (const auto& t : templates_) {
    if (t.id.empty()) throw std::invalid_argument("question template with empty id");
    if (!ids.insert(t.id).second) throw std::invalid_argument("duplicate question template id " + t.id);
    if (count_placeholders(t.pattern) != 1) {
      throw std::invalid_argument("question template " + t.id + " must contain exactly one %s");
    }
  }
  for (auto c : kCategories) {
    if (for_category(c).empty()) {
      throw std::invalid_argument("no question template for category " + std::string(to_string(c)));
    }
  }
}

const TemplateSet& TemplateSet::builtin() {
  static const TemplateSet set({
      {"T1", EntityCategory::Treatment, "What can slow the progression of %s?"},
      {"T2", EntityCategory::Treatment, "What can decrease the chance of %s?"},
      {"T3", EntityCategory::Treatment, "What can reduce the risk of %s?"},
      {"T4", EntityCategory::Treatment, "What is a treatment for %s?"},
      {"T5", EntityCategory::Treatment, "What treats %s?"},
      {"F1", EntityCategory::Factor, "What does cause %s?"},
      {"F2", EntityCategory::Factor, "What is the cause of %s?"},
      {"F3", EntityCategory::Factor, "What is the factor for %s?"},
      {"F4", EntityCategory::Factor, "What can increase the risk of %s?"},
      {"F5", EntityCategory::Factor, "What can convert to %s?"},
      {"E1", EntityCategory::CoexistsWith, "What can %s convert to?"},
      {"E2", EntityCategory::CoexistsWith, "What is the effect of %s?"},
      {"E3", EntityCategory::CoexistsWith, "What does %s lead to?"},
      {"E4", EntityCategory::CoexistsWith, "What can %s become?"},
      {"E5", EntityCategory::CoexistsWith, "What does %s affect?"},
  });
  return set;
}

TemplateSet TemplateSet::from_json_text(std::string_view content, const std::string& source) {
  json doc;
  try {
    doc = json::parse(content);
  } catch (const json::parse_error& e) {
    throw InputError(source, 0, std::string("malformed template file: ") + e.what());
  }
  if (!doc.is_array()) throw InputError(source, 0, "template file must be a JSON list");
  std::vector<QuestionTemplate> templates;
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("id") || !item.contains("category") || !item.contains("pattern")) {
      throw InputError(source, 0, "each template needs id, category and pattern");
    }
    const auto category = parse_category(item.at("category").get<std::string>());
    if (!category) throw InputError(source, 0, "unknown category " + item.at("category").dump());
    templates.push_back({item.at("id").get<std::string>(), *category, item.at("pattern").get<std::string>()});
  }
  try {
    return TemplateSet(std::move(templates));
  } catch (const std::invalid_argument& e) {
    throw InputError(source, 0, e.what());
  }
}

TemplateSet TemplateSet::from_file(const std::string& path) {
  return from_json_text(text::read_file(path), path);
}

std::vector<const QuestionTemplate*> TemplateSet::for_category(EntityCategory category) const {
  std::vector<const QuestionTemplate*> out;
  for (const auto& t : templates_) {
    if (t.category == category) out.push_back(&t);
  }
  return out;
}

std::vector<Question> instantiate_questions(std::string_view disease, EntityCategory category,
                                            const TemplateSet& templates) {
  if (text::trim(disease).empty()) throw std::invalid_argument("instantiate_questions: empty disease");
  std::vector<Question> out;
  for (const auto* t : templates.for_category(category)) {
    out.push_back({t->id, text::substitute(t->pattern, disease)});
  }
  return out;
}

std::string_view to_string(PromptStyle style) {
  switch (style) {
    case PromptStyle::ZeroShot: return "zero";
    case PromptStyle::FewShot: return "few";
    case PromptStyle::Instruct: return "instruct";
    case PromptStyle::Guided: return "guided";
  }
  return "?";
}

std::optional<PromptStyle> parse_prompt_style(std::string_view name) {
  const std::string n = text::to_lower(text::trim(name));
  if (n == "zero" || n == "zero-shot" || n == "zeroshot") return PromptStyle::ZeroShot;
  if (n == "few" || n == "few-shot" || n == "fewshot") return PromptStyle::FewShot;
  if (n == "instruct" || n == "instruction") return PromptStyle::Instruct;
  if (n == "guided") return PromptStyle::Guided;
  return std::nullopt;
}

std::string Prompt::id() const { return text::hex64(text::fnv1a64(text)); }

namespace {

constexpr std::string_view kInstruction =
    "Instruction: I want you to act as a medical question answering machine. I will provide you "
    "with questions and a context, and you will reply with the answers.\n";
constexpr std::string_view kMissingAnswerInstruction =
    "Instruction: If the answer is not in context, answer \"I do not know.\"\n";

void append_qa_block(std::string& out, std::string_view question, std::string_view context) {
  out += "Question: ";
  out += question;
  out += "\nContext: ";
  out += context;
  out += "\nAnswer:";
}

// Single pass so placeholder-like text inside the note is left alone.
std::string render_guided(std::string_view tmpl, std::string_view qtype, std::string_view question,
                          std::string_view context) {
  std::string out;
  out.reserve(tmpl.size() + question.size() + context.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl.compare(i, 2, "{{") == 0) {
      const auto close = tmpl.find("}}", i + 2);
      if (close != std::string_view::npos) {
        const auto key = tmpl.substr(i + 2, close - i - 2);
        if (key == "question_type") out += qtype;
        else if (key == "question") out += question;
        else if (key == "context") out += context;
        else out += tmpl.substr(i, close + 2 - i);
        i = close + 2;
        continue;
      }
    }
    out.push_back(tmpl[i++]);
  }
  return out;
}

}  // namespace

Prompt build_prompt(const PromptOptions& options, std::string_view question, std::string_view context,
                    EntityCategory category) {
  if (text::trim(question).empty()) throw std::invalid_argument("build_prompt: empty question");
  if (text::trim(context).empty()) throw std::invalid_argument("build_prompt: empty context");

  Prompt prompt;
  prompt.style = options.style;
  prompt.category = category;
  prompt.question = std::string(question);
  prompt.context = std::string(context);

  std::string& out = prompt.text;
  switch (options.style) {
    case PromptStyle::ZeroShot:
      append_qa_block(out, question, context);
      out += '\n';
      break;
    case PromptStyle::FewShot:
      if (options.exemplars.empty()) throw std::invalid_argument("build_prompt: few-shot style needs exemplars");
      for (const auto& ex : options.exemplars) {
        append_qa_block(out, ex.question, ex.context);
        out += ' ';
        out += ex.answer;
        out += "\n\n";
      }
      append_qa_block(out, question, context);
      out += '\n';
      break;
    case PromptStyle::Instruct:
      out += kInstruction;
      out += "Question: ";
      out += question;
      out += '\n';
      out += kMissingAnswerInstruction;
      out += "Context: ";
      out += context;
      out += "\nAnswer:\n";
      break;
    case PromptStyle::Guided: {
      const std::string_view tmpl =
          options.guided_template.empty() ? assets::guided_prompt() : std::string_view(options.guided_template);
      out = render_guided(tmpl, question_type(category), question, context);
      while (!out.empty() && out.back() == '\n') out.pop_back();
      out += '\n';
      break;
    }
  }
  return prompt;
}

}  // namespace clinkg
