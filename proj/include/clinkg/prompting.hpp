#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace clinkg {

enum class EntityCategory { Treatment, Factor, CoexistsWith };

inline constexpr std::array<EntityCategory, 3> kCategories = {
    EntityCategory::Treatment, EntityCategory::Factor, EntityCategory::CoexistsWith};

/// "Treatment", "Factor", "CoexistsWith".
std::string_view to_string(EntityCategory category);
/// Label used inside guided prompts and responses: treat, factor, coexists_with.
std::string_view question_type(EntityCategory category);
/// Inverse of question_type(); exact match only.
std::optional<EntityCategory> category_from_question_type(std::string_view label);
/// Lenient parse for config and data files: accepts the to_string() names,
/// the question types and "effect", case-insensitively.
std::optional<EntityCategory> parse_category(std::string_view name);

struct QuestionTemplate {
  std::string id;
  EntityCategory category;
  /// Contains exactly one "%s" (the disease).
  std::string pattern;
};

/// Ordered question templates. The built-in set has five per category
/// (T1-T5, F1-F5, E1-E5); the "E" questions form the CoexistsWith category.
class TemplateSet {
 public:
  static const TemplateSet& builtin();
  /// JSON list of {"id", "category", "pattern"}. Ids must be unique, every
  /// pattern must hold one "%s" and every category needs a template.
  static TemplateSet from_json_text(std::string_view content, const std::string& source = "<memory>");
  static TemplateSet from_file(const std::string& path);

  explicit TemplateSet(std::vector<QuestionTemplate> templates);

  const std::vector<QuestionTemplate>& all() const noexcept { return templates_; }
  std::vector<const QuestionTemplate*> for_category(EntityCategory category) const;
  std::size_t size() const noexcept { return templates_.size(); }

 private:
  std::vector<QuestionTemplate> templates_;
};

struct Question {
  std::string template_id;
  std::string text;
};

std::vector<Question> instantiate_questions(std::string_view disease, EntityCategory category,
                                            const TemplateSet& templates = TemplateSet::builtin());

enum class PromptStyle { ZeroShot, FewShot, Instruct, Guided };

/// "zero", "few", "instruct", "guided".
std::string_view to_string(PromptStyle style);
std::optional<PromptStyle> parse_prompt_style(std::string_view name);

struct Exemplar {
  std::string question;
  std::string context;
  std::string answer;
};

struct PromptOptions {
  PromptStyle style = PromptStyle::Guided;
  /// Worked examples prepended in FewShot style; required there, unused elsewhere.
  std::vector<Exemplar> exemplars;
  /// Guided template with {{question_type}}, {{question}} and {{context}}
  /// placeholders. Empty means the built-in template.
  std::string guided_template;
};

/// Fully rendered backend input plus the metadata needed to trace it back.
struct Prompt {
  std::string text;
  PromptStyle style = PromptStyle::Guided;
  EntityCategory category = EntityCategory::Treatment;
  std::string question;
  std::string question_id;
  std::string context;
  std::string note_id;
  std::string disease;

  /// Stable hash of `text`, 16 hex digits.
  std::string id() const;
};

/// Renders question and context in the requested style. The result always
/// contains both verbatim, question first; lines end in LF and the text ends
/// in exactly one newline. Throws std::invalid_argument for empty input or a
/// FewShot request without exemplars.
Prompt build_prompt(const PromptOptions& options, std::string_view question, std::string_view context,
                    EntityCategory category);

}  // namespace clinkg
