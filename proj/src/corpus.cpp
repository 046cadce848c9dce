#include "clinkg/corpus.hpp"

#include <json.hpp>

#include <ostream>
#include <stdexcept>

#include "clinkg/errors.hpp"
#include "clinkg/text.hpp"

namespace clinkg {

using nlohmann::json;

ClinicalNote::ClinicalNote(std::string id, std::string text, std::optional<std::string> date)
    : id_(std::move(id)),
      text_(std::move(text)),
      date_(std::move(date)),
      word_count_(text::word_count(text_)) {}

void Corpus::add(ClinicalNote note) {
  if (index_.contains(note.id())) {
    throw InputError("<corpus>", 0, "duplicate note id \"" + note.id() + "\"");
  }
  index_.emplace(note.id(), notes_.size());
  notes_.push_back(std::move(note));
}

const ClinicalNote* Corpus::find(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &notes_[it->second];
}

CorpusFormat format_for_path(std::string_view path) {
  const std::string lower = text::to_lower(path);
  return lower.ends_with(".csv") ? CorpusFormat::Csv : CorpusFormat::Jsonl;
}

Corpus ingest_notes(const std::string& path, CorpusFormat format) {
  const std::string content = text::read_file(path);
  return format == CorpusFormat::Csv ? parse_csv_notes(content, path)
                                     : parse_jsonl_notes(content, path);
}

namespace {

void add_record(Corpus& corpus, const std::string& source, std::size_t line, std::string id,
                std::string body, std::optional<std::string> date) {
  if (text::trim(id).empty()) throw InputError(source, line, "record has an empty id");
  if (text::trim(body).empty()) throw InputError(source, line, "record has an empty text");
  if (corpus.find(id) != nullptr) {
    throw InputError(source, line, "duplicate note id \"" + id + "\"");
  }
  corpus.add(ClinicalNote(std::move(id), std::move(body), std::move(date)));
}

}  // namespace

Corpus parse_jsonl_notes(std::string_view content, const std::string& source) {
  Corpus corpus;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    const auto line = content.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (text::trim(line).empty()) continue;

    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw InputError(source, line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!record.is_object()) throw InputError(source, line_no, "record is not an object");
    const auto id = record.find("id");
    const auto body = record.find("text");
    if (id == record.end() || !id->is_string()) throw InputError(source, line_no, "missing string field \"id\"");
    if (body == record.end() || !body->is_string()) throw InputError(source, line_no, "missing string field \"text\"");
    std::optional<std::string> date;
    if (const auto d = record.find("date"); d != record.end() && !d->is_null()) {
      if (!d->is_string()) throw InputError(source, line_no, "field \"date\" must be a string");
      date = d->get<std::string>();
    }
    add_record(corpus, source, line_no, id->get<std::string>(), body->get<std::string>(), std::move(date));
  }
  return corpus;
}

namespace {

struct CsvRecord {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

// RFC 4180: quoted fields may hold commas, doubled quotes and newlines.
std::vector<CsvRecord> split_csv(std::string_view content, const std::string& source) {
  std::vector<CsvRecord> records;
  CsvRecord current;
  std::string field;
  bool in_quotes = false;
  bool field_quoted = false;
  std::size_t line = 1;
  current.line = 1;

  auto finish_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_quoted = false;
  };
  auto finish_record = [&] {
    finish_field();
    const bool blank = current.fields.size() == 1 && current.fields[0].empty();
    if (!blank) records.push_back(std::move(current));
    current = CsvRecord{};
    current.line = line;
  };

  for (std::size_t i = 0; i < content.size(); ++i) {
    const char c = content[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      if (!field.empty() || field_quoted) throw InputError(source, line, "stray quote inside field");
      in_quotes = true;
      field_quoted = true;
    } else if (c == ',') {
      finish_field();
    } else if (c == '\n') {
      if (!field.empty() && field.back() == '\r' && !field_quoted) field.pop_back();
      ++line;
      finish_record();
    } else if (c == '\r' && field_quoted) {
      // CR of a CRLF after a closing quote
    } else {
      if (field_quoted) throw InputError(source, line, "text after closing quote");
      field.push_back(c);
    }
  }
  if (in_quotes) throw InputError(source, current.line, "unterminated quoted field");
  if (!field.empty() || field_quoted || !current.fields.empty()) finish_record();
  return records;
}

}  // namespace

Corpus parse_csv_notes(std::string_view content, const std::string& source) {
  Corpus corpus;
  auto records = split_csv(content, source);
  if (records.empty()) return corpus;

  const auto& header = records.front().fields;
  std::optional<std::size_t> id_col, text_col, date_col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name = text::to_lower(text::trim(header[i]));
    if (name == "id") id_col = i;
    else if (name == "text") text_col = i;
    else if (name == "date") date_col = i;
  }
  if (!id_col || !text_col) throw InputError(source, 1, "CSV header must name columns id and text");

  for (std::size_t r = 1; r < records.size(); ++r) {
    auto& rec = records[r];
    if (rec.fields.size() != header.size()) {
      throw InputError(source, rec.line,
                       "expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(rec.fields.size()));
    }
    std::optional<std::string> date;
    if (date_col && !rec.fields[*date_col].empty()) date = rec.fields[*date_col];
    add_record(corpus, source, rec.line, rec.fields[*id_col], rec.fields[*text_col], std::move(date));
  }
  return corpus;
}

void write_jsonl(const Corpus& corpus, std::ostream& out) {
  for (const auto& note : corpus) {
    json record = {{"id", note.id()}, {"text", note.text()}};
    if (note.date()) record["date"] = *note.date();
    out << record.dump() << '\n';
  }
}

PreprocessResult preprocess(const Corpus& corpus, const SimilarityProvider& sim,
                            const PreprocessOptions& options) {
  if (!(options.threshold >= 0.0 && options.threshold <= 1.0)) {
    throw std::invalid_argument("preprocess: threshold must be in [0, 1]");
  }

  PreprocessResult result;
  std::vector<const ClinicalNote*> candidates;
  for (const auto& note : corpus) {
    if (note.word_count() < options.min_words) {
      result.dropped.push_back({note.id(), DroppedNote::Reason::TooShort, {}, 0.0});
    } else {
      candidates.push_back(&note);
    }
  }
  if (candidates.size() > options.warn_above) {
    result.warnings.push_back("preprocess: " + std::to_string(candidates.size()) +
                              " notes; exact pairwise comparison is quadratic and may be slow");
  }

  std::vector<std::string_view> texts;
  texts.reserve(candidates.size());
  for (const auto* note : candidates) texts.push_back(note->text());
  const auto vectors = embed_all(sim, texts, options.threads);

  // Which member of a too-similar pair to drop.
  auto loses = [](const ClinicalNote& a, const ClinicalNote& b) {
    if (a.word_count() != b.word_count()) return a.word_count() < b.word_count();
    return a.id() > b.id();
  };

  std::vector<bool> alive(candidates.size(), true);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!alive[i]) continue;
    for (std::size_t j = i + 1; j < candidates.size() && alive[i]; ++j) {
      if (!alive[j]) continue;
      // All-punctuation notes have no trigrams and are never near-duplicates.
      if (vectors[i].is_zero() || vectors[j].is_zero()) continue;
      const double s = cosine(vectors[i], vectors[j]);
      if (s <= options.threshold) continue;
      const ClinicalNote& a = *candidates[i];
      const ClinicalNote& b = *candidates[j];
      if (loses(a, b)) {
        alive[i] = false;
        result.dropped.push_back({a.id(), DroppedNote::Reason::NearDuplicate, b.id(), s});
      } else {
        alive[j] = false;
        result.dropped.push_back({b.id(), DroppedNote::Reason::NearDuplicate, a.id(), s});
      }
    }
  }
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (alive[i]) result.corpus.add(*candidates[i]);
  }
  return result;
}

}  // namespace clinkg
